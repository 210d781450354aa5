#pragma once

#include <boost/crc.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "swnc/config.hpp"

namespace swnc {

using Json = nlohmann::ordered_json;

struct ReportRow {
  std::string mode;
  std::string algorithm;
  std::string metric;
  double mean{0.0};
  double stdev{0.0};
  double p99{0.0};
};

inline constexpr const char* metric_throughput = "throughput";
inline constexpr const char* metric_mean_delay = "mean_delay_slots";
inline constexpr const char* metric_max_delay = "max_delay_slots";

/// Fixed six-decimal rendering so reports are byte-stable.
inline std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::vector<ReportRow> report_rows(const std::vector<SweepRow>& sweep_rows) {
  std::vector<ReportRow> out;
  for (const auto& r : sweep_rows) {
    if (!r.datapoint) continue;
    std::string mode = r.config.channel.label;
    std::string alg{to_string(r.config.scheme)};
    auto push = [&](const char* metric, const SummaryStats& s) {
      for (double v : {s.mean, s.stdev, s.p99})
        if (!std::isfinite(v) || v < 0.0) throw std::logic_error("report value must be finite and non-negative");
      out.push_back({mode, alg, metric, s.mean, s.stdev, s.p99});
    };
    push(metric_throughput, r.throughput);
    push(metric_mean_delay, r.mean_delay);
    push(metric_max_delay, r.max_delay);
  }
  return out;
}

inline std::string render_summary_csv(const std::vector<ReportRow>& rows, const std::string& manifest_name) {
  std::ostringstream os;
  os << "# manifest=" << manifest_name << "\n";
  os << "mode,algorithm,metric,mean,stdev,p99\n";
  for (const auto& r : rows)
    os << r.mode << ',' << r.algorithm << ',' << r.metric << ',' << fmt_num(r.mean) << ',' << fmt_num(r.stdev) << ','
       << fmt_num(r.p99) << '\n';
  return os.str();
}

/// Inverse of render_summary_csv. Returns the manifest name via `manifest`.
inline std::vector<ReportRow> parse_summary_csv(std::istream& in, std::string* manifest = nullptr) {
  std::vector<ReportRow> rows;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.rfind("# manifest=", 0) == 0) {
      if (manifest) *manifest = line.substr(11);
      continue;
    }
    if (line.front() == '#') continue;
    if (!header) {
      if (line != "mode,algorithm,metric,mean,stdev,p99")
        throw std::runtime_error("summary line " + std::to_string(lineno) + ": unexpected header");
      header = true;
      continue;
    }
    std::istringstream ss(line);
    ReportRow r;
    std::string f[6];
    for (int i = 0; i < 6; ++i)
      if (!std::getline(ss, f[i], ',')) throw std::runtime_error("summary line " + std::to_string(lineno) + ": expected 6 fields");
    r.mode = f[0];
    r.algorithm = f[1];
    r.metric = f[2];
    try {
      r.mean = std::stod(f[3]);
      r.stdev = std::stod(f[4]);
      r.p99 = std::stod(f[5]);
    } catch (const std::exception&) {
      throw std::runtime_error("summary line " + std::to_string(lineno) + ": non-numeric statistic");
    }
    rows.push_back(std::move(r));
  }
  if (!header) throw std::runtime_error("summary: missing header");
  return rows;
}

// ---------------------------------------------------------------------------
// JSON artifacts
// ---------------------------------------------------------------------------

inline Json config_json(const SimConfig& c) {
  Json ch;
  ch["kind"] = c.channel.kind == ChannelSpec::Kind::Ge ? "ge" : "trace";
  ch["label"] = c.channel.label;
  ch["slot_us"] = c.channel.slot_us;
  ch["feedback_loss"] = c.channel.feedback_loss;
  if (c.channel.kind == ChannelSpec::Kind::Ge) {
    ch["s"] = c.channel.ge.s;
    ch["q"] = c.channel.ge.q;
    ch["eps_g"] = c.channel.ge.eps_g;
    ch["eps_b"] = c.channel.ge.eps_b;
    ch["rtt_slots"] = c.channel.rtt_slots;
    ch["horizon_slots"] = c.channel.horizon_slots;
  } else {
    ch["trace"] = c.channel.trace_path;
  }
  Json j;
  j["n_packets"] = c.n_packets;
  j["packet_bytes"] = c.packet_bytes;
  j["seed"] = c.seed;
  j["experiences"] = c.experiences;
  j["timeout_slots"] = c.timeout_slots;
  j["channel"] = ch;
  j["arq"] = {{"mode", c.arq.mode == ArqMode::GoBackN ? "gbn" : "selective"}};
  j["rrlnc"] = {{"batch", c.rrlnc.batch}, {"round", c.rrlnc.round}};
  j["fsw"] = {{"k", c.fsw.k}};
  j["asw"] = {{"th", c.asw.th},
              {"alpha", c.asw.alpha},
              {"max_window", c.asw.max_window},
              {"apriori_period", c.asw.apriori_period}};
  return j;
}

inline Json experiences_json(const std::vector<SweepRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    Json entry;
    entry["mode"] = r.config.channel.label;
    entry["algorithm"] = std::string(to_string(r.config.scheme));
    if (!r.datapoint) {
      entry["error"] = r.error;
      out.push_back(std::move(entry));
      continue;
    }
    const double ms_per_slot = r.config.channel.slot_us / 1000.0;
    entry["incomplete"] = r.datapoint->incomplete;
    Json list = Json::array();
    for (const auto& e : r.datapoint->experiences) {
      Json x;
      x["seed"] = e.seed;
      x["offset"] = e.offset;
      x["normalized_throughput"] = e.normalized_throughput;
      x["mean_inorder_delay_slots"] = e.mean_inorder_delay_slots;
      x["max_inorder_delay_slots"] = e.max_inorder_delay_slots;
      x["mean_inorder_delay_ms"] = e.mean_inorder_delay_slots * ms_per_slot;
      x["max_inorder_delay_ms"] = e.max_inorder_delay_slots * ms_per_slot;
      x["slots_consumed"] = e.slots_consumed;
      x["transmissions"] = e.transmissions;
      Json kinds;
      for (const auto& [k, n] : e.kind_counts) kinds[std::string(to_string(k))] = n;
      x["kinds"] = kinds;
      x["per_packet_delays"] = e.per_packet_delays;
      list.push_back(std::move(x));
    }
    entry["experiences"] = std::move(list);
    out.push_back(std::move(entry));
  }
  return out;
}

inline std::uint32_t crc32_of_bytes(const std::string& bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + p.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

/// Manifest for a set of outputs. `inputs` maps input file paths to their
/// contents' checksum; no timestamps so re-runs are byte-identical.
inline Json make_manifest(const std::string& command, const Json& config, const std::vector<std::uint64_t>& seeds,
                          const std::vector<std::pair<std::string, std::uint32_t>>& inputs,
                          const std::vector<std::string>& outputs) {
  Json m;
  m["tool"] = "swnc";
  m["version"] = tool_version;
  m["command"] = command;
  m["config"] = config;
  m["seeds"] = seeds;
  Json in = Json::array();
  for (const auto& [path, crc] : inputs) in.push_back({{"path", path}, {"crc32", hex32(crc)}});
  m["inputs"] = in;
  m["outputs"] = outputs;
  return m;
}

// ---------------------------------------------------------------------------
// Text report and CDF export
// ---------------------------------------------------------------------------

inline std::string render_report_text(const std::vector<ReportRow>& rows, double slot_us) {
  const double ms = slot_us / 1000.0;
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %-10s %-18s %10s %10s %10s %9s %9s %9s  %s\n", "mode", "algorithm", "metric",
                "mean", "stdev", "p99", "mean_ms", "stdev_ms", "p99_ms", "class");
  os << buf;
  for (const auto& r : rows) {
    bool delay = r.metric != metric_throughput;
    std::string cls;
    if (r.metric == metric_mean_delay) {
      cls = r.mean <= latency_target_slots(slot_us) ? "LLC" : "-";
    } else if (r.metric == metric_max_delay) {
      cls = r.p99 <= latency_target_slots(slot_us) ? "URLLC" : "-";
    }
    if (delay)
      std::snprintf(buf, sizeof buf, "%-10s %-10s %-18s %10.3f %10.3f %10.3f %9.3f %9.3f %9.3f  %s\n", r.mode.c_str(),
                    r.algorithm.c_str(), r.metric.c_str(), r.mean, r.stdev, r.p99, r.mean * ms, r.stdev * ms,
                    r.p99 * ms, cls.c_str());
    else
      std::snprintf(buf, sizeof buf, "%-10s %-10s %-18s %10.4f %10.4f %10.4f %9s %9s %9s\n", r.mode.c_str(),
                    r.algorithm.c_str(), r.metric.c_str(), r.mean, r.stdev, r.p99, "", "", "");
    os << buf;
  }
  return os.str();
}

/// Empirical CDF of per-experience mean delays for one series, with the
/// moment-matched Gumbel overlay evaluated at the same points.
inline std::string render_cdf_csv(const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  std::ostringstream os;
  os << "series,x,value\n";
  for (const auto& [name, xs] : series) {
    if (xs.empty()) continue;
    EmpiricalDistribution dist(xs);
    std::vector<double> pts = dist.sorted();
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    for (double x : pts) os << name << ":empirical," << fmt_num(x) << ',' << fmt_num(dist.cdf(x)) << '\n';
    if (dist.size() >= 2) {
      auto g = gumbel_overlay(dist);
      for (double x : pts) os << name << ":gumbel," << fmt_num(x) << ',' << fmt_num(g(x)) << '\n';
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// All-or-nothing output
// ---------------------------------------------------------------------------

/// Writes every file to a temporary sibling first and renames only once all
/// writes succeeded, so a failure leaves no partial outputs behind.
inline void write_files_atomically(const std::vector<std::pair<std::filesystem::path, std::string>>& files) {
  namespace fs = std::filesystem;
  std::vector<fs::path> temps;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& t : temps) fs::remove(t, ec);
  };
  try {
    for (const auto& [path, body] : files) {
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      fs::path tmp = path;
      tmp += ".tmp";
      temps.push_back(tmp);
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << body;
      out.close();
      if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    for (const auto& f : files)
      if (fs::is_directory(f.first)) throw std::runtime_error("output path '" + f.first.string() + "' is a directory");
  } catch (...) {
    cleanup();
    throw;
  }
  std::size_t placed = 0;
  try {
    for (; placed < files.size(); ++placed) fs::rename(temps[placed], files[placed].first);
  } catch (...) {
    std::error_code ec;
    for (std::size_t i = 0; i < placed; ++i) fs::remove(files[i].first, ec);
    cleanup();
    throw;
  }
}

}  // namespace swnc
