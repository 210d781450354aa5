#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "swnc/engine.hpp"

namespace swnc {

inline constexpr const char* tool_version = "0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything a `simulate` run needs: a base configuration and the schemes
/// to sweep over it.
struct RunConfig {
  SimConfig base;
  std::vector<Scheme> schemes{Scheme::Arq, Scheme::Rrlnc, Scheme::Fsw, Scheme::Asw};
  unsigned threads{1};

  std::vector<SimConfig> expand() const {
    std::vector<SimConfig> out;
    for (auto s : schemes) {
      SimConfig c = base;
      c.scheme = s;
      out.push_back(c);
    }
    return out;
  }
};

namespace detail {

namespace pt = boost::property_tree;

template <class T>
T get_or(const pt::ptree& tree, const std::string& key, T fallback) {
  auto node = tree.get_optional<std::string>(key);
  if (!node) return fallback;
  try {
    return tree.get<T>(key);
  } catch (const pt::ptree_bad_data&) {
    throw ConfigError("config key '" + key + "' has invalid value '" + *node + "'");
  }
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline void reject_unknown(const pt::ptree& tree) {
  static const std::map<std::string, std::vector<std::string>> known{
      {"run", {"n_packets", "packet_bytes", "seed", "experiences", "schemes", "timeout_slots", "threads"}},
      {"channel", {"kind", "label", "s", "q", "eps_g", "eps_b", "rtt_slots", "horizon_slots", "slot_us", "trace",
                   "feedback_loss"}},
      {"arq", {"mode"}},
      {"rrlnc", {"batch", "round"}},
      {"fsw", {"k"}},
      {"asw", {"th", "alpha", "max_window", "apriori_period"}},
  };
  for (const auto& [section, body] : tree) {
    auto it = known.find(section);
    if (it == known.end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, _] : body)
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
        throw ConfigError("unknown key '" + key + "' in [" + section + "]");
  }
}

}  // namespace detail

/// Parses an INI document. Relative trace paths resolve against `base_dir`.
inline RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  detail::reject_unknown(tree);

  RunConfig rc;
  SimConfig& c = rc.base;
  using detail::get_or;

  auto get_count = [&](const std::string& key, std::size_t fallback) {
    auto v = get_or<long long>(tree, key, static_cast<long long>(fallback));
    if (v < 0) throw ConfigError("config key '" + key + "' must be non-negative");
    return static_cast<std::size_t>(v);
  };

  c.n_packets = get_count("run.n_packets", c.n_packets);
  c.packet_bytes = get_count("run.packet_bytes", c.packet_bytes);
  c.seed = get_or<std::uint64_t>(tree, "run.seed", c.seed);
  c.experiences = get_count("run.experiences", c.experiences);
  c.timeout_slots = static_cast<std::int64_t>(get_count("run.timeout_slots", 0));
  rc.threads = static_cast<unsigned>(std::max<std::size_t>(1, get_count("run.threads", 1)));
  if (auto list = tree.get_optional<std::string>("run.schemes")) {
    rc.schemes.clear();
    for (const auto& name : detail::split_list(*list)) {
      try {
        rc.schemes.push_back(parse_scheme(name));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    if (rc.schemes.empty()) throw ConfigError("run.schemes lists no scheme");
  }

  auto& ch = c.channel;
  auto kind = get_or<std::string>(tree, "channel.kind", "ge");
  ch.label = get_or<std::string>(tree, "channel.label", kind == "trace" ? "trace" : "GE");
  ch.slot_us = static_cast<std::uint32_t>(get_count("channel.slot_us", ch.slot_us));
  ch.feedback_loss = get_or<double>(tree, "channel.feedback_loss", 0.0);
  if (kind == "ge") {
    ch.kind = ChannelSpec::Kind::Ge;
    ch.ge.s = get_or<double>(tree, "channel.s", ch.ge.s);
    ch.ge.q = get_or<double>(tree, "channel.q", ch.ge.q);
    ch.ge.eps_g = get_or<double>(tree, "channel.eps_g", ch.ge.eps_g);
    ch.ge.eps_b = get_or<double>(tree, "channel.eps_b", ch.ge.eps_b);
    ch.rtt_slots = static_cast<std::int64_t>(get_count("channel.rtt_slots", 16));
    ch.horizon_slots = get_count("channel.horizon_slots", ch.horizon_slots);
    if (ch.slot_us == 0) throw ConfigError("channel.slot_us must be positive");
  } else if (kind == "trace") {
    ch.kind = ChannelSpec::Kind::Trace;
    auto path = tree.get_optional<std::string>("channel.trace");
    if (!path || path->empty()) throw ConfigError("trace channel needs channel.trace");
    std::filesystem::path p{*path};
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    ch.trace_path = p.string();
    try {
      ch.trace = std::make_shared<const ChannelProfile>(load_trace(ch.trace_path));
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    ch.slot_us = ch.trace->slot_duration_us;
    if (!tree.get_optional<std::string>("channel.label") && !ch.trace->label.empty()) ch.label = ch.trace->label;
  } else {
    throw ConfigError("channel.kind must be 'ge' or 'trace'");
  }

  auto mode = get_or<std::string>(tree, "arq.mode", "gbn");
  if (mode == "gbn")
    c.arq.mode = ArqMode::GoBackN;
  else if (mode == "selective")
    c.arq.mode = ArqMode::Selective;
  else
    throw ConfigError("arq.mode must be 'gbn' or 'selective'");

  c.rrlnc.batch = get_count("rrlnc.batch", c.rrlnc.batch);
  c.rrlnc.round = get_count("rrlnc.round", c.rrlnc.round);
  c.fsw.k = get_count("fsw.k", c.fsw.k);
  c.asw.th = get_or<double>(tree, "asw.th", c.asw.th);
  c.asw.alpha = get_or<double>(tree, "asw.alpha", c.asw.alpha);
  c.asw.max_window = get_count("asw.max_window", c.asw.max_window);
  c.asw.apriori_period = get_count("asw.apriori_period", c.asw.apriori_period);

  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.rrlnc.batch == 0) throw ConfigError("rrlnc.batch must be positive");
  if (c.rrlnc.round != 0 && c.rrlnc.round < c.rrlnc.batch) throw ConfigError("rrlnc.round must be at least rrlnc.batch");
  if (c.asw.alpha < 0.0) throw ConfigError("asw.alpha must be non-negative");
  return rc;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse_run_config(in, path.parent_path());
}

}  // namespace swnc
