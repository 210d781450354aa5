// swnc command-line front end.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "swnc/report.hpp"

namespace fs = std::filesystem;
using namespace swnc;

namespace {

constexpr int exit_runtime = 1;
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string manifest_path_for(const fs::path& out) { return out.string() + ".manifest.json"; }

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out_dir{"swnc-out"};
  unsigned threads{0};
};

int cmd_simulate(const SimulateArgs& a) {
  RunConfig rc;
  try {
    rc = load_run_config(a.config);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  if (a.threads > 0) rc.threads = a.threads;

  auto rows = sweep(rc.expand(), rc.threads);
  std::size_t ok = 0;
  std::set<std::uint64_t> seeds;
  for (const auto& r : rows) {
    const auto name = std::string(to_string(r.config.scheme));
    if (!r.datapoint) {
      std::cerr << "warning: " << name << ": " << r.error << "\n";
      continue;
    }
    ++ok;
    if (r.datapoint->incomplete > 0)
      std::cerr << "warning: " << name << ": " << r.datapoint->incomplete
                << " experience(s) ran out of channel slots and were excluded\n";
    for (const auto& e : r.datapoint->experiences) seeds.insert(e.seed);
  }
  if (ok == 0) throw std::runtime_error("every configuration failed; no report written");

  const fs::path dir{a.out_dir};
  const std::string summary = "summary.csv", experiences = "experiences.json", manifest = "manifest.json";

  std::vector<std::pair<std::string, std::uint32_t>> inputs;
  inputs.emplace_back(a.config, crc32_of_bytes(read_file(a.config)));
  if (rc.base.channel.kind == ChannelSpec::Kind::Trace)
    inputs.emplace_back(rc.base.channel.trace_path, crc32_of_bytes(read_file(rc.base.channel.trace_path)));

  Json cfg = config_json(rc.base);
  Json schemes = Json::array();
  for (auto s : rc.schemes) schemes.push_back(std::string(to_string(s)));
  cfg["schemes"] = schemes;
  Json errors = Json::array();
  for (const auto& r : rows)
    if (!r.datapoint) errors.push_back({{"algorithm", std::string(to_string(r.config.scheme))}, {"error", r.error}});

  auto m = make_manifest("simulate", cfg, {seeds.begin(), seeds.end()}, inputs, {summary, experiences});
  m["errors"] = errors;

  write_files_atomically({
      {dir / summary, render_summary_csv(report_rows(rows), manifest)},
      {dir / experiences, experiences_json(rows).dump(1) + "\n"},
      {dir / manifest, m.dump(1) + "\n"},
  });
  std::cout << "wrote " << (dir / summary).string() << ", " << (dir / experiences).string() << ", "
            << (dir / manifest).string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct GenTraceArgs {
  GeParams ge;
  std::size_t slots{100000};
  std::uint64_t seed{1};
  std::uint32_t rtt_us{16 * default_slot_us};
  std::uint32_t slot_us{default_slot_us};
  std::string label{"GE"};
  std::string out;
};

int cmd_gen_trace(const GenTraceArgs& a) {
  ChannelProfile prof;
  try {
    ge_stationary(a.ge);
    prof = ge_generate(a.ge, a.slots, a.rtt_us, a.seed, a.slot_us, a.label);
  } catch (const std::logic_error& e) {
    throw UsageError(e.what());
  }
  std::ostringstream os;
  try {
    write_trace(os, prof);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  Json cfg{{"s", a.ge.s},       {"q", a.ge.q},         {"eps_g", a.ge.eps_g},     {"eps_b", a.ge.eps_b},
           {"slots", a.slots},  {"rtt_us", a.rtt_us},  {"slot_us", a.slot_us},    {"label", a.label}};
  const fs::path out{a.out};
  auto m = make_manifest("gen-trace", cfg, {a.seed}, {}, {out.filename().string()});
  m["trace_crc32"] = hex32(crc32_of_bytes(os.str()));
  write_files_atomically({{out, os.str()}, {manifest_path_for(out), m.dump(1) + "\n"}});
  std::cout << "wrote " << out.string() << " (" << prof.size() << " slots, loss " << prof.loss_fraction() << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string trace;
  std::string out;
};

int cmd_fit(const FitArgs& a) {
  const std::string bytes = read_file(a.trace);
  std::istringstream is(bytes);
  ChannelProfile prof;
  try {
    prof = read_trace(is);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  GeFit fit;
  try {
    fit = fit_ge(prof);
  } catch (const FitError& e) {
    throw UsageError(e.what());
  }
  auto st = ge_stationary(fit.params);
  Json j{{"s", fit.params.s},       {"q", fit.params.q},           {"eps_g", fit.params.eps_g},
         {"eps_b", fit.params.eps_b}, {"eps_mean", fit.eps_mean},  {"pi_g", st.pi_g},
         {"mean_burst", fit.mean_burst}, {"bursts", fit.bursts},   {"slots", prof.size()}};
  const std::string body = j.dump(1) + "\n";
  std::cout << body;
  if (!a.out.empty()) {
    const fs::path out{a.out};
    auto m = make_manifest("fit", Json{{"trace", a.trace}}, {}, {{a.trace, crc32_of_bytes(bytes)}},
                           {out.filename().string()});
    write_files_atomically({{out, body}, {manifest_path_for(out), m.dump(1) + "\n"}});
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct BoundsArgs {
  double s{0.17};
  double rtt{16};
  std::vector<double> alphas{0, 1, 2, 3};
  double eps_lo{0.0};
  double eps_hi{0.4};
  std::size_t points{41};
  double th{0.0};
  double d{0.0};
  std::uint32_t slot_us{default_slot_us};
  std::string out;
};

int cmd_bounds(const BoundsArgs& a) {
  if (!(a.s > 0.0 && a.s < 1.0)) throw UsageError("--s must lie in (0, 1)");
  if (a.alphas.empty()) throw UsageError("--alpha needs at least one value");
  if (a.points < 2) throw UsageError("--points must be at least 2");
  if (!(a.eps_lo >= 0.0 && a.eps_hi <= 1.0 && a.eps_lo < a.eps_hi)) throw UsageError("need 0 <= eps-min < eps-max <= 1");
  if (a.rtt <= 0) throw UsageError("--rtt must be positive");
  for (double al : a.alphas)
    if (al < 0) throw UsageError("alpha values must be non-negative");

  const fs::path out{a.out};
  const std::string manifest = manifest_path_for(out);
  const double ms = a.slot_us / 1000.0;
  std::ostringstream os;
  os << "# manifest=" << fs::path(manifest).filename().string() << "\n";
  os << "series,alpha,x,value,value_ms,feasible\n";
  auto row = [&](const std::string& series, double alpha, double eps) {
    DelayBound b;
    try {
      b = ge_delay_bound(eps, a.s, a.rtt, alpha, a.th, a.d);
    } catch (const std::domain_error& e) {
      throw UsageError(e.what());
    }
    os << series << ',' << fmt_num(alpha) << ',' << fmt_num(eps) << ',';
    if (b.feasible)
      os << fmt_num(b.slots) << ',' << fmt_num(b.slots * ms) << ",1\n";
    else
      os << "inf,inf,0\n";
    return b;
  };
  for (double alpha : a.alphas) {
    std::ostringstream name;
    name << "alpha=" << alpha;
    for (std::size_t i = 0; i < a.points; ++i)
      row(name.str(), alpha, a.eps_lo + (a.eps_hi - a.eps_lo) * static_cast<double>(i) / static_cast<double>(a.points - 1));
  }
  auto anchor = row("anchor", 3.0, 0.3);

  Json cfg{{"s", a.s},   {"rtt_slots", a.rtt}, {"alpha", a.alphas}, {"eps_min", a.eps_lo}, {"eps_max", a.eps_hi},
           {"points", a.points}, {"th", a.th}, {"d", a.d}, {"slot_us", a.slot_us}};
  auto m = make_manifest("bounds", cfg, {}, {}, {out.filename().string()});
  write_files_atomically({{out, os.str()}, {manifest, m.dump(1) + "\n"}});
  std::cout << "anchor alpha=3 eps=0.3: ";
  if (anchor.feasible)
    std::cout << fmt_num(anchor.slots) << " slots (" << fmt_num(anchor.slots * ms) << " ms)\n";
  else
    std::cout << "infeasible\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  std::string dir;
  std::string cdf;
};

int cmd_report(const ReportArgs& a) {
  const fs::path dir{a.dir};
  std::istringstream summary(read_file(dir / "summary.csv"));
  std::string manifest_name;
  auto rows = parse_summary_csv(summary, &manifest_name);
  if (manifest_name.empty()) throw std::runtime_error("summary.csv does not reference a manifest");
  auto manifest = Json::parse(read_file(dir / manifest_name));
  const double slot_us = manifest.at("config").at("channel").at("slot_us").get<double>();
  std::cout << render_report_text(rows, slot_us);
  std::cout << "target: " << latency_target_slots(slot_us) << " slots (10 ms); LLC on mean delay, URLLC on P99 of max delay\n";

  if (!a.cdf.empty()) {
    const std::string exp_bytes = read_file(dir / "experiences.json");
    auto exps = Json::parse(exp_bytes);
    std::vector<std::pair<std::string, std::vector<double>>> series;
    for (const auto& entry : exps) {
      if (!entry.contains("experiences")) continue;
      std::vector<double> xs;
      for (const auto& e : entry["experiences"]) xs.push_back(e["mean_inorder_delay_slots"].get<double>());
      series.emplace_back(entry["mode"].get<std::string>() + "/" + entry["algorithm"].get<std::string>(), xs);
    }
    const fs::path out{a.cdf};
    const std::string mname = manifest_path_for(out);
    std::string body = "# manifest=" + fs::path(mname).filename().string() + "\n" + render_cdf_csv(series);
    auto m = make_manifest("report", Json{{"dir", a.dir}}, {}, {{(dir / "experiences.json").string(), crc32_of_bytes(exp_bytes)}},
                           {out.filename().string()});
    write_files_atomically({{out, body}, {mname, m.dump(1) + "\n"}});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sliding-window network coding simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tool_version));

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Run every configured scheme and write summary, experiences and manifest");
  c_sim->add_option("config", sim.config, "INI configuration file")->required();
  c_sim->add_option("-o,--out", sim.out_dir, "Output directory");
  c_sim->add_option("-j,--threads", sim.threads, "Worker threads (overrides the config)");

  GenTraceArgs gen;
  auto* c_gen = app.add_subcommand("gen-trace", "Generate a Gilbert-Elliott channel trace");
  c_gen->add_option("--s", gen.ge.s, "Probability that a burst ends")->required();
  c_gen->add_option("--q", gen.ge.q, "Probability that a burst starts")->required();
  c_gen->add_option("--eps-g", gen.ge.eps_g, "Erasure probability in the good state");
  c_gen->add_option("--eps-b", gen.ge.eps_b, "Erasure probability in the bad state");
  c_gen->add_option("--slots", gen.slots, "Number of slots")->check(CLI::PositiveNumber);
  c_gen->add_option("--seed", gen.seed, "RNG seed");
  c_gen->add_option("--rtt-us", gen.rtt_us, "Constant RTT in microseconds")->check(CLI::PositiveNumber);
  c_gen->add_option("--slot-us", gen.slot_us, "Slot duration in microseconds")->check(CLI::PositiveNumber);
  c_gen->add_option("--label", gen.label, "Profile label");
  c_gen->add_option("-o,--out", gen.out, "Output trace path")->required();

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "Fit GE parameters to a trace");
  c_fit->add_option("trace", fit.trace, "Trace CSV")->required();
  c_fit->add_option("-o,--out", fit.out, "Also write the JSON here");

  BoundsArgs bnd;
  auto* c_bnd = app.add_subcommand("bounds", "Delay upper-bound curves over a grid of mean erasure rates");
  c_bnd->add_option("--s", bnd.s, "GE burst-end probability");
  c_bnd->add_option("--rtt", bnd.rtt, "RTT in slots");
  c_bnd->add_option("--alpha", bnd.alphas, "Confidence factors")->delimiter(',');
  c_bnd->add_option("--eps-min", bnd.eps_lo, "Grid start");
  c_bnd->add_option("--eps-max", bnd.eps_hi, "Grid end");
  c_bnd->add_option("--points", bnd.points, "Grid points per curve");
  c_bnd->add_option("--th", bnd.th, "Decision threshold");
  c_bnd->add_option("--d", bnd.d, "DoF ratio");
  c_bnd->add_option("--slot-us", bnd.slot_us, "Slot duration for the ms column")->check(CLI::PositiveNumber);
  c_bnd->add_option("-o,--out", bnd.out, "Output CSV")->required();

  ReportArgs rep;
  auto* c_rep = app.add_subcommand("report", "Print a simulate run with slot and ms units and service classes");
  c_rep->add_option("dir", rep.dir, "Directory written by simulate")->required();
  c_rep->add_option("--cdf", rep.cdf, "Write empirical and Gumbel CDFs of mean delay to this CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : exit_usage;
  }

  try {
    if (*c_sim) return cmd_simulate(sim);
    if (*c_gen) return cmd_gen_trace(gen);
    if (*c_fit) return cmd_fit(fit);
    if (*c_bnd) return cmd_bounds(bnd);
    if (*c_rep) return cmd_report(rep);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_runtime;
  }
  return exit_usage;
}
