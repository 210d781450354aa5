// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "json.hpp"
#include "oracle.hpp"
#include "swnc/report.hpp"

using namespace swnc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass{false};
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

int run_cli(const std::string& args, const fs::path& stdout_file = {}) {
  std::string cmd = std::string(SWNC_CLI_PATH) + " " + args;
  cmd += stdout_file.empty() ? " > /dev/null" : " > '" + stdout_file.string() + "'";
  cmd += " 2> /dev/null";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("swnc_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

SimConfig ge_config(Scheme scheme, double s, double q, std::size_t experiences, std::uint64_t seed = 1) {
  SimConfig c;
  c.scheme = scheme;
  c.n_packets = 100;
  c.packet_bytes = 1000;
  c.channel.ge = GeParams{s, q, 0.0, 1.0};
  c.channel.rtt_slots = 16;
  c.experiences = experiences;
  c.seed = seed;
  return c;
}

double median(std::vector<double> xs) { return percentile_nearest_rank(std::move(xs), 50.0); }

// ---------------------------------------------------------------------------

Outcome criterion_1() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::size_t sequences = 0, mismatches = 0;
  for (std::size_t w = 1; w <= 6; ++w) {
    for (int trial = 0; trial < 1000; ++trial, ++sequences) {
      std::vector<std::vector<std::uint8_t>> src(w, std::vector<std::uint8_t>(8));
      for (auto& s : src)
        for (auto& b : s) b = static_cast<std::uint8_t>(rng());
      EliminationState st;
      std::vector<std::vector<std::uint8_t>> rows, pays;
      const std::size_t n_rows = w + 2;
      for (std::size_t k = 0; k < n_rows; ++k) {
        std::size_t lo = rng() % w;
        std::size_t hi = lo + rng() % (w - lo);
        std::vector<std::uint8_t> row(w, 0);
        bool any = false;
        for (std::size_t c = lo; c <= hi; ++c) {
          // Mix of zeros, small values and full-range values to provoke dependence.
          auto r = rng() % 10;
          row[c] = r < 3 ? 0 : (r < 6 ? static_cast<std::uint8_t>(1 + rng() % 3) : static_cast<std::uint8_t>(rng()));
          any = any || row[c] != 0;
        }
        if (!any) row[lo] = 1;
        CoeffVector v{lo + 1, {}};
        for (std::size_t c = lo; c <= hi; ++c) v.elems.push_back(Gf256{row[c]});
        std::vector<std::uint8_t> p(8, 0);
        for (std::size_t c = 0; c < w; ++c)
          for (std::size_t b = 0; b < 8; ++b) p[b] ^= oracle::mul(row[c], src[c][b]);
        st.insert(v, p);
        rows.push_back(row);
        pays.push_back(p);
        auto ref = oracle::reduce(rows, pays, w);
        bool ok = st.rank() == ref.rank;
        for (std::size_t i = 0; i < w && ok; ++i) {
          const Bytes* got = st.decoded_payload(i + 1);
          ok = (got != nullptr) == ref.decoded[i].has_value() && (!got || (*got == *ref.decoded[i] && *got == src[i]));
        }
        if (!ok) ++mismatches;
      }
    }
  }
  double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0, std::to_string(sequences) + " sequences, windows 1..6, " +
                                              std::to_string(mismatches) + " mismatches, " + num(secs, 2) + " s"};
}

Outcome criterion_2() {
  auto t0 = Clock::now();
  auto dir = scratch("c2");
  auto trace = dir / "ge.csv";
  if (run_cli("gen-trace --s 0.17 --q 0.019 --slots 100000 --seed 1 -o " + trace.string()) != 0)
    return {false, "gen-trace failed"};
  if (run_cli("fit " + trace.string(), dir / "fit.json") != 0) return {false, "fit failed"};
  auto fit = nlohmann::json::parse(read_file(dir / "fit.json"));
  double s = fit["s"].get<double>(), eps = fit["eps_mean"].get<double>();
  double secs = seconds_since(t0);
  fs::remove_all(dir);
  bool ok = std::abs(s - 0.17) <= 0.02 && std::abs(eps - 0.1) <= 0.01 && secs < 5.0;
  return {ok, "fitted s=" + num(s) + " eps_mean=" + num(eps) + ", " + num(secs, 2) + " s"};
}

Outcome criterion_3() {
  auto st = ge_stationary(GeParams{0.17, 0.019, 0, 1});
  // Exact: pi_G = 170 / 189; check 0.895 <= 170/189 <= 0.903 by cross-multiplication.
  const long num_ = 170, den = 189;
  bool exact = num_ * 1000 >= 895 * den && num_ * 1000 <= 903 * den;
  bool ok = exact && st.pi_g >= 0.895 && st.pi_g <= 0.903;
  return {ok, "pi_G=" + num(st.pi_g, 6) + " (170/189)"};
}

Outcome criterion_4() {
  double v = ge_scaling(0.17);
  return {std::abs(v - 5.8823) <= 1e-3, "ge_scaling(0.17)=" + num(v, 6)};
}

Outcome criterion_5() {
  auto anchor = ge_delay_bound(0.3, 0.17, 16, 3);
  bool monotone = true;
  const int grid = 50;
  for (int i = 0; i < grid; ++i) {
    double eps = 0.4 * i / (grid - 1);
    double prev = -1;
    for (int k = 0; k < grid; ++k) {
      double alpha = 3.0 * k / (grid - 1);
      auto b = ge_delay_bound(eps, 0.17, 16, alpha);
      if (!b.feasible) break;
      monotone = monotone && b.slots >= prev;
      prev = b.slots;
    }
  }
  for (int k = 0; k < grid; ++k) {
    double alpha = 3.0 * k / (grid - 1);
    double prev = -1;
    for (int i = 0; i < grid; ++i) {
      auto b = ge_delay_bound(0.4 * i / (grid - 1), 0.17, 16, alpha);
      if (!b.feasible) break;
      monotone = monotone && b.slots >= prev;
      prev = b.slots;
    }
  }
  bool ok = anchor.feasible && anchor.slots >= 60 && anchor.slots <= 90 && monotone;
  return {ok, "bound(alpha=3, eps=0.3)=" + num(anchor.slots, 2) + " slots, monotone=" + (monotone ? "yes" : "no")};
}

Outcome criterion_6() {
  auto t0 = Clock::now();
  std::vector<SimConfig> configs;
  for (auto s : {Scheme::Asw, Scheme::Fsw, Scheme::Rrlnc, Scheme::Arq}) configs.push_back(ge_config(s, 0.17, 0.019, 30));
  auto rows = sweep(configs, 4);
  std::vector<double> med(4), p99(4);
  for (std::size_t i = 0; i < 4; ++i) {
    if (!rows[i].datapoint || rows[i].datapoint->experiences.size() != 30) return {false, "incomplete experiences"};
    std::vector<double> md;
    for (const auto& e : rows[i].datapoint->experiences) md.push_back(e.mean_inorder_delay_slots);
    med[i] = median(md);
    p99[i] = percentile_nearest_rank(md, 99);
  }
  double secs = seconds_since(t0);
  bool order = med[0] < med[1] && med[1] < med[2] && med[2] < med[3];
  double ratio = p99[2] / p99[0];
  bool ok = order && ratio >= 3.0 && secs < 120.0;
  std::string d = "median mean delay A-SW=" + num(med[0], 2) + " F-SW=" + num(med[1], 2) + " R-RLNC=" + num(med[2], 2) +
                  " ARQ=" + num(med[3], 2) + " (ordering " + (order ? "holds" : "violated") +
                  "); P99 mean delay R-RLNC/A-SW=" + num(ratio, 2) + "x (need >= 3x), " + num(secs, 1) + " s";
  return {ok, d};
}

Outcome criterion_7() {
  // Boundary of the low-loss region: eps_mean = 0.02, mean burst 2 (s = 0.5).
  const double eps = 0.02, s = 0.5;
  auto c = ge_config(Scheme::Asw, s, ge_q_for(s, eps), 200);
  auto rows = sweep({c});
  if (!rows[0].datapoint) return {false, rows[0].error};
  auto& exps = rows[0].datapoint->experiences;
  std::vector<double> mx;
  for (const auto& e : exps) mx.push_back(e.max_inorder_delay_slots);
  double p99 = percentile_nearest_rank(mx, 99);
  bool ok = exps.size() >= 100 && p99 <= latency_target_slots(default_slot_us);
  return {ok, "eps=0.02 burst=2 RTT=16, " + std::to_string(exps.size()) + " experiences: P99 max delay=" + num(p99, 1) +
                  " slots (target 22)"};
}

Outcome criterion_8() {
  auto rows = sweep({ge_config(Scheme::Asw, 0.17, 0.019, 30)});
  if (!rows[0].datapoint) return {false, rows[0].error};
  std::vector<double> delays;
  for (const auto& e : rows[0].datapoint->experiences)
    delays.insert(delays.end(), e.per_packet_delays.begin(), e.per_packet_delays.end());
  EmpiricalDistribution dist(delays);
  const double eps = ge_stationary(GeParams{0.17, 0.019, 0, 1}).eps_mean;
  std::string d;
  double prev = -1;
  bool rising = true;
  double at3 = 0;
  for (double alpha : {0.0, 1.0, 2.0, 3.0}) {
    auto b = ge_delay_bound(eps, 0.17, 16, alpha);
    double cov = b.feasible ? coverage(dist, b.slots) : 1.0;
    rising = rising && cov >= prev;
    prev = cov;
    if (alpha == 3.0) at3 = cov;
    d += "a=" + num(alpha, 0) + ":" + num(cov, 3) + " ";
  }
  return {rising && at3 >= 0.95, "P_suc " + d + "(" + std::to_string(delays.size()) + " packet delays)"};
}

Outcome criterion_9() {
  auto t0 = Clock::now();
  // Lossless channel, default parameters.
  bool exact = true;
  std::string d;
  for (auto s : {Scheme::Arq, Scheme::Asw}) {
    auto c = ge_config(s, 0.17, 0.0, 5);
    auto dp = run_datapoint(c);
    for (const auto& e : dp.experiences) exact = exact && e.normalized_throughput == 1.0;
    d += std::string(to_string(s)) + "=" + num(dp.normalized_throughput, 6) + " ";
  }
  // Randomized configurations.
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<SimConfig> configs;
  for (int i = 0; i < 10000; ++i) {
    SimConfig c;
    c.scheme = static_cast<Scheme>(rng() % 4);
    c.n_packets = 1 + rng() % 40;
    c.packet_bytes = 1 + rng() % 8;
    c.experiences = 1;
    c.seed = rng();
    c.channel.ge.s = 0.05 + 0.95 * u(rng);
    c.channel.ge.q = 0.3 * u(rng);
    c.channel.ge.eps_g = u(rng) < 0.5 ? 0.0 : 0.1 * u(rng);
    c.channel.ge.eps_b = 0.5 + 0.5 * u(rng);
    c.channel.rtt_slots = 1 + static_cast<std::int64_t>(rng() % 24);
    c.channel.horizon_slots = 20000;
    c.channel.feedback_loss = u(rng) < 0.2 ? 0.2 * u(rng) : 0.0;
    c.arq.mode = rng() % 2 ? ArqMode::GoBackN : ArqMode::Selective;
    c.rrlnc.batch = 1 + rng() % 16;
    c.fsw.k = rng() % 8;
    c.asw.alpha = 3.0 * u(rng);
    c.asw.th = 0.2 * u(rng);
    configs.push_back(c);
  }
  auto rows = sweep(configs, 4);
  std::size_t checked = 0, violations = 0, failed = 0;
  for (const auto& r : rows) {
    if (!r.datapoint) {
      ++failed;
      continue;
    }
    for (const auto& e : r.datapoint->experiences) {
      ++checked;
      if (!(e.normalized_throughput <= 1.0)) ++violations;
    }
  }
  bool ok = exact && violations == 0 && checked + failed == configs.size();
  return {ok, "lossless " + d + "; random configs: " + std::to_string(checked) + " completed, " +
                  std::to_string(failed) + " incomplete, " + std::to_string(violations) + " above 1, " +
                  num(seconds_since(t0), 1) + " s"};
}

Outcome criterion_10() {
  // In-process: serial and parallel sweeps render identical reports.
  std::vector<SimConfig> configs;
  for (auto s : {Scheme::Arq, Scheme::Rrlnc, Scheme::Fsw, Scheme::Asw}) configs.push_back(ge_config(s, 0.17, 0.019, 5, 42));
  auto render = [](const std::vector<SweepRow>& rows) {
    return render_summary_csv(report_rows(rows), "manifest.json") + experiences_json(rows).dump(1);
  };
  bool same = render(sweep(configs, 1)) == render(sweep(configs, 4)) && render(sweep(configs, 1)) == render(sweep(configs, 2));

  // Through the CLI: two runs, different thread counts, byte-identical files.
  auto dir = scratch("c10");
  {
    std::ofstream(dir / "run.ini") << "[run]\nexperiences=5\nseed=42\n[channel]\nkind=ge\ns=0.17\nq=0.019\n";
  }
  bool cli = run_cli("simulate " + (dir / "run.ini").string() + " -o " + (dir / "a").string() + " -j 1") == 0 &&
             run_cli("simulate " + (dir / "run.ini").string() + " -o " + (dir / "b").string() + " -j 4") == 0;
  if (cli)
    for (auto f : {"summary.csv", "experiences.json", "manifest.json"})
      cli = cli && read_file(dir / "a" / f) == read_file(dir / "b" / f);
  fs::remove_all(dir);
  return {same && cli, std::string("in-process sweeps ") + (same ? "identical" : "differ") + ", CLI reruns " +
                           (cli ? "byte-identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"GF/decoder oracle", criterion_1},        {"GE round-trip", criterion_2},
      {"stationary distribution", criterion_3},  {"GE scaling factor", criterion_4},
      {"delay bound anchor", criterion_5},       {"scheme ordering", criterion_6},
      {"URLLC on low-loss GE", criterion_7},     {"bound coverage", criterion_8},
      {"throughput sanity", criterion_9},        {"determinism", criterion_10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
