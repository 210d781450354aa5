#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "swnc/random.hpp"

namespace swnc {

inline constexpr std::uint32_t default_slot_us = 450;

struct SlotRecord {
  std::uint32_t rtt_us{default_slot_us};
  bool lost{false};
};

struct ChannelProfile {
  std::uint32_t slot_duration_us{default_slot_us};
  std::vector<SlotRecord> records;
  std::string label;

  std::size_t size() const noexcept { return records.size(); }

  /// Round trip of a packet sent in `slot`, in whole slots, never below one.
  std::int64_t rtt_slots(std::size_t slot) const noexcept {
    auto r = std::llround(static_cast<double>(records[slot].rtt_us) / slot_duration_us);
    return std::max<std::int64_t>(1, r);
  }

  std::int64_t max_rtt_slots() const noexcept {
    std::int64_t m = 1;
    for (std::size_t i = 0; i < records.size(); ++i) m = std::max(m, rtt_slots(i));
    return m;
  }

  double loss_fraction() const noexcept {
    if (records.empty()) return 0.0;
    auto lost = std::count_if(records.begin(), records.end(), [](const SlotRecord& r) { return r.lost; });
    return static_cast<double>(lost) / static_cast<double>(records.size());
  }

  void validate() const {
    if (records.empty()) throw std::invalid_argument("channel profile has no slots");
    if (slot_duration_us == 0) throw std::invalid_argument("channel profile slot duration must be positive");
    for (const auto& r : records)
      if (r.rtt_us == 0) throw std::invalid_argument("channel profile contains a zero RTT");
  }
};

// ---------------------------------------------------------------------------
// Gilbert-Elliott erasure channel
//
// `s` is the per-slot probability that a burst (bad state) ends and `q` the
// probability that the good state ends, so pi_G = s / (s + q) and the mean
// burst length is 1 / s.
// ---------------------------------------------------------------------------

struct GeParams {
  double s{0.17};
  double q{0.019};
  double eps_g{0.0};
  double eps_b{1.0};

  void validate() const {
    for (double v : {s, q, eps_g, eps_b})
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("GE parameters must lie in [0, 1]");
  }
};

struct GeStationary {
  double pi_g{1.0};
  double pi_b{0.0};
  double eps_mean{0.0};
};

inline GeStationary ge_stationary(const GeParams& p) {
  p.validate();
  if (p.s + p.q <= 0.0) throw std::domain_error("ge_stationary: s = q = 0 has no unique stationary distribution");
  GeStationary st;
  st.pi_g = p.s / (p.s + p.q);
  st.pi_b = 1.0 - st.pi_g;
  st.eps_mean = st.pi_g * p.eps_g + st.pi_b * p.eps_b;
  return st;
}

/// q that yields a stationary erasure rate of `eps_mean` for burst-end rate `s`
/// (eps_g = 0, eps_b = 1).
inline double ge_q_for(double s, double eps_mean) {
  if (!(eps_mean >= 0.0 && eps_mean < 1.0)) throw std::domain_error("ge_q_for: eps_mean must be in [0, 1)");
  return s * eps_mean / (1.0 - eps_mean);
}

inline ChannelProfile ge_generate(const GeParams& p, std::size_t n_slots, std::uint32_t rtt_us, std::uint64_t seed,
                                  std::uint32_t slot_us = default_slot_us, std::string label = "GE") {
  if (n_slots == 0) throw std::invalid_argument("ge_generate: n_slots must be positive");
  if (rtt_us == 0) throw std::invalid_argument("ge_generate: rtt must be positive");
  auto st = ge_stationary(p);

  Rng rng{seed};
  ChannelProfile prof;
  prof.slot_duration_us = slot_us;
  prof.label = std::move(label);
  prof.records.reserve(n_slots);

  bool bad = bernoulli(rng, st.pi_b);
  for (std::size_t i = 0; i < n_slots; ++i) {
    bool lost = bernoulli(rng, bad ? p.eps_b : p.eps_g);
    prof.records.push_back(SlotRecord{rtt_us, lost});
    bad = bad ? !bernoulli(rng, p.s) : bernoulli(rng, p.q);
  }
  return prof;
}

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeFit {
  GeParams params;
  double eps_mean{0.0};
  double mean_burst{0.0};
  std::size_t bursts{0};
};

/// Method-of-moments fit: s from the mean length of maximal loss runs, the
/// erasure rate from the loss fraction, q from the stationary relation.
inline GeFit fit_ge(const ChannelProfile& prof) {
  std::size_t lost = 0, runs = 0;
  bool prev = false;
  for (const auto& r : prof.records) {
    if (r.lost) {
      ++lost;
      if (!prev) ++runs;
    }
    prev = r.lost;
  }
  if (lost == 0) throw FitError("fit_ge: profile has no lost slots");
  if (lost == prof.records.size()) throw FitError("fit_ge: profile has no delivered slots");

  GeFit fit;
  fit.bursts = runs;
  fit.mean_burst = static_cast<double>(lost) / static_cast<double>(runs);
  fit.eps_mean = static_cast<double>(lost) / static_cast<double>(prof.records.size());
  fit.params.s = 1.0 / fit.mean_burst;
  fit.params.q = fit.params.s * fit.eps_mean / (1.0 - fit.eps_mean);
  fit.params.eps_g = 0.0;
  fit.params.eps_b = 1.0;
  return fit;
}

// ---------------------------------------------------------------------------
// Slot transmission
// ---------------------------------------------------------------------------

struct Delivered {
  std::int64_t arrival_slot;
  std::int64_t feedback_slot;
};
struct Erased {};
struct ProfileExhausted {};

using TransmitOutcome = std::variant<Delivered, Erased, ProfileExhausted>;

/// A packet occupies its slot (t_d = 1) and reaches the receiver at the next
/// slot boundary; the receiver's feedback reaches the sender one RTT after the
/// send slot.
inline TransmitOutcome channel_transmit(const ChannelProfile& prof, std::size_t slot) {
  if (slot >= prof.records.size()) return ProfileExhausted{};
  if (prof.records[slot].lost) return Erased{};
  auto s = static_cast<std::int64_t>(slot);
  return Delivered{s + 1, s + prof.rtt_slots(slot)};
}

// ---------------------------------------------------------------------------
// Trace CSV
//
//   # slot_us=450 label=MCS5
//   slot,rtt_us,lost
//   0,7200,0
// ---------------------------------------------------------------------------

inline void write_trace(std::ostream& os, const ChannelProfile& prof) {
  if (prof.label.find_first_of(" \t\r\n") != std::string::npos)
    throw std::invalid_argument("trace label must not contain whitespace");
  os << "# slot_us=" << prof.slot_duration_us << " label=" << prof.label << "\n";
  os << "slot,rtt_us,lost\n";
  for (std::size_t i = 0; i < prof.records.size(); ++i)
    os << i << ',' << prof.records[i].rtt_us << ',' << (prof.records[i].lost ? 1 : 0) << '\n';
}

inline ChannelProfile read_trace(std::istream& is) {
  ChannelProfile prof;
  prof.label.clear();
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("trace line " + std::to_string(lineno) + ": " + what);
  };

  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::istringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        auto key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "slot_us") {
          try {
            prof.slot_duration_us = static_cast<std::uint32_t>(std::stoul(val));
          } catch (const std::exception&) {
            fail("bad slot_us value '" + val + "'");
          }
        } else if (key == "label") {
          prof.label = val;
        }
      }
      continue;
    }
    if (!header_seen) {
      if (line != "slot,rtt_us,lost") fail("expected header 'slot,rtt_us,lost'");
      header_seen = true;
      continue;
    }
    std::istringstream ss(line);
    std::string f_slot, f_rtt, f_lost;
    if (!std::getline(ss, f_slot, ',') || !std::getline(ss, f_rtt, ',') || !std::getline(ss, f_lost))
      fail("expected three comma-separated fields");
    unsigned long slot = 0, rtt = 0;
    try {
      slot = std::stoul(f_slot);
      rtt = std::stoul(f_rtt);
    } catch (const std::exception&) {
      fail("non-numeric slot or rtt_us");
    }
    if (slot != prof.records.size()) fail("slots must be contiguous from 0");
    if (rtt == 0) fail("rtt_us must be positive");
    if (f_lost != "0" && f_lost != "1") fail("lost must be 0 or 1");
    prof.records.push_back(SlotRecord{static_cast<std::uint32_t>(rtt), f_lost == "1"});
  }
  if (!header_seen) throw std::runtime_error("trace: missing header");
  prof.validate();
  return prof;
}

inline ChannelProfile load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace '" + path + "'");
  return read_trace(in);
}

}  // namespace swnc
