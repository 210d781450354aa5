#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "swnc/schemes.hpp"

namespace swnc {

// ---------------------------------------------------------------------------
// Sample statistics
// ---------------------------------------------------------------------------

inline double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Sample standard deviation (n - 1); zero for fewer than two samples.
inline double stdev_of(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  double m = mean_of(xs), acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

/// Nearest-rank percentile: the ceil(p/100 * n)-th smallest sample.
inline double percentile_nearest_rank(std::vector<double> xs, double p) {
  if (xs.empty()) throw std::invalid_argument("percentile of an empty sample");
  if (!(p > 0.0 && p <= 100.0)) throw std::invalid_argument("percentile rank must be in (0, 100]");
  std::sort(xs.begin(), xs.end());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(xs.size()) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, xs.size());
  return xs[rank - 1];
}

struct SummaryStats {
  double mean{0.0};
  double stdev{0.0};
  double p99{0.0};
};

inline SummaryStats summarize(std::span<const double> xs) {
  if (xs.empty()) return {};
  return SummaryStats{mean_of(xs), stdev_of(xs), percentile_nearest_rank({xs.begin(), xs.end()}, 99.0)};
}

class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> samples) : xs_{std::move(samples)} {
    if (xs_.empty()) throw std::invalid_argument("empirical distribution needs at least one sample");
    std::sort(xs_.begin(), xs_.end());
  }

  /// Fraction of samples <= x.
  double cdf(double x) const noexcept {
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    return static_cast<double>(it - xs_.begin()) / static_cast<double>(xs_.size());
  }

  double quantile(double p) const { return percentile_nearest_rank(xs_, p * 100.0); }
  double mean() const noexcept { return mean_of(xs_); }
  double stdev() const noexcept { return stdev_of(xs_); }
  std::size_t size() const noexcept { return xs_.size(); }
  const std::vector<double>& sorted() const noexcept { return xs_; }

 private:
  std::vector<double> xs_;
};

/// P_suc for a delay bound: share of samples at or below it.
inline double coverage(const EmpiricalDistribution& dist, double bound) noexcept { return dist.cdf(bound); }

// ---------------------------------------------------------------------------
// Type-1 extreme value overlay
// ---------------------------------------------------------------------------

inline constexpr double euler_gamma = 0.57721566490153286061;

struct GumbelCdf {
  double location{0.0};
  double scale{0.0};  // zero means a step at `location`

  double operator()(double x) const noexcept {
    if (scale <= 0.0) return x >= location ? 1.0 : 0.0;
    return std::exp(-std::exp(-(x - location) / scale));
  }
};

inline GumbelCdf gumbel_from_moments(double mean, double stdev) noexcept {
  double scale = stdev * std::sqrt(6.0) / std::numbers::pi;
  return GumbelCdf{mean - scale * euler_gamma, scale};
}

inline GumbelCdf gumbel_overlay(const EmpiricalDistribution& dist) {
  if (dist.size() < 2) throw std::invalid_argument("gumbel_overlay needs at least two samples");
  return gumbel_from_moments(dist.mean(), dist.stdev());
}

// ---------------------------------------------------------------------------
// Delay guarantees over a Gilbert-Elliott channel
// ---------------------------------------------------------------------------

struct DelayBoundInput {
  double eps_mean{0.0};
  double nu{0.0};
  double rtt_slots{16.0};
  double alpha{0.0};
  double th{0.0};
  double d{0.0};
  double s{0.17};
};

/// eps_mean + alpha * sqrt(nu) / RTT, clamped to [0, 1].
inline double eps_max_alpha(const DelayBoundInput& in) {
  if (in.rtt_slots <= 0.0) throw std::domain_error("eps_max_alpha: RTT must be positive");
  return std::clamp(in.eps_mean + in.alpha * std::sqrt(std::max(in.nu, 0.0)) / in.rtt_slots, 0.0, 1.0);
}

/// Erasure-count variance over one RTT of the stationary GE channel.
inline double ge_variance(double pi_b, double eps_b, double rtt_slots) noexcept {
  double e = pi_b * eps_b;
  return (e - e * e) * rtt_slots;
}

inline constexpr double ge_scaling_pole_margin = 1e-9;

/// Worst-case retransmission multiplier for a GE channel with burst-end
/// probability s: (1 / (1 - s)) * (1 / s - s) - 1.
inline double ge_scaling(double s) {
  if (!(s > 0.0 && s <= 1.0 - ge_scaling_pole_margin))
    throw std::domain_error("ge_scaling: s must lie in (0, 1)");
  return (1.0 / (1.0 - s)) * (1.0 / s - s) - 1.0;
}

struct DelayBound {
  bool feasible{false};
  double slots{0.0};
};

/// High-probability in-order delay bound.
///
/// The erasure rate is replaced by its alpha-deviation eps_max. The bound is
///   (1 / (1 - eps_max) + RTT * eps_max / (1 - d)) * ge_scaling(s)
/// i.e. the per-packet service time under eps_max plus one RTT of feedback
/// latency for the fraction of DoFs that must be repaired a posteriori,
/// stretched by the GE retransmission multiplier. It is infeasible when
/// 1 - d - eps_max <= th, where new packets could never be admitted.
inline DelayBound delay_upper_bound(const DelayBoundInput& in) {
  if (!(in.eps_mean >= 0.0 && in.eps_mean <= 1.0)) throw std::domain_error("delay_upper_bound: eps_mean outside [0, 1]");
  if (in.nu < 0.0 || in.alpha < 0.0) throw std::domain_error("delay_upper_bound: nu and alpha must be non-negative");
  if (!(in.d >= 0.0)) throw std::domain_error("delay_upper_bound: d must be non-negative");
  const double scale = ge_scaling(in.s);
  const double eps_max = eps_max_alpha(in);
  if (in.d >= 1.0 || !retransmission_condition(in.d, eps_max, in.th)) return DelayBound{false, 0.0};
  const double service = 1.0 / (1.0 - eps_max);
  const double repair = in.rtt_slots * eps_max / (1.0 - in.d);
  return DelayBound{true, (service + repair) * scale};
}

/// Bound for a GE channel parameterised by its mean erasure rate (eps_b = 1),
/// with the variance taken from the closed form.
inline DelayBound ge_delay_bound(double eps_mean, double s, double rtt_slots, double alpha, double th = 0.0,
                                 double d = 0.0) {
  DelayBoundInput in{eps_mean, ge_variance(eps_mean, 1.0, rtt_slots), rtt_slots, alpha, th, d, s};
  return delay_upper_bound(in);
}

// ---------------------------------------------------------------------------
// Service classes
// ---------------------------------------------------------------------------

/// 10 ms expressed in whole slots (22 for 450 us slots).
inline double latency_target_slots(double slot_us) {
  if (slot_us <= 0.0) throw std::domain_error("slot duration must be positive");
  return std::floor(10000.0 / slot_us);
}

struct ServiceClass {
  bool llc{false};
  bool urllc{false};
};

/// LLC: mean of the per-experience mean delay within target. URLLC: P99 of
/// the per-experience max delay within target.
inline ServiceClass classify_llc_urllc(double mean_delay_mean, double max_delay_p99, double slot_us) {
  double target = latency_target_slots(slot_us);
  return ServiceClass{mean_delay_mean <= target, max_delay_p99 <= target};
}

}  // namespace swnc
