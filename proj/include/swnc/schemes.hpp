#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swnc/packet.hpp"
#include "swnc/random.hpp"

namespace swnc {

enum class Scheme { Arq, Rrlnc, Fsw, Asw };

constexpr std::string_view to_string(Scheme s) noexcept {
  switch (s) {
    case Scheme::Arq: return "ARQ";
    case Scheme::Rrlnc: return "R-RLNC";
    case Scheme::Fsw: return "F-SW-RLNC";
    case Scheme::Asw: return "A-SW-RLNC";
  }
  return "?";
}

inline Scheme parse_scheme(std::string_view name) {
  if (name == "arq" || name == "ARQ" || name == "udp") return Scheme::Arq;
  if (name == "rrlnc" || name == "R-RLNC") return Scheme::Rrlnc;
  if (name == "fsw" || name == "F-SW-RLNC") return Scheme::Fsw;
  if (name == "asw" || name == "A-SW-RLNC") return Scheme::Asw;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Channel estimation from binary feedback
// ---------------------------------------------------------------------------

struct ChannelEstimate {
  double eps_mean{0.0};
  double nu{0.0};
  double eps_max{0.0};
};

/// `acked[j]` is 1 when the transmission of slot j has been acknowledged.
/// Only slots older than one RTT count. The variance is the erasure-count
/// variance over one RTT: RTT times the indicator variance of the most recent
/// RTT-long window, or the Bernoulli value while fewer samples exist.
inline ChannelEstimate update_channel_estimate(std::span<const std::uint8_t> acked, std::int64_t t, std::int64_t rtt,
                                               double alpha) {
  ChannelEstimate est;
  if (rtt <= 0 || t <= rtt) return est;
  const auto known = static_cast<std::size_t>(t - rtt);
  std::size_t acks = 0;
  for (std::size_t j = 0; j < known; ++j) acks += (j < acked.size() && acked[j]) ? 1 : 0;
  est.eps_mean = 1.0 - static_cast<double>(acks) / static_cast<double>(known);

  const auto window = static_cast<std::size_t>(rtt);
  if (known >= window) {
    std::size_t lost = 0;
    for (std::size_t j = known - window; j < known; ++j) lost += (j < acked.size() && acked[j]) ? 0 : 1;
    double p = static_cast<double>(lost) / static_cast<double>(window);
    est.nu = p * (1.0 - p) * static_cast<double>(rtt);
  } else {
    est.nu = est.eps_mean * (1.0 - est.eps_mean) * static_cast<double>(rtt);
  }
  est.eps_max = std::clamp(est.eps_mean + alpha * std::sqrt(est.nu) / static_cast<double>(rtt), 0.0, 1.0);
  return est;
}

// ---------------------------------------------------------------------------
// Adaptive sliding-window decision rule
// ---------------------------------------------------------------------------

enum class Decision { SendNew, SendSame };

/// Ratio of missing degrees of freedom to the redundancy already in flight.
inline double dof_ratio(std::size_t dof_needed, std::size_t dof_added) noexcept {
  return static_cast<double>(dof_needed) / static_cast<double>(std::max<std::size_t>(dof_added, 1));
}

/// New information may be sent only while 1 - d - eps_max stays above th.
inline bool retransmission_condition(double d, double eps_max, double th) noexcept {
  return 1.0 - d - eps_max > th;
}

inline Decision aswrlnc_decide(double d, double eps_max, double th, bool window_full, bool sources_left) noexcept {
  return (retransmission_condition(d, eps_max, th) && !window_full && sources_left) ? Decision::SendNew
                                                                                     : Decision::SendSame;
}

/// A-priori redundancy after `period` new packets: ceil(period * eps / (1 - eps)),
/// never more than `period`.
inline std::size_t apriori_fec_count(std::size_t period, double eps_mean) noexcept {
  if (eps_mean <= 0.0) return 0;
  if (eps_mean >= 0.5) return period;
  double x = static_cast<double>(period) * eps_mean / (1.0 - eps_mean);
  return static_cast<std::size_t>(std::ceil(x - 1e-9));
}

// ---------------------------------------------------------------------------
// Sender schedulers
// ---------------------------------------------------------------------------

enum class ArqMode { GoBackN, Selective };

struct ArqParams {
  ArqMode mode{ArqMode::GoBackN};
};

struct RrlncParams {
  std::size_t batch{10};  // n
  std::size_t round{0};   // m for the first round; 0 means n
};

struct FswParams {
  std::size_t k{4};  // one FEC after every k new packets; 0 disables
};

struct AswParams {
  double th{0.0};
  double alpha{2.0};
  std::size_t max_window{0};      // 0 means 2 * RTT
  std::size_t apriori_period{0};  // 0 means RTT
};

/// State shared by every sender: the file and a coefficient stream.
class SenderBase {
 public:
  SenderBase(std::span<const SourcePacket> sources, Rng& rng, std::int64_t timeout)
      : sources_{sources}, rng_{&rng}, timeout_{timeout} {
    if (sources.empty()) throw std::invalid_argument("sender: empty transfer");
  }

  std::size_t n_packets() const noexcept { return sources_.size(); }

 protected:
  // `admits_last`: the packet introduces source `hi`, whose coefficient is then
  // drawn from the nonzero elements so the packet is always innovative.
  CodedPacket combine(std::size_t lo, std::size_t hi, PacketKind kind, std::int64_t now, bool admits_last = false) {
    auto window = sources_.subspan(lo - 1, hi - lo + 1);
    auto coeffs = random_coeffs(*rng_, lo, window.size());
    if (admits_last)
      while (coeffs.elems.back().is_zero()) coeffs.elems.back() = Gf256{static_cast<std::uint8_t>((*rng_)() >> 56)};
    auto pkt = encode(window, coeffs);
    pkt.kind = kind;
    pkt.tx_slot = now;
    return pkt;
  }

  CodedPacket uncoded(std::size_t index, std::int64_t now) const {
    CodedPacket pkt{CoeffVector::unit(index), sources_[index - 1].payload, PacketKind::Uncoded, now};
    return pkt;
  }

  bool timed_out(std::int64_t sent, std::int64_t now) const noexcept { return sent + 1 + timeout_ <= now; }

  std::span<const SourcePacket> sources_;
  Rng* rng_;
  std::int64_t timeout_;
};

/// Uncoded baseline. Go-back-N restarts from the oldest unacknowledged packet
/// when a NACK is declared; selective mode retransmits only the NACKed packet.
class ArqSender : public SenderBase {
 public:
  ArqSender(std::span<const SourcePacket> sources, Rng& rng, std::int64_t timeout, ArqParams params)
      : SenderBase(sources, rng, timeout), params_{params}, acked_(sources.size() + 1, 0) {}

  void on_feedback(const FeedbackMsg& fb, std::int64_t /*now*/) {
    base_ = std::max(base_, fb.decoded_upto + 1);
    if (params_.mode == ArqMode::Selective) {
      auto it = sent_seq_.find_slot(fb.tx_slot_echo);
      if (it) acked_[*it] = 1;
    }
  }

  std::optional<CodedPacket> step(std::int64_t now) {
    return params_.mode == ArqMode::GoBackN ? step_gbn(now) : step_selective(now);
  }

 private:
  // Slot -> sequence map for the selective variant.
  struct SlotLog {
    std::vector<std::size_t> seq_by_slot;
    void record(std::int64_t slot, std::size_t seq) {
      auto s = static_cast<std::size_t>(slot);
      if (seq_by_slot.size() <= s) seq_by_slot.resize(s + 1, 0);
      seq_by_slot[s] = seq;
    }
    std::optional<std::size_t> find_slot(std::int64_t slot) const {
      auto s = static_cast<std::size_t>(slot);
      if (slot < 0 || s >= seq_by_slot.size() || seq_by_slot[s] == 0) return std::nullopt;
      return seq_by_slot[s];
    }
  };

  std::optional<CodedPacket> step_gbn(std::int64_t now) {
    while (!outstanding_.empty() && outstanding_.front().seq < base_) outstanding_.pop_front();
    if (!outstanding_.empty() && timed_out(outstanding_.front().slot, now)) {
      next_ = base_;
      outstanding_.clear();
    }
    next_ = std::max(next_, base_);
    if (next_ > n_packets()) return std::nullopt;
    outstanding_.push_back({now, next_});
    return uncoded(next_++, now);
  }

  std::optional<CodedPacket> step_selective(std::int64_t now) {
    while (!outstanding_.empty()) {
      auto [slot, seq] = outstanding_.front();
      if (acked_[seq] || seq < base_) {
        outstanding_.pop_front();
      } else if (timed_out(slot, now)) {
        retransmit_.push_back(seq);
        outstanding_.pop_front();
      } else {
        break;
      }
    }
    std::size_t seq = 0;
    while (!retransmit_.empty() && seq == 0) {
      auto s = retransmit_.front();
      retransmit_.pop_front();
      if (!acked_[s] && s >= base_) seq = s;
    }
    if (seq == 0) {
      if (next_ > n_packets()) return std::nullopt;
      seq = next_++;
    }
    outstanding_.push_back({now, seq});
    sent_seq_.record(now, seq);
    return uncoded(seq, now);
  }

  struct Sent {
    std::int64_t slot;
    std::size_t seq;
  };

  ArqParams params_;
  std::size_t next_{1};
  std::size_t base_{1};
  std::deque<Sent> outstanding_;
  std::deque<std::size_t> retransmit_;
  std::vector<std::uint8_t> acked_;
  SlotLog sent_seq_;
};

/// Rateless batch coding: rounds of random combinations of one batch until the
/// receiver acknowledges that the batch decodes.
class RrlncSender : public SenderBase {
 public:
  RrlncSender(std::span<const SourcePacket> sources, Rng& rng, std::int64_t timeout, RrlncParams params)
      : SenderBase(sources, rng, timeout), params_{params} {
    if (params_.batch == 0) throw std::invalid_argument("R-RLNC batch size must be positive");
    if (params_.round == 0) params_.round = params_.batch;
    if (params_.round < params_.batch) throw std::invalid_argument("R-RLNC round size must be at least the batch size");
  }

  void on_feedback(const FeedbackMsg& fb, std::int64_t /*now*/) { decoded_upto_ = std::max(decoded_upto_, fb.decoded_upto); }

  std::optional<CodedPacket> step(std::int64_t now) {
    if (lo_ > n_packets()) return std::nullopt;
    if (decoded_upto_ >= hi()) {
      lo_ = hi() + 1;
      round_ = 0;
      sent_in_round_ = 0;
      if (lo_ > n_packets()) return std::nullopt;
    }
    const std::size_t round_len = round_ == 0 ? params_.round : params_.batch;
    if (sent_in_round_ == round_len) {
      if (!timed_out(round_end_, now)) return std::nullopt;
      ++round_;
      sent_in_round_ = 0;
    }
    auto kind = round_ == 0 ? PacketKind::NewInfo : PacketKind::Repeat;
    auto pkt = combine(lo_, hi(), kind, now);
    ++sent_in_round_;
    if (sent_in_round_ == (round_ == 0 ? params_.round : params_.batch)) round_end_ = now;
    return pkt;
  }

  std::size_t batch_index() const noexcept { return (lo_ - 1) / params_.batch; }
  std::size_t round() const noexcept { return round_; }

 private:
  std::size_t hi() const noexcept { return std::min(lo_ + params_.batch - 1, n_packets()); }

  RrlncParams params_;
  std::size_t lo_{1};
  std::size_t round_{0};
  std::size_t sent_in_round_{0};
  std::int64_t round_end_{0};
  std::size_t decoded_upto_{0};
};

/// Sliding window with fixed redundancy: one repeat of the window after every
/// k new packets, independent of the channel.
class FswSender : public SenderBase {
 public:
  FswSender(std::span<const SourcePacket> sources, Rng& rng, std::int64_t timeout, FswParams params)
      : SenderBase(sources, rng, timeout), params_{params} {}

  void on_feedback(const FeedbackMsg& fb, std::int64_t /*now*/) { w_min_ = std::max(w_min_, fb.decoded_upto + 1); }

  std::optional<CodedPacket> step(std::int64_t now) {
    if (params_.k != 0 && new_since_fec_ == params_.k && w_min_ <= w_max_) {
      new_since_fec_ = 0;
      return combine(w_min_, w_max_, PacketKind::AprioriFEC, now);
    }
    if (w_max_ < n_packets()) {
      ++w_max_;
      ++new_since_fec_;
      return combine(w_min_, w_max_, PacketKind::NewInfo, now, true);
    }
    if (w_min_ > w_max_) return std::nullopt;
    return combine(w_min_, w_max_, PacketKind::Repeat, now);
  }

  std::size_t w_min() const noexcept { return w_min_; }
  std::size_t w_max() const noexcept { return w_max_; }

 private:
  FswParams params_;
  std::size_t w_min_{1};
  std::size_t w_max_{0};
  std::size_t new_since_fec_{0};
};

/// Adaptive causal sliding window. Each slot it either admits a new source
/// into the window or repeats the window with fresh coefficients, based on the
/// DoF deficit reported by feedback and a conservative erasure estimate. It
/// also inserts a-priori FEC sized by the mean erasure estimate after every
/// `apriori_period` new packets.
class AswSender : public SenderBase {
 public:
  AswSender(std::span<const SourcePacket> sources, Rng& rng, std::int64_t timeout, std::int64_t rtt_slots,
            AswParams params)
      : SenderBase(sources, rng, timeout), params_{params}, rtt_{std::max<std::int64_t>(1, rtt_slots)} {
    if (params_.max_window == 0) params_.max_window = static_cast<std::size_t>(2 * rtt_);
    if (params_.apriori_period == 0) params_.apriori_period = static_cast<std::size_t>(rtt_);
    if (params_.alpha < 0.0) throw std::invalid_argument("A-SW-RLNC alpha must be non-negative");
  }

  void on_feedback(const FeedbackMsg& fb, std::int64_t now) {
    auto slot = static_cast<std::size_t>(fb.tx_slot_echo);
    if (slot < acked_.size()) acked_[slot] = 1;
    if (!latest_ || fb.tx_slot_echo > latest_->tx_slot_echo) latest_ = fb;
    w_min_ = std::max(w_min_, fb.decoded_upto + 1);
    rtt_measured_ = std::max<std::int64_t>(1, now - fb.tx_slot_echo);
  }

  std::optional<CodedPacket> step(std::int64_t now) {
    const auto slot = static_cast<std::size_t>(now);
    if (acked_.size() < slot + 1) {
      acked_.resize(slot + 1, 0);
      wmax_at_.resize(slot + 1, w_max_);
      fec_at_.resize(slot + 1, fec_total_);
    }
    estimate_ = update_channel_estimate(acked_, now, rtt_measured_.value_or(rtt_), params_.alpha);

    std::optional<CodedPacket> pkt;
    const bool window_empty = w_min_ > w_max_;
    if (w_max_ == n_packets()) {
      // Every source is in flight; keep repairing until the receiver is done.
      if (!window_empty) pkt = send_fec(PacketKind::Repeat, now);
    } else if (pending_apriori_ > 0 && !window_empty) {
      --pending_apriori_;
      pkt = send_fec(PacketKind::AprioriFEC, now);
    } else {
      update_dof_accounting();
      const bool window_full = (w_max_ + 1) - w_min_ + 1 > params_.max_window;
      last_decision_ = aswrlnc_decide(dof_ratio(dof_needed_, dof_added_), estimate_.eps_max, params_.th,
                                      window_full, true);
      if (last_decision_ == Decision::SendNew || window_empty) {
        ++w_max_;
        pkt = combine(w_min_, w_max_, PacketKind::NewInfo, now, true);
        if (++new_since_apriori_ == params_.apriori_period) {
          new_since_apriori_ = 0;
          pending_apriori_ = apriori_fec_count(params_.apriori_period, estimate_.eps_mean);
        }
      } else {
        pkt = send_fec(dof_needed_ > 0 ? PacketKind::AposterioriFEC : PacketKind::Repeat, now);
      }
    }
    wmax_at_[slot] = w_max_;
    fec_at_[slot] = fec_total_;
    return pkt;
  }

  std::size_t w_min() const noexcept { return w_min_; }
  std::size_t w_max() const noexcept { return w_max_; }
  std::size_t dof_needed() const noexcept { return dof_needed_; }
  std::size_t dof_added() const noexcept { return dof_added_; }
  const ChannelEstimate& estimate() const noexcept { return estimate_; }
  const AswParams& params() const noexcept { return params_; }
  Decision last_decision() const noexcept { return last_decision_; }

 private:
  CodedPacket send_fec(PacketKind kind, std::int64_t now) {
    ++fec_total_;
    return combine(w_min_, w_max_, kind, now);
  }

  // dof_needed: sources admitted by the acknowledged slot minus the receiver's
  // rank at that slot. dof_added: redundancy sent since that slot.
  void update_dof_accounting() {
    if (!latest_) {
      dof_needed_ = 0;
      dof_added_ = fec_total_;
      return;
    }
    auto slot = static_cast<std::size_t>(latest_->tx_slot_echo);
    auto admitted = wmax_at_[slot];
    dof_needed_ = admitted > latest_->seen_dof ? admitted - latest_->seen_dof : 0;
    dof_added_ = fec_total_ - fec_at_[slot];
  }

  AswParams params_;
  std::int64_t rtt_;
  std::optional<std::int64_t> rtt_measured_;
  std::size_t w_min_{1};
  std::size_t w_max_{0};
  std::size_t fec_total_{0};
  std::size_t dof_needed_{0};
  std::size_t dof_added_{0};
  std::size_t new_since_apriori_{0};
  std::size_t pending_apriori_{0};
  std::optional<FeedbackMsg> latest_;
  std::vector<std::uint8_t> acked_;
  std::vector<std::size_t> wmax_at_;
  std::vector<std::size_t> fec_at_;
  ChannelEstimate estimate_;
  Decision last_decision_{Decision::SendNew};
};

}  // namespace swnc
