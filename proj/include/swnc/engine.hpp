#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "swnc/analysis.hpp"
#include "swnc/channel.hpp"
#include "swnc/packet.hpp"
#include "swnc/receiver.hpp"
#include "swnc/schemes.hpp"

namespace swnc {

struct ChannelSpec {
  enum class Kind { Ge, Trace };

  Kind kind{Kind::Ge};
  std::string label{"GE"};
  GeParams ge;
  std::int64_t rtt_slots{16};
  std::size_t horizon_slots{20000};
  std::uint32_t slot_us{default_slot_us};
  std::string trace_path;
  std::shared_ptr<const ChannelProfile> trace;
  double feedback_loss{0.0};
};

struct SimConfig {
  std::size_t n_packets{100};
  std::size_t packet_bytes{1000};
  Scheme scheme{Scheme::Asw};
  ArqParams arq;
  RrlncParams rrlnc;
  FswParams fsw;
  AswParams asw;
  ChannelSpec channel;
  std::int64_t timeout_slots{0};  // 0 means twice the largest RTT in the profile
  std::uint64_t seed{1};
  std::size_t experiences{10};  // for traces, 0 runs until the trace is used up

  void validate() const {
    if (n_packets == 0) throw std::invalid_argument("n_packets must be at least 1");
    if (packet_bytes == 0) throw std::invalid_argument("packet_bytes must be at least 1");
    if (channel.kind == ChannelSpec::Kind::Ge) {
      channel.ge.validate();
      if (channel.ge.s + channel.ge.q <= 0.0) throw std::invalid_argument("GE channel needs s + q > 0");
      if (channel.rtt_slots <= 0) throw std::invalid_argument("rtt_slots must be positive");
      if (channel.horizon_slots == 0) throw std::invalid_argument("horizon_slots must be positive");
      if (experiences == 0) throw std::invalid_argument("experiences must be at least 1 for synthetic channels");
    } else if (!channel.trace) {
      throw std::invalid_argument("trace channel has no loaded profile");
    }
    if (!(channel.feedback_loss >= 0.0 && channel.feedback_loss <= 1.0))
      throw std::invalid_argument("feedback_loss must lie in [0, 1]");
    if (timeout_slots < 0) throw std::invalid_argument("timeout_slots must be non-negative");
  }
};

struct ExperienceResult {
  std::uint64_t seed{0};
  std::size_t offset{0};
  bool complete{false};
  double normalized_throughput{0.0};
  double mean_inorder_delay_slots{0.0};
  double max_inorder_delay_slots{0.0};
  std::vector<double> per_packet_delays;
  std::int64_t slots_consumed{0};
  std::size_t transmissions{0};
  std::map<PacketKind, std::size_t> kind_counts;
};

struct Datapoint {
  double normalized_throughput{0.0};
  double mean_inorder_delay_slots{0.0};
  double max_inorder_delay_slots{0.0};
  std::vector<ExperienceResult> experiences;  // completed only
  std::size_t incomplete{0};
};

namespace detail {

using AnySender = std::variant<ArqSender, RrlncSender, FswSender, AswSender>;
using AnyReceiver = std::variant<CodedReceiver, GoBackNReceiver>;

inline std::int64_t nominal_rtt(const SimConfig& cfg, const ChannelProfile& prof) {
  if (cfg.channel.kind == ChannelSpec::Kind::Ge) return cfg.channel.rtt_slots;
  std::vector<std::int64_t> r;
  r.reserve(prof.size());
  for (std::size_t i = 0; i < prof.size(); ++i) r.push_back(prof.rtt_slots(i));
  std::nth_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(r.size() / 2), r.end());
  return r[r.size() / 2];
}

inline AnySender make_sender(const SimConfig& cfg, std::span<const SourcePacket> src, Rng& rng,
                             std::int64_t timeout, std::int64_t rtt) {
  switch (cfg.scheme) {
    case Scheme::Arq: return ArqSender(src, rng, timeout, cfg.arq);
    case Scheme::Rrlnc: return RrlncSender(src, rng, timeout, cfg.rrlnc);
    case Scheme::Fsw: return FswSender(src, rng, timeout, cfg.fsw);
    case Scheme::Asw: return AswSender(src, rng, timeout, rtt, cfg.asw);
  }
  throw std::logic_error("unhandled scheme");
}

inline AnyReceiver make_receiver(const SimConfig& cfg) {
  if (cfg.scheme == Scheme::Arq && cfg.arq.mode == ArqMode::GoBackN) return GoBackNReceiver(cfg.n_packets);
  return CodedReceiver(cfg.n_packets);
}

struct PendingFeedback {
  std::int64_t slot;
  std::uint64_t order;
  FeedbackMsg msg;
  bool operator>(const PendingFeedback& o) const noexcept {
    return slot != o.slot ? slot > o.slot : order > o.order;
  }
};

struct PendingArrival {
  std::int64_t slot;
  std::uint64_t order;
  std::int64_t feedback_slot;
  CodedPacket pkt;
  bool operator>(const PendingArrival& o) const noexcept {
    return slot != o.slot ? slot > o.slot : order > o.order;
  }
};

}  // namespace detail

inline std::vector<SourcePacket> make_sources(std::size_t n, std::size_t bytes, std::uint64_t seed) {
  Rng rng{seed};
  std::vector<SourcePacket> src(n);
  for (std::size_t i = 0; i < n; ++i) {
    src[i].index = i + 1;
    src[i].payload.resize(bytes);
    for (auto& b : src[i].payload) b = static_cast<std::uint8_t>(rng() >> 56);
  }
  return src;
}

/// One transfer of the whole file over `prof`, starting at profile slot
/// `offset`. Each slot: the receiver takes arrivals due now, the sender takes
/// feedback due now, then the sender may put one packet on the channel.
inline ExperienceResult run_experience(const SimConfig& cfg, const ChannelProfile& prof, std::size_t offset,
                                       std::uint64_t seed) {
  cfg.validate();
  ExperienceResult res;
  res.seed = seed;
  res.offset = offset;

  const auto sources = make_sources(cfg.n_packets, cfg.packet_bytes, stream_seed(seed, 3));
  Rng coef_rng{stream_seed(seed, 1)};
  Rng fb_rng{stream_seed(seed, 2)};
  const std::int64_t timeout = cfg.timeout_slots > 0 ? cfg.timeout_slots : 2 * prof.max_rtt_slots();

  auto sender = detail::make_sender(cfg, sources, coef_rng, timeout, detail::nominal_rtt(cfg, prof));
  auto receiver = detail::make_receiver(cfg);

  std::priority_queue<detail::PendingArrival, std::vector<detail::PendingArrival>, std::greater<>> arrivals;
  std::priority_queue<detail::PendingFeedback, std::vector<detail::PendingFeedback>, std::greater<>> feedback;
  std::uint64_t order = 0;

  const std::size_t n = cfg.n_packets;
  std::vector<std::int64_t> first_tx(n + 1, -1), decoded_at(n + 1, -1);
  std::size_t decoded = 0;

  const auto available = static_cast<std::int64_t>(prof.size()) - static_cast<std::int64_t>(offset);
  for (std::int64_t t = 0; t <= available; ++t) {
    while (!arrivals.empty() && arrivals.top().slot <= t) {
      auto a = arrivals.top();
      arrivals.pop();
      auto fb = std::visit([&](auto& r) { return r.receive(a.pkt); }, receiver);
      if (!bernoulli(fb_rng, cfg.channel.feedback_loss))
        feedback.push({a.feedback_slot, order++, fb});
      for (; decoded < fb.decoded_upto; ++decoded) decoded_at[decoded + 1] = t;
    }
    if (decoded == n) {
      res.complete = true;
      res.slots_consumed = t;
      break;
    }
    while (!feedback.empty() && feedback.top().slot <= t) {
      auto f = feedback.top();
      feedback.pop();
      std::visit([&](auto& s) { s.on_feedback(f.msg, t); }, sender);
    }
    if (t == available) break;

    auto pkt = std::visit([&](auto& s) { return s.step(t); }, sender);
    if (!pkt) continue;
    ++res.transmissions;
    ++res.kind_counts[pkt->kind];
    if (pkt->kind == PacketKind::NewInfo || pkt->kind == PacketKind::Uncoded) {
      for (std::size_t j = pkt->w_min(); j <= pkt->w_max(); ++j)
        if (first_tx[j] < 0) first_tx[j] = t;
    }
    auto outcome = channel_transmit(prof, offset + static_cast<std::size_t>(t));
    if (auto* d = std::get_if<Delivered>(&outcome)) {
      auto base = static_cast<std::int64_t>(offset);
      arrivals.push({d->arrival_slot - base, order++, d->feedback_slot - base, std::move(*pkt)});
    }
  }

  if (!res.complete) {
    res.slots_consumed = available;
    return res;
  }

  auto lookup = [&](std::size_t i) { return std::visit([&](const auto& rx) { return rx.payload(i); }, receiver); };
  res.per_packet_delays.reserve(n);
  for (std::size_t j = 1; j <= n; ++j) {
    const Bytes* got = lookup(j);
    if (!got || *got != sources[j - 1].payload)
      throw std::logic_error("decoded payload differs from source " + std::to_string(j));
    if (first_tx[j] < 0) throw std::logic_error("source decoded before it was transmitted");
    res.per_packet_delays.push_back(static_cast<double>(decoded_at[j] - first_tx[j]));
  }
  res.mean_inorder_delay_slots = mean_of(res.per_packet_delays);
  res.max_inorder_delay_slots = *std::max_element(res.per_packet_delays.begin(), res.per_packet_delays.end());
  res.normalized_throughput = static_cast<double>(n) / static_cast<double>(res.transmissions);
  return res;
}

/// Mean of the metric triple over the experiences of one configuration.
/// Synthetic channels draw a fresh profile per experience (seeds seed, seed+1,
/// ...); a trace is consumed in consecutive segments.
inline Datapoint run_datapoint(const SimConfig& cfg) {
  cfg.validate();
  Datapoint dp;
  if (cfg.channel.kind == ChannelSpec::Kind::Ge) {
    const auto rtt_us = static_cast<std::uint32_t>(cfg.channel.rtt_slots) * cfg.channel.slot_us;
    for (std::size_t i = 0; i < cfg.experiences; ++i) {
      const std::uint64_t seed = cfg.seed + i;
      auto prof = ge_generate(cfg.channel.ge, cfg.channel.horizon_slots, rtt_us, stream_seed(seed, 0),
                              cfg.channel.slot_us, cfg.channel.label);
      auto r = run_experience(cfg, prof, 0, seed);
      if (r.complete)
        dp.experiences.push_back(std::move(r));
      else
        ++dp.incomplete;
    }
  } else {
    const auto& prof = *cfg.channel.trace;
    std::size_t offset = 0;
    for (std::size_t i = 0; cfg.experiences == 0 || i < cfg.experiences; ++i) {
      auto r = run_experience(cfg, prof, offset, cfg.seed + i);
      if (!r.complete) {
        ++dp.incomplete;
        break;
      }
      offset += static_cast<std::size_t>(r.slots_consumed);
      dp.experiences.push_back(std::move(r));
    }
  }
  if (dp.experiences.empty()) throw std::runtime_error("no experience completed within the channel horizon");

  std::vector<double> th, md, xd;
  for (const auto& e : dp.experiences) {
    th.push_back(e.normalized_throughput);
    md.push_back(e.mean_inorder_delay_slots);
    xd.push_back(e.max_inorder_delay_slots);
  }
  dp.normalized_throughput = mean_of(th);
  dp.mean_inorder_delay_slots = mean_of(md);
  dp.max_inorder_delay_slots = mean_of(xd);
  return dp;
}

struct SweepRow {
  SimConfig config;
  std::optional<Datapoint> datapoint;
  std::string error;
  SummaryStats throughput;
  SummaryStats mean_delay;
  SummaryStats max_delay;
};

inline SweepRow summarize_datapoint(const SimConfig& cfg, Datapoint dp) {
  SweepRow row;
  row.config = cfg;
  std::vector<double> th, md, xd;
  for (const auto& e : dp.experiences) {
    th.push_back(e.normalized_throughput);
    md.push_back(e.mean_inorder_delay_slots);
    xd.push_back(e.max_inorder_delay_slots);
  }
  row.throughput = summarize(th);
  row.mean_delay = summarize(md);
  row.max_delay = summarize(xd);
  row.datapoint = std::move(dp);
  return row;
}

/// Runs every configuration, in parallel when `threads` > 1. A failing
/// configuration is reported in its row and does not stop the others; row
/// order and contents do not depend on the thread count.
inline std::vector<SweepRow> sweep(const std::vector<SimConfig>& configs, unsigned threads = 1) {
  if (configs.empty()) throw std::invalid_argument("sweep needs at least one configuration");
  std::vector<SweepRow> rows(configs.size());
  auto run_one = [&](std::size_t i) {
    try {
      rows[i] = summarize_datapoint(configs[i], run_datapoint(configs[i]));
    } catch (const std::exception& e) {
      rows[i] = SweepRow{};
      rows[i].config = configs[i];
      rows[i].error = e.what();
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) run_one(i);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) run_one(i);
      });
  }
  return rows;
}

}  // namespace swnc
