#include <gtest/gtest.h>

#include "swnc/engine.hpp"

using namespace swnc;

TEST(Estimator, NoHistoryGivesPrior) {
  std::vector<std::uint8_t> acked(10, 0);
  auto e = update_channel_estimate(acked, 16, 16, 2.0);
  EXPECT_EQ(e.eps_mean, 0.0);
  EXPECT_EQ(e.eps_max, 0.0);
}

TEST(Estimator, AllAckedMeansNoErasure) {
  std::vector<std::uint8_t> acked(200, 1);
  auto e = update_channel_estimate(acked, 116, 16, 3.0);
  EXPECT_EQ(e.eps_mean, 0.0);
  EXPECT_EQ(e.nu, 0.0);
  EXPECT_EQ(e.eps_max, 0.0);
}

TEST(Estimator, MeanFromAckCount) {
  // 90 of the 100 slots older than one RTT acknowledged.
  std::vector<std::uint8_t> acked(116, 1);
  for (int j = 0; j < 10; ++j) acked[static_cast<std::size_t>(j * 7)] = 0;
  auto e = update_channel_estimate(acked, 116, 16, 0.0);
  EXPECT_NEAR(e.eps_mean, 0.1, 1e-12);
}

TEST(Estimator, DeviationRule) {
  // eps_mean = 0.1, nu = 1.44 (window of 16 with indicator variance 0.09),
  // alpha = 3 -> 0.1 + 3 * 1.2 / 16.
  double eps = 0.1, nu = 1.44, rtt = 16, alpha = 3;
  EXPECT_NEAR(eps + alpha * std::sqrt(nu) / rtt, 0.325, 1e-12);
  DelayBoundInput in{eps, nu, rtt, alpha, 0, 0, 0.17};
  EXPECT_NEAR(eps_max_alpha(in), 0.325, 1e-12);
}

TEST(Estimator, WindowVarianceUsesLastRtt) {
  std::vector<std::uint8_t> acked(40, 1);
  // Last 4 known slots (t=12, rtt=4 -> known 0..7, window 4..7): two losses.
  acked[5] = 0;
  acked[6] = 0;
  auto e = update_channel_estimate(acked, 12, 4, 1.0);
  EXPECT_NEAR(e.eps_mean, 2.0 / 8.0, 1e-12);
  EXPECT_NEAR(e.nu, 0.25 * 4.0, 1e-12);
  EXPECT_NEAR(e.eps_max, 0.25 + 1.0 / 4.0, 1e-12);
}

TEST(Estimator, EpsMaxClamped) {
  std::vector<std::uint8_t> acked(40, 0);
  for (std::size_t j = 0; j < 40; j += 2) acked[j] = 1;
  auto e = update_channel_estimate(acked, 30, 4, 100.0);
  EXPECT_EQ(e.eps_max, 1.0);
}

TEST(Decision, Examples) {
  EXPECT_EQ(aswrlnc_decide(0.5, 0.3, 0.1, false, true), Decision::SendNew);
  EXPECT_EQ(aswrlnc_decide(0.5, 0.45, 0.1, false, true), Decision::SendSame);
  EXPECT_EQ(aswrlnc_decide(0.0, 0.0, 0.0, false, true), Decision::SendNew);
  EXPECT_EQ(aswrlnc_decide(0.0, 0.0, 0.0, true, true), Decision::SendSame);
  EXPECT_EQ(aswrlnc_decide(0.0, 0.0, 0.0, false, false), Decision::SendSame);
}

TEST(Decision, RaisingEpsMaxNeverFlipsToNew) {
  for (double d = 0; d <= 1.0; d += 0.05)
    for (double th = 0; th <= 0.5; th += 0.1) {
      bool seen_same = false;
      for (double e = 0; e <= 1.0; e += 0.01) {
        auto dec = aswrlnc_decide(d, e, th, false, true);
        if (seen_same) {
          ASSERT_EQ(dec, Decision::SendSame);
        }
        seen_same = seen_same || dec == Decision::SendSame;
      }
    }
}

TEST(Decision, DofRatioGuardsZero) {
  EXPECT_EQ(dof_ratio(3, 0), 3.0);
  EXPECT_EQ(dof_ratio(3, 6), 0.5);
}

TEST(Apriori, Counts) {
  EXPECT_EQ(apriori_fec_count(10, 0.2), 3u);
  EXPECT_EQ(apriori_fec_count(10, 0.0), 0u);
  EXPECT_EQ(apriori_fec_count(16, 0.1), 2u);
  EXPECT_EQ(apriori_fec_count(10, 0.6), 10u);
}

TEST(SchemeNames, ParseAndPrint) {
  EXPECT_EQ(parse_scheme("asw"), Scheme::Asw);
  EXPECT_EQ(parse_scheme("udp"), Scheme::Arq);
  EXPECT_EQ(to_string(Scheme::Rrlnc), "R-RLNC");
  EXPECT_THROW(parse_scheme("tcp"), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Scheme behaviour through the engine on hand-built profiles
// ---------------------------------------------------------------------------

namespace {

ChannelProfile profile(std::size_t n, std::uint32_t rtt_slots, std::initializer_list<std::size_t> lost = {}) {
  ChannelProfile p;
  p.label = "test";
  p.records.assign(n, SlotRecord{rtt_slots * default_slot_us, false});
  for (auto s : lost) p.records[s].lost = true;
  return p;
}

SimConfig config(Scheme s, std::size_t n = 100) {
  SimConfig c;
  c.scheme = s;
  c.n_packets = n;
  c.packet_bytes = 8;
  c.channel.kind = ChannelSpec::Kind::Trace;
  return c;
}

ExperienceResult run(const SimConfig& c, const ChannelProfile& p) {
  SimConfig cc = c;
  cc.channel.trace = std::make_shared<const ChannelProfile>(p);
  return run_experience(cc, p, 0, 1);
}

}  // namespace

TEST(ArqScheme, LosslessIsExactlyN) {
  auto r = run(config(Scheme::Arq), profile(2000, 16));
  ASSERT_TRUE(r.complete);
  EXPECT_EQ(r.transmissions, 100u);
  EXPECT_EQ(r.normalized_throughput, 1.0);
  EXPECT_EQ(r.kind_counts[PacketKind::Uncoded], 100u);
}

TEST(ArqScheme, FirstPacketLossWaitsForTimeout) {
  auto c = config(Scheme::Arq, 20);
  auto r = run(c, profile(2000, 16, {0}));
  ASSERT_TRUE(r.complete);
  const double t_o = 2 * 16;
  EXPECT_GE(r.per_packet_delays[0], t_o);
  // Retransmitted at slot 1 + t_o, decoded one slot later.
  EXPECT_EQ(r.per_packet_delays[0], 1 + t_o + 1);
}

TEST(ArqScheme, SelectiveModeRetransmitsOnlyLostPacket) {
  auto c = config(Scheme::Arq, 20);
  c.arq.mode = ArqMode::Selective;
  auto r = run(c, profile(2000, 16, {3}));
  ASSERT_TRUE(r.complete);
  EXPECT_EQ(r.transmissions, 21u);
}

TEST(ArqScheme, GoBackNResendsTail) {
  auto c = config(Scheme::Arq, 20);
  auto r = run(c, profile(2000, 16, {3}));
  ASSERT_TRUE(r.complete);
  EXPECT_GT(r.transmissions, 21u);
}

TEST(RrlncScheme, LosslessBatchDelayAtLeastBatchMinusOne) {
  auto c = config(Scheme::Rrlnc);
  auto r = run(c, profile(5000, 16));
  ASSERT_TRUE(r.complete);
  for (std::size_t b = 0; b < 10; ++b) EXPECT_GE(r.per_packet_delays[b * 10], 9.0);
  EXPECT_LE(r.transmissions, 110u);
}

TEST(RrlncScheme, LostPacketTriggersAnotherRound) {
  auto c = config(Scheme::Rrlnc, 10);
  auto r = run(c, profile(5000, 16, {4}));
  ASSERT_TRUE(r.complete);
  EXPECT_EQ(r.kind_counts[PacketKind::NewInfo], 10u);
  EXPECT_GE(r.kind_counts[PacketKind::Repeat], 1u);
}

TEST(FswScheme, FixedRedundancyOnLossless) {
  auto c = config(Scheme::Fsw);
  auto r = run(c, profile(5000, 16));
  ASSERT_TRUE(r.complete);
  EXPECT_EQ(r.kind_counts[PacketKind::NewInfo], 100u);
  // The FEC owed after the last source is never sent: the receiver is done.
  EXPECT_EQ(r.kind_counts[PacketKind::AprioriFEC], 24u);
  EXPECT_LE(r.normalized_throughput, 100.0 / 124.0 + 1e-12);
}

TEST(FswScheme, RedundancyOffIsSequential) {
  auto c = config(Scheme::Fsw);
  c.fsw.k = 0;
  auto r = run(c, profile(5000, 16));
  ASSERT_TRUE(r.complete);
  EXPECT_EQ(r.normalized_throughput, 1.0);
}

TEST(AswScheme, LosslessSendsOnlyNewPackets) {
  auto c = config(Scheme::Asw);
  auto r = run(c, profile(5000, 16));
  ASSERT_TRUE(r.complete);
  EXPECT_EQ(r.normalized_throughput, 1.0);
  EXPECT_EQ(r.kind_counts.count(PacketKind::AprioriFEC), 0u);
  for (double d : r.per_packet_delays) {
    EXPECT_GE(d, 1.0);
    EXPECT_LE(d, 16.0);
  }
}

TEST(AswScheme, RepairsSingleLoss) {
  auto c = config(Scheme::Asw);
  auto r = run(c, profile(5000, 16, {10}));
  ASSERT_TRUE(r.complete);
  EXPECT_GE(r.transmissions, 101u);
}

TEST(AswScheme, SenderWindowNeverPassesReceiver) {
  // Drive the sender and a receiver by hand over a lossy profile.
  auto prof = ge_generate(GeParams{0.3, 0.05, 0, 1}, 4000, 8 * default_slot_us, 17);
  auto sources = make_sources(60, 4, 2);
  Rng rng{3};
  AswSender tx(sources, rng, 16, 8, AswParams{});
  CodedReceiver rx(60);
  std::vector<std::pair<std::int64_t, FeedbackMsg>> fb;
  std::vector<std::pair<std::int64_t, CodedPacket>> inflight;
  for (std::int64_t t = 0; t < 4000 && rx.decoded_upto() < 60; ++t) {
    for (auto it = inflight.begin(); it != inflight.end();) {
      if (it->first <= t) {
        fb.push_back({it->second.tx_slot + 8, rx.receive(it->second)});
        it = inflight.erase(it);
      } else {
        ++it;
      }
    }
    for (auto it = fb.begin(); it != fb.end();) {
      if (it->first <= t) {
        tx.on_feedback(it->second, t);
        it = fb.erase(it);
      } else {
        ++it;
      }
    }
    ASSERT_LE(tx.w_min(), rx.decoded_upto() + 1);
    auto pkt = tx.step(t);
    if (pkt && !prof.records[static_cast<std::size_t>(t)].lost) inflight.push_back({t + 1, *pkt});
  }
  EXPECT_EQ(rx.decoded_upto(), 60u);
}
