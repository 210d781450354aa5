#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "swnc/elimination.hpp"
#include "swnc/gf256.hpp"
#include "swnc/random.hpp"

namespace swnc {

/// Source indices are 1-based, matching decoded_upto = 0 meaning "nothing yet".
struct SourcePacket {
  std::size_t index{1};
  Bytes payload;
};

enum class PacketKind { NewInfo, Repeat, AprioriFEC, AposterioriFEC, Uncoded };

constexpr std::string_view to_string(PacketKind k) noexcept {
  switch (k) {
    case PacketKind::NewInfo: return "new";
    case PacketKind::Repeat: return "repeat";
    case PacketKind::AprioriFEC: return "apriori_fec";
    case PacketKind::AposterioriFEC: return "aposteriori_fec";
    case PacketKind::Uncoded: return "uncoded";
  }
  return "?";
}

struct CodedPacket {
  CoeffVector coeffs;  // coeffs.offset is w_min
  Bytes payload;
  PacketKind kind{PacketKind::NewInfo};
  std::int64_t tx_slot{0};

  std::size_t w_min() const noexcept { return coeffs.offset; }
  std::size_t w_max() const noexcept { return coeffs.end() - 1; }
};

struct FeedbackMsg {
  std::int64_t tx_slot_echo{0};
  std::size_t seen_dof{0};
  std::size_t decoded_upto{0};
  bool is_ack{true};
};

/// Linear combination of a contiguous window of sources. The window's first
/// index becomes the packet's w_min.
inline CodedPacket encode(std::span<const SourcePacket> window, const CoeffVector& coeffs) {
  if (window.empty()) throw std::invalid_argument("encode: empty window");
  if (coeffs.elems.size() != window.size())
    throw std::invalid_argument("encode: coefficient count does not match window length");
  CodedPacket pkt;
  pkt.coeffs = CoeffVector{window.front().index, coeffs.elems};
  pkt.payload.assign(window.front().payload.size(), 0);
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (window[i].payload.size() != pkt.payload.size())
      throw std::invalid_argument("encode: source payloads differ in length");
    gf_axpy(pkt.payload, coeffs.elems[i], window[i].payload);
  }
  return pkt;
}

/// Uniform coefficients over all of GF(2^8); all-zero draws are redrawn.
inline CoeffVector random_coeffs(Rng& rng, std::size_t offset, std::size_t len) {
  CoeffVector v{offset, std::vector<Gf256>(len)};
  do {
    for (auto& e : v.elems) e = Gf256{static_cast<std::uint8_t>(rng() >> 56)};
  } while (v.is_zero());
  return v;
}

}  // namespace swnc
