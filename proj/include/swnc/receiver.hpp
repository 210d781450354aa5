#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "swnc/elimination.hpp"
#include "swnc/packet.hpp"

namespace swnc {

/// Decoder for every coded scheme, and for selective-repeat ARQ (unit vectors).
class CodedReceiver {
 public:
  explicit CodedReceiver(std::size_t n_packets) : n_packets_{n_packets} {}

  FeedbackMsg receive(const CodedPacket& pkt) {
    state_.insert(pkt.coeffs, pkt.payload);
    while (decoded_upto_ < n_packets_ && state_.is_decoded(decoded_upto_ + 1)) ++decoded_upto_;
    return FeedbackMsg{pkt.tx_slot, state_.rank(), decoded_upto_, true};
  }

  std::size_t decoded_upto() const noexcept { return decoded_upto_; }
  std::size_t rank() const noexcept { return state_.rank(); }
  const Bytes* payload(std::size_t index) const noexcept { return state_.decoded_payload(index); }

 private:
  std::size_t n_packets_;
  std::size_t decoded_upto_{0};
  EliminationState state_;
};

/// Go-back-N receiver: keeps only the next expected packet and acknowledges
/// cumulatively.
class GoBackNReceiver {
 public:
  explicit GoBackNReceiver(std::size_t n_packets) : n_packets_{n_packets} { payloads_.reserve(n_packets); }

  FeedbackMsg receive(const CodedPacket& pkt) {
    if (pkt.coeffs.elems.size() == 1 && pkt.coeffs.offset == decoded_upto_ + 1 && decoded_upto_ < n_packets_) {
      payloads_.push_back(pkt.payload);
      if (pkt.coeffs.elems.front().value != 1) gf_scale(payloads_.back(), gf_inv(pkt.coeffs.elems.front()));
      ++decoded_upto_;
    }
    return FeedbackMsg{pkt.tx_slot, decoded_upto_, decoded_upto_, true};
  }

  std::size_t decoded_upto() const noexcept { return decoded_upto_; }
  const Bytes* payload(std::size_t index) const noexcept {
    if (index == 0 || index > decoded_upto_) return nullptr;
    return &payloads_[index - 1];
  }

 private:
  std::size_t n_packets_;
  std::size_t decoded_upto_{0};
  std::vector<Bytes> payloads_;
};

}  // namespace swnc
