#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "swnc/gf256.hpp"

namespace swnc {

using Bytes = std::vector<std::uint8_t>;

/// Coefficients over source indices [offset, offset + elems.size()).
struct CoeffVector {
  std::size_t offset{0};
  std::vector<Gf256> elems;

  std::size_t end() const noexcept { return offset + elems.size(); }

  Gf256 at(std::size_t col) const noexcept {
    if (col < offset || col >= end()) return Gf256{};
    return elems[col - offset];
  }

  bool is_zero() const noexcept {
    for (auto e : elems)
      if (!e.is_zero()) return false;
    return true;
  }

  static CoeffVector unit(std::size_t col) { return CoeffVector{col, {Gf256{1}}}; }
};

enum class InsertResult { Innovative, Redundant };

/// Incremental Gaussian elimination kept in reduced row-echelon form.
///
/// Rows are keyed by pivot column and store coefficients starting at the
/// pivot, trimmed of trailing zeros, so a row is a unit vector exactly when it
/// holds a single coefficient.
class EliminationState {
 public:
  struct Row {
    CoeffVector coeffs;
    Bytes payload;
  };

  InsertResult insert(const CoeffVector& coeffs, std::span<const std::uint8_t> payload) {
    if (payload_len_ && *payload_len_ != payload.size())
      throw std::invalid_argument("eliminate_insert: payload length differs from earlier inserts");
    if (coeffs.elems.empty()) return InsertResult::Redundant;

    Row work{coeffs, Bytes(payload.begin(), payload.end())};
    trim(work.coeffs);
    if (work.coeffs.elems.empty()) return InsertResult::Redundant;

    // Reduce against existing pivots inside the incoming span. Pivot columns of
    // other rows are zero in every row, so the span never gains new pivots.
    const std::size_t span_end = work.coeffs.end();
    for (auto it = rows_.lower_bound(work.coeffs.offset); it != rows_.end() && it->first < span_end; ++it) {
      Gf256 c = work.coeffs.at(it->first);
      if (!c.is_zero()) axpy(work, c, it->second);
    }
    trim(work.coeffs);
    if (work.coeffs.elems.empty()) return InsertResult::Redundant;

    const std::size_t pivot = work.coeffs.offset;
    Gf256 lead_inv = gf_inv(work.coeffs.elems.front());
    for (auto& e : work.coeffs.elems) e = gf_mul(e, lead_inv);
    gf_scale(work.payload, lead_inv);

    // Clear the new pivot column from rows above it.
    for (auto it = rows_.begin(); it != rows_.end() && it->first < pivot; ++it) {
      Gf256 c = it->second.coeffs.at(pivot);
      if (!c.is_zero()) {
        axpy(it->second, c, work);
        trim(it->second.coeffs);
      }
    }

    payload_len_ = payload.size();
    rows_.emplace(pivot, std::move(work));
    return InsertResult::Innovative;
  }

  std::size_t rank() const noexcept { return rows_.size(); }

  bool is_decoded(std::size_t index) const noexcept {
    auto it = rows_.find(index);
    return it != rows_.end() && it->second.coeffs.elems.size() == 1;
  }

  /// Payload of a decoded source, if any.
  const Bytes* decoded_payload(std::size_t index) const noexcept {
    auto it = rows_.find(index);
    if (it == rows_.end() || it->second.coeffs.elems.size() != 1) return nullptr;
    return &it->second.payload;
  }

  std::vector<std::pair<std::size_t, Bytes>> decoded_packets() const {
    std::vector<std::pair<std::size_t, Bytes>> out;
    for (const auto& [pivot, row] : rows_)
      if (row.coeffs.elems.size() == 1) out.emplace_back(pivot, row.payload);
    return out;
  }

  const std::map<std::size_t, Row>& rows() const noexcept { return rows_; }

 private:
  static void trim(CoeffVector& v) {
    std::size_t lead = 0;
    while (lead < v.elems.size() && v.elems[lead].is_zero()) ++lead;
    if (lead == v.elems.size()) {
      v.elems.clear();
      return;
    }
    while (v.elems.back().is_zero()) v.elems.pop_back();
    if (lead) {
      v.elems.erase(v.elems.begin(), v.elems.begin() + static_cast<std::ptrdiff_t>(lead));
      v.offset += lead;
    }
  }

  // dst -= c * src, where src starts at or after dst's offset.
  static void axpy(Row& dst, Gf256 c, const Row& src) {
    auto& d = dst.coeffs;
    const auto& s = src.coeffs;
    if (s.end() > d.end()) d.elems.resize(s.end() - d.offset);
    for (std::size_t i = 0; i < s.elems.size(); ++i) {
      auto& e = d.elems[s.offset + i - d.offset];
      e = gf_add(e, gf_mul(c, s.elems[i]));
    }
    gf_axpy(dst.payload, c, src.payload);
  }

  std::map<std::size_t, Row> rows_;
  std::optional<std::size_t> payload_len_;
};

}  // namespace swnc
