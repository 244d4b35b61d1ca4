#pragma once

// Sorted, deduplicated collections of discretized vectors.
//
//   OrtMon / UbMon   non-decreasing members that pass the descent filter
//   Ort / Ub         all permutations of the _mon members
//   OrtEps / UbEps   every member shifted by eps in {0,1}^5 (mod n); a bin
//                    difference u - v (mod n) lies here iff the two inexact
//                    vectors may be orthogonal (resp. unbiased)
//   UbOfA / UbOfAB   members of Ub unbiased to all rows of a fixed A (and B)

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mub6/core.hpp"

namespace mub6 {

enum class SetKind : std::uint8_t { OrtMon = 0, Ort = 1, OrtEps = 2, UbMon = 3, Ub = 4, UbEps = 5, UbOfA = 6, UbOfAB = 7 };

std::string_view to_string(SetKind kind);
FeasKind feas_kind_of(SetKind kind);

/// Malformed or tampered file contents; carries the byte offset of the
/// first problem.
class CorruptionError : public std::runtime_error {
 public:
  CorruptionError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Bitmap over the base-n codes of all n^5 vectors; used for O(1)
/// membership when n^5 is small enough.
class DenseIndex {
 public:
  explicit DenseIndex(int n);

  static bool fits(int n);

  void insert(const DiscVec& v) {
    auto c = code(v);
    words_[c >> 6] |= std::uint64_t{1} << (c & 63);
  }
  bool contains(const DiscVec& v) const {
    auto c = code(v);
    return (words_[c >> 6] >> (c & 63)) & 1U;
  }
  std::uint64_t code(const DiscVec& v) const {
    std::uint64_t c = 0;
    for (int k = 0; k < kFree; ++k) c = c * n_ + v[k];
    return c;
  }
  DiscVec decode(std::uint64_t c) const;

  /// Members in ascending (lexicographic) order.
  std::vector<DiscVec> members() const;

 private:
  int n_;
  std::vector<std::uint64_t> words_;
};

class VectorSet {
 public:
  VectorSet() = default;

  /// `sorted` must be strictly ascending; throws std::invalid_argument otherwise.
  VectorSet(SetKind kind, int n, int depth, std::vector<DiscVec> sorted);

  static VectorSet from_unsorted(SetKind kind, int n, int depth, std::vector<DiscVec> vectors);

  SetKind kind() const { return kind_; }
  int n() const { return n_; }
  int depth() const { return depth_; }
  DiscParams params() const { return {n_, depth_}; }

  std::size_t size() const { return data_ ? data_->size() : 0; }
  bool empty() const { return size() == 0; }
  std::span<const DiscVec> vectors() const {
    return data_ ? std::span<const DiscVec>(*data_) : std::span<const DiscVec>{};
  }
  auto begin() const { return vectors().begin(); }
  auto end() const { return vectors().end(); }
  const DiscVec& operator[](std::size_t i) const { return (*data_)[i]; }

  bool contains(const DiscVec& v) const { return index_ ? index_->contains(v) : contains_sorted(v); }

  /// Members whose first `len` bins equal those of `prefix`, as a contiguous
  /// index range [first, last).
  std::pair<std::size_t, std::size_t> prefix_range(const DiscVec& prefix, int len) const;

  /// Index of the first member strictly greater than v.
  std::size_t upper_bound(const DiscVec& v) const;

  /// Builds the bitmap membership index if n^5 allows it. Sets produced by
  /// the generators below already carry one when they are of kind Ort, Ub or
  /// the eps kinds.
  void build_index();
  bool has_index() const { return index_ != nullptr; }

  friend bool operator==(const VectorSet& a, const VectorSet& b);

 private:
  bool contains_sorted(const DiscVec& v) const;

  SetKind kind_ = SetKind::Ort;
  int n_ = 0;
  int depth_ = 0;
  std::shared_ptr<const std::vector<DiscVec>> data_;
  std::shared_ptr<const DenseIndex> index_;
};

/// Sorted non-decreasing 5-tuples that survive `descend`. Work is split over
/// `threads` workers by first bin and merged in order, so the result does not
/// depend on the thread count.
VectorSet gen_mon(FeasKind kind, const DiscParams& params, int threads = 1);

/// Union of all coordinate permutations of the members of a _mon set.
VectorSet expand_permutations(const VectorSet& mon);

/// All shifts u + eps (mod n), eps in {0,1}^5, of members u of a full set.
VectorSet expand_eps(const VectorSet& full);

bool contains(const VectorSet& set, const DiscVec& v);

/// Members v of ub_full with v - a_r (mod n) in ub_eps for rows r = 1..5.
VectorSet ub_of_a(const DiscMat& a, const VectorSet& ub_full, const VectorSet& ub_eps);

/// Members v of ub_a with v - b_r (mod n) in ub_eps for all six rows of b.
VectorSet ub_of_ab(std::span<const DiscVec> b_rows, const VectorSet& ub_a, const VectorSet& ub_eps);

// Set file format: "MUB6SET1", kind (u8), n (u16 LE), depth (u8),
// count (u64 LE), then count records of five u16 LE bins, ascending.
inline constexpr std::size_t kSetHeaderSize = 8 + 1 + 2 + 1 + 8;

void write_set(std::ostream& out, const VectorSet& set);
void write_set(const std::string& path, const VectorSet& set);

/// Throws CorruptionError on bad magic, truncated data, out-of-range bins
/// or records that are not strictly ascending.
VectorSet read_set(std::istream& in);
VectorSet read_set(const std::string& path);

/// Conventional file name, e.g. "ort_eps_n17_d8.set".
std::string set_file_name(SetKind kind, const DiscParams& params);

}  // namespace mub6
