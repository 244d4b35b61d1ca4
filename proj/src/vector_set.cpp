#include "mub6/vector_set.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <thread>

#include "mub6/certify.hpp"
#include "mub6/detail/binary_io.hpp"

namespace mub6 {

std::string_view to_string(SetKind kind) {
  switch (kind) {
    case SetKind::OrtMon: return "ort_mon";
    case SetKind::Ort: return "ort";
    case SetKind::OrtEps: return "ort_eps";
    case SetKind::UbMon: return "ub_mon";
    case SetKind::Ub: return "ub";
    case SetKind::UbEps: return "ub_eps";
    case SetKind::UbOfA: return "ub_of_a";
    case SetKind::UbOfAB: return "ub_of_ab";
  }
  return "?";
}

FeasKind feas_kind_of(SetKind kind) {
  switch (kind) {
    case SetKind::OrtMon:
    case SetKind::Ort:
    case SetKind::OrtEps: return FeasKind::Orthogonal;
    default: return FeasKind::Unbiased;
  }
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kMaxIndexBits = std::uint64_t{1} << 31;

std::uint64_t pow5(int n) {
  std::uint64_t p = 1;
  for (int k = 0; k < kFree; ++k) p *= static_cast<std::uint64_t>(n);
  return p;
}

}  // namespace

DenseIndex::DenseIndex(int n) : n_(n), words_((pow5(n) + 63) / 64, 0) {}

bool DenseIndex::fits(int n) { return pow5(n) <= kMaxIndexBits; }

DiscVec DenseIndex::decode(std::uint64_t c) const {
  DiscVec v;
  for (int k = kFree - 1; k >= 0; --k) {
    v[k] = static_cast<Bin>(c % n_);
    c /= n_;
  }
  return v;
}

std::vector<DiscVec> DenseIndex::members() const {
  std::vector<DiscVec> out;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits) {
      int b = std::countr_zero(bits);
      out.push_back(decode(w * 64 + static_cast<std::uint64_t>(b)));
      bits &= bits - 1;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

VectorSet::VectorSet(SetKind kind, int n, int depth, std::vector<DiscVec> sorted)
    : kind_(kind), n_(n), depth_(depth) {
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (!(sorted[i - 1] < sorted[i])) throw std::invalid_argument("VectorSet members must be strictly ascending");
  }
  data_ = std::make_shared<const std::vector<DiscVec>>(std::move(sorted));
}

VectorSet VectorSet::from_unsorted(SetKind kind, int n, int depth, std::vector<DiscVec> vectors) {
  std::sort(vectors.begin(), vectors.end());
  vectors.erase(std::unique(vectors.begin(), vectors.end()), vectors.end());
  return VectorSet(kind, n, depth, std::move(vectors));
}

bool VectorSet::contains_sorted(const DiscVec& v) const {
  auto span = vectors();
  return std::binary_search(span.begin(), span.end(), v);
}

std::pair<std::size_t, std::size_t> VectorSet::prefix_range(const DiscVec& prefix, int len) const {
  auto span = vectors();
  auto less_prefix = [len](const DiscVec& a, const DiscVec& b) {
    for (int k = 0; k < len; ++k) {
      if (a[k] != b[k]) return a[k] < b[k];
    }
    return false;
  };
  auto [lo, hi] = std::equal_range(span.begin(), span.end(), prefix, less_prefix);
  return {static_cast<std::size_t>(lo - span.begin()), static_cast<std::size_t>(hi - span.begin())};
}

std::size_t VectorSet::upper_bound(const DiscVec& v) const {
  auto span = vectors();
  return static_cast<std::size_t>(std::upper_bound(span.begin(), span.end(), v) - span.begin());
}

void VectorSet::build_index() {
  if (index_ || !DenseIndex::fits(n_)) return;
  auto index = std::make_shared<DenseIndex>(n_);
  for (const auto& v : vectors()) index->insert(v);
  index_ = std::move(index);
}

bool operator==(const VectorSet& a, const VectorSet& b) {
  if (a.kind_ != b.kind_ || a.n_ != b.n_ || a.depth_ != b.depth_) return false;
  auto x = a.vectors();
  auto y = b.vectors();
  return std::equal(x.begin(), x.end(), y.begin(), y.end());
}

// ---------------------------------------------------------------------------

namespace {

void mon_tuples_with_first(int first, FeasKind kind, const DiscParams& params, std::vector<DiscVec>& out) {
  const int n = params.n;
  DiscVec v;
  v[0] = static_cast<Bin>(first);
  for (int b = first; b < n; ++b) {
    v[1] = static_cast<Bin>(b);
    for (int c = b; c < n; ++c) {
      v[2] = static_cast<Bin>(c);
      for (int d = c; d < n; ++d) {
        v[3] = static_cast<Bin>(d);
        for (int e = d; e < n; ++e) {
          v[4] = static_cast<Bin>(e);
          if (descend(v, kind, params).survives) out.push_back(v);
        }
      }
    }
  }
}

// Sorted, deduplicated members from a generator, through the bitmap when it
// fits.
template <typename Emit>
std::vector<DiscVec> collect_unique(int n, std::size_t hint, Emit&& emit) {
  if (DenseIndex::fits(n)) {
    DenseIndex index(n);
    emit([&index](const DiscVec& v) { index.insert(v); });
    return index.members();
  }
  std::vector<DiscVec> out;
  out.reserve(hint);
  emit([&out](const DiscVec& v) { out.push_back(v); });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

VectorSet gen_mon(FeasKind kind, const DiscParams& params, int threads) {
  params.validate();
  const int n = params.n;
  std::vector<std::vector<DiscVec>> chunks(static_cast<std::size_t>(n));
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int first = 0; first < n; ++first) mon_tuples_with_first(first, kind, params, chunks[static_cast<std::size_t>(first)]);
  } else {
    std::vector<std::jthread> workers;
    for (int t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        for (int first = t; first < n; first += threads) {
          mon_tuples_with_first(first, kind, params, chunks[static_cast<std::size_t>(first)]);
        }
      });
    }
  }
  std::vector<DiscVec> all;
  for (auto& chunk : chunks) all.insert(all.end(), chunk.begin(), chunk.end());
  SetKind set_kind = kind == FeasKind::Orthogonal ? SetKind::OrtMon : SetKind::UbMon;
  return VectorSet(set_kind, n, params.depth, std::move(all));
}

VectorSet expand_permutations(const VectorSet& mon) {
  if (mon.kind() != SetKind::OrtMon && mon.kind() != SetKind::UbMon) {
    throw ConfigError("expand_permutations expects a _mon set, got " + std::string(to_string(mon.kind())));
  }
  auto members = collect_unique(mon.n(), mon.size() * 60, [&](auto&& sink) {
    for (DiscVec v : mon) {
      std::sort(v.bins.begin(), v.bins.end());
      do sink(v);
      while (std::next_permutation(v.bins.begin(), v.bins.end()));
    }
  });
  SetKind kind = mon.kind() == SetKind::OrtMon ? SetKind::Ort : SetKind::Ub;
  VectorSet out(kind, mon.n(), mon.depth(), std::move(members));
  out.build_index();
  return out;
}

VectorSet expand_eps(const VectorSet& full) {
  if (full.kind() != SetKind::Ort && full.kind() != SetKind::Ub) {
    throw ConfigError("expand_eps expects a full set, got " + std::string(to_string(full.kind())));
  }
  const int n = full.n();
  auto members = collect_unique(n, full.size() * 32, [&](auto&& sink) {
    for (const DiscVec& base : full) {
      for (unsigned eps = 0; eps < 32; ++eps) {
        DiscVec v = base;
        for (int k = 0; k < kFree; ++k) {
          if (eps >> k & 1U) v[k] = static_cast<Bin>(v[k] + 1 == n ? 0 : v[k] + 1);
        }
        sink(v);
      }
    }
  });
  SetKind kind = full.kind() == SetKind::Ort ? SetKind::OrtEps : SetKind::UbEps;
  VectorSet out(kind, n, full.depth(), std::move(members));
  out.build_index();
  return out;
}

bool contains(const VectorSet& set, const DiscVec& v) { return set.contains(v); }

namespace {

void require_same_params(const VectorSet& a, const VectorSet& b) {
  if (a.n() != b.n() || a.depth() != b.depth()) {
    throw ParamMismatch("set parameters disagree: " + std::string(to_string(a.kind())) + " n=" + std::to_string(a.n()) +
                      " depth=" + std::to_string(a.depth()) + " vs " + std::string(to_string(b.kind())) +
                      " n=" + std::to_string(b.n()) + " depth=" + std::to_string(b.depth()));
  }
}

}  // namespace

VectorSet ub_of_a(const DiscMat& a, const VectorSet& ub_full, const VectorSet& ub_eps) {
  require_same_params(ub_full, ub_eps);
  const int n = ub_full.n();
  std::vector<DiscVec> kept;
  for (const DiscVec& v : ub_full) {
    bool ok = true;
    for (int r = 1; r < kDim && ok; ++r) ok = ub_eps.contains(vec_diff_mod_n(v, a.rows[static_cast<std::size_t>(r)], n));
    if (ok) kept.push_back(v);
  }
  return VectorSet(SetKind::UbOfA, n, ub_full.depth(), std::move(kept));
}

VectorSet ub_of_ab(std::span<const DiscVec> b_rows, const VectorSet& ub_a, const VectorSet& ub_eps) {
  require_same_params(ub_a, ub_eps);
  const int n = ub_a.n();
  std::vector<DiscVec> kept;
  for (const DiscVec& v : ub_a) {
    bool ok = std::all_of(b_rows.begin(), b_rows.end(),
                          [&](const DiscVec& b) { return ub_eps.contains(vec_diff_mod_n(v, b, n)); });
    if (ok) kept.push_back(v);
  }
  return VectorSet(SetKind::UbOfAB, n, ub_a.depth(), std::move(kept));
}

// ---------------------------------------------------------------------------

void write_set(std::ostream& out, const VectorSet& set) {
  out.write("MUB6SET1", 8);
  detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(set.kind()));
  detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(set.n()));
  detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(set.depth()));
  detail::put_le<std::uint64_t>(out, set.size());
  for (const auto& v : set) detail::put_vec(out, v);
}

void write_set(const std::string& path, const VectorSet& set) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_set(out, set);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

VectorSet read_set(std::istream& in) {
  if (!detail::read_magic(in, "MUB6SET1")) throw CorruptionError("bad set file magic", 0);
  std::uint8_t kind_code = 0, depth = 0;
  std::uint16_t n = 0;
  std::uint64_t count = 0;
  if (!detail::get_le(in, kind_code)) throw CorruptionError("truncated header", 8);
  if (kind_code > 7) throw CorruptionError("unknown set kind " + std::to_string(kind_code), 8);
  if (!detail::get_le(in, n)) throw CorruptionError("truncated header", 9);
  if (n < 2) throw CorruptionError("invalid n " + std::to_string(n), 9);
  if (!detail::get_le(in, depth)) throw CorruptionError("truncated header", 11);
  if (!detail::get_le(in, count)) throw CorruptionError("truncated header", 12);

  constexpr std::uint64_t kRecord = 2 * kFree;
  std::vector<DiscVec> vectors;
  vectors.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 24)));
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t offset = kSetHeaderSize + i * kRecord;
    DiscVec v;
    if (!detail::get_vec(in, v)) throw CorruptionError("truncated body: expected " + std::to_string(count) + " records", offset);
    for (int k = 0; k < kFree; ++k) {
      if (v[k] >= n) throw CorruptionError("bin out of range in record " + std::to_string(i), offset + 2 * std::uint64_t(k));
    }
    if (!vectors.empty() && !(vectors.back() < v)) {
      throw CorruptionError("records not strictly ascending at record " + std::to_string(i), offset);
    }
    vectors.push_back(v);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw CorruptionError("trailing bytes after " + std::to_string(count) + " records", kSetHeaderSize + count * kRecord);
  }
  VectorSet set(static_cast<SetKind>(kind_code), n, depth, std::move(vectors));
  if (set.kind() != SetKind::UbOfA && set.kind() != SetKind::UbOfAB) set.build_index();
  return set;
}

VectorSet read_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_set(in);
}

std::string set_file_name(SetKind kind, const DiscParams& params) {
  return std::string(to_string(kind)) + "_n" + std::to_string(params.n) + "_d" + std::to_string(params.depth) + ".set";
}

}  // namespace mub6
