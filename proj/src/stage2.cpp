#include "mub6/stage2.hpp"

#include <fstream>

#include "mub6/detail/binary_io.hpp"

namespace mub6 {

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Contradiction: return "contradiction";
    case Verdict::ExtensionFound: return "extension_found";
    case Verdict::Unresolved: return "unresolved";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;
using Index = std::uint32_t;
using Candidates = std::vector<Index>;

// Pair predicates over the members of UB_A, evaluated on demand: the full
// pair graphs are quadratic in |UB_A| and too slow to precompute.
struct PairTests {
  std::span<const DiscVec> members;
  const VectorSet& ort_eps;
  const VectorSet* ub_eps;
  int n;

  // i < j
  bool orthogonal(Index i, Index j) const { return ort_eps.contains(vec_diff_mod_n(members[j], members[i], n)); }
  // row c of C against row b of B
  bool unbiased(Index c, Index b) const { return ub_eps->contains(vec_diff_mod_n(members[c], members[b], n)); }
};

template <typename F>
void for_each_in_order(const Candidates& list, SearchOrder order, F&& f) {
  if (order == SearchOrder::Forward) {
    for (std::size_t k = 0; k < list.size(); ++k) {
      if (!f(k)) return;
    }
  } else {
    for (std::size_t k = list.size(); k-- > 0;) {
      if (!f(k)) return;
    }
  }
}

// 6-subsets with every pair orthogonal, rows ascending.
class CliqueSearch {
 public:
  CliqueSearch(const PairTests& tests, SearchOrder order) : tests_(tests), order_(order) {}

  template <typename Visit>
  void run(Visit&& visit) {
    Candidates all(tests_.members.size());
    for (Index i = 0; i < all.size(); ++i) all[i] = i;
    extend(all, 0, visit);
  }

  int deepest() const { return deepest_; }

 private:
  // candidates are all > the last chosen row and orthogonal to every chosen row
  template <typename Visit>
  bool extend(const Candidates& candidates, int depth, Visit& visit) {
    deepest_ = std::max(deepest_, depth);
    if (depth == kDim) return visit(chosen_);
    if (candidates.size() < static_cast<std::size_t>(kDim - depth)) return true;
    bool go_on = true;
    for_each_in_order(candidates, order_, [&](std::size_t k) {
      if (candidates.size() - k < static_cast<std::size_t>(kDim - depth)) return true;
      const Index v = candidates[k];
      Candidates next;
      for (std::size_t q = k + 1; q < candidates.size(); ++q) {
        if (tests_.orthogonal(v, candidates[q])) next.push_back(candidates[q]);
      }
      chosen_[static_cast<std::size_t>(depth)] = v;
      go_on = extend(next, depth + 1, visit);
      return go_on;
    });
    return go_on;
  }

  const PairTests& tests_;
  SearchOrder order_;
  std::array<Index, kDim> chosen_{};
  int deepest_ = 0;
};

BasisRows rows_of(std::span<const DiscVec> members, const std::array<Index, kDim>& idx) {
  BasisRows rows;
  for (std::size_t k = 0; k < rows.size(); ++k) rows[k] = members[idx[k]];
  return rows;
}

// Joint search for B and C inside UB_A. Rows of each are chosen in ascending
// order; B holds the smallest row of B and C (the two are interchangeable).
// Each step extends the side with fewer spare candidates, and filters both
// candidate lists against the new row.
class ExtensionSearch {
 public:
  ExtensionSearch(const PairTests& tests, SearchOrder order, Clock::time_point deadline)
      : tests_(tests), order_(order), deadline_(deadline) {}

  void run() {
    const Index m = static_cast<Index>(tests_.members.size());
    auto visit_root = [&](Index b1) {
      if (out_of_time()) return false;
      Candidates pb, pc;
      for (Index w = b1 + 1; w < m; ++w) {
        if (tests_.orthogonal(b1, w)) pb.push_back(w);
      }
      if (pb.size() < kDim - 1) return true;
      for (Index w = b1 + 1; w < m; ++w) {
        if (tests_.unbiased(w, b1)) pc.push_back(w);
      }
      b_[0] = b1;
      extend(pb, pc, 1, 0);
      return !found_ && !timed_out_;
    };
    if (order_ == SearchOrder::Forward) {
      for (Index b1 = 0; b1 < m && visit_root(b1);) ++b1;
    } else {
      for (Index b1 = m; b1-- > 0 && visit_root(b1);) {
      }
    }
  }

  bool found() const { return found_; }
  bool timed_out() const { return timed_out_; }
  std::uint64_t b_attempts() const { return b_attempts_; }
  int max_c_rows() const { return max_c_rows_; }
  Extension witness() const {
    return {rows_of(tests_.members, b_), rows_of(tests_.members, c_)};
  }

 private:
  bool out_of_time() {
    if (!timed_out_ && (++clock_checks_ & 0x3FF) == 0 && Clock::now() > deadline_) timed_out_ = true;
    return timed_out_;
  }

  void extend(const Candidates& pb, const Candidates& pc, int nb, int nc) {
    if (nb == kDim && nc == kDim) {
      found_ = true;
      return;
    }
    if (out_of_time()) return;
    const std::size_t need_b = static_cast<std::size_t>(kDim - nb);
    const std::size_t need_c = static_cast<std::size_t>(kDim - nc);
    if (pb.size() < need_b || pc.size() < need_c) return;
    const bool grow_b = need_c == 0 || (need_b > 0 && pb.size() - need_b <= pc.size() - need_c);

    const Candidates& own = grow_b ? pb : pc;
    const Candidates& other = grow_b ? pc : pb;
    const std::size_t need = grow_b ? need_b : need_c;
    for_each_in_order(own, order_, [&](std::size_t k) {
      if (own.size() - k < need) return true;
      const Index v = own[k];
      Candidates next_own, next_other;
      for (std::size_t q = k + 1; q < own.size(); ++q) {
        if (tests_.orthogonal(v, own[q])) next_own.push_back(own[q]);
      }
      if (next_own.size() + 1 < need) return true;
      for (Index w : other) {
        if (grow_b ? tests_.unbiased(w, v) : tests_.unbiased(v, w)) next_other.push_back(w);
      }
      if (grow_b) {
        b_[static_cast<std::size_t>(nb)] = v;
        if (nb + 1 == kDim) ++b_attempts_;
        extend(next_own, next_other, nb + 1, nc);
      } else {
        c_[static_cast<std::size_t>(nc)] = v;
        max_c_rows_ = std::max(max_c_rows_, nc + 1);
        extend(next_other, next_own, nb, nc + 1);
      }
      return !found_ && !timed_out_;
    });
  }

  const PairTests& tests_;
  SearchOrder order_;
  Clock::time_point deadline_;
  std::array<Index, kDim> b_{};
  std::array<Index, kDim> c_{};
  bool found_ = false;
  bool timed_out_ = false;
  std::uint64_t clock_checks_ = 0;
  std::uint64_t b_attempts_ = 0;
  int max_c_rows_ = 0;
};

void require_stage2_sets(const SetBundle& sets) {
  if (!sets.has_unbiased() || sets.ort_eps.empty()) throw ConfigError("stage 2 needs ort_eps, ub and ub_eps");
  sets.check_consistent();
}

}  // namespace

void build_b(const VectorSet& ub_a, const VectorSet& ort_eps, const std::function<bool(const BasisRows&)>& visit,
             SearchOrder order) {
  if (ub_a.params() != ort_eps.params()) throw ParamMismatch("build_b: set parameters disagree");
  PairTests tests{ub_a.vectors(), ort_eps, nullptr, ub_a.n()};
  CliqueSearch search(tests, order);
  search.run([&](const auto& idx) { return visit(rows_of(tests.members, idx)); });
}

std::optional<BasisRows> build_c(const VectorSet& ub_ab, const VectorSet& ort_eps, SearchOrder order, int* max_rows) {
  if (ub_ab.params() != ort_eps.params()) throw ParamMismatch("build_c: set parameters disagree");
  PairTests tests{ub_ab.vectors(), ort_eps, nullptr, ub_ab.n()};
  CliqueSearch search(tests, order);
  std::optional<BasisRows> found;
  search.run([&](const auto& idx) {
    found = rows_of(tests.members, idx);
    return false;
  });
  if (max_rows) *max_rows = search.deepest();
  return found;
}

ContradictionCertificate process_a(const DiscMat& a, const SetBundle& sets, const Stage2Options& options) {
  require_stage2_sets(sets);
  const auto start = Clock::now();

  ContradictionCertificate cert;
  cert.a = a;
  cert.params = sets.params;

  const VectorSet ub_a = ub_of_a(a, sets.ub, sets.ub_eps);
  cert.ub_a_size = ub_a.size();

  PairTests tests{ub_a.vectors(), sets.ort_eps, &sets.ub_eps, sets.params.n};
  ExtensionSearch search(tests, options.order, start + options.budget);
  search.run();

  cert.b_attempts = search.b_attempts();
  cert.max_c_rows = static_cast<std::uint64_t>(search.max_c_rows());
  if (search.found()) {
    cert.verdict = Verdict::ExtensionFound;
    cert.witness = search.witness();
  } else {
    cert.verdict = search.timed_out() ? Verdict::Unresolved : Verdict::Contradiction;
  }
  cert.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  return cert;
}

// ---------------------------------------------------------------------------

namespace {

std::string row_name(char matrix, int k) { return std::string(1, matrix) + "[" + std::to_string(k) + "]"; }

std::string check_basis(const BasisRows& rows, char name, const VectorSet& ort_eps, int n) {
  for (int k = 1; k < kDim; ++k) {
    if (!(rows[static_cast<std::size_t>(k - 1)] < rows[static_cast<std::size_t>(k)])) {
      return name + std::string(" rows not strictly ascending at ") + row_name(name, k);
    }
  }
  for (int k = 0; k < kDim; ++k) {
    for (int j = 0; j < k; ++j) {
      DiscVec d = vec_diff_mod_n(rows[static_cast<std::size_t>(k)], rows[static_cast<std::size_t>(j)], n);
      if (!ort_eps.contains(d)) {
        return row_name(name, k) + " - " + row_name(name, j) + " = " + to_string(d) + " not in ort_eps";
      }
    }
  }
  return {};
}

std::string check_unbiased_to(const DiscVec& v, const std::string& v_name, std::span<const DiscVec> others,
                              char other_name, int first_row, const VectorSet& ub_eps, int n) {
  for (std::size_t r = static_cast<std::size_t>(first_row); r < others.size(); ++r) {
    DiscVec d = vec_diff_mod_n(v, others[r], n);
    if (!ub_eps.contains(d)) {
      return v_name + " - " + row_name(other_name, static_cast<int>(r)) + " = " + to_string(d) + " not in ub_eps";
    }
  }
  return {};
}

}  // namespace

RecheckResult recheck_certificate(const ContradictionCertificate& cert, const SetBundle& sets) {
  require_stage2_sets(sets);
  if (cert.params != sets.params) return {false, "certificate parameters differ from the set parameters"};
  const int n = sets.params.n;

  if (cert.verdict == Verdict::ExtensionFound) {
    if (!cert.witness) return {false, "extension_found without a witness"};
    const auto& [b, c] = *cert.witness;
    const std::span<const DiscVec> a_rows(cert.a.rows);
    for (auto [rows, name] : {std::pair{&b, 'B'}, std::pair{&c, 'C'}}) {
      for (int k = 0; k < kDim; ++k) {
        const DiscVec& v = (*rows)[static_cast<std::size_t>(k)];
        if (!sets.ub.contains(v)) return {false, row_name(name, k) + " = " + to_string(v) + " not in ub"};
        auto failure = check_unbiased_to(v, row_name(name, k), a_rows, 'A', 1, sets.ub_eps, n);
        if (!failure.empty()) return {false, failure};
      }
      auto failure = check_basis(*rows, name, sets.ort_eps, n);
      if (!failure.empty()) return {false, failure};
    }
    for (int k = 0; k < kDim; ++k) {
      auto failure = check_unbiased_to(c[static_cast<std::size_t>(k)], row_name('C', k), b, 'B', 0, sets.ub_eps, n);
      if (!failure.empty()) return {false, failure};
    }
    return {};
  }

  if (cert.verdict == Verdict::Contradiction) {
    if (cert.witness) return {false, "contradiction carries a witness"};
    Stage2Options options;
    options.order = SearchOrder::Reverse;
    options.budget = std::chrono::milliseconds(std::max<std::int64_t>(60'000, 4 * cert.elapsed.count()));
    auto rerun = process_a(cert.a, sets, options);
    if (rerun.ub_a_size != cert.ub_a_size) {
      return {false, "ub_a_size mismatch: recorded " + std::to_string(cert.ub_a_size) + ", recomputed " +
                         std::to_string(rerun.ub_a_size)};
    }
    if (rerun.verdict != Verdict::Contradiction) {
      return {false, std::string("reverse-order rerun gave ") + to_string(rerun.verdict)};
    }
    return {};
  }
  return {};
}

// ---------------------------------------------------------------------------

void write_certificate_header(std::ostream& out) { out.write("MUB6CRT1", 8); }

void write_certificate(std::ostream& out, const ContradictionCertificate& cert) {
  detail::put_core(out, cert.a);
  detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(cert.verdict));
  detail::put_le<std::uint64_t>(out, cert.ub_a_size);
  detail::put_le<std::uint64_t>(out, cert.b_attempts);
  detail::put_le<std::uint64_t>(out, cert.max_c_rows);
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(cert.elapsed.count()));
  if (cert.verdict == Verdict::ExtensionFound) {
    for (const auto& v : cert.witness->b) detail::put_vec(out, v);
    for (const auto& v : cert.witness->c) detail::put_vec(out, v);
  }
}

std::vector<ContradictionCertificate> read_certificates(std::istream& in, const DiscParams& params) {
  if (!detail::read_magic(in, "MUB6CRT1")) throw CorruptionError("bad certificate file magic", 0);
  std::vector<ContradictionCertificate> out;
  std::uint64_t offset = 8;
  while (in.peek() != std::char_traits<char>::eof()) {
    const std::uint64_t record_start = offset;
    ContradictionCertificate cert;
    cert.params = params;
    std::uint8_t verdict = 0;
    std::uint64_t elapsed = 0;
    if (!detail::get_core(in, cert.a)) throw CorruptionError("truncated certificate record", record_start);
    if (!cert.a.is_valid(params.n)) throw CorruptionError("bin out of range in certificate matrix", record_start);
    offset += 50;
    if (!detail::get_le(in, verdict)) throw CorruptionError("truncated certificate record", offset);
    if (verdict > 2) throw CorruptionError("bad verdict byte " + std::to_string(verdict), offset);
    cert.verdict = static_cast<Verdict>(verdict);
    offset += 1;
    if (!detail::get_le(in, cert.ub_a_size) || !detail::get_le(in, cert.b_attempts) ||
        !detail::get_le(in, cert.max_c_rows) || !detail::get_le(in, elapsed)) {
      throw CorruptionError("truncated certificate counters", offset);
    }
    cert.elapsed = std::chrono::milliseconds(elapsed);
    offset += 32;
    if (cert.verdict == Verdict::ExtensionFound) {
      Extension ext;
      for (auto* rows : {&ext.b, &ext.c}) {
        for (auto& v : *rows) {
          if (!detail::get_vec(in, v)) throw CorruptionError("truncated witness", offset);
          if (!is_valid(v, params.n)) throw CorruptionError("witness bin out of range", offset);
          offset += 10;
        }
      }
      cert.witness = ext;
    }
    out.push_back(cert);
  }
  return out;
}

std::vector<ContradictionCertificate> read_certificates(const std::string& path, const DiscParams& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_certificates(in, params);
}

}  // namespace mub6
