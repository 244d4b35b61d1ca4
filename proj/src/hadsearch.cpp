#include "mub6/hadsearch.hpp"

#include <Eigen/Dense>
#include <bit>
#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <random>

#include "mub6/detail/binary_io.hpp"

namespace mub6 {

void ShardSpec::validate() const {
  if (total == 0 || index >= total) {
    throw ConfigError("invalid shard " + std::to_string(index) + "/" + std::to_string(total));
  }
}

ShardSpec parse_shard(std::string_view text) {
  auto slash = text.find('/');
  ShardSpec shard;
  if (slash == std::string_view::npos) throw std::invalid_argument("shard must be written i/m");
  auto parse = [&](std::string_view field, std::uint32_t& out) {
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
      throw std::invalid_argument("malformed shard '" + std::string(text) + "'");
    }
  };
  parse(text.substr(0, slash), shard.index);
  parse(text.substr(slash + 1), shard.total);
  shard.validate();
  return shard;
}

std::vector<std::size_t> shard_positions(const VectorSet& ort_mon, ShardSpec shard) {
  shard.validate();
  std::vector<std::size_t> out;
  for (std::size_t i = shard.index; i < ort_mon.size(); i += shard.total) out.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

void require_orthogonal(const SetBundle& sets) {
  if (!sets.has_orthogonal()) throw ConfigError("orthogonal sets are required");
  sets.check_consistent();
  if (sets.ort_mon.kind() != SetKind::OrtMon || sets.ort.kind() != SetKind::Ort || sets.ort_eps.kind() != SetKind::OrtEps) {
    throw ParamMismatch("set bundle holds the wrong set kinds");
  }
}

// Blocks of a sorted set sharing a length-len prefix (len 1..5), located by
// the prefix's base-n code. Falls back to binary search for large n.
class PrefixTable {
 public:
  explicit PrefixTable(const VectorSet& set) : set_(set), n_(static_cast<std::uint64_t>(set.n())) {
    const std::uint64_t n4 = n_ * n_ * n_ * n_;
    if (n4 > (std::uint64_t{1} << 25)) return;
    std::uint64_t size = 1;
    for (int len = 1; len < kFree; ++len) {
      size *= n_;
      auto& starts = starts_[static_cast<std::size_t>(len)];
      starts.assign(size + 1, 0);
      for (const DiscVec& v : set.vectors()) ++starts[code(v, len) + 1];
      for (std::uint64_t c = 0; c < size; ++c) starts[c + 1] += starts[c];
    }
    dense_ = true;
  }

  std::pair<std::size_t, std::size_t> range(const DiscVec& prefix, int len) const {
    if (len == kFree && !set_.contains(prefix)) return {0, 0};
    if (!dense_ || len == kFree) return set_.prefix_range(prefix, len);
    const auto& starts = starts_[static_cast<std::size_t>(len)];
    const std::uint64_t c = code(prefix, len);
    return {starts[c], starts[c + 1]};
  }

  bool contains(const DiscVec& prefix, int len) const {
    auto [lo, hi] = range(prefix, len);
    return lo < hi;
  }

 private:
  std::uint64_t code(const DiscVec& v, int len) const {
    std::uint64_t c = 0;
    for (int k = 0; k < len; ++k) c = c * n_ + v[k];
    return c;
  }

  const VectorSet& set_;
  std::uint64_t n_;
  bool dense_ = false;
  std::array<std::vector<std::uint32_t>, kFree> starts_;
};

class PrehadSearch {
 public:
  PrehadSearch(const SetBundle& sets, const MatrixSink& sink)
      : ort_(sets.ort), eps_(sets.ort_eps), ort_prefix_(sets.ort), eps_prefix_(sets.ort_eps), n_(sets.params.n),
        sink_(sink) {}

  void run(const DiscVec& second_row) {
    m_ = DiscMat{};
    m_.rows[1] = second_row;
    if (!columns_viable(1)) return;
    mark_compatible(second_row, row_compat_);
    col_stage(1);
  }

  std::uint64_t emitted = 0;
  std::uint64_t nodes = 0;

 private:
  // Rows from..r-1; row 1 is covered by row_compat_.
  bool orthogonal_to_rows(const DiscVec& v, int r, int from) const {
    for (int i = from; i < r; ++i) {
      if (!eps_.contains(vec_diff_mod_n(v, m_.rows[static_cast<std::size_t>(i)], n_))) return false;
    }
    return true;
  }

  bool orthogonal_to_cols(const DiscVec& v, int c, int from) const {
    for (int j = from; j < c; ++j) {
      if (!eps_.contains(vec_diff_mod_n(v, cols_[static_cast<std::size_t>(j)], n_))) return false;
    }
    return true;
  }

  // Lines first..5 known on their first len bins: each must extend to an Ort
  // member, prefixes must be non-decreasing, and every pairwise difference
  // with an earlier line must extend to an OrtEps member.
  bool partial_lines_viable(const std::array<DiscVec, kDim>& lines, int first, int len) const {
    for (int a = first; a < kDim; ++a) {
      const DiscVec& u = lines[static_cast<std::size_t>(a)];
      if (!ort_prefix_.contains(u, len)) return false;
      if (a > 1 && prefix_less(u, lines[static_cast<std::size_t>(a - 1)], len)) return false;
      for (int b = 1; b < a; ++b) {
        if (!eps_prefix_.contains(vec_diff_mod_n(u, lines[static_cast<std::size_t>(b)], n_), len)) return false;
      }
    }
    return true;
  }

  static bool prefix_less(const DiscVec& u, const DiscVec& v, int len) {
    for (int k = 0; k < len; ++k) {
      if (u[k] != v[k]) return u[k] < v[k];
    }
    return false;
  }

  std::size_t upper_bound_in(std::size_t first, std::size_t last, const DiscVec& v) const {
    auto span = ort_.vectors();
    return static_cast<std::size_t>(std::upper_bound(span.begin() + first, span.begin() + last, v) - span.begin());
  }

  // bits[i] = ort[i] - u lies in OrtEps
  void mark_compatible(const DiscVec& u, std::vector<std::uint64_t>& bits) const {
    bits.assign(ort_.size() / 64 + 1, 0);
    for (std::size_t i = 0; i < ort_.size(); ++i) {
      if (eps_.contains(vec_diff_mod_n(ort_[i], u, n_))) bits[i >> 6] |= std::uint64_t{1} << (i & 63);
    }
  }

  // Calls f(i) for each set bit of bits in [first, last), ascending.
  template <typename F>
  static void for_each_bit(const std::vector<std::uint64_t>& bits, std::size_t first, std::size_t last, F&& f) {
    if (first >= last) return;
    for (std::size_t w = first >> 6; w <= (last - 1) >> 6; ++w) {
      std::uint64_t word = bits[w];
      if (w == first >> 6) word &= ~std::uint64_t{0} << (first & 63);
      if (w == (last - 1) >> 6 && ((last - 1) & 63) != 63) word &= (std::uint64_t{1} << ((last & 63))) - 1;
      while (word) {
        f(w * 64 + static_cast<std::size_t>(std::countr_zero(word)));
        word &= word - 1;
      }
    }
  }

  // After row r is placed, columns r..5 are known on rows 1..r.
  bool columns_viable(int r) {
    if (r >= kFree) return true;
    for (int c = r; c < kDim; ++c) {
      for (int k = 0; k < r; ++k) cols_[static_cast<std::size_t>(c)][k] = m_.at(k + 1, c);
    }
    return partial_lines_viable(cols_, r, r);
  }

  // After column c is placed, rows c+1..5 are known on columns 1..c.
  bool rows_viable(int c) const {
    if (c >= kFree) return true;
    return partial_lines_viable(m_.rows, c + 1, c);
  }

  void row_stage(int r) {
    DiscVec prefix;
    for (int k = 0; k < r - 1; ++k) prefix[k] = m_.at(r, k + 1);
    auto [first, last] = ort_prefix_.range(prefix, r - 1);
    first = upper_bound_in(first, last, m_.rows[static_cast<std::size_t>(r - 1)]);
    for_each_bit(row_compat_, first, last, [&](std::size_t i) {
      ++nodes;
      const DiscVec& v = ort_[i];
      if (!orthogonal_to_rows(v, r, 2)) return;
      m_.rows[static_cast<std::size_t>(r)] = v;
      if (columns_viable(r)) col_stage(r);
    });
  }

  void col_stage(int c) {
    DiscVec prefix;
    for (int k = 0; k < c; ++k) prefix[k] = m_.at(k + 1, c);
    auto [first, last] = ort_prefix_.range(prefix, c);
    if (c == 1) {
      // second column >= second row
      auto span = ort_.vectors();
      first = static_cast<std::size_t>(std::lower_bound(span.begin() + first, span.begin() + last, m_.rows[1]) - span.begin());
    } else {
      first = upper_bound_in(first, last, cols_[static_cast<std::size_t>(c - 1)]);
    }
    auto place = [&](std::size_t i) {
      ++nodes;
      const DiscVec& v = ort_[i];
      if (c == 1 && !is_nondecreasing(v)) return;
      if (!orthogonal_to_cols(v, c, 2)) return;
      cols_[static_cast<std::size_t>(c)] = v;
      for (int r = c + 1; r < kDim; ++r) m_.set(r, c, v[r - 1]);
      if (c == 1) mark_compatible(v, col_compat_);
      if (c == kFree) {
        ++emitted;
        sink_(m_);
      } else if (rows_viable(c)) {
        row_stage(c + 1);
      }
    };
    if (c == 1) {
      for (std::size_t i = first; i < last; ++i) place(i);
    } else {
      for_each_bit(col_compat_, first, last, place);
    }
  }

  const VectorSet& ort_;
  const VectorSet& eps_;
  PrefixTable ort_prefix_;
  PrefixTable eps_prefix_;
  int n_;
  const MatrixSink& sink_;
  DiscMat m_;
  std::array<DiscVec, kDim> cols_{};
  std::vector<std::uint64_t> row_compat_;
  std::vector<std::uint64_t> col_compat_;
};

}  // namespace

EnumerationStats enumerate_prehad(const SetBundle& sets, const EnumerateOptions& options, const MatrixSink& sink) {
  require_orthogonal(sets);
  const auto positions = shard_positions(sets.ort_mon, options.shard);
  EnumerationStats stats;
  stats.positions_total = positions.size();
  stats.next_position = std::min(options.start_position, positions.size());

  PrehadSearch search(sets, sink);
  std::size_t processed = 0;
  while (stats.next_position < positions.size() && processed < options.max_positions) {
    search.run(sets.ort_mon[positions[stats.next_position]]);
    ++stats.next_position;
    ++processed;
    if (options.on_position_done) options.on_position_done(stats.next_position, search.emitted);
  }
  stats.emitted = search.emitted;
  stats.nodes = search.nodes;
  return stats;
}

bool satisfies_prehad(const DiscMat& m, const SetBundle& sets) {
  require_orthogonal(sets);
  const int n = sets.params.n;
  if (!m.is_valid(n) || !is_canonical(m)) return false;
  if (!is_nondecreasing(m.rows[1]) || !is_nondecreasing(m.column(1))) return false;
  for (int i = 1; i < kDim; ++i) {
    if (!sets.ort.contains(m.rows[static_cast<std::size_t>(i)]) || !sets.ort.contains(m.column(i))) return false;
    for (int j = 1; j < i; ++j) {
      if (!sets.ort_eps.contains(vec_diff_mod_n(m.rows[static_cast<std::size_t>(i)], m.rows[static_cast<std::size_t>(j)], n))) return false;
      if (!sets.ort_eps.contains(vec_diff_mod_n(m.column(i), m.column(j), n))) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Matrix descent

void PruneConfig::validate() const {
  if (refine_depth < 1) throw ConfigError("refine depth must be >= 1");
  if (!(bound_inflation >= 0.0)) throw ConfigError("bound inflation must be >= 0");
}

namespace {

using cplx = std::complex<double>;
using CoreC = Eigen::Matrix<cplx, kFree, kFree>;
using CoreR = Eigen::Matrix<double, kFree, kFree>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct StageEntry {
  int r, c;
};

// Row-by-column assignment order: stage 2k fixes row k from column k on,
// stage 2k+1 fixes column k below the diagonal.
const std::array<std::vector<StageEntry>, 10>& stage_entries() {
  static const auto table = [] {
    std::array<std::vector<StageEntry>, 10> t;
    for (int k = 0; k < kFree; ++k) {
      for (int c = k; c < kFree; ++c) t[static_cast<std::size_t>(2 * k)].push_back({k, c});
      for (int r = k + 1; r < kFree; ++r) t[static_cast<std::size_t>(2 * k + 1)].push_back({r, k});
    }
    return t;
  }();
  return table;
}

class MatrixDescent {
 public:
  MatrixDescent(const PruneConfig& config, int n) : config_(config), n_(n) {}

  MatrixDescentResult run(const DiscMat& candidate) {
    CoreR mid;
    for (int r = 0; r < kFree; ++r)
      for (int c = 0; c < kFree; ++c) mid(r, c) = (candidate.at(r + 1, c + 1) + 0.5) / n_;
    CoreC z = mid.unaryExpr([](double p) { return std::polar(1.0, kTwoPi * p); });

    MatrixDescentResult result;
    bool ok = full_check(z, 0);
    if (ok) ok = search(z, mid, 0);
    result.nodes = nodes_;
    if (ok) {
      result.outcome = DescentOutcome::Survives;
      std::array<double, 25> leaf;
      for (int r = 0; r < kFree; ++r)
        for (int c = 0; c < kFree; ++c) leaf[static_cast<std::size_t>(r * kFree + c)] = leaf_(r, c);
      result.leaf_midpoints = leaf;
    } else {
      result.outcome = exhausted_ ? DescentOutcome::BudgetExhausted : DescentOutcome::Dies;
    }
    return result;
  }

 private:
  double exact_bound(int g) const { return 5.0 * std::numbers::pi / (std::ldexp(1.0, g) * n_) + config_.bound_inflation; }
  double pair_bound(int g) const { return 10.0 * std::numbers::pi / (std::ldexp(1.0, g) * n_) + config_.bound_inflation; }

  bool row_ok(const CoreC& z, int k, int g) const {
    if (std::abs(1.0 + z.row(k).sum()) > exact_bound(g)) return false;
    for (int i = 0; i < k; ++i) {
      cplx s = 1.0 + (z.row(k).array() * z.row(i).array().conjugate()).sum();
      if (std::abs(s) > pair_bound(g)) return false;
    }
    return true;
  }

  bool col_ok(const CoreC& z, int k, int g) const {
    if (std::abs(1.0 + z.col(k).sum()) > exact_bound(g)) return false;
    for (int j = 0; j < k; ++j) {
      cplx s = 1.0 + (z.col(k).array() * z.col(j).array().conjugate()).sum();
      if (std::abs(s) > pair_bound(g)) return false;
    }
    return true;
  }

  bool full_check(const CoreC& z, int g) const {
    for (int k = 0; k < kFree; ++k) {
      if (!row_ok(z, k, g) || !col_ok(z, k, g)) return false;
    }
    return true;
  }

  bool budget_hit() {
    if (config_.node_budget >= 0 && nodes_ > config_.node_budget) exhausted_ = true;
    return exhausted_;
  }

  // z, mid describe a viable box at generation g.
  bool search(const CoreC& z, const CoreR& mid, int g) {
    if (g == config_.refine_depth) {
      leaf_ = mid;
      return true;
    }
    const double quarter = 1.0 / (4.0 * n_ * std::ldexp(1.0, g));
    const cplx rot = std::polar(1.0, kTwoPi * quarter);
    CoreC child_z = z;
    CoreR child_mid = mid;
    return assign(z, mid, child_z, child_mid, rot, quarter, g, 0);
  }

  bool assign(const CoreC& z, const CoreR& mid, CoreC& child_z, CoreR& child_mid, cplx rot, double quarter, int g,
              int stage) {
    if (stage == 10) return search(child_z, child_mid, g + 1);
    const auto& entries = stage_entries()[static_cast<std::size_t>(stage)];
    const unsigned options = 1U << entries.size();
    for (unsigned mask = 0; mask < options; ++mask) {
      ++nodes_;
      if (budget_hit()) return false;
      for (std::size_t e = 0; e < entries.size(); ++e) {
        const auto [r, c] = entries[e];
        const bool right = (mask >> e) & 1U;
        child_z(r, c) = right ? z(r, c) * rot : z(r, c) * std::conj(rot);
        child_mid(r, c) = mid(r, c) + (right ? quarter : -quarter);
      }
      const int k = stage / 2;
      const bool ok = (stage % 2 == 0) ? row_ok(child_z, k, g + 1) : col_ok(child_z, k, g + 1);
      if (ok && assign(z, mid, child_z, child_mid, rot, quarter, g, stage + 1)) return true;
      if (exhausted_) return false;
    }
    return false;
  }

  PruneConfig config_;
  int n_;
  long nodes_ = 0;
  bool exhausted_ = false;
  CoreR leaf_ = CoreR::Zero();
};

}  // namespace

MatrixDescentResult matrix_descend(const DiscMat& candidate, const PruneConfig& config, const DiscParams& params) {
  config.validate();
  params.validate();
  return MatrixDescent(config, params.n).run(candidate);
}

bool prune_to_had(const DiscMat& candidate, const PruneConfig& config, const DiscParams& params) {
  return matrix_descend(candidate, config, params).outcome != DescentOutcome::Dies;
}

// ---------------------------------------------------------------------------
// Deep membership oracle

namespace {

constexpr int kPairs = 15;

class HadamardPolisher {
 public:
  HadamardPolisher(const DiscMat& candidate, int n) {
    for (int r = 0; r < kFree; ++r) {
      for (int c = 0; c < kFree; ++c) {
        lo_(r * kFree + c) = double(candidate.at(r + 1, c + 1)) / n;
        hi_(r * kFree + c) = std::nextafter(double(candidate.at(r + 1, c + 1) + 1) / n, 0.0);
      }
    }
  }

  std::optional<std::array<double, 25>> run(Eigen::Matrix<double, 25, 1> x) const {
    for (int iter = 0; iter < 100; ++iter) {
      x = x.cwiseMax(lo_).cwiseMin(hi_);
      auto [f, jac] = evaluate(x);
      if (f.cwiseAbs().maxCoeff() < 1e-12) break;
      Eigen::Matrix<double, 25, 1> step = jac.completeOrthogonalDecomposition().solve(-f);
      x += step;
    }
    x = x.cwiseMax(lo_).cwiseMin(hi_);
    if (max_inner_product(x) >= kWitnessTolerance) return std::nullopt;
    std::array<double, 25> out;
    for (int i = 0; i < 25; ++i) out[static_cast<std::size_t>(i)] = x(i);
    return out;
  }

  Eigen::Matrix<double, 25, 1> midpoint() const { return (lo_ + hi_) / 2; }
  Eigen::Matrix<double, 25, 1> random_point(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::Matrix<double, 25, 1> x;
    for (int i = 0; i < 25; ++i) x(i) = lo_(i) + u(rng) * (hi_(i) - lo_(i));
    return x;
  }

 private:
  static Eigen::Matrix<cplx, kDim, kDim> matrix_of(const Eigen::Matrix<double, 25, 1>& x) {
    Eigen::Matrix<cplx, kDim, kDim> h = Eigen::Matrix<cplx, kDim, kDim>::Ones();
    for (int r = 0; r < kFree; ++r)
      for (int c = 0; c < kFree; ++c) h(r + 1, c + 1) = std::polar(1.0, kTwoPi * x(r * kFree + c));
    return h;
  }

  double max_inner_product(const Eigen::Matrix<double, 25, 1>& x) const {
    auto h = matrix_of(x);
    Eigen::Matrix<cplx, kDim, kDim> gram = h * h.adjoint();
    gram.diagonal().setZero();
    return gram.cwiseAbs().maxCoeff();
  }

  std::pair<Eigen::Matrix<double, 2 * kPairs, 1>, Eigen::Matrix<double, 2 * kPairs, 25>> evaluate(
      const Eigen::Matrix<double, 25, 1>& x) const {
    auto h = matrix_of(x);
    Eigen::Matrix<double, 2 * kPairs, 1> f;
    Eigen::Matrix<double, 2 * kPairs, 25> jac = Eigen::Matrix<double, 2 * kPairs, 25>::Zero();
    int p = 0;
    for (int i = 0; i < kDim; ++i) {
      for (int j = i + 1; j < kDim; ++j, ++p) {
        cplx s = (h.row(i).array() * h.row(j).array().conjugate()).sum();
        f(2 * p) = s.real();
        f(2 * p + 1) = s.imag();
        for (int c = 1; c < kDim; ++c) {
          // d/dx e(x) = 2 pi i e(x)
          const cplx term = h(i, c) * std::conj(h(j, c)) * cplx(0.0, kTwoPi);
          if (i >= 1) {
            jac(2 * p, (i - 1) * kFree + (c - 1)) += term.real();
            jac(2 * p + 1, (i - 1) * kFree + (c - 1)) += term.imag();
          }
          jac(2 * p, (j - 1) * kFree + (c - 1)) -= term.real();
          jac(2 * p + 1, (j - 1) * kFree + (c - 1)) -= term.imag();
        }
      }
    }
    return {f, jac};
  }

  Eigen::Matrix<double, 25, 1> lo_, hi_;
};

}  // namespace

HadMembership verify_had_membership(const DiscMat& candidate, const DiscParams& params) {
  params.validate();
  HadamardPolisher polisher(candidate, params.n);
  if (auto w = polisher.run(polisher.midpoint())) return {OracleVerdict::FeasibleCertified, w};

  PruneConfig config;
  config.node_budget = 2'000'000;
  std::optional<std::array<double, 25>> leaf;
  for (int depth : {1, 2, 4, 8, 12, 16, 20}) {
    config.refine_depth = depth;
    auto result = matrix_descend(candidate, config, params);
    if (result.outcome == DescentOutcome::Dies) return {OracleVerdict::InfeasibleCertified, std::nullopt};
    if (result.outcome == DescentOutcome::BudgetExhausted) break;
    leaf = result.leaf_midpoints;
    Eigen::Matrix<double, 25, 1> start;
    for (int i = 0; i < 25; ++i) start(i) = (*leaf)[static_cast<std::size_t>(i)];
    if (auto w = polisher.run(start)) return {OracleVerdict::FeasibleCertified, w};
  }
  std::mt19937_64 rng(0x5eed);
  for (int attempt = 0; attempt < 16; ++attempt) {
    if (auto w = polisher.run(polisher.random_point(rng))) return {OracleVerdict::FeasibleCertified, w};
  }
  return {OracleVerdict::Unresolved, std::nullopt};
}

// ---------------------------------------------------------------------------
// Stream files

void write_stream_header(std::ostream& out, const StreamHeader& header) {
  out.write("MUB6MAT1", 8);
  detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(header.kind));
  detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(header.params.n));
  detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(header.params.depth));
  detail::put_le<std::uint32_t>(out, header.shard.index);
  detail::put_le<std::uint32_t>(out, header.shard.total);
  detail::put_le<std::uint64_t>(out, header.count);
}

StreamHeader read_stream_header(std::istream& in) {
  if (!detail::read_magic(in, "MUB6MAT1")) throw CorruptionError("bad matrix stream magic", 0);
  StreamHeader h;
  std::uint8_t kind = 0, depth = 0;
  std::uint16_t n = 0;
  if (!detail::get_le(in, kind) || kind > 1) throw CorruptionError("bad stream kind", 8);
  if (!detail::get_le(in, n) || n < 2) throw CorruptionError("bad n", 9);
  if (!detail::get_le(in, depth) || depth < 1) throw CorruptionError("bad depth", 11);
  if (!detail::get_le(in, h.shard.index) || !detail::get_le(in, h.shard.total)) throw CorruptionError("truncated header", 12);
  if (h.shard.total == 0 || h.shard.index >= h.shard.total) throw CorruptionError("bad shard spec", 12);
  if (!detail::get_le(in, h.count)) throw CorruptionError("truncated header", kStreamCountOffset);
  h.kind = static_cast<StreamKind>(kind);
  h.params = {n, depth};
  return h;
}

void write_matrix_stream(const std::string& path, const StreamHeader& header, const std::vector<DiscMat>& matrices) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  StreamHeader h = header;
  h.count = matrices.size();
  write_stream_header(out, h);
  for (const auto& m : matrices) detail::put_core(out, m);
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<DiscMat> read_matrix_stream(const std::string& path, StreamHeader* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  StreamHeader h = read_stream_header(in);
  std::vector<DiscMat> out;
  for (std::uint64_t i = 0; i < h.count; ++i) {
    DiscMat m;
    const std::uint64_t offset = kStreamHeaderSize + i * kStreamRecordSize;
    if (!detail::get_core(in, m)) throw CorruptionError("truncated matrix record " + std::to_string(i), offset);
    if (!m.is_valid(h.params.n)) throw CorruptionError("bin out of range in matrix record " + std::to_string(i), offset);
    out.push_back(m);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw CorruptionError("trailing bytes after " + std::to_string(h.count) + " matrix records",
                          kStreamHeaderSize + h.count * kStreamRecordSize);
  }
  if (header) *header = h;
  return out;
}

}  // namespace mub6
