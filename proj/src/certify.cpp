#include "mub6/certify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace mub6 {

namespace {

using cplx = std::complex<double>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kSqrt6 = std::sqrt(6.0);

double residual_of_sum(cplx s, FeasKind kind) {
  double modulus = std::abs(s);
  return kind == FeasKind::Orthogonal ? modulus : std::fabs(modulus - kSqrt6);
}

// Chain search with incremental rotations: a child's midpoint exponential is
// the parent's times exp(+-2 pi i q), q a quarter of the parent width.
class ChainSearch {
 public:
  ChainSearch(FeasKind kind, int n, int depth) : kind_(kind), depth_(depth) {
    rot_.resize(static_cast<std::size_t>(depth));
    bound_.resize(static_cast<std::size_t>(depth) + 1);
    for (int g = 0; g <= depth; ++g) bound_[static_cast<std::size_t>(g)] = generation_bound(n, g) + kBoundInflation;
    for (int g = 0; g < depth; ++g) {
      double quarter = 1.0 / (4.0 * n * std::ldexp(1.0, g));
      rot_[static_cast<std::size_t>(g)] = std::polar(1.0, kTwoPi * quarter);
    }
  }

  bool viable(cplx sum, int generation) const {
    double b = bound_[static_cast<std::size_t>(generation)];
    if (kind_ == FeasKind::Orthogonal) return std::norm(sum) <= b * b;
    return std::fabs(std::sqrt(std::norm(sum)) - kSqrt6) <= b;
  }

  bool search(const std::array<cplx, kFree>& z, int g) {
    deepest_ = std::max(deepest_, g);
    if (g == depth_) return true;
    const cplx r = rot_[static_cast<std::size_t>(g)];
    std::array<cplx, kFree> lo, hi;
    cplx base = 1.0;
    for (int k = 0; k < kFree; ++k) {
      lo[k] = z[k] * std::conj(r);
      hi[k] = z[k] * r;
      base += lo[k];
    }
    std::array<cplx, 32> sums;
    sums[0] = base;
    for (unsigned mask = 1; mask < 32; ++mask) {
      int bit = std::countr_zero(mask);
      sums[mask] = sums[mask & (mask - 1)] + (hi[bit] - lo[bit]);
    }
    for (unsigned mask = 0; mask < 32; ++mask) {
      if (!viable(sums[mask], g + 1)) continue;
      std::array<cplx, kFree> child;
      for (int k = 0; k < kFree; ++k) child[k] = (mask >> k & 1U) ? hi[k] : lo[k];
      if (search(child, g + 1)) return true;
    }
    return false;
  }

  int deepest() const { return deepest_; }

 private:
  FeasKind kind_;
  int depth_;
  std::vector<cplx> rot_;
  std::vector<double> bound_;
  int deepest_ = -1;
};

}  // namespace

IntervalBox root_box(const DiscVec& v, int n) {
  IntervalBox box;
  for (int k = 0; k < kFree; ++k) box.lows[k] = double(v[k]) / n;
  box.halfwidth = 0.5 / n;
  box.generation = 0;
  return box;
}

IntervalBox child_box(const IntervalBox& box, unsigned mask) {
  IntervalBox child;
  child.halfwidth = box.halfwidth / 2;
  child.generation = box.generation + 1;
  for (int k = 0; k < kFree; ++k) {
    child.lows[k] = box.lows[k] + ((mask >> k & 1U) ? box.halfwidth : 0.0);
  }
  return child;
}

double generation_bound(int n, int generation) {
  return 5.0 * std::numbers::pi / (std::ldexp(1.0, generation) * n);
}

double midpoint_residual(const IntervalBox& box, FeasKind kind) {
  cplx s = 1.0;
  for (int k = 0; k < kFree; ++k) s += std::polar(1.0, kTwoPi * box.midpoint(k));
  return residual_of_sum(s, kind);
}

bool midpoint_bound_ok(const IntervalBox& box, FeasKind kind, int n) {
  return midpoint_residual(box, kind) <= generation_bound(n, box.generation) + kBoundInflation;
}

DescentVerdict descend(const DiscVec& v, FeasKind kind, const DiscParams& params) {
  const IntervalBox root = root_box(v, params.n);
  if (!midpoint_bound_ok(root, kind, params.n)) return {false, 0};

  std::array<cplx, kFree> z;
  for (int k = 0; k < kFree; ++k) z[k] = std::polar(1.0, kTwoPi * root.midpoint(k));
  ChainSearch search(kind, params.n, params.depth);
  if (search.search(z, 0)) return {true, std::nullopt};
  return {false, search.deepest() + 1};
}

// ---------------------------------------------------------------------------
// Oracle

namespace {

struct Polisher {
  FeasKind kind;
  std::array<double, kFree> lo, hi;

  cplx sum(const Eigen::Matrix<double, kFree, 1>& phi) const {
    cplx s = 1.0;
    for (int k = 0; k < kFree; ++k) s += std::polar(1.0, kTwoPi * phi(k));
    return s;
  }

  double residual(const Eigen::Matrix<double, kFree, 1>& phi) const { return residual_of_sum(sum(phi), kind); }

  void clamp(Eigen::Matrix<double, kFree, 1>& phi) const {
    for (int k = 0; k < kFree; ++k) {
      // stay strictly inside the half-open bin
      double upper = std::nextafter(hi[k], lo[k]);
      phi(k) = std::clamp(phi(k), lo[k], upper);
    }
  }

  // Minimum-norm Gauss-Newton steps on the underdetermined system.
  std::optional<std::array<double, kFree>> run(Eigen::Matrix<double, kFree, 1> phi) const {
    for (int iter = 0; iter < 60; ++iter) {
      clamp(phi);
      const cplx s = sum(phi);
      if (residual_of_sum(s, kind) < kWitnessTolerance * 1e-2) break;
      Eigen::Matrix<double, 2, kFree> ds;
      for (int k = 0; k < kFree; ++k) {
        ds(0, k) = -kTwoPi * std::sin(kTwoPi * phi(k));
        ds(1, k) = kTwoPi * std::cos(kTwoPi * phi(k));
      }
      Eigen::Matrix<double, kFree, 1> step;
      if (kind == FeasKind::Orthogonal) {
        Eigen::Vector2d f(s.real(), s.imag());
        Eigen::Matrix2d jjt = ds * ds.transpose();
        if (std::fabs(jjt.determinant()) < 1e-300) return std::nullopt;
        step = -ds.transpose() * jjt.ldlt().solve(f);
      } else {
        double f = std::norm(s) - 6.0;
        Eigen::Matrix<double, 1, kFree> grad = 2.0 * (s.real() * ds.row(0) + s.imag() * ds.row(1));
        double g2 = grad.squaredNorm();
        if (g2 < 1e-300) return std::nullopt;
        step = -grad.transpose() * (f / g2);
      }
      phi += step;
    }
    clamp(phi);
    if (residual(phi) >= kWitnessTolerance) return std::nullopt;
    std::array<double, kFree> out;
    for (int k = 0; k < kFree; ++k) out[k] = phi(k);
    return out;
  }
};

struct OracleSearch {
  FeasKind kind;
  int n;
  int depth;
  Polisher polisher;
  long nodes = 0;
  long node_budget = 4'000'000;
  int polish_attempts = 0;
  bool reached_leaf = false;
  bool exhausted_budget = false;
  std::optional<std::array<double, kFree>> witness{};

  double chord_bound(double halfwidth) const { return 10.0 * std::sin(std::numbers::pi * halfwidth); }

  // Returns true once a witness is found.
  bool visit(const IntervalBox& box) {
    if (++nodes > node_budget) {
      exhausted_budget = true;
      return false;
    }
    if (midpoint_residual(box, kind) > chord_bound(box.halfwidth) + kBoundInflation) return false;
    if (box.generation == depth) {
      reached_leaf = true;
      if (polish_attempts++ < 64) {
        Eigen::Matrix<double, kFree, 1> start;
        for (int k = 0; k < kFree; ++k) start(k) = box.midpoint(k);
        witness = polisher.run(start);
      }
      return witness.has_value();
    }
    // best residual first
    std::array<std::pair<double, unsigned>, 32> order;
    for (unsigned mask = 0; mask < 32; ++mask) {
      order[mask] = {midpoint_residual(child_box(box, mask), kind), mask};
    }
    std::sort(order.begin(), order.end());
    for (auto [res, mask] : order) {
      if (visit(child_box(box, mask))) return true;
      if (exhausted_budget) return false;
      if (reached_leaf && polish_attempts >= 64) return false;
    }
    return false;
  }
};

}  // namespace

OracleResult oracle_feasible(const DiscVec& v, FeasKind kind, int n, int refinement_depth) {
  OracleSearch search{kind, n, refinement_depth, Polisher{kind, {}, {}}};
  for (int k = 0; k < kFree; ++k) {
    search.polisher.lo[k] = double(v[k]) / n;
    search.polisher.hi[k] = double(v[k] + 1) / n;
  }
  search.visit(root_box(v, n));
  if (search.witness) return {OracleVerdict::FeasibleCertified, search.witness};
  if (!search.reached_leaf && !search.exhausted_budget) return {OracleVerdict::InfeasibleCertified, std::nullopt};
  return {OracleVerdict::Unresolved, std::nullopt};
}

const char* to_string(OracleVerdict verdict) {
  switch (verdict) {
    case OracleVerdict::FeasibleCertified: return "feasible_certified";
    case OracleVerdict::InfeasibleCertified: return "infeasible_certified";
    case OracleVerdict::Unresolved: return "unresolved";
  }
  return "?";
}

}  // namespace mub6
