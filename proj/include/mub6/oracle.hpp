#pragma once

// Exact (floating-point, unbinned) constructions used as ground truth:
// complex Hadamard matrices in dephased phase form, an explicit unbiased
// partner of the Fourier matrix, and generators of exact orthogonal and
// unbiased witness vectors.

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <vector>

#include "mub6/core.hpp"

namespace mub6 {

template <typename Scalar>
using PhaseMatrix = Eigen::Matrix<Scalar, kDim, kDim>;

template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<std::complex<Scalar>, kDim, kDim>;

/// 6x6 unimodular matrix stored as phases in [0,1).
template <typename Scalar = double>
struct ExactMat {
  PhaseMatrix<Scalar> phases = PhaseMatrix<Scalar>::Zero();
  /// First column all ones (and, for the A matrix, the first row too).
  bool dephased = true;

  ComplexMatrix<Scalar> entries() const {
    using std::numbers::pi;
    return phases.unaryExpr([](Scalar p) { return std::polar(Scalar(1), Scalar(2 * pi) * p); });
  }
};

/// Five phases (leading phase 0 implicit).
template <typename Scalar = double>
struct ExactVec {
  Eigen::Matrix<Scalar, kFree, 1> phases = Eigen::Matrix<Scalar, kFree, 1>::Zero();
};

/// x mod 1 in [0,1).
template <typename Scalar>
Scalar wrap_phase(Scalar x) {
  using std::floor;
  Scalar y = x - floor(x);
  return y >= Scalar(1) ? Scalar(0) : y;
}

/// Largest modulus of an off-diagonal entry of M M^*.
template <typename Scalar>
Scalar hadamard_residual(const ExactMat<Scalar>& m) {
  ComplexMatrix<Scalar> e = m.entries();
  ComplexMatrix<Scalar> gram = e * e.adjoint();
  gram.diagonal().setZero();
  return gram.cwiseAbs().maxCoeff();
}

/// max over row pairs of | |<a_i, b_j>| - sqrt(6) |.
template <typename Scalar>
Scalar unbiased_residual(const ExactMat<Scalar>& a, const ExactMat<Scalar>& b) {
  using std::sqrt;
  ComplexMatrix<Scalar> cross = a.entries() * b.entries().adjoint();
  return (cross.cwiseAbs().array() - sqrt(Scalar(6))).abs().maxCoeff();
}

/// |1 + sum e^{2 pi i phi}| (Orthogonal) or its distance to sqrt(6) (Unbiased).
double witness_residual(const ExactVec<>& v, FeasKind kind);

/// The two-parameter affine Fourier family: F_6 with the phase offsets
/// (0, a, b, 0, a, b) added to rows 1, 3 and 5. F(0,0) is F_6.
ExactMat<> fourier_family(double a, double b);

ExactMat<> transpose(const ExactMat<>& m);

/// A Hadamard matrix B* with (Id, F_6, B*) mutually unbiased, built as the
/// tensor product of qubit and qutrit partners under the CRT relabelling
/// Z_6 = Z_2 x Z_3. First column all ones; rows in (s, t) order.
ExactMat<> unbiased_partner_of_f6();

/// Antipodal zero-sum vector {-1, e(alpha), -e(alpha), e(beta), -e(beta)}
/// in that slot order.
ExactVec<> antipodal_witness(double alpha, double beta);

/// Completes (phi1..phi4) with phi5 so that |1 + sum| = sqrt(6); `branch`
/// picks one of the two solutions. Empty when |1 + sum_4| is out of reach.
std::optional<ExactVec<>> unbiased_completion(const Eigen::Matrix<double, 4, 1>& head, bool branch);

/// Antipodal witnesses with random alpha, beta and slot order.
std::vector<ExactVec<>> gen_orthogonal_witnesses(std::size_t count, std::uint64_t seed);

/// Random phi1..phi4 completed by unbiased_completion (redrawn until
/// reachable).
std::vector<ExactVec<>> gen_unbiased_witnesses(std::size_t count, std::uint64_t seed);

DiscVec discretize(const ExactVec<>& v, int n);

/// Bins of rows 0..5, columns 1..5 (column 0 is exact). Row 0 of a
/// dephased A discretizes to zeros.
std::array<DiscVec, kDim> discretize_rows(const ExactMat<>& m, int n);

/// discretize_rows as a DiscMat; throws ConfigError unless row 0 is all
/// ones.
DiscMat discretize(const ExactMat<>& m, int n);

/// Six lines of six comma-separated phases, 17 significant digits.
void write_exact_mat(std::ostream& out, const ExactMat<>& m);
ExactMat<> read_exact_mat(std::istream& in);

}  // namespace mub6
