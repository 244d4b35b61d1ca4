#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "mub6/oracle.hpp"

using namespace mub6;

TEST_SUITE("oracle") {

TEST_CASE("F(0,0) is the Fourier matrix") {
  const auto f = fourier_family(0, 0);
  for (int k = 0; k < kDim; ++k) CHECK(f.phases(1, k) == doctest::Approx(k / 6.0));
  CHECK(f.phases(4, 5) == doctest::Approx(2.0 / 6));
  CHECK(hadamard_residual(f) < 1e-12);
  CHECK(canonicalize(discretize(f, 17)) == test::f6_at_17());
}

TEST_CASE("Fourier family stays Hadamard") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 50; ++i) {
    const auto f = fourier_family(u(rng), u(rng));
    CHECK(f.dephased);
    CHECK(hadamard_residual(f) < 1e-9);
    CHECK((f.entries().cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("unbiased partner of F_6") {
  const auto b = unbiased_partner_of_f6();
  CHECK(hadamard_residual(b) < 1e-9);
  CHECK(unbiased_residual(fourier_family(0, 0), b) < 1e-9);
  // unimodular entries make b unbiased to the identity as well
  CHECK((b.entries().cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK((b.phases.col(0).array() == 0.0).all());
  for (int r = 0; r < kDim; ++r) {
    ExactVec<> v;
    for (int k = 0; k < kFree; ++k) v.phases(k) = wrap_phase(b.phases(r, k + 1) - b.phases(r, 0));
    CHECK(witness_residual(v, FeasKind::Unbiased) < 1e-9);
  }
}

TEST_CASE("antipodal witnesses") {
  auto roots = antipodal_witness(1.0 / 6, 2.0 / 6);
  std::array<double, kFree> got;
  for (int k = 0; k < kFree; ++k) got[k] = roots.phases(k);
  const std::array<double, kFree> want = {0.5, 1.0 / 6, 4.0 / 6, 2.0 / 6, 5.0 / 6};
  for (int k = 0; k < kFree; ++k) CHECK(got[k] == doctest::Approx(want[k]));
  auto flat = antipodal_witness(0, 0);
  CHECK(flat.phases(0) == 0.5);
  CHECK(flat.phases(1) == 0.0);
  CHECK(flat.phases(2) == 0.5);
  CHECK(witness_residual(roots, FeasKind::Orthogonal) < 1e-12);
  for (const auto& w : gen_orthogonal_witnesses(500, 1)) CHECK(witness_residual(w, FeasKind::Orthogonal) < 1e-12);
}

TEST_CASE("unbiased completion") {
  Eigen::Matrix<double, 4, 1> head(0, 0, 0, 0.5);
  auto v = unbiased_completion(head, true);
  REQUIRE(v.has_value());
  const double c = std::acos(-2.0 / 3) / (2 * std::numbers::pi);
  CHECK(std::min(v->phases(4), 1 - v->phases(4)) == doctest::Approx(c));
  CHECK(witness_residual(*v, FeasKind::Unbiased) < 1e-12);
  CHECK_FALSE(unbiased_completion(Eigen::Matrix<double, 4, 1>::Zero(), false).has_value());
  for (const auto& w : gen_unbiased_witnesses(500, 2)) CHECK(witness_residual(w, FeasKind::Unbiased) < 1e-9);
}

TEST_CASE("completion redraw rate") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  int hits = 0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    Eigen::Matrix<double, 4, 1> head(u(rng), u(rng), u(rng), u(rng));
    hits += unbiased_completion(head, true).has_value();
  }
  CHECK(double(hits) / trials > 0.05);
}

TEST_CASE("exact matrix text round trip") {
  const auto f = fourier_family(0.123456789, 0.987654321);
  std::stringstream buf;
  write_exact_mat(buf, f);
  const auto back = read_exact_mat(buf);
  CHECK((back.phases - f.phases).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.dephased);
  std::istringstream bad("0,0,0\n");
  CHECK_THROWS_AS(read_exact_mat(bad), std::invalid_argument);
}

TEST_CASE("discretize requires dephased input") {
  CHECK_THROWS_AS(discretize(unbiased_partner_of_f6(), 17), ConfigError);
}

}
