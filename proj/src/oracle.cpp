#include "mub6/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace mub6 {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::complex<double> unit(double phase) { return std::polar(1.0, kTwoPi * phase); }

}  // namespace

double witness_residual(const ExactVec<>& v, FeasKind kind) {
  std::complex<double> s = 1.0;
  for (int k = 0; k < kFree; ++k) s += unit(v.phases(k));
  double modulus = std::abs(s);
  return kind == FeasKind::Orthogonal ? modulus : std::fabs(modulus - std::sqrt(6.0));
}

ExactMat<> fourier_family(double a, double b) {
  ExactMat<> m;
  const double offsets[kDim] = {0.0, a, b, 0.0, a, b};
  for (int j = 0; j < kDim; ++j) {
    for (int k = 0; k < kDim; ++k) {
      double phase = double(j * k % kDim) / kDim;
      if (j % 2 == 1) phase += offsets[k];
      m.phases(j, k) = wrap_phase(phase);
    }
  }
  return m;
}

ExactMat<> transpose(const ExactMat<>& m) {
  ExactMat<> t;
  t.phases = m.phases.transpose();
  t.dephased = m.dephased;
  return t;
}

ExactMat<> unbiased_partner_of_f6() {
  // F_6[j][k] = (-1)^{jk} * w3^{-jk}: F_2 (x) conj(F_3) on indices k -> (k mod 2, k mod 3).
  // Partners: qubit rows (1, +-i), qutrit rows w3^{m^2 + t m}.
  ExactMat<> b;
  b.dephased = false;
  for (int s = 0; s < 2; ++s) {
    for (int t = 0; t < 3; ++t) {
      const int row = 3 * s + t;
      for (int k = 0; k < kDim; ++k) {
        const int q = k % 2;
        const int m = k % 3;
        double qubit = q == 0 ? 0.0 : (s == 0 ? 0.25 : 0.75);
        double qutrit = double((m * m + t * m) % 3) / 3.0;
        b.phases(row, k) = wrap_phase(qubit + qutrit);
      }
    }
  }
  return b;
}

ExactVec<> antipodal_witness(double alpha, double beta) {
  ExactVec<> v;
  v.phases << 0.5, wrap_phase(alpha), wrap_phase(alpha + 0.5), wrap_phase(beta), wrap_phase(beta + 0.5);
  return v;
}

std::optional<ExactVec<>> unbiased_completion(const Eigen::Matrix<double, 4, 1>& head, bool branch) {
  std::complex<double> s = 1.0;
  for (int k = 0; k < 4; ++k) s += unit(head(k));
  const double r = std::abs(s);
  const double root6 = std::sqrt(6.0);
  if (r < root6 - 1.0 || r > root6 + 1.0 || r == 0.0) return std::nullopt;
  const double cosine = std::clamp((5.0 - r * r) / (2.0 * r), -1.0, 1.0);
  const double delta = std::acos(cosine);
  const double theta = std::arg(s) + (branch ? delta : -delta);
  ExactVec<> v;
  v.phases.head<4>() = head.unaryExpr([](double p) { return wrap_phase(p); });
  v.phases(4) = wrap_phase(theta / kTwoPi);
  return v;
}

std::vector<ExactVec<>> gen_orthogonal_witnesses(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 1.0);
  std::vector<ExactVec<>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    ExactVec<> v = antipodal_witness(phase(rng), phase(rng));
    std::array<double, kFree> slots;
    for (int k = 0; k < kFree; ++k) slots[k] = v.phases(k);
    std::shuffle(slots.begin(), slots.end(), rng);
    for (int k = 0; k < kFree; ++k) v.phases(k) = slots[k];
    out.push_back(v);
  }
  return out;
}

std::vector<ExactVec<>> gen_unbiased_witnesses(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::vector<ExactVec<>> out;
  out.reserve(count);
  while (out.size() < count) {
    Eigen::Matrix<double, 4, 1> head;
    for (int k = 0; k < 4; ++k) head(k) = phase(rng);
    if (auto v = unbiased_completion(head, coin(rng))) out.push_back(*v);
  }
  return out;
}

DiscVec discretize(const ExactVec<>& v, int n) {
  DiscVec out;
  for (int k = 0; k < kFree; ++k) out[k] = discretize_phase(wrap_phase(v.phases(k)), n);
  return out;
}

std::array<DiscVec, kDim> discretize_rows(const ExactMat<>& m, int n) {
  std::array<DiscVec, kDim> rows;
  for (int r = 0; r < kDim; ++r) {
    for (int c = 1; c < kDim; ++c) rows[r][c - 1] = discretize_phase(wrap_phase(m.phases(r, c)), n);
  }
  return rows;
}

DiscMat discretize(const ExactMat<>& m, int n) {
  for (int c = 0; c < kDim; ++c) {
    if (m.phases(0, c) != 0.0 || m.phases(c, 0) != 0.0) throw ConfigError("matrix is not dephased");
  }
  DiscMat out;
  out.rows = discretize_rows(m, n);
  return out;
}

void write_exact_mat(std::ostream& out, const ExactMat<>& m) {
  std::ostringstream text;
  text << std::setprecision(17);
  for (int r = 0; r < kDim; ++r) {
    for (int c = 0; c < kDim; ++c) {
      if (c) text << ',';
      text << m.phases(r, c);
    }
    text << '\n';
  }
  out << text.str();
}

ExactMat<> read_exact_mat(std::istream& in) {
  ExactMat<> m;
  std::string line;
  for (int r = 0; r < kDim; ++r) {
    if (!std::getline(in, line)) throw std::invalid_argument("expected 6 lines of phases");
    std::istringstream fields(line);
    std::string field;
    for (int c = 0; c < kDim; ++c) {
      if (!std::getline(fields, field, ',')) throw std::invalid_argument("expected 6 phases on line " + std::to_string(r + 1));
      std::size_t used = 0;
      double value = std::stod(field, &used);
      m.phases(r, c) = value;
    }
  }
  m.dephased = (m.phases.row(0).array() == 0.0).all() && (m.phases.col(0).array() == 0.0).all();
  return m;
}

}  // namespace mub6
