#pragma once

// Discretized phase vectors and matrices in dimension 6.
//
// A phase rho in [0,1) stands for the unimodular number exp(2*pi*i*rho).
// With discretization parameter n the circle is cut into n half-open bins
// [j/n, (j+1)/n) and a phase is represented by its bin index j. Every row
// vector carries an exact leading 1 (phase 0) that is not stored; only the
// five binned coordinates are.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mub6 {

inline constexpr int kDim = 6;
inline constexpr int kFree = 5;

using Bin = std::uint16_t;

/// Thrown for invalid parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when sets or file headers disagree on (n, depth) or kind.
class ParamMismatch : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct DiscParams {
  int n = 17;
  int depth = 8;

  void validate() const;
  friend bool operator==(const DiscParams&, const DiscParams&) = default;
};

/// The five binned coordinates (j1..j5) of a row (0, j1, ..., j5).
struct DiscVec {
  std::array<Bin, kFree> bins{};

  constexpr Bin operator[](int k) const { return bins[static_cast<std::size_t>(k)]; }
  constexpr Bin& operator[](int k) { return bins[static_cast<std::size_t>(k)]; }

  // Lexicographic on (j1, ..., j5).
  friend constexpr auto operator<=>(const DiscVec&, const DiscVec&) = default;
};

std::strong_ordering lex_compare(const DiscVec& u, const DiscVec& v);

bool is_valid(const DiscVec& v, int n);

/// floor(rho * n). A phase of exactly 1.0 is treated as 0.0.
/// Throws std::domain_error when rho is outside [0, 1].
Bin discretize_phase(double rho, int n);

/// Coordinatewise (u - v) mod n.
inline DiscVec vec_diff_mod_n(const DiscVec& u, const DiscVec& v, int n) {
  DiscVec out;
  for (int k = 0; k < kFree; ++k) {
    int d = int(u[k]) - int(v[k]);
    out[k] = static_cast<Bin>(d < 0 ? d + n : d);
  }
  return out;
}

/// Coordinatewise (u + v) mod n.
inline DiscVec vec_add_mod_n(const DiscVec& u, const DiscVec& v, int n) {
  DiscVec out;
  for (int k = 0; k < kFree; ++k) {
    int s = int(u[k]) + int(v[k]);
    out[k] = static_cast<Bin>(s >= n ? s - n : s);
  }
  return out;
}

bool is_nondecreasing(const DiscVec& v);

/// 6x6 discretized matrix with zero first row and first column.
///
/// rows[0] is the all-ones row of the original matrix and always holds zero
/// bins, which here mean exact 1's. Entry (r, c) for r, c >= 1 is
/// rows[r][c - 1].
struct DiscMat {
  std::array<DiscVec, kDim> rows{};

  /// Bin at (r, c), 0 <= r, c < 6.
  Bin at(int r, int c) const;
  void set(int r, int c, Bin value);

  /// Column c (1..5) read below the zero first row.
  DiscVec column(int c) const;

  DiscMat transposed() const;

  /// Row-major 25 core bins (rows 1..5, columns 1..5).
  std::array<Bin, 25> core() const;
  static DiscMat from_core(const std::array<Bin, 25>& core);

  bool is_valid(int n) const;

  friend constexpr auto operator<=>(const DiscMat&, const DiscMat&) = default;
};

/// Rows 1..5 strictly increasing, columns 1..5 strictly increasing, and the
/// second row lexicographically <= the second column.
bool is_canonical(const DiscMat& m);

/// Sorts rows and columns repeatedly until both are ordered, transposing if
/// the second row exceeds the second column. Returns nullopt when two rows
/// or two columns coincide (no strictly increasing form exists).
std::optional<DiscMat> canonicalize(const DiscMat& m);

enum class FeasKind : std::uint8_t { Orthogonal, Unbiased };

/// 0 for Orthogonal, sqrt(6) for Unbiased.
double target_modulus(FeasKind kind);

std::string_view to_string(FeasKind kind);

/// "(0,j1,j2,j3,j4,j5)"
std::string to_string(const DiscVec& v);
/// Six lines of the row form, separated by '\n'.
std::string to_string(const DiscMat& m);

/// Parses "j1,..,j5" or "0,j1,..,j5" (surrounding parentheses allowed).
/// Throws std::invalid_argument on malformed input.
DiscVec parse_vec(std::string_view text);

}  // namespace mub6
