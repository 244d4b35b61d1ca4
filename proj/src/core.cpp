#include "mub6/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

namespace mub6 {

void DiscParams::validate() const {
  if (n < 2 || n > 65535) {
    throw ConfigError("discretization parameter n must be in [2, 65535], got " + std::to_string(n));
  }
  if (depth < 1 || depth > 255) {
    throw ConfigError("descent depth must be in [1, 255], got " + std::to_string(depth));
  }
}

std::strong_ordering lex_compare(const DiscVec& u, const DiscVec& v) { return u <=> v; }

bool is_valid(const DiscVec& v, int n) {
  return std::all_of(v.bins.begin(), v.bins.end(), [n](Bin b) { return b < n; });
}

Bin discretize_phase(double rho, int n) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::domain_error("phase outside [0,1): " + std::to_string(rho));
  }
  if (rho == 1.0) rho = 0.0;
  auto j = static_cast<long>(std::floor(rho * n));
  // rho just below 1 can round up to n
  return static_cast<Bin>(std::min<long>(j, n - 1));
}

bool is_nondecreasing(const DiscVec& v) {
  return std::is_sorted(v.bins.begin(), v.bins.end());
}

Bin DiscMat::at(int r, int c) const {
  if (r == 0 || c == 0) return 0;
  return rows[static_cast<std::size_t>(r)][c - 1];
}

void DiscMat::set(int r, int c, Bin value) { rows[static_cast<std::size_t>(r)][c - 1] = value; }

DiscVec DiscMat::column(int c) const {
  DiscVec col;
  for (int r = 1; r < kDim; ++r) col[r - 1] = at(r, c);
  return col;
}

DiscMat DiscMat::transposed() const {
  DiscMat t;
  for (int r = 1; r < kDim; ++r) t.rows[static_cast<std::size_t>(r)] = column(r);
  return t;
}

std::array<Bin, 25> DiscMat::core() const {
  std::array<Bin, 25> out{};
  for (int r = 1; r < kDim; ++r)
    for (int c = 1; c < kDim; ++c) out[static_cast<std::size_t>((r - 1) * 5 + (c - 1))] = at(r, c);
  return out;
}

DiscMat DiscMat::from_core(const std::array<Bin, 25>& core) {
  DiscMat m;
  for (int r = 1; r < kDim; ++r)
    for (int c = 1; c < kDim; ++c) m.set(r, c, core[static_cast<std::size_t>((r - 1) * 5 + (c - 1))]);
  return m;
}

bool DiscMat::is_valid(int n) const {
  if (rows[0] != DiscVec{}) return false;
  return std::all_of(rows.begin(), rows.end(), [n](const DiscVec& v) { return mub6::is_valid(v, n); });
}

bool is_canonical(const DiscMat& m) {
  if (m.rows[0] != DiscVec{}) return false;
  for (int r = 2; r < kDim; ++r) {
    if (!(m.rows[static_cast<std::size_t>(r - 1)] < m.rows[static_cast<std::size_t>(r)])) return false;
  }
  for (int c = 2; c < kDim; ++c) {
    if (!(m.column(c - 1) < m.column(c))) return false;
  }
  return m.rows[1] <= m.column(1);
}

namespace {

// Sorting rows (or columns) never increases the row-major flattening, so the
// alternation terminates.
DiscMat sort_rows(const DiscMat& m) {
  DiscMat out = m;
  std::sort(out.rows.begin() + 1, out.rows.end());
  return out;
}

}  // namespace

std::optional<DiscMat> canonicalize(const DiscMat& m) {
  DiscMat cur = m;
  for (;;) {
    DiscMat next = sort_rows(cur).transposed();
    next = sort_rows(next).transposed();
    if (next == cur) break;
    cur = next;
  }
  if (cur.rows[1] > cur.column(1)) cur = cur.transposed();
  if (!is_canonical(cur)) return std::nullopt;
  return cur;
}

double target_modulus(FeasKind kind) {
  return kind == FeasKind::Orthogonal ? 0.0 : std::sqrt(6.0);
}

std::string_view to_string(FeasKind kind) {
  return kind == FeasKind::Orthogonal ? "ort" : "ub";
}

std::string to_string(const DiscVec& v) {
  std::string s = "(0";
  for (Bin b : v.bins) {
    s += ',';
    s += std::to_string(b);
  }
  s += ')';
  return s;
}

std::string to_string(const DiscMat& m) {
  std::string s;
  for (int r = 0; r < kDim; ++r) {
    if (r) s += '\n';
    s += to_string(m.rows[static_cast<std::size_t>(r)]);
  }
  return s;
}

DiscVec parse_vec(std::string_view text) {
  while (!text.empty() && (text.front() == '(' || text.front() == ' ')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ')' || text.back() == ' ')) text.remove_suffix(1);

  std::vector<int> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    auto field = text.substr(pos, end - pos);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || value < 0 || value > 65535) {
      throw std::invalid_argument("malformed vector: '" + std::string(text) + "'");
    }
    values.push_back(value);
    pos = end + 1;
  }
  if (values.size() == kDim) {
    if (values.front() != 0) throw std::invalid_argument("leading coordinate must be 0");
    values.erase(values.begin());
  }
  if (values.size() != kFree) {
    throw std::invalid_argument("expected 5 or 6 coordinates, got " + std::to_string(values.size()));
  }
  DiscVec v;
  for (int k = 0; k < kFree; ++k) v[k] = static_cast<Bin>(values[static_cast<std::size_t>(k)]);
  return v;
}

}  // namespace mub6
