#pragma once

// Stage 2: for a fixed candidate A, look for B and C whose rows are unbiased
// to every row of A (UB_A), unbiased to each other's rows, and pairwise
// orthogonal within each matrix. A certificate records either that no such
// pair exists (a contradiction) or the extension that was found.

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mub6/set_bundle.hpp"

namespace mub6 {

/// Six rows of B or C, all with inexact bins, sorted ascending.
using BasisRows = std::array<DiscVec, kDim>;

enum class Verdict : std::uint8_t { Contradiction = 0, ExtensionFound = 1, Unresolved = 2 };

const char* to_string(Verdict verdict);

struct Extension {
  BasisRows b{};
  BasisRows c{};
  friend bool operator==(const Extension&, const Extension&) = default;
};

struct ContradictionCertificate {
  DiscMat a;
  DiscParams params;
  std::uint64_t ub_a_size = 0;
  /// Complete B matrices examined.
  std::uint64_t b_attempts = 0;
  /// Deepest partial C over all B.
  std::uint64_t max_c_rows = 0;
  std::chrono::milliseconds elapsed{0};
  Verdict verdict = Verdict::Unresolved;
  std::optional<Extension> witness;

  friend bool operator==(const ContradictionCertificate&, const ContradictionCertificate&) = default;
};

/// Exploration order of the clique searches. Verdicts do not depend on it.
enum class SearchOrder : std::uint8_t { Forward, Reverse };

struct Stage2Options {
  std::chrono::milliseconds budget{60'000};
  SearchOrder order = SearchOrder::Forward;
};

/// Calls visit for every 6-subset of ub_a (ascending rows) whose 15 pairwise
/// differences later - earlier (mod n) lie in ort_eps. Stops when visit
/// returns false.
void build_b(const VectorSet& ub_a, const VectorSet& ort_eps, const std::function<bool(const BasisRows&)>& visit,
             SearchOrder order = SearchOrder::Forward);

/// First 6-subset of ub_ab as in build_b, or nullopt. `max_rows` receives the
/// size of the largest partial subset reached.
std::optional<BasisRows> build_c(const VectorSet& ub_ab, const VectorSet& ort_eps, SearchOrder order = SearchOrder::Forward,
                                 int* max_rows = nullptr);

/// Requires sets.ort_eps, sets.ub and sets.ub_eps.
ContradictionCertificate process_a(const DiscMat& a, const SetBundle& sets, const Stage2Options& options = {});

struct RecheckResult {
  bool ok = true;
  /// First failing condition, empty when ok.
  std::string failure;
};

/// Extension: re-validates every membership and difference condition of the
/// witness. Contradiction: reruns process_a in reverse order and compares.
RecheckResult recheck_certificate(const ContradictionCertificate& cert, const SetBundle& sets);

// Certificate file: "MUB6CRT1", then per record: 25 u16 bins of A, verdict
// (u8), ub_a_size, b_attempts, max_c_rows, elapsed ms (u64 each), and for
// ExtensionFound the 6 rows of B then the 6 rows of C as five u16 bins each.
// Little-endian throughout.
void write_certificate_header(std::ostream& out);
void write_certificate(std::ostream& out, const ContradictionCertificate& cert);

/// `params` is stamped on every record (the file does not carry it).
/// Throws CorruptionError with the offset of the first bad record.
std::vector<ContradictionCertificate> read_certificates(std::istream& in, const DiscParams& params);
std::vector<ContradictionCertificate> read_certificates(const std::string& path, const DiscParams& params);

}  // namespace mub6
