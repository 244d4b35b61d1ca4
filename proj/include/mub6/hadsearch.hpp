#pragma once

// Stage 1: canonical discretized Hadamard candidates.
//
// enumerate_prehad fills the 5x5 core row-by-column (second row, second
// column, third row, ...). Every row and column must lie in Ort, rows and
// columns strictly increase, the second row and column are non-decreasing
// with row <= column, and pairwise row (column) differences mod n lie in
// OrtEps. prune_to_had then refines all 25 bins and keeps a candidate only
// if some refined box still satisfies every pairwise orthogonality bound.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "mub6/certify.hpp"
#include "mub6/set_bundle.hpp"

namespace mub6 {

struct ShardSpec {
  std::uint32_t index = 0;
  std::uint32_t total = 1;

  void validate() const;
  friend bool operator==(const ShardSpec&, const ShardSpec&) = default;
};

/// Parses "i/m".
ShardSpec parse_shard(std::string_view text);

/// Indices into ort_mon of the second rows owned by a shard (index = i mod m).
std::vector<std::size_t> shard_positions(const VectorSet& ort_mon, ShardSpec shard);

struct EnumerateOptions {
  ShardSpec shard;
  /// First position (within shard_positions) to process; used on resume.
  std::size_t start_position = 0;
  std::size_t max_positions = std::numeric_limits<std::size_t>::max();
  /// Called after each position is finished, with the next position.
  std::function<void(std::size_t next_position, std::uint64_t emitted)> on_position_done;
};

struct EnumerationStats {
  std::uint64_t emitted = 0;
  std::uint64_t nodes = 0;
  std::size_t positions_total = 0;
  std::size_t next_position = 0;
  bool complete() const { return next_position >= positions_total; }
};

using MatrixSink = std::function<void(const DiscMat&)>;

/// Streams every PREHAD matrix of a shard in deterministic order. Throws
/// ConfigError unless the orthogonal sets share (n, depth).
EnumerationStats enumerate_prehad(const SetBundle& sets, const EnumerateOptions& options, const MatrixSink& sink);

/// Stage-by-stage constraint check of a complete matrix, independent of the
/// enumeration order: exactly the matrices enumerate_prehad emits.
bool satisfies_prehad(const DiscMat& m, const SetBundle& sets);

struct PruneConfig {
  /// Number of halvings of each of the 25 bins.
  int refine_depth = 1;
  double bound_inflation = kBoundInflation;
  /// Search nodes before giving up; negative means unlimited.
  long node_budget = -1;

  void validate() const;
};

enum class DescentOutcome : std::uint8_t { Survives, Dies, BudgetExhausted };

struct MatrixDescentResult {
  DescentOutcome outcome = DescentOutcome::Dies;
  long nodes = 0;
  /// Midpoint phases of the deepest box of the surviving chain.
  std::optional<std::array<double, 25>> leaf_midpoints;
};

/// Chain search over refinements of all 25 bins. At generation g a row pair
/// passes when |<u, v>| at box midpoints is <= 10 pi / (2^g n) (5 pi / (2^g n)
/// against the exact first row), likewise for columns. Children are assigned
/// row-by-column so infeasible prefixes cut the 2^25 branching.
MatrixDescentResult matrix_descend(const DiscMat& candidate, const PruneConfig& config, const DiscParams& params);

/// true: candidate may lie in HAD_n. false: no refined box survives.
bool prune_to_had(const DiscMat& candidate, const PruneConfig& config, const DiscParams& params);

struct HadMembership {
  OracleVerdict verdict = OracleVerdict::Unresolved;
  /// Phases (row-major core) of an exact Hadamard matrix inside the bins.
  std::optional<std::array<double, 25>> witness;
};

/// Deep test-only check: iterative deepening of matrix_descend to 20
/// generations plus a joint Gauss-Newton polish of the 25 phases.
HadMembership verify_had_membership(const DiscMat& candidate, const DiscParams& params);

// Matrix stream file: "MUB6MAT1", kind (u8, 0 = PREHAD, 1 = HAD), n (u16),
// depth (u8), shard index (u32), shard total (u32), count (u64), then count
// records of 25 u16 bins (row-major core). All little-endian.
enum class StreamKind : std::uint8_t { Prehad = 0, Had = 1 };

struct StreamHeader {
  StreamKind kind = StreamKind::Prehad;
  DiscParams params;
  ShardSpec shard;
  std::uint64_t count = 0;
};

inline constexpr std::size_t kStreamHeaderSize = 8 + 1 + 2 + 1 + 4 + 4 + 8;
inline constexpr std::size_t kStreamRecordSize = 50;
inline constexpr std::size_t kStreamCountOffset = 20;

void write_stream_header(std::ostream& out, const StreamHeader& header);
/// Throws CorruptionError.
StreamHeader read_stream_header(std::istream& in);

void write_matrix_stream(const std::string& path, const StreamHeader& header, const std::vector<DiscMat>& matrices);
std::vector<DiscMat> read_matrix_stream(const std::string& path, StreamHeader* header = nullptr);

}  // namespace mub6
