#pragma once

#include <string>

#include "mub6/vector_set.hpp"

namespace mub6 {

/// All vector sets for one (n, depth). The unbiased sets are optional since
/// stage-1 enumeration only needs the orthogonal ones.
struct SetBundle {
  DiscParams params;
  VectorSet ort_mon, ort, ort_eps;
  VectorSet ub_mon, ub, ub_eps;

  bool has_orthogonal() const { return !ort.empty(); }
  bool has_unbiased() const { return !ub.empty(); }

  /// Throws ConfigError if any loaded set disagrees with `params`.
  void check_consistent() const;

  static SetBundle generate(const DiscParams& params, bool orthogonal, bool unbiased, int threads = 1);

  /// Loads whichever of the six files exist in `dir`; throws ConfigError when
  /// a requested family is missing.
  static SetBundle load(const std::string& dir, const DiscParams& params, bool orthogonal, bool unbiased);

  void save(const std::string& dir) const;
};

}  // namespace mub6
