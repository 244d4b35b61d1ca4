#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include "mub6/core.hpp"
#include "mub6/oracle.hpp"
#include "mub6/set_bundle.hpp"

namespace mub6::test {

inline DiscVec vec(Bin a, Bin b, Bin c, Bin d, Bin e) { return DiscVec{{a, b, c, d, e}}; }

/// Sorted rows of F_6 binned at n = 17.
inline DiscMat f6_at_17() {
  DiscMat m;
  m.rows = {vec(0, 0, 0, 0, 0),   vec(2, 5, 8, 11, 14), vec(5, 11, 0, 5, 11),
            vec(8, 0, 8, 0, 8),   vec(11, 5, 0, 11, 5), vec(14, 11, 8, 5, 2)};
  return m;
}

/// Generated once per process; n = 17 takes a few seconds.
inline const SetBundle& sets17() {
  static const SetBundle sets = SetBundle::generate({17, 8}, true, true);
  return sets;
}

inline const SetBundle& sets7() {
  static const SetBundle sets = SetBundle::generate({7, 8}, true, true);
  return sets;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mub6_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace mub6::test
