#pragma once

// A second, straight-off-the-pseudocode transcription of the D-selection
// algorithm, kept apart from the library so the two can be compared exactly.

#include <algorithm>
#include <vector>

#include "snchol/sparse.hpp"

namespace oracle {

inline snchol::index_t opt_d_reference(snchol::index_t n,
                                       snchol::index_t n_super,
                                       const std::vector<snchol::index_t>& c,
                                       double goal_factor = 1.1,
                                       double goal_divisor = 14.0,
                                       double d_cap_fraction = 0.3,
                                       double outer_floor_fraction = 0.001) {
  using snchol::index_t;
  const double goal_tasks = std::max(
      goal_factor * static_cast<double>(n_super),
      static_cast<double>(n) / goal_divisor);
  index_t max_children = 0;
  for (index_t i = 0; i < n_super; ++i)
    if (c[i] > max_children) max_children = c[i];
  std::vector<index_t> t(static_cast<std::size_t>(max_children) + 1, 0);
  for (index_t i = 0; i < n_super; ++i) t[c[i]] += 1;
  index_t d = max_children + 1;
  index_t num_outer_tasks = 0;
  index_t num_tasks = n_super;
  while ((static_cast<double>(num_tasks) < goal_tasks ||
          static_cast<double>(d) >
              d_cap_fraction * static_cast<double>(max_children) ||
          static_cast<double>(num_outer_tasks) <
              outer_floor_fraction * static_cast<double>(n_super)) &&
         d > 0) {
    d = d - 1;
    num_outer_tasks = num_outer_tasks + t[d];
    num_tasks = num_tasks + d * t[d];
  }
  return d;
}

}  // namespace oracle
