#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "factorfuse/execution.hpp"

namespace factorfuse {

struct MdsResult {
  std::vector<double> coordinates;
  double stress = 0.0;  // Kruskal stress-1 of the final configuration
  int iterations = 0;
};

/// Kruskal non-metric MDS into one dimension. `points` holds `count` rows of
/// `dim` values. Starts from the first classical principal coordinate, then
/// alternates isotonic regression of disparities with a gradient step on the
/// configuration for at most 100 iterations or until stress changes by less
/// than 1e-6. Sign and offset of the result are arbitrary.
MdsResult mds_project_1d(std::span<const double> points, std::size_t dim,
                         Execution execution, int threads = 0);

/// Stress-1 of a 1-D configuration against the given dissimilarities
/// (upper triangle, row-major, i < j), with disparities from isotonic
/// regression in dissimilarity order.
double kruskal_stress_1d(std::span<const double> coordinates, std::span<const double> dissimilarities);

/// Pool-adjacent-violators fit to `values` (non-decreasing result).
std::vector<double> isotonic_regression(std::span<const double> values);

}  // namespace factorfuse
