#include "factorfuse/mds.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "factorfuse/error.hpp"

namespace factorfuse {

namespace {

constexpr int kMaxIterations = 100;
constexpr double kStressTolerance = 1e-6;

struct PairTable {
  std::size_t n = 0;
  std::vector<double> dissimilarity;  // i < j, row-major upper triangle
  std::vector<std::size_t> order;     // pair indices by increasing dissimilarity
};

std::size_t pair_index(std::size_t n, std::size_t i, std::size_t j) {
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

PairTable make_pairs(std::span<const double> dissimilarity, std::size_t n) {
  PairTable t;
  t.n = n;
  t.dissimilarity.assign(dissimilarity.begin(), dissimilarity.end());
  t.order.resize(t.dissimilarity.size());
  std::iota(t.order.begin(), t.order.end(), 0);
  std::stable_sort(t.order.begin(), t.order.end(),
                   [&](auto a, auto b) { return t.dissimilarity[a] < t.dissimilarity[b]; });
  return t;
}

std::size_t count_from_pairs(std::size_t pairs) {
  std::size_t n = 1;
  while (n * (n - 1) / 2 < pairs) ++n;
  return n;
}

// Stress-1 and disparities (indexed like the pair table) for configuration x.
double stress_of(const PairTable& t, std::span<const double> x, std::vector<double>& disparity) {
  std::vector<double> sorted(t.order.size());
  std::vector<double> dist(t.dissimilarity.size());
  for (std::size_t i = 0, p = 0; i < t.n; ++i) {
    for (std::size_t j = i + 1; j < t.n; ++j, ++p) dist[p] = std::abs(x[i] - x[j]);
  }
  for (std::size_t r = 0; r < t.order.size(); ++r) sorted[r] = dist[t.order[r]];
  const auto fitted = isotonic_regression(sorted);
  disparity.resize(dist.size());
  double raw = 0.0, scale = 0.0;
  for (std::size_t r = 0; r < t.order.size(); ++r) {
    const std::size_t p = t.order[r];
    disparity[p] = fitted[r];
    const double e = dist[p] - fitted[r];
    raw += e * e;
    scale += dist[p] * dist[p];
  }
  return scale > 0.0 ? std::sqrt(raw / scale) : 0.0;
}

}  // namespace

std::vector<double> isotonic_regression(std::span<const double> values) {
  struct Block {
    double sum;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (double v : values) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1) {
      const auto& b = blocks[blocks.size() - 1];
      const auto& a = blocks[blocks.size() - 2];
      if (a.sum / static_cast<double>(a.count) <= b.sum / static_cast<double>(b.count)) break;
      Block m{a.sum + b.sum, a.count + b.count};
      blocks.pop_back();
      blocks.back() = m;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& b : blocks) out.insert(out.end(), b.count, b.sum / static_cast<double>(b.count));
  return out;
}

double kruskal_stress_1d(std::span<const double> coordinates, std::span<const double> dissimilarities) {
  const auto t = make_pairs(dissimilarities, count_from_pairs(dissimilarities.size()));
  std::vector<double> disparity;
  return stress_of(t, coordinates, disparity);
}

MdsResult mds_project_1d(std::span<const double> points, std::size_t dim, Execution execution,
                         int threads) {
  if (dim == 0 || points.size() % dim != 0) throw Error(ErrorCode::InvalidArgument, "bad point matrix");
  const std::size_t n = points.size() / dim;
  const bool parallel = execution == Execution::Parallel;
  const int nthreads = resolve_threads(threads);

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> y(
      points.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));

  std::vector<double> dissimilarity(n * (n - 1) / 2);
  double largest = 0.0;
#pragma omp parallel for schedule(dynamic, 16) num_threads(nthreads) if (parallel) reduction(max : largest)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(n); ++si) {
    const auto i = static_cast<std::size_t>(si);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (y.row(static_cast<Eigen::Index>(i)) - y.row(static_cast<Eigen::Index>(j))).norm();
      dissimilarity[pair_index(n, i, j)] = d;
      largest = std::max(largest, d);
    }
  }
  if (n < 2 || largest == 0.0) throw Error(ErrorCode::DegeneratePoints, "points are coincident");

  // Classical scaling of Euclidean distances is the first principal coordinate.
  const Eigen::RowVectorXd center = y.colwise().mean();
  const Eigen::MatrixXd centered = y.rowwise() - center;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered.transpose() * centered);
  Eigen::VectorXd axis = eig.eigenvectors().col(static_cast<Eigen::Index>(dim) - 1);
  // fix the sign so the result does not depend on the eigen solver
  Eigen::Index lead = 0;
  axis.cwiseAbs().maxCoeff(&lead);
  if (axis(lead) < 0) axis = -axis;
  const Eigen::VectorXd init = centered * axis;

  MdsResult result;
  result.coordinates.assign(init.data(), init.data() + init.size());
  const auto table = make_pairs(dissimilarity, n);
  std::vector<double> disparity;
  double stress = stress_of(table, result.coordinates, disparity);

  std::vector<double> grad(n), trial(n);
  double rate = 1.0;
  bool settled = false;
  for (int iter = 1; iter <= kMaxIterations && stress > 0.0 && !settled; ++iter) {
    result.iterations = iter;
    double raw = 0.0, scale = 0.0;
    for (std::size_t i = 0, p = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j, ++p) {
        const double d = std::abs(result.coordinates[i] - result.coordinates[j]);
        raw += (d - disparity[p]) * (d - disparity[p]);
        scale += d * d;
      }
    }
    const auto& x = result.coordinates;
    // d stress / d x_i with disparities held fixed
#pragma omp parallel for schedule(static) num_threads(nthreads) if (parallel)
    for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(n); ++si) {
      const auto i = static_cast<std::size_t>(si);
      double draw = 0.0, dscale = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double diff = x[i] - x[j];
        const double d = std::abs(diff);
        const double sign = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
        const double dhat = disparity[i < j ? pair_index(n, i, j) : pair_index(n, j, i)];
        draw += 2.0 * (d - dhat) * sign;
        dscale += 2.0 * d * sign;
      }
      grad[i] = (draw * scale - raw * dscale) / (2.0 * stress * scale * scale);
    }
    double gnorm = 0.0, xnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      gnorm += grad[i] * grad[i];
      xnorm += x[i] * x[i];
    }
    gnorm = std::sqrt(gnorm);
    if (gnorm == 0.0) break;
    const double unit = std::sqrt(xnorm / static_cast<double>(n)) / gnorm;

    bool improved = false;
    std::vector<double> trial_disparity;
    for (int halving = 0; halving < 30; ++halving) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] - rate * unit * grad[i];
      const double s = stress_of(table, trial, trial_disparity);
      if (s < stress) {
        const double change = stress - s;
        result.coordinates.swap(trial);
        disparity.swap(trial_disparity);
        stress = s;
        improved = true;
        rate = std::min(rate * 2.0, 1e3);
        settled = change < kStressTolerance;
        break;
      }
      rate *= 0.5;
    }
    if (!improved) break;
  }
  result.stress = stress;
  return result;
}

}  // namespace factorfuse
