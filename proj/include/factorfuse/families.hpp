#pragma once

#include <limits>
#include <variant>
#include <vector>

#include "factorfuse/data.hpp"

namespace factorfuse {

struct GaussianFit {
  double loglik = 0.0;
  std::vector<double> means;
  std::vector<double> weights;  // per-cluster weighted counts
  double sigma2 = 0.0;
  bool floored = false;  // sigma2 hit the zero-residual floor
};

struct GaussianNdFit {
  double loglik = 0.0;
  std::vector<std::vector<double>> means;
  std::vector<double> weights;
  std::vector<double> covariance;  // dim x dim, row-major
  bool ridged = false;
};

struct BinomialFit {
  double loglik = 0.0;
  std::vector<double> proportions;
  std::vector<double> logits;  // +-infinity for proportions 0 or 1
  std::vector<double> weights;
};

struct CoxFit {
  double loglik = 0.0;
  std::vector<double> alphas;  // alphas[0] == 0 is the reference cluster
  std::vector<double> events;  // per-cluster event counts
  int iterations = 0;
};

using FamilyEstimates = std::variant<GaussianFit, GaussianNdFit, BinomialFit, CoxFit>;

struct FittedModel {
  Partition partition;
  double loglik = 0.0;
  FamilyEstimates estimates;
  /// Set when a fallback (variance floor or covariance ridge) was applied.
  bool degenerate = false;
};

/// Fits the family implied by `data.family()` on `partition`. Pure: the
/// evaluation counter lives in the engine.
FittedModel fit(const ResponseData& data, const Grouping& grouping, const Partition& partition);

GaussianFit loglik_gaussian_1d(const ResponseData& data, const Grouping& grouping,
                               const Partition& partition);
GaussianNdFit loglik_gaussian_nd(const ResponseData& data, const Grouping& grouping,
                                 const Partition& partition);
BinomialFit loglik_binomial(const ResponseData& data, const Grouping& grouping,
                            const Partition& partition);
CoxFit loglik_cox(const ResponseData& data, const Grouping& grouping, const Partition& partition);

/// Per-cluster summary: mean, mean vector, proportion or hazard ratio. Scalar
/// families return one-element vectors.
std::vector<std::vector<double>> group_summary(const FittedModel& model);

struct SurvivalStep {
  double time;
  double survival;
};

/// Product-limit estimate over the rows whose level belongs to `cluster`.
/// The first step is (0, 1); later steps are at distinct event times.
std::vector<SurvivalStep> kaplan_meier(const ResponseData& data, const Grouping& grouping,
                                       const Cluster& cluster);

/// 2 * (loglik_large - loglik_small). Shortfalls down to -1e-9 are clamped to
/// zero; anything lower throws NumericalInconsistency.
double lrt_statistic(double loglik_small, double loglik_large);

namespace cox {
inline constexpr int kMaxIterations = 50;
inline constexpr double kTolerance = 1e-8;
inline constexpr double kCoefficientCap = 20.0;
}  // namespace cox

}  // namespace factorfuse
