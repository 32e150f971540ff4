#pragma once

#include <string>
#include <vector>

#include "factorfuse/engine.hpp"

namespace factorfuse {

/// Upper tail P(X > x) of a chi-square variable with `df` degrees of freedom,
/// via the regularized incomplete gamma function Q(df/2, x/2).
double chi_square_sf(double x, int df);

/// Inverse of `chi_square_sf` in x: the (1 - p) quantile.
double chi_square_quantile(double p, int df);

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

/// LRT statistic between nested models; `small` must be a coarsening of
/// `large`. Throws NotNested or NumericalInconsistency.
double lrt(const FittedModel& small, const FittedModel& large, std::size_t level_count);

struct GlobalTest {
  double statistic = 0.0;
  int df = 0;
  double pvalue = 1.0;
};

/// All groups equal (last step) against the full model.
GlobalTest global_null_test(const MergingPath& path);

struct HistoryRow {
  int step = 0;
  std::string group_a;
  std::string group_b;
  double loglik = 0.0;
  double pval_vs_full = 1.0;
  double pval_vs_previous = 1.0;
};

std::vector<HistoryRow> merging_history(const MergingPath& path);

struct GicRow {
  double loglik = 0.0;
  int clusters = 0;
  double gic = 0.0;
};

struct GicProfile {
  double penalty = 2.0;
  std::vector<GicRow> rows;
  int argmin_step = 0;
};

/// GIC = -2 * loglik + penalty * clusters for every step; ties in the
/// minimum resolve to the earliest step.
GicProfile gic_profile(const MergingPath& path, double penalty);

struct SelectionCriterion {
  enum class Kind { Gic, PvalueVsFull, LoglikDrop };
  Kind kind = Kind::Gic;
  double value = 2.0;

  static SelectionCriterion gic(double penalty);
  static SelectionCriterion pvalue(double threshold);
  static SelectionCriterion loglik_drop(double threshold);
};

const char* criterion_name(SelectionCriterion::Kind kind);

/// Step index chosen by `criterion`.
int cut_step(const MergingPath& path, const SelectionCriterion& criterion);

Partition cut_tree(const MergingPath& path, const SelectionCriterion& criterion);

struct PartitionRow {
  int level = 0;
  std::string orig;  // label of the original level
  std::string pred;  // label of the cluster it ends up in
};

/// One row per original level, in level order.
std::vector<PartitionRow> optimal_partition_table(const MergingPath& path, const Grouping& grouping,
                                                  const SelectionCriterion& criterion);

}  // namespace factorfuse
