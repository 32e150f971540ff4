#include "factorfuse/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "factorfuse/error.hpp"

namespace factorfuse {

namespace {

constexpr double kEpsilon = 1e-15;
constexpr double kTiny = 1e-300;
constexpr int kMaxTerms = 10000;

// Lower regularized gamma P(a, x) by its power series; converges fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxTerms; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEpsilon) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma Q(a, x) by its continued fraction (modified Lentz).
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEpsilon) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw Error(ErrorCode::InvalidArgument, "gamma_q requires a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double chi_square_sf(double x, int df) {
  if (df < 1) throw Error(ErrorCode::InvalidArgument, "chi-square df must be >= 1");
  if (!(x >= 0.0)) throw Error(ErrorCode::InvalidArgument, "chi-square statistic must be >= 0");
  const double q = gamma_q(0.5 * df, 0.5 * x);
  return std::clamp(q, 0.0, 1.0);
}

double chi_square_quantile(double p, int df) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidArgument, "tail probability must lie in (0, 1)");
  double lo = 0.0, hi = std::max(1.0, static_cast<double>(df));
  while (chi_square_sf(hi, df) > p) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chi_square_sf(mid, df) > p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double lrt(const FittedModel& small, const FittedModel& large, std::size_t level_count) {
  if (!large.partition.refines(small.partition, level_count)) {
    throw Error(ErrorCode::NotNested, "models are not nested");
  }
  return lrt_statistic(small.loglik, large.loglik);
}

GlobalTest global_null_test(const MergingPath& path) {
  const auto k = path.levels();
  GlobalTest t;
  t.statistic = lrt(path.steps.back().model, path.full(), k);
  t.df = static_cast<int>(k) - 1;
  t.pvalue = chi_square_sf(t.statistic, t.df);
  return t;
}

std::vector<HistoryRow> merging_history(const MergingPath& path) {
  const auto k = path.levels();
  std::vector<HistoryRow> rows;
  rows.reserve(path.steps.size());
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const auto& step = path.steps[i];
    HistoryRow row;
    row.step = static_cast<int>(i);
    row.group_a = step.group_a;
    row.group_b = step.group_b;
    row.loglik = step.model.loglik;
    if (i > 0) {
      row.pval_vs_previous = chi_square_sf(lrt(step.model, path.steps[i - 1].model, k), 1);
      row.pval_vs_full = chi_square_sf(lrt(step.model, path.full(), k), static_cast<int>(i));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

GicProfile gic_profile(const MergingPath& path, double penalty) {
  if (!(penalty > 0.0) || !std::isfinite(penalty)) throw Error(ErrorCode::InvalidArgument, "GIC penalty must be positive");
  GicProfile profile;
  profile.penalty = penalty;
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const auto& m = path.steps[i].model;
    GicRow row{m.loglik, static_cast<int>(m.partition.size()), 0.0};
    row.gic = -2.0 * row.loglik + penalty * row.clusters;
    if (!profile.rows.empty() && row.gic < profile.rows[static_cast<std::size_t>(profile.argmin_step)].gic) {
      profile.argmin_step = static_cast<int>(i);
    }
    profile.rows.push_back(row);
  }
  return profile;
}

SelectionCriterion SelectionCriterion::gic(double penalty) {
  if (!(penalty > 0.0) || !std::isfinite(penalty)) throw Error(ErrorCode::InvalidArgument, "GIC penalty must be positive");
  return {Kind::Gic, penalty};
}

SelectionCriterion SelectionCriterion::pvalue(double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorCode::InvalidArgument, "p-value threshold must lie in (0, 1)");
  return {Kind::PvalueVsFull, threshold};
}

SelectionCriterion SelectionCriterion::loglik_drop(double threshold) {
  if (!std::isfinite(threshold)) throw Error(ErrorCode::InvalidArgument, "log-likelihood threshold must be finite");
  return {Kind::LoglikDrop, threshold};
}

const char* criterion_name(SelectionCriterion::Kind kind) {
  switch (kind) {
    case SelectionCriterion::Kind::Gic: return "gic";
    case SelectionCriterion::Kind::PvalueVsFull: return "pvalue";
    case SelectionCriterion::Kind::LoglikDrop: return "loglik";
  }
  return "?";
}

int cut_step(const MergingPath& path, const SelectionCriterion& criterion) {
  switch (criterion.kind) {
    case SelectionCriterion::Kind::Gic:
      return gic_profile(path, criterion.value).argmin_step;
    case SelectionCriterion::Kind::PvalueVsFull: {
      const auto rows = merging_history(path);
      int chosen = 0;
      for (const auto& r : rows) {
        if (r.pval_vs_full > criterion.value) chosen = r.step;
      }
      return chosen;
    }
    case SelectionCriterion::Kind::LoglikDrop: {
      const double floor = path.full().loglik - criterion.value;
      int chosen = 0;
      for (std::size_t i = 0; i < path.steps.size(); ++i) {
        if (path.steps[i].model.loglik >= floor) chosen = static_cast<int>(i);
      }
      return chosen;
    }
  }
  return 0;
}

Partition cut_tree(const MergingPath& path, const SelectionCriterion& criterion) {
  return path.steps[static_cast<std::size_t>(cut_step(path, criterion))].model.partition;
}

std::vector<PartitionRow> optimal_partition_table(const MergingPath& path, const Grouping& grouping,
                                                  const SelectionCriterion& criterion) {
  const auto partition = cut_tree(path, criterion);
  const auto map = partition.level_to_cluster(grouping.level_count());
  std::vector<PartitionRow> rows;
  for (std::size_t l = 0; l < grouping.level_count(); ++l) {
    rows.push_back({static_cast<int>(l), grouping.labels[l],
                    partition.clusters[static_cast<std::size_t>(map[l])].label});
  }
  return rows;
}

}  // namespace factorfuse
