#pragma once

#include <atomic>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "factorfuse/data.hpp"
#include "factorfuse/execution.hpp"
#include "factorfuse/families.hpp"

namespace factorfuse {

enum class Strategy { Adaptive, FastAdaptive, Fixed, FastFixed };

const char* strategy_name(Strategy strategy);
/// Accepts "adaptive", "fast-adaptive", "fixed", "fast-fixed"; throws
/// InvalidStrategy otherwise.
Strategy parse_strategy(std::string_view name);

struct EngineOptions {
  Execution execution = Execution::Parallel;
  int threads = 0;  // 0: FACTORFUSE_THREADS or the OpenMP default
};

struct MergeStep {
  std::string group_a;  // empty at step 0
  std::string group_b;
  FittedModel model;
};

struct MergingPath {
  Family family = Family::Gaussian1d;
  Strategy strategy = Strategy::Adaptive;
  std::vector<MergeStep> steps;
  std::size_t evaluations = 0;
  std::vector<int> ordering;  // level order used by fast strategies
  std::size_t observations = 0;

  const FittedModel& full() const { return steps.front().model; }
  std::size_t levels() const { return steps.size(); }
};

/// Fits models against one dataset and counts every fit.
class Evaluator {
 public:
  Evaluator(const ResponseData& data, const Grouping& grouping) : data_(data), grouping_(grouping) {}

  FittedModel fit(const Partition& partition) const;
  double loglik(const Partition& partition) const { return fit(partition).loglik; }

  std::size_t evaluations() const noexcept { return count_.load(std::memory_order_relaxed); }
  const ResponseData& data() const noexcept { return data_; }
  const Grouping& grouping() const noexcept { return grouping_; }

 private:
  const ResponseData& data_;
  const Grouping& grouping_;
  mutable std::atomic<std::size_t> count_{0};
};

/// Post-merge log-likelihood of `base` with each listed pair of clusters
/// fused. Results are indexed like `pairs`, so the reduction afterwards is
/// independent of scheduling.
std::vector<double> candidate_logliks(const Evaluator& evaluator, const Partition& base,
                                      const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                      const EngineOptions& options);

/// Symmetric k x k matrix (row-major) of LRT distances between original
/// levels: merge only i and j, keep every other level a singleton.
std::vector<double> level_distance_matrix(const Evaluator& evaluator, const FittedModel& full,
                                          const EngineOptions& options);

MergingPath merge_factors(const ResponseData& data, const Grouping& grouping, Strategy strategy,
                          const EngineOptions& options = {});

MergingPath drive_adaptive(const ResponseData& data, const Grouping& grouping,
                           const EngineOptions& options = {});
MergingPath drive_fast_adaptive(const ResponseData& data, const Grouping& grouping,
                                const EngineOptions& options = {});
MergingPath drive_fixed(const ResponseData& data, const Grouping& grouping,
                        const EngineOptions& options = {});
MergingPath drive_fast_fixed(const ResponseData& data, const Grouping& grouping,
                             const EngineOptions& options = {});

/// Per-level scalar used to order levels: mean, proportion, log hazard ratio
/// from `full`, or the level mean of the 1-D MDS projection for GaussianNd.
std::vector<double> level_statistics(const ResponseData& data, const Grouping& grouping,
                                     const FittedModel& full, const EngineOptions& options = {});

/// Level indices sorted by `level_statistics`; ties keep original order.
std::vector<int> ordering_statistic(const ResponseData& data, const Grouping& grouping,
                                    const FittedModel& full, const EngineOptions& options = {});

/// True when `candidate` beats `incumbent`: higher score, or a tie within
/// relative 1e-10 and a lexicographically smaller (label A, label B) key.
bool prefer_candidate(double candidate, const std::pair<std::string, std::string>& candidate_key,
                      double incumbent, const std::pair<std::string, std::string>& incumbent_key);

}  // namespace factorfuse
