#include "factorfuse/engine.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <numeric>

#include "factorfuse/error.hpp"
#include "factorfuse/mds.hpp"

namespace factorfuse {

const char* strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::Adaptive: return "adaptive";
    case Strategy::FastAdaptive: return "fast-adaptive";
    case Strategy::Fixed: return "fixed";
    case Strategy::FastFixed: return "fast-fixed";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "adaptive") return Strategy::Adaptive;
  if (name == "fast-adaptive") return Strategy::FastAdaptive;
  if (name == "fixed") return Strategy::Fixed;
  if (name == "fast-fixed") return Strategy::FastFixed;
  throw Error(ErrorCode::InvalidStrategy, "unknown method '" + std::string(name) + "'");
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FACTORFUSE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<int>(std::min(v, 1024L));
  }
  return std::max(1, omp_get_max_threads());
}

FittedModel Evaluator::fit(const Partition& partition) const {
  count_.fetch_add(1, std::memory_order_relaxed);
  return factorfuse::fit(data_, grouping_, partition);
}

bool prefer_candidate(double candidate, const std::pair<std::string, std::string>& candidate_key,
                      double incumbent, const std::pair<std::string, std::string>& incumbent_key) {
  const double tol = 1e-10 * std::max({1.0, std::abs(candidate), std::abs(incumbent)});
  if (candidate > incumbent + tol) return true;
  if (candidate < incumbent - tol) return false;
  return candidate_key < incumbent_key;
}

namespace {

using PairList = std::vector<std::pair<std::size_t, std::size_t>>;

// Evaluates f(0..count-1) into a result vector. Exceptions raised inside the
// OpenMP region are captured and the one with the lowest index rethrown.
template <typename F>
std::vector<double> indexed_map(std::size_t count, const EngineOptions& options, F&& f) {
  std::vector<double> out(count, 0.0);
  std::vector<std::exception_ptr> errors(count);
  const bool parallel = options.execution == Execution::Parallel && count > 1;
  const int threads = resolve_threads(options.threads);
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (parallel)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

void require_levels(const Grouping& grouping, const ResponseData& data) {
  if (grouping.codes.size() != data.size()) throw Error(ErrorCode::InvalidData, "grouping and response lengths differ");
  if (grouping.level_count() < 2) throw Error(ErrorCode::InvalidData, "at least two factor levels are required");
}

MergingPath start_path(const ResponseData& data, Strategy strategy, FittedModel full) {
  MergingPath path;
  path.family = data.family();
  path.strategy = strategy;
  path.observations = data.size();
  path.steps.push_back({"", "", std::move(full)});
  return path;
}

std::size_t best_pair(const Partition& base, const PairList& pairs, const std::vector<double>& scores) {
  std::size_t best = 0;
  auto key = [&](std::size_t i) {
    return std::make_pair(base.clusters[pairs[i].first].label, base.clusters[pairs[i].second].label);
  };
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    if (prefer_candidate(scores[i], key(i), scores[best], key(best))) best = i;
  }
  return best;
}

void record_merge(MergingPath& path, const Evaluator& ev, Partition& current, std::size_t a, std::size_t b) {
  std::string la = current.clusters[a].label;
  std::string lb = current.clusters[b].label;
  current = current.merged(a, b);
  path.steps.push_back({std::move(la), std::move(lb), ev.fit(current)});
}

}  // namespace

std::vector<double> candidate_logliks(const Evaluator& evaluator, const Partition& base,
                                      const PairList& pairs, const EngineOptions& options) {
  return indexed_map(pairs.size(), options, [&](std::size_t i) {
    return evaluator.fit(base.merged(pairs[i].first, pairs[i].second)).loglik;
  });
}

std::vector<double> level_distance_matrix(const Evaluator& evaluator, const FittedModel& full,
                                          const EngineOptions& options) {
  const auto k = full.partition.size();
  PairList pairs;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
  }
  const auto ll = candidate_logliks(evaluator, full.partition, pairs, options);
  std::vector<double> dist(k * k, 0.0);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    // full.partition lists levels in their original order
    const auto a = static_cast<std::size_t>(full.partition.clusters[pairs[p].first].members.front());
    const auto b = static_cast<std::size_t>(full.partition.clusters[pairs[p].second].members.front());
    dist[a * k + b] = dist[b * k + a] = lrt_statistic(ll[p], full.loglik);
  }
  return dist;
}

MergingPath drive_adaptive(const ResponseData& data, const Grouping& grouping, const EngineOptions& options) {
  require_levels(grouping, data);
  Evaluator ev(data, grouping);
  Partition current = Partition::singletons(grouping);
  auto path = start_path(data, Strategy::Adaptive, ev.fit(current));

  while (current.size() > 1) {
    PairList pairs;
    for (std::size_t i = 0; i < current.size(); ++i) {
      for (std::size_t j = i + 1; j < current.size(); ++j) pairs.emplace_back(i, j);
    }
    const auto ll = candidate_logliks(ev, current, pairs, options);
    const auto pick = pairs[best_pair(current, pairs, ll)];
    record_merge(path, ev, current, pick.first, pick.second);
  }
  path.evaluations = ev.evaluations();
  return path;
}

MergingPath drive_fast_adaptive(const ResponseData& data, const Grouping& grouping,
                                const EngineOptions& options) {
  require_levels(grouping, data);
  Evaluator ev(data, grouping);
  auto path = start_path(data, Strategy::FastAdaptive, ev.fit(Partition::singletons(grouping)));
  path.ordering = ordering_statistic(data, grouping, path.full(), options);
  Partition current = Partition::singletons(grouping, path.ordering);

  while (current.size() > 1) {
    PairList pairs;
    for (std::size_t i = 0; i + 1 < current.size(); ++i) pairs.emplace_back(i, i + 1);
    const auto ll = candidate_logliks(ev, current, pairs, options);
    const auto pick = pairs[best_pair(current, pairs, ll)];
    record_merge(path, ev, current, pick.first, pick.second);
  }
  path.evaluations = ev.evaluations();
  return path;
}

MergingPath drive_fixed(const ResponseData& data, const Grouping& grouping, const EngineOptions& options) {
  require_levels(grouping, data);
  Evaluator ev(data, grouping);
  Partition current = Partition::singletons(grouping);
  auto path = start_path(data, Strategy::Fixed, ev.fit(current));
  const auto k = grouping.level_count();
  const auto level_dist = level_distance_matrix(ev, path.full(), options);

  // Cluster distances under complete linkage, indexed like `current`.
  std::vector<std::vector<double>> dist(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) dist[i][j] = level_dist[i * k + j];
  }

  while (current.size() > 1) {
    PairList pairs;
    std::vector<double> scores;
    for (std::size_t i = 0; i < current.size(); ++i) {
      for (std::size_t j = i + 1; j < current.size(); ++j) {
        pairs.emplace_back(i, j);
        scores.push_back(-dist[i][j]);
      }
    }
    const auto [a, b] = pairs[best_pair(current, pairs, scores)];
    for (std::size_t x = 0; x < dist.size(); ++x) {
      dist[a][x] = dist[x][a] = std::max(dist[a][x], dist[b][x]);
    }
    dist[a][a] = 0.0;
    dist.erase(dist.begin() + static_cast<std::ptrdiff_t>(b));
    for (auto& row : dist) row.erase(row.begin() + static_cast<std::ptrdiff_t>(b));
    record_merge(path, ev, current, a, b);
  }
  path.evaluations = ev.evaluations();
  return path;
}

MergingPath drive_fast_fixed(const ResponseData& data, const Grouping& grouping,
                             const EngineOptions& options) {
  require_levels(grouping, data);
  Evaluator ev(data, grouping);
  auto path = start_path(data, Strategy::FastFixed, ev.fit(Partition::singletons(grouping)));
  path.ordering = ordering_statistic(data, grouping, path.full(), options);
  const auto full = path.full();  // copy: steps grow below
  const auto k = grouping.level_count();

  // LRT distances between original levels computed so far, keyed (low, high).
  std::map<std::pair<int, int>, double> known;
  auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  {
    PairList pairs;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      const auto a = static_cast<std::size_t>(path.ordering[i]);
      const auto b = static_cast<std::size_t>(path.ordering[i + 1]);
      pairs.emplace_back(std::min(a, b), std::max(a, b));
    }
    const auto ll = candidate_logliks(ev, full.partition, pairs, options);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      known[key(static_cast<int>(pairs[p].first), static_cast<int>(pairs[p].second))] =
          lrt_statistic(ll[p], full.loglik);
    }
  }
  auto fresh = [&](int a, int b) {
    const auto lo = static_cast<std::size_t>(std::min(a, b));
    const auto hi = static_cast<std::size_t>(std::max(a, b));
    known[key(a, b)] = lrt_statistic(ev.fit(full.partition.merged(lo, hi)).loglik, full.loglik);
  };

  struct Gap {
    double distance = 0.0;
    bool exact = true;
  };
  // Complete linkage over the member pairs measured so far; exact once the
  // outermost pair (first of left, last of right) has been measured, which
  // under the ordering bounds every other member pair.
  auto linkage = [&](const Cluster& left, const Cluster& right) {
    Gap g{0.0, known.count(key(left.members.front(), right.members.back())) > 0};
    for (int a : left.members) {
      for (int b : right.members) {
        if (auto it = known.find(key(a, b)); it != known.end()) g.distance = std::max(g.distance, it->second);
      }
    }
    return g;
  };

  Partition current = Partition::singletons(grouping, path.ordering);
  std::vector<Gap> gaps;
  for (std::size_t i = 0; i + 1 < current.size(); ++i) gaps.push_back(linkage(current.clusters[i], current.clusters[i + 1]));

  while (current.size() > 1) {
    bool budget = true;  // one fresh distance per merge step
    std::size_t pick = 0;
    for (;;) {
      pick = 0;
      auto gap_key = [&](std::size_t g) {
        return std::make_pair(current.clusters[g].label, current.clusters[g + 1].label);
      };
      for (std::size_t g = 1; g < gaps.size(); ++g) {
        if (prefer_candidate(-gaps[g].distance, gap_key(g), -gaps[pick].distance, gap_key(pick))) pick = g;
      }
      if (gaps[pick].exact || !budget) break;
      fresh(current.clusters[pick].members.front(), current.clusters[pick + 1].members.back());
      gaps[pick] = linkage(current.clusters[pick], current.clusters[pick + 1]);
      budget = false;
    }
    record_merge(path, ev, current, pick, pick + 1);
    gaps.erase(gaps.begin() + static_cast<std::ptrdiff_t>(pick));
    if (pick > 0) gaps[pick - 1] = linkage(current.clusters[pick - 1], current.clusters[pick]);
    if (pick < gaps.size()) gaps[pick] = linkage(current.clusters[pick], current.clusters[pick + 1]);
  }
  path.evaluations = ev.evaluations();
  return path;
}

MergingPath merge_factors(const ResponseData& data, const Grouping& grouping, Strategy strategy,
                          const EngineOptions& options) {
  switch (strategy) {
    case Strategy::Adaptive: return drive_adaptive(data, grouping, options);
    case Strategy::FastAdaptive: return drive_fast_adaptive(data, grouping, options);
    case Strategy::Fixed: return drive_fixed(data, grouping, options);
    case Strategy::FastFixed: return drive_fast_fixed(data, grouping, options);
  }
  throw Error(ErrorCode::InvalidStrategy, "unknown strategy");
}

std::vector<double> level_statistics(const ResponseData& data, const Grouping& grouping,
                                     const FittedModel& full, const EngineOptions& options) {
  const auto k = grouping.level_count();
  std::vector<double> stat(k, 0.0);
  if (data.family() == Family::GaussianNd) {
    const auto mds = mds_project_1d(data.values(), data.dim(), options.execution, options.threads);
    std::vector<double> weight(k, 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto level = static_cast<std::size_t>(grouping.codes[i]);
      stat[level] += data.weight(i) * mds.coordinates[i];
      weight[level] += data.weight(i);
    }
    for (std::size_t l = 0; l < k; ++l) stat[l] /= weight[l];
    return stat;
  }
  std::vector<double> per_cluster;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianFit>) per_cluster = f.means;
        else if constexpr (std::is_same_v<T, BinomialFit>) per_cluster = f.proportions;
        else if constexpr (std::is_same_v<T, CoxFit>) per_cluster = f.alphas;
      },
      full.estimates);
  for (std::size_t c = 0; c < full.partition.size(); ++c) {
    for (int m : full.partition.clusters[c].members) stat[static_cast<std::size_t>(m)] = per_cluster[c];
  }
  return stat;
}

std::vector<int> ordering_statistic(const ResponseData& data, const Grouping& grouping,
                                    const FittedModel& full, const EngineOptions& options) {
  const auto stat = level_statistics(data, grouping, full, options);
  std::vector<int> order(stat.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return stat[static_cast<std::size_t>(a)] < stat[static_cast<std::size_t>(b)];
  });
  return order;
}

}  // namespace factorfuse
