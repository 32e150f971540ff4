#include "factorfuse/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "factorfuse/error.hpp"

namespace factorfuse {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidStrategy: return "InvalidStrategy";
    case ErrorCode::IncompatiblePanel: return "IncompatiblePanel";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::InvalidData: return "InvalidData";
    case ErrorCode::NoEvents: return "NoEvents";
    case ErrorCode::DegeneratePoints: return "DegeneratePoints";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::MonotoneLikelihood: return "MonotoneLikelihood";
    case ErrorCode::NotNested: return "NotNested";
    case ErrorCode::NumericalInconsistency: return "NumericalInconsistency";
  }
  return "Error";
}

const char* family_name(Family family) {
  switch (family) {
    case Family::Gaussian1d: return "gaussian";
    case Family::GaussianNd: return "gaussianNd";
    case Family::Binomial: return "binomial";
    case Family::Survival: return "survival";
  }
  return "?";
}

namespace {

void check_weights(const std::vector<double>& weights, std::size_t n) {
  if (weights.empty()) return;
  if (weights.size() != n) throw Error(ErrorCode::InvalidData, "weight count does not match rows");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidData, "weights must be positive");
  }
}

void check_finite(const std::vector<double>& values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidData, "non-finite response value");
  }
}

}  // namespace

ResponseData::ResponseData(Family family, std::size_t n, std::size_t dim, std::vector<double> values,
                           std::vector<int> events, std::vector<double> weights)
    : family_(family),
      n_(n),
      dim_(dim),
      values_(std::move(values)),
      events_(std::move(events)),
      weights_(std::move(weights)) {}

ResponseData ResponseData::gaussian(std::vector<double> values, std::vector<double> weights) {
  check_finite(values);
  check_weights(weights, values.size());
  const auto n = values.size();
  return {Family::Gaussian1d, n, 1, std::move(values), {}, std::move(weights)};
}

ResponseData ResponseData::gaussian_nd(std::vector<double> rows, std::size_t dim,
                                       std::vector<double> weights) {
  if (dim < 2) throw Error(ErrorCode::InvalidData, "gaussianNd requires dimension >= 2");
  if (rows.size() % dim != 0) throw Error(ErrorCode::InvalidData, "row data not a multiple of dim");
  check_finite(rows);
  const auto n = rows.size() / dim;
  check_weights(weights, n);
  return {Family::GaussianNd, n, dim, std::move(rows), {}, std::move(weights)};
}

ResponseData ResponseData::binomial(std::vector<double> values, std::vector<double> weights) {
  for (double v : values) {
    if (v != 0.0 && v != 1.0) throw Error(ErrorCode::InvalidData, "binomial response must be 0 or 1");
  }
  check_weights(weights, values.size());
  const auto n = values.size();
  return {Family::Binomial, n, 1, std::move(values), {}, std::move(weights)};
}

ResponseData ResponseData::survival(std::vector<double> times, std::vector<int> events,
                                    std::vector<double> weights) {
  if (times.size() != events.size()) throw Error(ErrorCode::InvalidData, "time/event length mismatch");
  if (!weights.empty()) {
    throw Error(ErrorCode::InvalidData, "observation weights are not supported for survival data");
  }
  for (double t : times) {
    if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidData, "survival times must be positive");
  }
  for (int e : events) {
    if (e != 0 && e != 1) throw Error(ErrorCode::InvalidData, "event flags must be 0 or 1");
  }
  const auto n = times.size();
  return {Family::Survival, n, 1, std::move(times), std::move(events), {}};
}

ResponseData ResponseData::select(std::span<const std::size_t> rows) const {
  std::vector<double> values;
  std::vector<int> events;
  std::vector<double> weights;
  values.reserve(rows.size() * dim_);
  for (auto r : rows) {
    auto src = row(r);
    values.insert(values.end(), src.begin(), src.end());
    if (!events_.empty()) events.push_back(events_[r]);
    if (!weights_.empty()) weights.push_back(weights_[r]);
  }
  return {family_, rows.size(), dim_, std::move(values), std::move(events), std::move(weights)};
}

Grouping Grouping::from_names(std::span<const std::string> names) {
  std::set<std::string> distinct(names.begin(), names.end());
  std::vector<std::string> levels(distinct.begin(), distinct.end());
  std::vector<std::string> labels;
  labels.reserve(levels.size());
  for (const auto& l : levels) labels.push_back("(" + l + ")");
  return from_names(names, std::move(levels), std::move(labels));
}

Grouping Grouping::from_names(std::span<const std::string> names, std::vector<std::string> levels,
                              std::vector<std::string> labels) {
  if (labels.size() != levels.size()) throw Error(ErrorCode::InvalidData, "level/label count mismatch");
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!index.emplace(levels[i], static_cast<int>(i)).second) {
      throw Error(ErrorCode::InvalidData, "duplicate level '" + levels[i] + "'");
    }
  }
  Grouping g;
  g.levels = std::move(levels);
  g.labels = std::move(labels);
  g.counts.assign(g.levels.size(), 0);
  g.codes.reserve(names.size());
  for (const auto& name : names) {
    auto it = index.find(name);
    if (it == index.end()) throw Error(ErrorCode::InvalidData, "unknown level '" + name + "'");
    g.codes.push_back(it->second);
    ++g.counts[static_cast<std::size_t>(it->second)];
  }
  for (std::size_t i = 0; i < g.counts.size(); ++i) {
    if (g.counts[i] == 0) throw Error(ErrorCode::EmptyCluster, "level '" + g.levels[i] + "' has no observations");
  }
  return g;
}

Grouping Grouping::select(std::span<const std::size_t> rows) const {
  Grouping g;
  g.levels = levels;
  g.labels = labels;
  g.counts.assign(levels.size(), 0);
  for (auto r : rows) {
    g.codes.push_back(codes[r]);
    ++g.counts[static_cast<std::size_t>(codes[r])];
  }
  return g;
}

Partition Partition::singletons(const Grouping& grouping, std::span<const int> order) {
  Partition p;
  const auto k = grouping.level_count();
  p.clusters.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const int level = order.empty() ? static_cast<int>(i) : order[i];
    p.clusters.push_back({grouping.labels[static_cast<std::size_t>(level)], {level}});
  }
  return p;
}

Partition Partition::merged(std::size_t a, std::size_t b) const {
  if (a == b || a >= clusters.size() || b >= clusters.size()) {
    throw Error(ErrorCode::InvalidArgument, "invalid cluster pair for merge");
  }
  Partition p = *this;
  Cluster fused{clusters[a].label + clusters[b].label, clusters[a].members};
  fused.members.insert(fused.members.end(), clusters[b].members.begin(), clusters[b].members.end());
  const auto keep = std::min(a, b);
  const auto drop = std::max(a, b);
  p.clusters[keep] = std::move(fused);
  p.clusters.erase(p.clusters.begin() + static_cast<std::ptrdiff_t>(drop));
  return p;
}

std::vector<int> Partition::level_to_cluster(std::size_t level_count) const {
  std::vector<int> map(level_count, -1);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (int m : clusters[c].members) map[static_cast<std::size_t>(m)] = static_cast<int>(c);
  }
  return map;
}

bool Partition::refines(const Partition& coarser, std::size_t level_count) const {
  const auto outer = coarser.level_to_cluster(level_count);
  for (const auto& c : clusters) {
    if (c.members.empty()) return false;
    const int target = outer[static_cast<std::size_t>(c.members.front())];
    if (target < 0) return false;
    for (int m : c.members) {
      if (outer[static_cast<std::size_t>(m)] != target) return false;
    }
  }
  return true;
}

bool Partition::valid(std::size_t level_count) const {
  std::vector<int> seen(level_count, 0);
  for (const auto& c : clusters) {
    if (c.members.empty()) return false;
    for (int m : c.members) {
      if (m < 0 || static_cast<std::size_t>(m) >= level_count || seen[static_cast<std::size_t>(m)]++) return false;
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

}  // namespace factorfuse
