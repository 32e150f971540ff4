#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace factorfuse {

enum class Family { Gaussian1d, GaussianNd, Binomial, Survival };

const char* family_name(Family family);

/// Per-observation response payload. Scalar families store one value per row;
/// GaussianNd stores rows contiguously (row-major, `dim` values per row);
/// Survival stores times in `values` and 0/1 event flags in `events`.
class ResponseData {
 public:
  static ResponseData gaussian(std::vector<double> values, std::vector<double> weights = {});
  static ResponseData gaussian_nd(std::vector<double> rows, std::size_t dim,
                                  std::vector<double> weights = {});
  static ResponseData binomial(std::vector<double> values, std::vector<double> weights = {});
  static ResponseData survival(std::vector<double> times, std::vector<int> events,
                               std::vector<double> weights = {});

  Family family() const noexcept { return family_; }
  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return dim_; }
  bool weighted() const noexcept { return !weights_.empty(); }

  double value(std::size_t i) const { return values_[i]; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  double time(std::size_t i) const { return values_[i]; }
  int event(std::size_t i) const { return events_[i]; }
  double weight(std::size_t i) const { return weights_.empty() ? 1.0 : weights_[i]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<const int> events() const noexcept { return events_; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// Copy keeping only the listed rows, in the listed order.
  ResponseData select(std::span<const std::size_t> rows) const;

 private:
  ResponseData(Family family, std::size_t n, std::size_t dim, std::vector<double> values,
               std::vector<int> events, std::vector<double> weights);

  Family family_;
  std::size_t n_ = 0;
  std::size_t dim_ = 1;
  std::vector<double> values_;
  std::vector<int> events_;
  std::vector<double> weights_;
};

/// Observation-to-level assignment. `levels` holds full names; `labels` the
/// display form used to build cluster labels, e.g. "(Plnd)".
struct Grouping {
  std::vector<std::string> levels;
  std::vector<std::string> labels;
  std::vector<int> codes;
  std::vector<std::size_t> counts;

  std::size_t level_count() const noexcept { return levels.size(); }

  /// Levels sorted lexicographically; labels are "(" + name + ")".
  static Grouping from_names(std::span<const std::string> names);
  /// Explicit level order and display labels; throws InvalidData when a name
  /// is not among `levels` or a level has no observations.
  static Grouping from_names(std::span<const std::string> names, std::vector<std::string> levels,
                             std::vector<std::string> labels);

  Grouping select(std::span<const std::size_t> rows) const;
};

struct Cluster {
  std::string label;
  std::vector<int> members;  // level indices, in merge order
};

struct Partition {
  std::vector<Cluster> clusters;

  std::size_t size() const noexcept { return clusters.size(); }

  /// One singleton cluster per level, in the given level order.
  static Partition singletons(const Grouping& grouping, std::span<const int> order = {});

  /// Clusters `a` and `b` fused into one labelled label(a) + label(b); the
  /// result takes position min(a, b) and the other slot is removed.
  Partition merged(std::size_t a, std::size_t b) const;

  /// cluster index of every level, -1 where a level is absent.
  std::vector<int> level_to_cluster(std::size_t level_count) const;

  /// True when each cluster of this partition is contained in one cluster of
  /// `coarser`.
  bool refines(const Partition& coarser, std::size_t level_count) const;

  /// Disjoint and exhaustive over `level_count` levels.
  bool valid(std::size_t level_count) const;
};

}  // namespace factorfuse
