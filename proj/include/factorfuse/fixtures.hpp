#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "factorfuse/data.hpp"

namespace factorfuse {

enum class FixtureKind { Gaussian, Binomial, Survival, GaussianNd };

FixtureKind parse_fixture_kind(std::string_view name);
const char* fixture_kind_name(FixtureKind kind);

struct FixtureSpec {
  FixtureKind kind = FixtureKind::Gaussian;
  int k = 4;
  int n_per_group = 50;
  double separation = 1.0;   // gap between neighbouring planted clusters
  int clusters = 0;          // 0: one cluster per level
  std::vector<double> proportions;  // binomial: per-cluster success rates
  int dim = 2;               // gaussianNd only
  std::uint64_t seed = 1;
};

/// Synthetic dataset with a planted partition. Level l belongs to cluster
/// floor(l * clusters / k); a zero separation plants a single cluster.
struct Fixture {
  FixtureSpec spec;
  std::vector<std::string> levels;  // "G01", "G02", ...
  std::vector<int> truth;           // planted cluster of each level
  int planted_clusters = 1;
  std::vector<std::string> names;   // factor value of every row
  ResponseData data;

  Grouping grouping() const { return Grouping::from_names(names); }
  std::string csv() const;
  std::string truth_json() const;
};

/// Throws InvalidArgument for k < 2, n < 2, negative separation or
/// inconsistent cluster settings.
Fixture make_fixture(const FixtureSpec& spec);

/// Deterministic stream independent of the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  double uniform();  // [0, 1)
  double normal();
  double exponential(double rate);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace factorfuse
