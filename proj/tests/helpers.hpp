#pragma once

#include <string>
#include <vector>

#include "factorfuse/data.hpp"
#include "factorfuse/fixtures.hpp"

namespace testing {

// Rows grouped by level "L00", "L01", ...; `level[i]` is the level index.
struct Sample {
  std::vector<std::string> names;
  std::vector<int> level;
  std::vector<double> y;
};

inline std::string level_name(int l) { return (l < 10 ? "L0" : "L") + std::to_string(l); }

inline Sample gaussian_sample(int k, int n, std::uint64_t seed, double spread = 1.0) {
  factorfuse::Rng rng(seed);
  Sample s;
  std::vector<double> means;
  for (int l = 0; l < k; ++l) means.push_back(spread * rng.normal());
  for (int l = 0; l < k; ++l) {
    for (int i = 0; i < n; ++i) {
      s.names.push_back(level_name(l));
      s.level.push_back(l);
      s.y.push_back(means[static_cast<std::size_t>(l)] + rng.normal());
    }
  }
  return s;
}

inline Sample binomial_sample(int k, int n, std::uint64_t seed) {
  factorfuse::Rng rng(seed);
  Sample s;
  std::vector<double> p;
  for (int l = 0; l < k; ++l) p.push_back(0.1 + 0.8 * rng.uniform());
  for (int l = 0; l < k; ++l) {
    for (int i = 0; i < n; ++i) {
      s.names.push_back(level_name(l));
      s.level.push_back(l);
      s.y.push_back(rng.uniform() < p[static_cast<std::size_t>(l)] ? 1.0 : 0.0);
    }
  }
  return s;
}

inline factorfuse::Grouping grouping_of(const Sample& s) { return factorfuse::Grouping::from_names(s.names); }

}  // namespace testing
