#include "factorfuse/fixtures.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include "factorfuse/error.hpp"
#include "json.hpp"

namespace factorfuse {

namespace {

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

std::string level_name(int l, int k) {
  const auto width = std::max<std::size_t>(2, std::to_string(k).size());
  auto digits = std::to_string(l + 1);
  return "G" + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = uniform();
  while (u <= 0.0) u = uniform();
  const double v = uniform();
  const double r = std::sqrt(-2.0 * std::log(u));
  const double theta = 2.0 * std::numbers::pi * v;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double Rng::exponential(double rate) {
  double u = uniform();
  while (u <= 0.0) u = uniform();
  return -std::log(u) / rate;
}

FixtureKind parse_fixture_kind(std::string_view name) {
  if (name == "gaussian") return FixtureKind::Gaussian;
  if (name == "binomial") return FixtureKind::Binomial;
  if (name == "survival") return FixtureKind::Survival;
  if (name == "gaussianNd") return FixtureKind::GaussianNd;
  throw Error(ErrorCode::InvalidArgument, "unknown fixture kind '" + std::string(name) + "'");
}

const char* fixture_kind_name(FixtureKind kind) {
  switch (kind) {
    case FixtureKind::Gaussian: return "gaussian";
    case FixtureKind::Binomial: return "binomial";
    case FixtureKind::Survival: return "survival";
    case FixtureKind::GaussianNd: return "gaussianNd";
  }
  return "?";
}

Fixture make_fixture(const FixtureSpec& spec) {
  if (spec.k < 2) throw Error(ErrorCode::InvalidArgument, "fixture needs k >= 2");
  if (spec.n_per_group < 2) throw Error(ErrorCode::InvalidArgument, "fixture needs at least 2 rows per group");
  if (!(spec.separation >= 0.0) || !std::isfinite(spec.separation)) {
    throw Error(ErrorCode::InvalidArgument, "separation must be finite and >= 0");
  }
  if (spec.kind == FixtureKind::GaussianNd && spec.dim < 2) {
    throw Error(ErrorCode::InvalidArgument, "gaussianNd fixture needs dim >= 2");
  }
  const bool by_proportion = spec.kind == FixtureKind::Binomial && !spec.proportions.empty();
  if (!spec.proportions.empty() && spec.kind != FixtureKind::Binomial) {
    throw Error(ErrorCode::InvalidArgument, "proportions apply to binomial fixtures only");
  }
  int clusters = spec.clusters > 0 ? spec.clusters : spec.k;
  if (by_proportion) {
    if (spec.clusters > 0 && spec.clusters != static_cast<int>(spec.proportions.size())) {
      throw Error(ErrorCode::InvalidArgument, "one proportion per planted cluster is required");
    }
    clusters = static_cast<int>(spec.proportions.size());
    for (double p : spec.proportions) {
      if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidArgument, "proportions must lie in (0, 1)");
    }
  } else if (spec.separation == 0.0) {
    clusters = 1;
  }
  if (clusters < 1 || clusters > spec.k) throw Error(ErrorCode::InvalidArgument, "clusters must lie in [1, k]");

  // centred effect of each planted cluster
  std::vector<double> effect(static_cast<std::size_t>(clusters));
  for (int c = 0; c < clusters; ++c) effect[static_cast<std::size_t>(c)] = spec.separation * (c - 0.5 * (clusters - 1));

  Rng rng(spec.seed);
  std::vector<std::string> levels, names;
  std::vector<int> truth;
  std::vector<double> values, times;
  std::vector<int> events;
  const auto dim = static_cast<std::size_t>(spec.kind == FixtureKind::GaussianNd ? spec.dim : 1);
  for (int l = 0; l < spec.k; ++l) {
    levels.push_back(level_name(l, spec.k));
    const int c = static_cast<int>(static_cast<long long>(l) * clusters / spec.k);
    truth.push_back(c);
    const double e = effect[static_cast<std::size_t>(c)];
    for (int i = 0; i < spec.n_per_group; ++i) {
      names.push_back(levels.back());
      switch (spec.kind) {
        case FixtureKind::Gaussian:
          values.push_back(e + rng.normal());
          break;
        case FixtureKind::GaussianNd:
          for (std::size_t d = 0; d < dim; ++d) values.push_back((d == 0 ? e : 0.0) + rng.normal());
          break;
        case FixtureKind::Binomial: {
          const double p = by_proportion ? spec.proportions[static_cast<std::size_t>(c)] : 1.0 / (1.0 + std::exp(-e));
          values.push_back(rng.uniform() < p ? 1.0 : 0.0);
          break;
        }
        case FixtureKind::Survival: {
          const double t = rng.exponential(std::exp(e));
          const double censor = rng.exponential(0.3);
          times.push_back(std::min(t, censor));
          events.push_back(t <= censor ? 1 : 0);
          break;
        }
      }
    }
  }

  auto make_data = [&]() {
    switch (spec.kind) {
      case FixtureKind::Gaussian: return ResponseData::gaussian(values);
      case FixtureKind::GaussianNd: return ResponseData::gaussian_nd(values, dim);
      case FixtureKind::Binomial: return ResponseData::binomial(values);
      case FixtureKind::Survival: break;
    }
    return ResponseData::survival(times, events);
  };
  return Fixture{spec, std::move(levels), std::move(truth), clusters, std::move(names), make_data()};
}

std::string Fixture::csv() const {
  std::string out = "group";
  switch (spec.kind) {
    case FixtureKind::Gaussian:
    case FixtureKind::Binomial: out += ",y\n"; break;
    case FixtureKind::Survival: out += ",time,event\n"; break;
    case FixtureKind::GaussianNd:
      for (std::size_t d = 0; d < data.dim(); ++d) out += ",y" + std::to_string(d + 1);
      out += "\n";
      break;
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += names[i];
    if (spec.kind == FixtureKind::Survival) {
      out += "," + shortest(data.time(i)) + "," + std::to_string(data.event(i));
    } else {
      for (double v : data.row(i)) out += "," + shortest(v);
    }
    out += "\n";
  }
  return out;
}

std::string Fixture::truth_json() const {
  nlohmann::ordered_json doc;
  doc["kind"] = fixture_kind_name(spec.kind);
  doc["k"] = spec.k;
  doc["nPerGroup"] = spec.n_per_group;
  doc["separation"] = spec.separation;
  doc["seed"] = spec.seed;
  doc["plantedClusters"] = planted_clusters;
  auto& partition = doc["partition"];
  partition = nlohmann::ordered_json::object();
  for (std::size_t l = 0; l < levels.size(); ++l) partition[levels[l]] = truth[l];
  return doc.dump(2) + "\n";
}

}  // namespace factorfuse
