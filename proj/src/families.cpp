#include "factorfuse/families.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "factorfuse/error.hpp"

namespace factorfuse {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2*pi)

struct ClusterMap {
  std::vector<int> of_row;  // cluster index per observation
  std::size_t clusters = 0;
};

ClusterMap map_rows(const ResponseData& data, const Grouping& grouping, const Partition& partition) {
  if (grouping.codes.size() != data.size()) {
    throw Error(ErrorCode::InvalidData, "grouping and response lengths differ");
  }
  const auto level_map = partition.level_to_cluster(grouping.level_count());
  ClusterMap m;
  m.clusters = partition.size();
  m.of_row.resize(data.size());
  std::vector<std::size_t> sizes(m.clusters, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int c = level_map[static_cast<std::size_t>(grouping.codes[i])];
    if (c < 0) throw Error(ErrorCode::InvalidData, "observation level missing from partition");
    m.of_row[i] = c;
    ++sizes[static_cast<std::size_t>(c)];
  }
  for (std::size_t c = 0; c < m.clusters; ++c) {
    if (sizes[c] == 0) {
      throw Error(ErrorCode::EmptyCluster, "cluster " + partition.clusters[c].label + " has no observations");
    }
  }
  return m;
}

// 0 * log(0) == 0
double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

}  // namespace

GaussianFit loglik_gaussian_1d(const ResponseData& data, const Grouping& grouping,
                               const Partition& partition) {
  const auto map = map_rows(data, grouping, partition);
  const auto n = data.size();
  GaussianFit out;
  out.means.assign(map.clusters, 0.0);
  out.weights.assign(map.clusters, 0.0);

  double lo = data.value(0), hi = data.value(0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(map.of_row[i]);
    out.weights[c] += data.weight(i);
    out.means[c] += data.weight(i) * data.value(i);
    lo = std::min(lo, data.value(i));
    hi = std::max(hi, data.value(i));
  }
  for (std::size_t c = 0; c < map.clusters; ++c) out.means[c] /= out.weights[c];

  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = data.value(i) - out.means[static_cast<std::size_t>(map.of_row[i])];
    rss += data.weight(i) * r * r;
  }
  const double total = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
  const double floor = 1e-12 * (hi - lo) * (hi - lo);
  if (floor <= 0.0) throw Error(ErrorCode::DegenerateData, "all response values are identical");

  out.sigma2 = rss / total;
  if (out.sigma2 < floor) {
    out.sigma2 = floor;
    out.floored = true;
  }
  out.loglik = -0.5 * total * (kLog2Pi + std::log(out.sigma2)) - 0.5 * rss / out.sigma2;
  return out;
}

GaussianNdFit loglik_gaussian_nd(const ResponseData& data, const Grouping& grouping,
                                 const Partition& partition) {
  const auto map = map_rows(data, grouping, partition);
  const auto n = data.size();
  const auto d = data.dim();
  GaussianNdFit out;
  out.weights.assign(map.clusters, 0.0);

  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(map.clusters));
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(map.of_row[i]);
    const auto row = data.row(i);
    out.weights[c] += data.weight(i);
    for (std::size_t j = 0; j < d; ++j) means(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) += data.weight(i) * row[j];
  }
  for (std::size_t c = 0; c < map.clusters; ++c) means.col(static_cast<Eigen::Index>(c)) /= out.weights[c];

  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  Eigen::VectorXd r(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = data.row(i);
    const auto c = static_cast<Eigen::Index>(map.of_row[i]);
    for (std::size_t j = 0; j < d; ++j) r(static_cast<Eigen::Index>(j)) = row[j] - means(static_cast<Eigen::Index>(j), c);
    scatter.noalias() += data.weight(i) * r * r.transpose();
  }
  const double total = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
  Eigen::MatrixXd sigma = scatter / total;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  if (!(lmax > 0.0)) throw Error(ErrorCode::SingularCovariance, "pooled covariance is zero");
  if (lmin <= 1e-12 * lmax) {
    const double ridge = 1e-8 * sigma.trace() / static_cast<double>(d);
    sigma.diagonal().array() += ridge;
    out.ridged = true;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularCovariance, "covariance not positive definite after ridge");
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  // trace(sigma^-1 * scatter); equals d * total at the unridged MLE
  const double quad = llt.solve(scatter).trace();

  out.loglik = -0.5 * total * (static_cast<double>(d) * kLog2Pi + logdet) - 0.5 * quad;
  out.means.resize(map.clusters);
  for (std::size_t c = 0; c < map.clusters; ++c) {
    out.means[c].resize(d);
    for (std::size_t j = 0; j < d; ++j) out.means[c][j] = means(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
  }
  out.covariance.resize(d * d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) out.covariance[a * d + b] = sigma(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  return out;
}

BinomialFit loglik_binomial(const ResponseData& data, const Grouping& grouping,
                            const Partition& partition) {
  const auto map = map_rows(data, grouping, partition);
  BinomialFit out;
  std::vector<double> successes(map.clusters, 0.0);
  out.weights.assign(map.clusters, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto c = static_cast<std::size_t>(map.of_row[i]);
    out.weights[c] += data.weight(i);
    successes[c] += data.weight(i) * data.value(i);
  }
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < map.clusters; ++c) {
    const double w = out.weights[c];
    const double s = successes[c];
    const double p = s / w;
    out.proportions.push_back(p);
    if (p <= 0.0) {
      out.logits.push_back(-inf);
    } else if (p >= 1.0) {
      out.logits.push_back(inf);
    } else {
      out.logits.push_back(std::log(p / (1.0 - p)));
    }
    out.loglik += xlogy(s, p) + xlogy(w - s, 1.0 - p);
  }
  return out;
}

namespace {

// Breslow risk-set table: for every distinct event time, the tied event count
// and the number of subjects of each cluster still at risk.
struct RiskTable {
  std::size_t clusters = 0;
  std::vector<double> deaths;
  std::vector<double> at_risk;  // deaths.size() x clusters
  std::vector<double> events;   // per cluster
};

RiskTable build_risk_table(const ResponseData& data, const ClusterMap& map) {
  RiskTable t;
  t.clusters = map.clusters;
  t.events.assign(map.clusters, 0.0);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data.time(a) > data.time(b); });

  std::vector<double> risk(map.clusters, 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    const double now = data.time(order[i]);
    double deaths = 0.0;
    for (; i < order.size() && data.time(order[i]) == now; ++i) {
      const auto c = static_cast<std::size_t>(map.of_row[order[i]]);
      risk[c] += 1.0;
      if (data.event(order[i]) == 1) {
        deaths += 1.0;
        t.events[c] += 1.0;
      }
    }
    if (deaths > 0.0) {
      t.deaths.push_back(deaths);
      t.at_risk.insert(t.at_risk.end(), risk.begin(), risk.end());
    }
  }
  return t;
}

double partial_loglik(const RiskTable& t, const Eigen::VectorXd& alpha) {
  double ll = 0.0;
  for (std::size_t c = 0; c < t.clusters; ++c) ll += t.events[c] * alpha(static_cast<Eigen::Index>(c));
  for (std::size_t e = 0; e < t.deaths.size(); ++e) {
    double s = 0.0;
    for (std::size_t c = 0; c < t.clusters; ++c) s += t.at_risk[e * t.clusters + c] * std::exp(alpha(static_cast<Eigen::Index>(c)));
    ll -= t.deaths[e] * std::log(s);
  }
  return ll;
}

}  // namespace

CoxFit loglik_cox(const ResponseData& data, const Grouping& grouping, const Partition& partition) {
  const auto map = map_rows(data, grouping, partition);
  const auto table = build_risk_table(data, map);
  if (table.deaths.empty()) throw Error(ErrorCode::NoEvents, "no uncensored events");

  const auto c = static_cast<Eigen::Index>(map.clusters);
  CoxFit out;
  out.events = table.events;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(c);
  double ll = partial_loglik(table, alpha);

  if (c > 1) {
    const Eigen::Index free = c - 1;
    bool converged = false;
    for (int iter = 1; iter <= cox::kMaxIterations && !converged; ++iter) {
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(free);
      Eigen::MatrixXd info = Eigen::MatrixXd::Zero(free, free);
      Eigen::VectorXd pi(c);
      for (std::size_t e = 0; e < table.deaths.size(); ++e) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < c; ++j) {
          pi(j) = table.at_risk[e * table.clusters + static_cast<std::size_t>(j)] * std::exp(alpha(j));
          s += pi(j);
        }
        pi /= s;
        const double d = table.deaths[e];
        const auto tail = pi.tail(free);
        grad -= d * tail;
        info.noalias() -= d * tail * tail.transpose();
        info.diagonal() += d * tail;
      }
      for (Eigen::Index j = 0; j < free; ++j) grad(j) += table.events[static_cast<std::size_t>(j + 1)];

      Eigen::LDLT<Eigen::MatrixXd> solver(info);
      if (solver.info() != Eigen::Success || solver.rcond() < 1e-14) {
        throw Error(ErrorCode::NonConvergence, "Cox information matrix is singular");
      }
      Eigen::VectorXd step = Eigen::VectorXd::Zero(c);
      step.tail(free) = solver.solve(grad);

      double next_ll = partial_loglik(table, alpha + step);
      for (int halving = 0; halving < 30 && !(next_ll >= ll); ++halving) {
        step *= 0.5;
        next_ll = partial_loglik(table, alpha + step);
      }
      alpha += step;
      if (alpha.cwiseAbs().maxCoeff() > cox::kCoefficientCap) {
        throw Error(ErrorCode::MonotoneLikelihood, "Cox coefficient diverges (monotone likelihood)");
      }
      converged = std::abs(next_ll - ll) < cox::kTolerance;
      ll = next_ll;
      out.iterations = iter;
    }
    if (!converged) throw Error(ErrorCode::NonConvergence, "Newton-Raphson did not converge in 50 iterations");
  }
  out.loglik = ll;
  out.alphas.assign(alpha.data(), alpha.data() + c);
  return out;
}

FittedModel fit(const ResponseData& data, const Grouping& grouping, const Partition& partition) {
  FittedModel m;
  m.partition = partition;
  switch (data.family()) {
    case Family::Gaussian1d: {
      auto f = loglik_gaussian_1d(data, grouping, partition);
      m.loglik = f.loglik;
      m.degenerate = f.floored;
      m.estimates = std::move(f);
      break;
    }
    case Family::GaussianNd: {
      auto f = loglik_gaussian_nd(data, grouping, partition);
      m.loglik = f.loglik;
      m.degenerate = f.ridged;
      m.estimates = std::move(f);
      break;
    }
    case Family::Binomial: {
      auto f = loglik_binomial(data, grouping, partition);
      m.loglik = f.loglik;
      m.estimates = std::move(f);
      break;
    }
    case Family::Survival: {
      auto f = loglik_cox(data, grouping, partition);
      m.loglik = f.loglik;
      m.estimates = std::move(f);
      break;
    }
  }
  if (!std::isfinite(m.loglik)) throw Error(ErrorCode::NumericalInconsistency, "non-finite log-likelihood");
  return m;
}

double lrt_statistic(double loglik_small, double loglik_large) {
  const double diff = loglik_large - loglik_small;
  if (diff < -1e-9) {
    throw Error(ErrorCode::NumericalInconsistency, "finer model has lower log-likelihood than its coarsening");
  }
  return diff > 0.0 ? 2.0 * diff : 0.0;
}

std::vector<std::vector<double>> group_summary(const FittedModel& model) {
  struct Visitor {
    std::vector<std::vector<double>> operator()(const GaussianFit& f) const {
      std::vector<std::vector<double>> out;
      for (double m : f.means) out.push_back({m});
      return out;
    }
    std::vector<std::vector<double>> operator()(const GaussianNdFit& f) const { return f.means; }
    std::vector<std::vector<double>> operator()(const BinomialFit& f) const {
      std::vector<std::vector<double>> out;
      for (double p : f.proportions) out.push_back({p});
      return out;
    }
    std::vector<std::vector<double>> operator()(const CoxFit& f) const {
      std::vector<std::vector<double>> out;
      for (double a : f.alphas) out.push_back({std::exp(a)});
      return out;
    }
  };
  return std::visit(Visitor{}, model.estimates);
}

std::vector<SurvivalStep> kaplan_meier(const ResponseData& data, const Grouping& grouping,
                                       const Cluster& cluster) {
  std::vector<bool> in_cluster(grouping.level_count(), false);
  for (int m : cluster.members) in_cluster[static_cast<std::size_t>(m)] = true;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (in_cluster[static_cast<std::size_t>(grouping.codes[i])]) rows.push_back(i);
  }
  std::stable_sort(rows.begin(), rows.end(), [&](auto a, auto b) { return data.time(a) < data.time(b); });

  std::vector<SurvivalStep> curve{{0.0, 1.0}};
  double s = 1.0;
  double at_risk = static_cast<double>(rows.size());
  std::size_t i = 0;
  while (i < rows.size()) {
    const double now = data.time(rows[i]);
    double deaths = 0.0, leaving = 0.0;
    for (; i < rows.size() && data.time(rows[i]) == now; ++i) {
      deaths += data.event(rows[i]);
      leaving += 1.0;
    }
    if (deaths > 0.0) {
      s *= 1.0 - deaths / at_risk;
      curve.push_back({now, s});
    }
    at_risk -= leaving;
  }
  return curve;
}

}  // namespace factorfuse
