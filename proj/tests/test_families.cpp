#include <cmath>
#include <numbers>

#include "doctest.h"
#include "factorfuse/error.hpp"
#include "factorfuse/families.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace factorfuse;

namespace {

Partition from_sets(const Grouping& g, const oracle::LevelSets& sets) {
  Partition p;
  for (const auto& s : sets) {
    Cluster c;
    for (int l : s) {
      c.label += g.labels[static_cast<std::size_t>(l)];
      c.members.push_back(l);
    }
    p.clusters.push_back(c);
  }
  return p;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("gaussian log-likelihood matches the closed form") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = testing::gaussian_sample(5, 7, seed);
    const auto g = testing::grouping_of(s);
    const auto data = ResponseData::gaussian(s.y);
    for (const oracle::LevelSets& sets : {oracle::LevelSets{{0}, {1}, {2}, {3}, {4}},
                                          oracle::LevelSets{{0, 3}, {1}, {2, 4}},
                                          oracle::LevelSets{{0, 1, 2, 3, 4}}}) {
      const auto fit = loglik_gaussian_1d(data, g, from_sets(g, sets));
      CHECK(fit.loglik == doctest::Approx(oracle::gaussian_loglik(s.y, s.level, sets, 5)).epsilon(1e-12));
      CHECK_FALSE(fit.floored);
    }
  }
}

TEST_CASE("gaussian variance floor keeps the likelihood finite") {
  const std::vector<std::string> names{"a", "a", "b", "b"};
  const auto g = Grouping::from_names(names);
  const auto data = ResponseData::gaussian({1.0, 1.0, 3.0, 3.0});
  const auto fit = loglik_gaussian_1d(data, g, Partition::singletons(g));
  CHECK(fit.floored);
  CHECK(std::isfinite(fit.loglik));
  CHECK(fit.sigma2 == doctest::Approx(1e-12 * 4.0));
  CHECK(code_of([] {
          const std::vector<std::string> n{"a", "b"};
          const auto gg = Grouping::from_names(n);
          loglik_gaussian_1d(ResponseData::gaussian({2.0, 2.0}), gg, Partition::singletons(gg));
        }) == ErrorCode::DegenerateData);
}

TEST_CASE("binomial log-likelihood matches the closed form, including pure clusters") {
  const auto s = testing::binomial_sample(4, 9, 11);
  const auto g = testing::grouping_of(s);
  const auto data = ResponseData::binomial(s.y);
  const oracle::LevelSets sets{{0, 2}, {1}, {3}};
  CHECK(loglik_binomial(data, g, from_sets(g, sets)).loglik ==
        doctest::Approx(oracle::binomial_loglik(s.y, s.level, sets, 4)).epsilon(1e-12));

  const std::vector<std::string> names{"a", "a", "b", "b", "b"};
  const auto g2 = Grouping::from_names(names);
  const auto pure = loglik_binomial(ResponseData::binomial({0, 0, 1, 1, 1}), g2, Partition::singletons(g2));
  CHECK(pure.loglik == 0.0);
  CHECK(std::isinf(pure.logits[0]));
  CHECK(pure.logits[0] < 0);
  CHECK(pure.logits[1] > 0);
}

TEST_CASE("integer weights equal replicated rows") {
  factorfuse::Rng rng(5);
  std::vector<std::string> names, rep_names;
  std::vector<double> y, w, rep_y, b, rep_b;
  for (int i = 0; i < 30; ++i) {
    const auto name = testing::level_name(i % 3);
    const double v = rng.normal();
    const double bit = rng.uniform() < 0.4 ? 1.0 : 0.0;
    const int copies = 1 + static_cast<int>(rng.uniform() * 3);
    names.push_back(name);
    y.push_back(v);
    b.push_back(bit);
    w.push_back(copies);
    for (int c = 0; c < copies; ++c) {
      rep_names.push_back(name);
      rep_y.push_back(v);
      rep_b.push_back(bit);
    }
  }
  const auto g = Grouping::from_names(names);
  const auto rg = Grouping::from_names(rep_names);
  const auto p = Partition::singletons(g);
  CHECK(std::abs(fit(ResponseData::gaussian(y, w), g, p).loglik - fit(ResponseData::gaussian(rep_y), rg, p).loglik) <
        1e-10);
  CHECK(std::abs(fit(ResponseData::binomial(b, w), g, p).loglik - fit(ResponseData::binomial(rep_b), rg, p).loglik) <
        1e-10);
}

TEST_CASE("bivariate gaussian matches an explicit 2x2 density sum") {
  factorfuse::Rng rng(8);
  std::vector<std::string> names;
  std::vector<double> rows;
  std::vector<int> level;
  for (int i = 0; i < 24; ++i) {
    level.push_back(i % 3);
    names.push_back(testing::level_name(i % 3));
    const double a = rng.normal() + level.back();
    rows.push_back(a);
    rows.push_back(0.5 * a + rng.normal());
  }
  const auto g = Grouping::from_names(names);
  const auto nd = loglik_gaussian_nd(ResponseData::gaussian_nd(rows, 2), g, Partition::singletons(g));

  double mx[3] = {}, my[3] = {}, cnt[3] = {};
  for (int i = 0; i < 24; ++i) {
    mx[level[i]] += rows[2 * i];
    my[level[i]] += rows[2 * i + 1];
    cnt[level[i]] += 1;
  }
  for (int c = 0; c < 3; ++c) {
    mx[c] /= cnt[c];
    my[c] /= cnt[c];
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < 24; ++i) {
    const double dx = rows[2 * i] - mx[level[i]], dy = rows[2 * i + 1] - my[level[i]];
    sxx += dx * dx / 24;
    sxy += dx * dy / 24;
    syy += dy * dy / 24;
  }
  const double det = sxx * syy - sxy * sxy;
  double expected = 0.0;
  for (int i = 0; i < 24; ++i) {
    const double dx = rows[2 * i] - mx[level[i]], dy = rows[2 * i + 1] - my[level[i]];
    const double q = (syy * dx * dx - 2 * sxy * dx * dy + sxx * dy * dy) / det;
    expected += -std::log(2 * std::numbers::pi) - 0.5 * std::log(det) - 0.5 * q;
  }
  CHECK(nd.loglik == doctest::Approx(expected).epsilon(1e-12));
  CHECK_FALSE(nd.ridged);
}

TEST_CASE("collinear multivariate data falls back to a ridge") {
  std::vector<std::string> names;
  std::vector<double> rows;
  for (int i = 0; i < 12; ++i) {
    names.push_back(testing::level_name(i % 2));
    rows.push_back(i * 0.3);
    rows.push_back(i * 0.6);
  }
  const auto g = Grouping::from_names(names);
  const auto nd = loglik_gaussian_nd(ResponseData::gaussian_nd(rows, 2), g, Partition::singletons(g));
  CHECK(nd.ridged);
  CHECK(std::isfinite(nd.loglik));
}

TEST_CASE("Cox estimate agrees with golden-section maximisation") {
  for (int n = 6; n <= 30; n += 6) {
    factorfuse::Rng rng(static_cast<std::uint64_t>(n));
    std::vector<std::string> names;
    std::vector<double> t;
    std::vector<int> e;
    std::vector<double> x;
    for (int i = 0; i < n; ++i) {
      const int grp = i % 2;
      names.push_back(grp ? "b" : "a");
      x.push_back(grp);
      t.push_back(rng.exponential(grp ? 2.0 : 1.0));
      e.push_back(rng.uniform() < 0.8 || i < 2 ? 1 : 0);
    }
    const auto g = Grouping::from_names(names);
    const auto cox = loglik_cox(ResponseData::survival(t, e), g, Partition::singletons(g));
    auto profile = [&](double a) {
      std::vector<double> eta(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) eta[i] = a * x[i];
      return oracle::cox_partial_loglik(t, e, eta);
    };
    const double best = oracle::golden_section_max(profile, -15.0, 15.0, 1e-11);
    CHECK(cox.alphas[0] == 0.0);
    CHECK(std::abs(cox.alphas[1] - best) < 1e-5);
    CHECK(cox.loglik == doctest::Approx(profile(cox.alphas[1])).epsilon(1e-10));

    const auto null = loglik_cox(ResponseData::survival(t, e), g, Partition{{{"ab", {0, 1}}}});
    CHECK(null.loglik == doctest::Approx(oracle::cox_partial_loglik(t, e, std::vector<double>(x.size(), 0.0))));
  }
}

TEST_CASE("Cox handles tied event times with the Breslow form") {
  const std::vector<std::string> names{"a", "a", "a", "b", "b", "b", "a", "b"};
  const std::vector<double> t{1, 2, 2, 2, 3, 4, 5, 5};
  const std::vector<int> e{1, 1, 1, 1, 0, 1, 1, 1};
  const auto g = Grouping::from_names(names);
  const auto cox = loglik_cox(ResponseData::survival(t, e), g, Partition::singletons(g));
  std::vector<double> eta;
  for (const auto& n : names) eta.push_back(n == "b" ? cox.alphas[1] : 0.0);
  CHECK(cox.loglik == doctest::Approx(oracle::cox_partial_loglik(t, e, eta)).epsilon(1e-12));
}

TEST_CASE("Cox failure modes") {
  const std::vector<std::string> names{"a", "a", "b", "b"};
  const auto g = Grouping::from_names(names);
  CHECK(code_of([&] { loglik_cox(ResponseData::survival({1, 2, 3, 4}, {0, 0, 0, 0}), g, Partition::singletons(g)); }) ==
        ErrorCode::NoEvents);
  // every "b" outlives every "a" that fails: the likelihood rises without bound
  CHECK(code_of([&] { loglik_cox(ResponseData::survival({1, 2, 3, 4}, {1, 1, 0, 0}), g, Partition::singletons(g)); }) ==
        ErrorCode::MonotoneLikelihood);
  CHECK(code_of([&] { ResponseData::survival({1, 2}, {1, 1}, {1.0, 2.0}); }) == ErrorCode::InvalidData);
}

TEST_CASE("Kaplan-Meier by hand") {
  const std::vector<std::string> names{"a", "a", "a", "a", "a"};
  const auto g = Grouping::from_names(names);
  const auto data = ResponseData::survival({1, 2, 2, 3, 4}, {1, 1, 0, 0, 1});
  const auto km = kaplan_meier(data, g, Cluster{"(a)", {0}});
  REQUIRE(km.size() == 4);
  CHECK(km[0].time == 0.0);
  CHECK(km[0].survival == 1.0);
  CHECK(km[1].survival == doctest::Approx(4.0 / 5.0));
  CHECK(km[2].survival == doctest::Approx(4.0 / 5.0 * 3.0 / 4.0));
  CHECK(km[3].time == 4.0);
  CHECK(km[3].survival == doctest::Approx(0.0));

  const auto censored = kaplan_meier(ResponseData::survival({1, 2, 3, 4, 5}, {0, 0, 0, 0, 0}), g, Cluster{"(a)", {0}});
  for (const auto& s : censored) CHECK(s.survival == 1.0);
}

TEST_CASE("group summaries") {
  const auto s = testing::gaussian_sample(3, 5, 2);
  const auto g = testing::grouping_of(s);
  const auto m = fit(ResponseData::gaussian(s.y), g, Partition::singletons(g));
  const auto summary = group_summary(m);
  REQUIRE(summary.size() == 3);
  double mean0 = 0;
  for (int i = 0; i < 5; ++i) mean0 += s.y[static_cast<std::size_t>(i)] / 5;
  CHECK(summary[0][0] == doctest::Approx(mean0));

  const std::vector<std::string> names{"a", "a", "a", "b", "b", "b"};
  const auto gs = Grouping::from_names(names);
  const auto cm = fit(ResponseData::survival({1, 4, 6, 2, 3, 5}, {1, 1, 1, 1, 1, 1}), gs, Partition::singletons(gs));
  const auto hr = group_summary(cm);
  CHECK(hr[0][0] == doctest::Approx(1.0));
  CHECK(hr[1][0] == doctest::Approx(std::exp(std::get<CoxFit>(cm.estimates).alphas[1])));
}

TEST_CASE("LRT statistic clamps tiny shortfalls and rejects real ones") {
  CHECK(lrt_statistic(-10.0, -9.0) == doctest::Approx(2.0));
  CHECK(lrt_statistic(-10.0, -10.0 - 1e-10) == 0.0);
  CHECK(code_of([] { lrt_statistic(-10.0, -10.1); }) == ErrorCode::NumericalInconsistency);
}

TEST_CASE("empty clusters are rejected") {
  const auto s = testing::gaussian_sample(3, 4, 1);
  const auto g = testing::grouping_of(s);
  Partition p = Partition::singletons(g);
  p.clusters.push_back({"(none)", {}});
  CHECK(code_of([&] { fit(ResponseData::gaussian(s.y), g, p); }) == ErrorCode::EmptyCluster);
}
