#include <doctest.h>

#include <cmath>
#include <memory>

#include "mtt/errors.hpp"
#include "mtt/model.hpp"
#include "mtt/rng.hpp"
#include "mtt/stats.hpp"
#include "../support/helpers.hpp"
#include "../support/oracles.hpp"

using namespace mtt;

namespace {

/// Composite Simpson rule with an even number of intervals.
template <typename F>
double simpson(F&& f, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("observation density values and normalization") {
    const auto m = SingleTargetModel::linear_gaussian(ParamRole::ObservationVariance, 1.0);
    CHECK(m.log_g(0.0, 0.0) == doctest::Approx(-0.5 * std::log(2.0 * oracle::kPi)).epsilon(1e-14));
    CHECK(m.log_g(1.0, 0.0) - m.log_g(0.0, 0.0) == doctest::Approx(-0.5).epsilon(1e-14));
    const auto wide = SingleTargetModel::linear_gaussian(ParamRole::ObservationVariance, 2.5, 0.0, 0.3);
    const double mass = simpson([&](double y) { return std::exp(wide.log_g(y, 0.7)); }, -20.0, 20.0, 4000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    const auto walk = SingleTargetModel::linear_gaussian(ParamRole::ObservationVariance, 1.0, 0.4);
    const double f_mass = simpson([&](double x) { return std::exp(walk.log_f(x, -1.0)); }, -6.0, 4.0, 4000);
    CHECK(f_mass == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("scores agree with finite differences") {
    Rng rng(3, 3);
    for (int i = 0; i < 20; ++i) {
      const double y = 3.0 * rng.normal();
      const double x = rng.normal();
      const double theta = 0.3 + 2.0 * rng.uniform();
      for (ParamRole role : {ParamRole::ObservationVariance, ParamRole::ObservationShift}) {
        const auto m = SingleTargetModel::linear_gaussian(role, role == ParamRole::ObservationVariance ? theta : 1.3,
                                                          0.0, role == ParamRole::ObservationShift ? theta : 0.0);
        const double fd = central_difference([&](double t) { return log_g(m, y, x, t); }, m.theta(), 1e-6);
        CHECK(m.score_g(y, x) == doctest::Approx(fd).epsilon(1e-6));
      }
      const auto w = SingleTargetModel::linear_gaussian(ParamRole::WalkStd, 1.0, theta);
      const double fd = central_difference([&](double t) { return log_f(w, y, x, t); }, theta, 1e-6);
      CHECK(w.score_f(y, x) == doctest::Approx(fd).epsilon(1e-6));
    }
  }

  TEST_CASE("variance score vanishes at the matching squared residual") {
    const auto m = SingleTargetModel::linear_gaussian(ParamRole::ObservationVariance, 2.0);
    CHECK(m.score_g(std::sqrt(2.0), 0.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK_THROWS_AS(log_g(m, 0.0, 0.0, -1.0), ParameterDomainError);
    CHECK_THROWS_AS(m.with_theta(0.0), ParameterDomainError);
  }

  TEST_CASE("special epsilon likelihood") {
    const double eps = 0.1;
    const double r = SpecialEpsilonLikelihood::solve_radius(eps);
    CHECK(std::erf(r / std::sqrt(2.0)) == doctest::Approx(1.0 - eps).epsilon(1e-10));

    auto special = std::make_shared<SpecialEpsilonLikelihood>(eps, std::vector<double>{0.0, 5.0, 10.0}, -r, 10.0 + r);
    const auto m = SingleTargetModel::special_epsilon(special);
    const double inside = simpson([&](double y) { return std::exp(m.log_g(y, 5.0)); }, 5.0 - r + 1e-12, 5.0 + r - 1e-12, 2000);
    CHECK(inside == doctest::Approx(1.0 - eps).epsilon(1e-8));
    const double outside = special->outside_density() * (special->extent() - 2.0 * r);
    CHECK(inside + outside == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::exp(m.log_g(8.0, 5.0)) == doctest::Approx(special->outside_density()).epsilon(1e-12));
    CHECK(m.score_g(8.0, 5.0) == 0.0);

    Rng rng(1, 1);
    int hits = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double y = m.sample_g(5.0, rng);
      CHECK_UNARY(y >= special->lower());
      CHECK_UNARY(y <= special->upper());
      hits += special->in_window(y, 5.0, 0.0) ? 1 : 0;
    }
    CHECK(static_cast<double>(hits) / n == doctest::Approx(1.0 - eps).epsilon(0.005));

    CHECK_THROWS_AS(SpecialEpsilonLikelihood(eps, {0.0, 1.0}, -r, 1.0 + r), ParameterDomainError);
  }

  TEST_CASE("clutter densities integrate to one") {
    const auto g = ClutterDensity::gaussian(1.0, 4.0);
    CHECK(simpson([&](double y) { return std::exp(g.log_density(y)); }, -30.0, 32.0, 4000) ==
          doctest::Approx(1.0).epsilon(1e-8));
    const auto u = ClutterDensity::uniform(5.0);
    CHECK(std::exp(u.log_density(0.0)) * 10.0 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(u.log_density(6.0) == kNegInf);
  }

  TEST_CASE("parameter validation") {
    auto p = testing::gaussian_params(2, 0.5, 1.0);
    CHECK_NOTHROW(p.validate());
    p.p_detection = 0.0;
    CHECK_THROWS_AS(p.validate(), ParameterDomainError);
    p = testing::gaussian_params(2, 0.5, -1.0);
    CHECK_THROWS_AS(p.validate(), ParameterDomainError);
    p = testing::gaussian_params(0, 0.5, 1.0);
    CHECK_THROWS_AS(p.validate(), ParameterDomainError);
    CHECK_THROWS_AS(SingleTargetModel::linear_gaussian(ParamRole::ObservationVariance, -1.0), ParameterDomainError);
  }

  TEST_CASE("closed-form single observation information") {
    CHECK(gaussian_observation_fisher(ParamRole::ObservationVariance, 1.0) == doctest::Approx(0.5));
    CHECK(gaussian_observation_fisher(ParamRole::ObservationVariance, 2.0) == doctest::Approx(0.125));
    CHECK(gaussian_observation_fisher(ParamRole::ObservationShift, 2.0) == doctest::Approx(0.5));
  }
}

TEST_SUITE("rng") {
  TEST_CASE("streams are reproducible and distinct") {
    Rng a(42, 7);
    Rng b(42, 7);
    Rng c(42, 8);
    int same = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto x = a();
      CHECK(x == b());
      same += x == c() ? 1 : 0;
    }
    CHECK(same < 5);
    const Rng parent(1, 2);
    Rng s1 = parent.split(1);
    Rng s2 = parent.split(1);
    CHECK(s1.uniform() == s2.uniform());
    CHECK(derive_stream(3, 1) != derive_stream(3, 2));
  }

  TEST_CASE("normal and Poisson draws have the right moments") {
    Rng rng(9, 0);
    std::vector<double> z(200000);
    for (auto& v : z) v = rng.normal();
    CHECK(std::abs(sample_mean(z)) < 0.01);
    CHECK(sample_variance(z) == doctest::Approx(1.0).epsilon(0.01));
    std::vector<double> k(200000);
    for (auto& v : k) v = static_cast<double>(sample_poisson(3.5, rng));
    CHECK(sample_mean(k) == doctest::Approx(3.5).epsilon(0.01));
    CHECK(sample_variance(k) == doctest::Approx(3.5).epsilon(0.02));
  }
}

TEST_SUITE("stats") {
  TEST_CASE("log-space helpers") {
    CHECK(log_poisson_pmf(0, 0.0) == 0.0);
    CHECK(log_poisson_pmf(1, 0.0) == kNegInf);
    CHECK(std::exp(log_poisson_pmf(3, 2.0)) == doctest::Approx(oracle::poisson_pmf(3, 2.0)).epsilon(1e-14));
    const std::vector<double> v{-1000.0, -1000.0};
    CHECK(log_sum_exp(v) == doctest::Approx(-1000.0 + std::log(2.0)).epsilon(1e-14));
    WeightedLogSum acc;
    acc.add(std::log(1.0), 2.0);
    acc.add(std::log(3.0), 4.0);
    CHECK(acc.mean() == doctest::Approx(3.5));
    CHECK(acc.log_total() == doctest::Approx(std::log(4.0)));
  }

  TEST_CASE("linear fit recovers a known line") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> y{3, 5, 7, 9, 11};
    const auto fit = linear_fit(x, y);
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));
  }

  TEST_CASE("Anderson-Darling accepts normal samples and rejects exponential ones") {
    Rng rng(4, 4);
    std::vector<double> z(400);
    for (auto& v : z) v = rng.normal();
    CHECK(anderson_darling_normal(z).p_value > 0.01);
    for (auto& v : z) v = -std::log(1.0 - rng.uniform());
    CHECK(anderson_darling_normal(z).p_value < 0.01);
  }

  TEST_CASE("iid standard errors") {
    Rng rng(8, 1);
    std::vector<double> z(10000);
    for (auto& v : z) v = rng.normal();
    const auto est = batch_means(z, 0);
    CHECK(est.std_error == doctest::Approx(0.01).epsilon(0.05));
  }
}
