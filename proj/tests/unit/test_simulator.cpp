#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mtt/errors.hpp"
#include "mtt/simulator.hpp"
#include "mtt/stats.hpp"
#include "../support/helpers.hpp"
#include "../support/oracles.hpp"

using namespace mtt;

namespace {

GroundTruth truth_of(ModelParams p, std::vector<double> states) {
  GroundTruth t;
  t.params = std::move(p);
  t.initial_states = std::move(states);
  return t;
}

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("unperturbed frames list the target observations in target order") {
    const auto truth = truth_of(testing::gaussian_params(3, 1.0, 0.0), {-1.0, 0.0, 1.0});
    const auto frames = simulate_static(truth, PerturbationSpec::unperturbed(), 50, Rng(1, 0));
    for (const auto& f : frames) {
      CHECK(f.observed.points == f.target_observations);
      CHECK(f.truth_perm == ConstrainedPermutation::identity(3));
    }
  }

  TEST_CASE("full association scrambles the observations uniformly") {
    const auto truth = truth_of(testing::gaussian_params(3, 1.0, 0.0), {-5.0, 0.0, 5.0});
    const auto frames = simulate_static(truth, PerturbationSpec::full(), 60000, Rng(2, 0));
    std::map<std::vector<int>, double> counts;
    for (const auto& f : frames) {
      auto a = f.observed.points;
      auto b = f.target_observations;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK(a == b);
      counts[f.truth_perm.mapping()] += 1.0;
    }
    REQUIRE(counts.size() == 6);
    std::vector<double> c;
    for (const auto& [k, v] : counts) c.push_back(v);
    CHECK(testing::chi_square(c, std::vector<double>(6, 1.0 / 6.0)) < testing::chi_square_critical(5, 0.001));
  }

  TEST_CASE("point count is binomial plus Poisson") {
    const int k = 3;
    const double p = 0.6;
    const double lambda = 1.5;
    const auto truth = truth_of(testing::gaussian_params(k, p, lambda), {0.0, 1.0, 2.0});
    const auto frames = simulate_static(truth, PerturbationSpec::full(), 100000, Rng(3, 0));
    const int bins = 9;  // 0..7 and 8+
    std::vector<double> counts(bins, 0.0);
    for (const auto& f : frames) counts[std::min<std::size_t>(f.observed.points.size(), bins - 1)] += 1.0;
    std::vector<double> probs(bins, 0.0);
    for (int d = 0; d <= k; ++d) {
      const double pd = static_cast<double>(oracle::factorial(k)) /
                        static_cast<double>(oracle::factorial(d) * oracle::factorial(k - d)) * std::pow(p, d) *
                        std::pow(1.0 - p, k - d);
      for (int c = 0; c < 40; ++c) probs[std::min(d + c, bins - 1)] += pd * oracle::poisson_pmf(c, lambda);
    }
    CHECK(testing::chi_square(counts, probs) < testing::chi_square_critical(bins - 1, 0.001));
  }

  TEST_CASE("mean frame size of one target with clutter") {
    const auto truth = truth_of(testing::gaussian_params(1, 1.0, 1.0), {0.0});
    const auto frames = simulate_static(truth, PerturbationSpec::full(), 100000, Rng(4, 0));
    double total = 0.0;
    for (const auto& f : frames) total += static_cast<double>(f.observed.points.size());
    CHECK(total / 100000.0 == doctest::Approx(2.0).epsilon(0.005));
  }

  TEST_CASE("truth latents recover each target's observations") {
    std::vector<double> states;
    for (int i = 1; i <= 5; ++i) states.push_back(1.0 * (i - 3));
    const auto truth = truth_of(testing::gaussian_params(5, 1.0, 0.0), states);
    const auto frames = simulate_static(truth, PerturbationSpec::full(), 10000, Rng(5, 0));
    std::vector<double> sums(5, 0.0);
    for (const auto& f : frames) {
      // observed[i] = v[perm(i)], so v[j] = observed[perm^-1(j)]
      const auto inv = f.truth_perm.inverse();
      for (int j = 0; j < 5; ++j) sums[j] += f.observed.points[static_cast<std::size_t>(inv(j))];
    }
    for (int j = 0; j < 5; ++j) CHECK(std::abs(sums[j] / 10000.0 - states[j]) < 0.05);
  }

  TEST_CASE("unrestricted misses give a binomial detected count") {
    const auto truth = truth_of(testing::gaussian_params(4, 0.5, 0.0), {0.0, 1.0, 2.0, 3.0});
    const auto frames = simulate_static(truth, PerturbationSpec{1, kUnbounded}, 80000, Rng(6, 0));
    std::vector<double> counts(5, 0.0);
    for (const auto& f : frames) counts[static_cast<std::size_t>(f.truth_mask.detected_count())] += 1.0;
    const std::vector<double> probs{1 / 16.0, 4 / 16.0, 6 / 16.0, 4 / 16.0, 1 / 16.0};
    CHECK(testing::chi_square(counts, probs) < testing::chi_square_critical(4, 0.001));
  }

  TEST_CASE("latents reproduce the observed frame and runs are deterministic") {
    const auto truth = truth_of(testing::gaussian_params(3, 0.7, 1.0, 1.0, 0.2), {0.0, 1.0, 2.0});
    const auto a = simulate_sequence(truth, PerturbationSpec{2, 1}, 40, Rng(7, 3));
    const auto b = simulate_sequence(truth, PerturbationSpec{2, 1}, 40, Rng(7, 3));
    for (std::size_t t = 0; t < a.size(); ++t) {
      CHECK(a[t].observed.points == b[t].observed.points);
      CHECK(a[t].truth_perm.displacement() <= 2);
      CHECK(3 - a[t].truth_mask.detected_count() <= 1);
      CHECK(observed_from_latents(a[t].target_observations, a[t].truth_mask, a[t].clutter_points,
                                  a[t].truth_perm) == a[t].observed.points);
    }
    CHECK_THROWS_AS(simulate_sequence(truth, PerturbationSpec::full(), 0, Rng(1, 1)), ConfigError);
  }

  TEST_CASE("frames share motion and target observations across perturbation settings") {
    const auto truth = truth_of(testing::gaussian_params(2, 0.5, 1.0, 1.0, 0.3), {0.0, 4.0});
    const auto a = simulate_sequence(truth, PerturbationSpec::unperturbed(), 10, Rng(8, 0));
    const auto b = simulate_sequence(truth, PerturbationSpec::full(), 10, Rng(8, 0));
    for (std::size_t t = 0; t < a.size(); ++t) {
      CHECK(a[t].truth_states == b[t].truth_states);
      CHECK(a[t].target_observations == b[t].target_observations);
    }
  }

  TEST_CASE("JSON-lines frame dump") {
    const auto truth = truth_of(testing::gaussian_params(2, 0.8, 0.5), {0.0, 1.0});
    const auto frames = simulate_static(truth, PerturbationSpec::full(), 3, Rng(9, 0));
    std::ostringstream out;
    write_frames_jsonl(out, frames);
    std::istringstream in(out.str());
    std::string line;
    int t = 0;
    while (std::getline(in, line)) {
      const auto doc = nlohmann::json::parse(line);
      CHECK(doc["t"] == t + 1);
      CHECK(doc["points"].get<std::vector<double>>() == frames[t].observed.points);
      CHECK(doc["truth"]["perm"].get<std::vector<int>>() == frames[t].truth_perm.to_one_based());
      ++t;
    }
    CHECK(t == 3);
  }
}
