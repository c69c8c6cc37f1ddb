#include "pollnet/optimizer.hpp"

#include <cmath>

#include "doctest.h"
#include "pollnet/branching.hpp"
#include "pollnet/errors.hpp"
#include "pollnet/fluid.hpp"
#include "support/test_specs.hpp"

using namespace pollnet;
using namespace pollnet::testing;

TEST_CASE("evaluate reproduces the reference growth rates") {
  const NetworkSpec s = reference_exhaustive();
  CHECK(evaluate(s, {kGateInf, kGateInf, kGateInf}) ==
        doctest::Approx(oracle::beta_exhaustive).epsilon(1e-6));
  CHECK(evaluate(s, {1, 1, 1}) == doctest::Approx(oracle::beta_gated).epsilon(1e-6));
  CHECK(evaluate(s, {kGateInf, kGateInf, 1}) ==
        doctest::Approx(oracle::beta_optimal).epsilon(1e-6));
}

TEST_CASE("evaluate is a pure function: repeated calls agree bit for bit") {
  const NetworkSpec s = reference_exhaustive();
  const GatingAssignment g = {4, kGateInf, 2};
  const double a = evaluate(s, g);
  const double b = evaluate(s, g);
  CHECK(a == b);
}

TEST_CASE("evaluate_f matches evaluate through the induced exhaustiveness") {
  const NetworkSpec s = reference_exhaustive();
  const auto dq = derive(s);
  // deterministic kappa = (2, 1, 3) induces f_i = 1 - x_i^k
  Vec f(3);
  const int kappa[3] = {2, 1, 3};
  for (int i = 0; i < 3; ++i) {
    const double x = s.lambda[i] / dq.mu[i] + s.routing(i, i);
    f[i] = 1.0 - std::pow(x, kappa[i]);
  }
  CHECK(evaluate_f(s, f) == doctest::Approx(evaluate(s, {2, 1, 3})).epsilon(1e-12));
  CHECK(evaluate_f(s, {1.0, 1.0, 1.0}) ==
        doctest::Approx(oracle::beta_exhaustive).epsilon(1e-6));
  CHECK_THROWS_AS(evaluate_f(s, {0.0, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_f(s, {0.5, 1.0, 1.1}), std::invalid_argument);
}

TEST_CASE("exhaustive search finds the optimal gating assignment") {
  const NetworkSpec s = reference_exhaustive();
  const auto res = exhaustive_search(s, default_candidates(3, 32));
  REQUIRE(res.best.size() == 3);
  CHECK(res.best[0] == kGateInf);
  CHECK(res.best[1] == kGateInf);
  CHECK(res.best[2] == 1);
  CHECK(res.best_beta == doctest::Approx(oracle::beta_optimal).epsilon(1e-6));
  CHECK(res.evaluations == 33 * 33 * 33);
  CHECK(res.best_beta == doctest::Approx(evaluate(s, res.best)).epsilon(1e-12));
  // improvements are recorded in decreasing order
  for (std::size_t h = 1; h < res.history.size(); ++h)
    CHECK(res.history[h].second <= res.history[h - 1].second);
}

TEST_CASE("exhaustive search: single-candidate sets return that assignment") {
  const NetworkSpec s = reference_exhaustive();
  const std::vector<std::vector<int>> cands = {{3}, {kGateInf}, {2}};
  const auto res = exhaustive_search(s, cands);
  CHECK(res.best == GatingAssignment{3, kGateInf, 2});
  CHECK(res.evaluations == 1);
  CHECK(res.best_beta == doctest::Approx(evaluate(s, res.best)).epsilon(1e-12));
}

TEST_CASE("symmetric queues evaluate symmetrically") {
  NetworkSpec s;
  s.n = 2;
  s.lambda = {1.0, 1.0};
  s.service = {ServiceDistribution::exponential(1.5), ServiceDistribution::exponential(1.5)};
  s.routing = Matrix(2, 2);
  s.routing(0, 1) = 0.3;
  s.routing(1, 0) = 0.3;
  s.gating = {GatingIndexDistribution::exhaustive(), GatingIndexDistribution::exhaustive()};
  REQUIRE(validate(s).ok());
  CHECK(evaluate(s, {2, 5}) == doctest::Approx(evaluate(s, {5, 2})).epsilon(1e-12));
  CHECK(evaluate(s, {1, kGateInf}) == doctest::Approx(evaluate(s, {kGateInf, 1})).epsilon(1e-12));
}

TEST_CASE("combinatorial cap rejects oversized exhaustive searches") {
  const NetworkSpec s = reference_exhaustive();
  const std::vector<std::vector<int>> cands(3, std::vector<int>(101, 1));
  CHECK_THROWS_AS(exhaustive_search(s, cands), std::invalid_argument);
}

TEST_CASE("genetic search is deterministic per seed and never beats brute force") {
  const NetworkSpec s = reference_exhaustive();
  const auto cands = default_candidates(3, 8);
  const auto ex = exhaustive_search(s, cands);

  GaParams params;
  params.population = 12;
  params.generations = 30;
  params.seed = 42;
  const auto a = genetic_search(s, cands, params);
  const auto b = genetic_search(s, cands, params);
  CHECK(a.best == b.best);
  CHECK(a.best_beta == b.best_beta);
  CHECK(a.history == b.history);
  CHECK(a.best_beta >= ex.best_beta - 1e-12);
  CHECK(a.best_beta == doctest::Approx(evaluate(s, a.best)).epsilon(1e-12));
  for (std::size_t h = 1; h < a.history.size(); ++h)
    CHECK(a.history[h].second <= a.history[h - 1].second);
}

TEST_CASE("genetic search without variation operators keeps a constant history") {
  const NetworkSpec s = reference_exhaustive();
  GaParams params;
  params.population = 6;
  params.generations = 15;
  params.mutation_rate = 0.0;
  params.crossover_rate = 0.0;
  params.seed = 7;
  const std::vector<std::vector<int>> single(3, std::vector<int>{2});  // identical individuals
  const auto res = genetic_search(s, single, params);
  REQUIRE(res.history.size() == 16);
  for (const auto& [gen, beta] : res.history) CHECK(beta == res.history.front().second);
  CHECK(res.best == GatingAssignment{2, 2, 2});
}

TEST_CASE("genetic search with zero generations returns the best of the initial population") {
  const NetworkSpec s = reference_exhaustive();
  GaParams params;
  params.population = 10;
  params.generations = 0;
  params.seed = 11;
  const auto res = genetic_search(s, default_candidates(3, 6), params);
  REQUIRE(res.history.size() == 1);
  CHECK(res.history[0].first == 0);
  CHECK(res.best_beta == doctest::Approx(evaluate(s, res.best)).epsilon(1e-12));
  CHECK(res.evaluations <= 10);
}

TEST_CASE("genetic search with the reference defaults converges to the optimum") {
  const NetworkSpec s = reference_exhaustive();
  const auto cands = default_candidates(3, 32);
  const auto ex = exhaustive_search(s, cands);
  int hits = 0;
  const int seeds = 10;
  for (int seed = 1; seed <= seeds; ++seed) {
    GaParams params;  // documented defaults: 20 x 100, mutation .1, crossover .8
    params.seed = static_cast<std::uint64_t>(seed);
    const auto res = genetic_search(s, cands, params);
    CHECK(res.best_beta >= ex.best_beta - 1e-12);
    if (std::abs(res.best_beta - ex.best_beta) <= 1e-3) ++hits;
  }
  CHECK(hits >= 9);  // at least 90% of seeds reach the optimum value
}
