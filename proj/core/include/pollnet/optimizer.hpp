#ifndef POLLNET_OPTIMIZER_HPP
#define POLLNET_OPTIMIZER_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "pollnet/model.hpp"

namespace pollnet {

/// Deterministic gating per queue: an integer index or kGateInf (exhaustive).
using GatingAssignment = std::vector<int>;

struct OptimizationResult {
  GatingAssignment best;
  double best_beta = 0.0;
  std::vector<std::pair<long, double>> history;  // (iteration, best-so-far beta)
  long evaluations = 0;
};

/// Fluid average growth rate under the given deterministic gating assignment:
/// derive -> build_matrices -> perron -> build_skeleton -> beta.
double evaluate(const NetworkSpec& spec, const GatingAssignment& g);

/// Same pipeline driven directly by an exhaustiveness vector f in (0, 1]^N
/// (visit times t_i = f_i phi_i), for optimizing over f instead of kappa.
double evaluate_f(const NetworkSpec& spec, const Vec& f);

/// Enumerates every assignment in the product of per-queue candidate sets
/// (at most 10^6 combinations). Candidates within 1e-9 of the incumbent count
/// as ties; ties prefer the lexicographically smallest assignment with
/// kGateInf ordered before the integers, so numerically indistinguishable
/// near-exhaustive indexes resolve to the exhaustive policy.
OptimizationResult exhaustive_search(const NetworkSpec& spec,
                                     const std::vector<std::vector<int>>& candidates);

struct GaParams {
  int population = 20;
  int generations = 100;
  double mutation_rate = 0.1;
  double crossover_rate = 0.8;
  std::uint64_t seed = 1;
};

/// Seeded, deterministic genetic search over the same candidate encoding:
/// tournament selection of size 2, uniform crossover, per-gene mutation to a
/// uniform random candidate, elitism of 1. History records the best-so-far
/// objective per generation.
OptimizationResult genetic_search(const NetworkSpec& spec,
                                  const std::vector<std::vector<int>>& candidates,
                                  const GaParams& params);

/// The candidate set {1, ..., kmax} plus exhaustive, for every queue.
std::vector<std::vector<int>> default_candidates(int n, int kmax);

}  // namespace pollnet

#endif
