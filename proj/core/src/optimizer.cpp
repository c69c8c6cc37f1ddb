#include "pollnet/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "pollnet/branching.hpp"
#include "pollnet/errors.hpp"
#include "pollnet/fluid.hpp"
#include "pollnet/rng.hpp"

namespace pollnet {

namespace {

constexpr double kTieEps = 1e-9;

// Lexicographic order with the exhaustive policy ranked before every finite
// index, so numerically tied near-exhaustive assignments canonicalize to inf.
bool inf_first_less(const GatingAssignment& a, const GatingAssignment& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long ra = (a[i] == kGateInf) ? 0 : a[i];
    const long rb = (b[i] == kGateInf) ? 0 : b[i];
    if (ra != rb) return ra < rb;
  }
  return false;
}

struct BestTracker {
  GatingAssignment best;
  double best_beta = 0.0;
  double run_min = 0.0;
  bool has = false;

  // Returns true when the tracked minimum strictly improved.
  bool offer(const GatingAssignment& g, double beta) {
    if (!has) {
      best = g;
      best_beta = beta;
      run_min = beta;
      has = true;
      return true;
    }
    const bool improved = beta < run_min;
    run_min = std::min(run_min, beta);
    if (beta < best_beta - kTieEps) {
      best = g;
      best_beta = beta;
    } else if (beta <= best_beta + kTieEps && inf_first_less(g, best)) {
      best = g;
      best_beta = beta;
    }
    return improved;
  }
};

NetworkSpec with_assignment(const NetworkSpec& spec, const GatingAssignment& g) {
  NetworkSpec s = spec;
  for (int i = 0; i < spec.n; ++i) s.gating[i] = GatingIndexDistribution::point(g[i]);
  return s;
}

double beta_of_derived(const NetworkSpec& spec, const DerivedQuantities& dq) {
  OffspringMatrices om = build_matrices(dq, spec);
  PerronEigenpair pe = perron(om.M);
  return build_skeleton(spec, dq, om, pe).beta();
}

}  // namespace

double evaluate(const NetworkSpec& spec, const GatingAssignment& g) {
  if (static_cast<int>(g.size()) != spec.n)
    throw std::invalid_argument("evaluate: assignment size mismatch");
  const NetworkSpec s = with_assignment(spec, g);
  return beta_of_derived(s, derive(s));
}

double evaluate_f(const NetworkSpec& spec, const Vec& f) {
  if (static_cast<int>(f.size()) != spec.n)
    throw std::invalid_argument("evaluate_f: exhaustiveness size mismatch");
  for (double fi : f)
    if (!(fi > 0.0) || !(fi <= 1.0))
      throw std::invalid_argument("evaluate_f: exhaustiveness must lie in (0, 1]");
  DerivedQuantities dq = derive(spec);
  for (int i = 0; i < spec.n; ++i) {
    dq.f[i] = f[i];
    dq.t[i] = f[i] * dq.phi[i];
  }
  return beta_of_derived(spec, dq);
}

std::vector<std::vector<int>> default_candidates(int n, int kmax) {
  std::vector<int> one;
  for (int k = 1; k <= kmax; ++k) one.push_back(k);
  one.push_back(kGateInf);
  return std::vector<std::vector<int>>(n, one);
}

OptimizationResult exhaustive_search(const NetworkSpec& spec,
                                     const std::vector<std::vector<int>>& candidates) {
  if (static_cast<int>(candidates.size()) != spec.n)
    throw std::invalid_argument("exhaustive_search: candidate sets size mismatch");
  double combos = 1.0;
  for (const auto& c : candidates) {
    if (c.empty()) throw std::invalid_argument("exhaustive_search: empty candidate set");
    combos *= static_cast<double>(c.size());
  }
  if (combos > 1e6)
    throw std::invalid_argument("exhaustive_search: more than 10^6 combinations");

  OptimizationResult res;
  BestTracker tracker;
  std::vector<std::size_t> idx(spec.n, 0);
  GatingAssignment g(spec.n);
  for (;;) {
    for (int i = 0; i < spec.n; ++i) g[i] = candidates[i][idx[i]];
    const double beta = evaluate(spec, g);
    ++res.evaluations;
    if (tracker.offer(g, beta)) res.history.emplace_back(res.evaluations, tracker.run_min);

    int pos = spec.n - 1;
    while (pos >= 0 && ++idx[pos] == candidates[pos].size()) {
      idx[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  res.best = tracker.best;
  res.best_beta = tracker.best_beta;
  return res;
}

OptimizationResult genetic_search(const NetworkSpec& spec,
                                  const std::vector<std::vector<int>>& candidates,
                                  const GaParams& params) {
  if (static_cast<int>(candidates.size()) != spec.n)
    throw std::invalid_argument("genetic_search: candidate sets size mismatch");
  for (const auto& c : candidates)
    if (c.empty()) throw std::invalid_argument("genetic_search: empty candidate set");
  if (params.population < 2) throw std::invalid_argument("genetic_search: population too small");

  RngStream rng = RngStream::derive(params.seed, {0x6761736565640ULL});
  std::map<GatingAssignment, double> memo;
  OptimizationResult res;
  auto fitness = [&](const GatingAssignment& g) {
    auto it = memo.find(g);
    if (it != memo.end()) return it->second;
    const double beta = evaluate(spec, g);
    ++res.evaluations;
    memo.emplace(g, beta);
    return beta;
  };

  std::vector<GatingAssignment> pop(params.population, GatingAssignment(spec.n));
  std::vector<double> fit(params.population);
  for (auto& ind : pop)
    for (int i = 0; i < spec.n; ++i)
      ind[i] = candidates[i][rng.below(candidates[i].size())];

  BestTracker tracker;
  int elite = 0;
  for (int p = 0; p < params.population; ++p) {
    fit[p] = fitness(pop[p]);
    tracker.offer(pop[p], fit[p]);
    if (fit[p] < fit[elite]) elite = p;
  }
  res.history.emplace_back(0, tracker.run_min);

  for (int gen = 1; gen <= params.generations; ++gen) {
    std::vector<GatingAssignment> next;
    next.reserve(params.population);
    next.push_back(pop[elite]);
    auto tournament = [&]() -> const GatingAssignment& {
      const std::size_t a = rng.below(params.population);
      const std::size_t b = rng.below(params.population);
      return fit[a] <= fit[b] ? pop[a] : pop[b];
    };
    while (static_cast<int>(next.size()) < params.population) {
      GatingAssignment child = tournament();
      if (rng.uniform01() <= params.crossover_rate) {
        const GatingAssignment& other = tournament();
        for (int i = 0; i < spec.n; ++i)
          if (rng.uniform01() <= 0.5) child[i] = other[i];
      }
      for (int i = 0; i < spec.n; ++i)
        if (rng.uniform01() <= params.mutation_rate)
          child[i] = candidates[i][rng.below(candidates[i].size())];
      next.push_back(std::move(child));
    }
    pop = std::move(next);
    elite = 0;
    for (int p = 0; p < params.population; ++p) {
      fit[p] = fitness(pop[p]);
      tracker.offer(pop[p], fit[p]);
      if (fit[p] < fit[elite]) elite = p;
    }
    res.history.emplace_back(gen, tracker.run_min);
  }
  res.best = tracker.best;
  res.best_beta = tracker.best_beta;
  return res;
}

}  // namespace pollnet
