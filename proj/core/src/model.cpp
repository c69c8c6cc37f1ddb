#include "pollnet/model.hpp"

#include <cmath>
#include <sstream>

#include "pollnet/errors.hpp"

namespace pollnet {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

// Traffic equations gamma_i = lambda_i + sum_j gamma_j p_{j,i}, i.e.
// (I - P^T) gamma = lambda, solved by direct elimination.
Vec solve_gamma(const NetworkSpec& spec) {
  const int n = spec.n;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = -spec.routing(j, i);
    a(i, i) += 1.0;
  }
  return solve_linear(a, spec.lambda);
}

// cbar_i = 1/mu_i + sum_j p_{i,j} cbar_j, i.e. (I - P) cbar = E[B].
Vec solve_cbar(const NetworkSpec& spec) {
  const int n = spec.n;
  Matrix a(n, n);
  Vec rhs(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = -spec.routing(i, j);
    a(i, i) += 1.0;
    rhs[i] = spec.service[i].mean();
  }
  return solve_linear(a, rhs);
}

bool traffic_solution_sane(const NetworkSpec& spec, const Vec& gamma, const Vec& cbar) {
  for (int i = 0; i < spec.n; ++i) {
    if (!positive_finite(gamma[i]) || !positive_finite(cbar[i])) return false;
  }
  // residuals of the defining equations
  double rg = 0.0, rc = 0.0;
  for (int i = 0; i < spec.n; ++i) {
    double gi = spec.lambda[i], ci = spec.service[i].mean();
    for (int j = 0; j < spec.n; ++j) {
      gi += gamma[j] * spec.routing(j, i);
      ci += spec.routing(i, j) * cbar[j];
    }
    rg = std::max(rg, std::abs(gi - gamma[i]));
    rc = std::max(rc, std::abs(ci - cbar[i]));
  }
  const double scale = std::max(1.0, std::max(max_abs(gamma), max_abs(cbar)));
  return rg < 1e-10 * scale && rc < 1e-10 * scale;
}

}  // namespace

ValidationReport validate(const NetworkSpec& spec) {
  ValidationReport rep;
  auto err = [&rep](const std::string& m) { rep.errors.push_back(m); };

  if (spec.n < 2) err("n must be at least 2");
  if (static_cast<int>(spec.lambda.size()) != spec.n) err("lambda must have n entries");
  if (static_cast<int>(spec.service.size()) != spec.n) err("service must have n entries");
  if (static_cast<int>(spec.gating.size()) != spec.n) err("gating must have n entries");
  if (spec.routing.rows() != spec.n || spec.routing.cols() != spec.n)
    err("routing must be an n x n matrix");
  if (!rep.errors.empty()) return rep;

  for (int i = 0; i < spec.n; ++i) {
    std::ostringstream q;
    q << "queue " << (i + 1) << ": ";
    if (!positive_finite(spec.lambda[i])) err(q.str() + "arrival rate must be positive");
    if (!positive_finite(spec.service[i].mean()))
      err(q.str() + "service mean must be positive and finite");
    double row = 0.0;
    for (int j = 0; j < spec.n; ++j) {
      const double p = spec.routing(i, j);
      if (!(p >= 0.0) || !std::isfinite(p)) err(q.str() + "routing probabilities must be in [0,1]");
      row += p;
    }
    if (row > 1.0 + 1e-12) err(q.str() + "routing row sum exceeds 1");

    const auto& pmf = spec.gating[i].pmf();
    double wsum = 0.0;
    bool any_pos = false;
    for (const auto& [k, p] : pmf) {
      if (k != kGateInf && k < 1) err(q.str() + "gating index atoms must be >= 1");
      if (!(p >= 0.0) || !std::isfinite(p)) err(q.str() + "gating weights must be nonnegative");
      wsum += p;
      any_pos = any_pos || p > 0.0;
    }
    if (!any_pos) err(q.str() + "gating pmf needs at least one positive atom");
    if (std::abs(wsum - 1.0) > 1e-12) err(q.str() + "gating weights must sum to 1");
  }
  if (!rep.errors.empty()) return rep;

  double exit_total = 0.0;
  for (int i = 0; i < spec.n; ++i) exit_total += std::max(0.0, spec.exit_prob(i));
  if (!(exit_total > 0.0)) err("no exit probability: sum of p_{i,0} must be positive");

  // finiteness of b_i^E and phi_i: lambda_i / (mu_i (1 - p_ii)) < 1
  for (int i = 0; i < spec.n; ++i) {
    const double mi = 1.0 / spec.service[i].mean();
    const double x = spec.lambda[i] / mi + spec.routing(i, i);
    if (!(x < 1.0)) {
      std::ostringstream q;
      q << "queue " << (i + 1) << ": lambda_i/mu_i + p_ii = " << x
        << " must be below 1 (visit times would be infinite)";
      err(q.str());
    }
  }
  if (!rep.errors.empty()) return rep;
  rep.structural_ok = true;

  Vec gamma, cbar;
  try {
    gamma = solve_gamma(spec);
    cbar = solve_cbar(spec);
  } catch (const NumericError&) {
    err("routing matrix not substochastic-convergent");
    return rep;
  }
  if (!traffic_solution_sane(spec, gamma, cbar)) {
    err("routing matrix not substochastic-convergent");
    return rep;
  }

  double rho = 0.0;
  for (int i = 0; i < spec.n; ++i) rho += spec.lambda[i] * cbar[i];
  rep.overloaded = rho > 1.0;
  if (!rep.overloaded) {
    std::ostringstream m;
    m << "not overloaded: rho = " << rho << " <= 1";
    err(m.str());
  }
  for (int i = 0; i < spec.n; ++i) {
    const double ri = gamma[i] * spec.service[i].mean();
    if (ri >= 1.0) {
      std::ostringstream m;
      m << "queue " << (i + 1) << ": per-queue load gamma_i/mu_i = " << ri << " >= 1";
      rep.warnings.push_back(m.str());
    }
  }
  return rep;
}

DerivedQuantities derive(const NetworkSpec& spec) {
  ValidationReport rep = validate(spec);
  if (!rep.ok()) throw ModelError(rep.errors.front());

  const int n = spec.n;
  DerivedQuantities dq;
  dq.gamma = solve_gamma(spec);
  dq.cbar = solve_cbar(spec);
  dq.mu.resize(n);
  dq.rho_gamma.resize(n);
  dq.rho_lc.resize(n);
  dq.bE.resize(n);
  dq.phi.resize(n);
  dq.f.resize(n);
  dq.t.resize(n);
  for (int i = 0; i < n; ++i) {
    dq.mu[i] = 1.0 / spec.service[i].mean();
    dq.rho_gamma[i] = dq.gamma[i] / dq.mu[i];
    dq.rho_lc[i] = spec.lambda[i] * dq.cbar[i];
    dq.rho += dq.rho_lc[i];
    const double pii = spec.routing(i, i);
    dq.bE[i] = 1.0 / (dq.mu[i] * (1.0 - pii));
    dq.phi[i] = dq.bE[i] / (1.0 - spec.lambda[i] * dq.bE[i]);
    const double x = spec.lambda[i] / dq.mu[i] + pii;
    dq.f[i] = 1.0 - spec.gating[i].expect_pow(x);
    dq.t[i] = dq.f[i] * dq.phi[i];
  }
  return dq;
}

double mean_visit_time_k(const NetworkSpec& spec, int i, int k) {
  if (k < 0) throw std::domain_error("gating index must be >= 0");
  if (k == 0) return 0.0;
  const double mi = 1.0 / spec.service[i].mean();
  const double x = spec.lambda[i] / mi + spec.routing(i, i);
  if (!(x < 1.0)) throw ModelError("lambda_i/mu_i + p_ii must be below 1");
  const double xk = (k == kGateInf) ? 0.0 : std::pow(x, static_cast<double>(k));
  return (1.0 - xk) / (mi * (1.0 - x));
}

}  // namespace pollnet
