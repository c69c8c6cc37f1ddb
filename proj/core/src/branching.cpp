#include "pollnet/branching.hpp"

#include <cmath>
#include <limits>

#include "pollnet/errors.hpp"

namespace pollnet {

OffspringMatrices build_matrices(const DerivedQuantities& dq, const NetworkSpec& spec) {
  const int n = spec.n;
  OffspringMatrices om;
  om.Mk.reserve(n);
  for (int k = 0; k < n; ++k) {
    Matrix m = Matrix::identity(n);
    m(k, k) = 1.0 - dq.f[k];
    for (int j = 0; j < n; ++j) {
      if (j == k) continue;
      m(k, j) = dq.f[k] * dq.phi[k] * (dq.mu[k] * spec.routing(k, j) + spec.lambda[j]);
    }
    om.Mk.push_back(std::move(m));
  }

  om.M = om.Mk[0];
  for (int k = 1; k < n; ++k) om.M = om.M * om.Mk[k];

  om.mcheck = Matrix(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) om.mcheck(i, j) = om.Mk[i](i, j);

  // Session offspring by backward recursion: customers left at queues j <= i
  // stay for the rest of the cycle, those at later queues k > i are themselves
  // replaced by their session offspring.
  om.msession = Matrix(n, n);
  for (int j = 0; j < n; ++j) om.msession(n - 1, j) = om.mcheck(n - 1, j);
  for (int i = n - 2; i >= 0; --i) {
    for (int j = 0; j < n; ++j) {
      double s = (j <= i) ? om.mcheck(i, j) : 0.0;
      for (int k = i + 1; k < n; ++k) s += om.mcheck(i, k) * om.msession(k, j);
      om.msession(i, j) = s;
    }
  }
  return om;
}

namespace {

double l2norm(const Vec& x) { return std::sqrt(dot(x, x)); }

// Power iteration from the all-ones direction; nonnegative iterates stay in
// the cone so no sign bookkeeping is needed.
std::pair<double, Vec> power_iterate(const Matrix& m, long cap, long& iterations) {
  const int n = m.rows();
  Vec x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double rayleigh_prev = 0.0;
  for (long it = 1; it <= cap; ++it) {
    Vec y = m * x;
    const double rayleigh = dot(x, y);  // x has unit norm
    const double ny = l2norm(y);
    if (ny == 0.0) throw NumericError("perron: matrix annihilates the iterate");
    for (double& v : y) v /= ny;
    x = std::move(y);
    if (it > 1 && std::abs(rayleigh - rayleigh_prev) < 1e-12 * std::max(1.0, std::abs(rayleigh))) {
      iterations += it;
      return {rayleigh, x};
    }
    rayleigh_prev = rayleigh;
  }
  throw NumericError("perron: no convergence (dominant eigenvalue tie or periodicity)");
}

// Inverse-iteration polish with the Rayleigh shift: the dominant eigenvalue
// estimate is far more accurate than the vector when the spectral gap is
// small, so a couple of solves drive the vector residual to machine level,
// which the skeleton closure identities downstream rely on.
std::pair<double, Vec> polish_eigenpair(const Matrix& m, double theta, Vec x) {
  const int n = m.rows();
  double best_res = std::numeric_limits<double>::infinity();
  Vec best = x;
  double rayleigh = theta;
  for (int step = 0; step < 4; ++step) {
    {
      const Vec y = m * x;
      rayleigh = dot(x, y) / dot(x, x);
      double res = 0.0;
      for (int i = 0; i < n; ++i) res = std::max(res, std::abs(y[i] - rayleigh * x[i]));
      if (res < best_res) {
        best_res = res;
        best = x;
      }
      if (res <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, rayleigh)) break;
    }
    Matrix shifted = m;
    // nudge the shift off exact singularity
    const double mu = rayleigh * (1.0 + 4.0 * std::numeric_limits<double>::epsilon());
    for (int i = 0; i < n; ++i) shifted(i, i) -= mu;
    Vec y;
    try {
      y = solve_linear(shifted, x);
    } catch (const NumericError&) {
      break;  // exactly singular: x already spans the eigenvector
    }
    const double ny = l2norm(y);
    if (!(ny > 0.0) || !std::isfinite(ny)) break;
    for (double& v : y) v /= ny;
    x = std::move(y);
  }
  // Perron vector orientation: make the dominant entries positive and clear
  // roundoff-scale negatives
  double extreme = 0.0;
  for (double v : best)
    if (std::abs(v) > std::abs(extreme)) extreme = v;
  if (extreme < 0.0)
    for (double& v : best) v = -v;
  double maxabs = std::abs(extreme);
  for (double& v : best)
    if (v < 0.0 && v >= -1e-11 * maxabs) v = 0.0;
  return {rayleigh, best};
}

}  // namespace

PerronEigenpair perron(const Matrix& m) {
  PerronEigenpair pe;
  const Matrix mt = m.transposed();
  auto [theta_u0, u0] = power_iterate(m, 1000000, pe.iterations);
  auto [theta_v0, v0] = power_iterate(mt, 1000000, pe.iterations);
  auto [theta_u, u] = polish_eigenpair(m, theta_u0, std::move(u0));
  auto [theta_v, v] = polish_eigenpair(mt, theta_v0, std::move(v0));
  pe.theta = theta_u;

  const double contract = 1e-9 * std::max(1.0, pe.theta);
  const Vec ru = m * u;
  const Vec rv = v * m;
  for (int i = 0; i < m.rows(); ++i) {
    if (std::abs(ru[i] - pe.theta * u[i]) > contract ||
        std::abs(rv[i] - theta_v * v[i]) > contract)
      throw NumericError("perron: eigenpair residual above tolerance");
  }

  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, x);
  if (vmax <= 0.0) throw NumericError("perron: left eigenvector degenerate");
  for (double& x : v) x /= vmax;

  const double s = dot(v, u);
  if (!(s > 1e-14)) throw NumericError("perron: dominant pair defective (v.u = 0)");
  for (double& x : u) x /= s;

  pe.v = std::move(v);
  pe.u = std::move(u);
  return pe;
}

Vec immigration_weights(const NetworkSpec& spec) {
  ValidationReport rep = validate(spec);
  if (!rep.structural_ok) throw ModelError(rep.errors.front());
  double sum = 0.0;
  for (double l : spec.lambda) sum += l;
  Vec w(spec.n);
  for (int i = 0; i < spec.n; ++i) w[i] = spec.lambda[i] / sum;
  return w;
}

ExtinctionEstimate estimate_extinction(const OffspringSampler& sampler, int i,
                                       int generations, std::int64_t truncation,
                                       int reps, std::uint64_t seed) {
  ExtinctionEstimate est;
  est.reps = reps;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng = RngStream::derive(seed, {0x657874696E637431ULL, static_cast<std::uint64_t>(rep)});
    std::vector<std::int64_t> pop;
    bool verdict = false;
    {
      // first sample fixes the number of types
      std::vector<std::int64_t> first = sampler(i, rng);
      pop.assign(first.size(), 0);
      std::int64_t total = 0;
      for (std::size_t j = 0; j < first.size(); ++j) {
        pop[j] = first[j];
        total += first[j];
      }
      if (total == 0) {
        ++est.extinct;
        verdict = true;
      } else if (total > truncation) {
        ++est.survived;
        verdict = true;
      }
    }
    for (int gen = 2; !verdict && gen <= generations; ++gen) {
      std::vector<std::int64_t> next(pop.size(), 0);
      std::int64_t total_next = 0;
      for (std::size_t type = 0; type < pop.size() && !verdict; ++type) {
        for (std::int64_t c = 0; c < pop[type]; ++c) {
          std::vector<std::int64_t> off = sampler(static_cast<int>(type), rng);
          for (std::size_t j = 0; j < next.size(); ++j) {
            next[j] += off[j];
            total_next += off[j];
          }
          if (total_next > truncation) {
            ++est.survived;
            verdict = true;
            break;
          }
        }
      }
      if (verdict) break;
      if (total_next == 0) {
        ++est.extinct;
        verdict = true;
        break;
      }
      pop = std::move(next);
    }
    if (!verdict) ++est.inconclusive;
  }
  est.q_hat = static_cast<double>(est.extinct) / reps;
  est.half_width = 1.959963984540054 * std::sqrt(est.q_hat * (1.0 - est.q_hat) / reps);
  return est;
}

}  // namespace pollnet
