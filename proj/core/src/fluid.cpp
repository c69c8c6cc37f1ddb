#include "pollnet/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pollnet/errors.hpp"

namespace pollnet {

Vec total_slopes(const NetworkSpec& spec) {
  double lam_sum = 0.0;
  for (double l : spec.lambda) lam_sum += l;
  Vec s(spec.n);
  for (int i = 0; i < spec.n; ++i)
    s[i] = lam_sum - spec.exit_prob(i) / spec.service[i].mean();
  return s;
}

FluidSkeleton build_skeleton(const NetworkSpec& spec, const DerivedQuantities& dq,
                             const OffspringMatrices& om, const PerronEigenpair& pe) {
  const int n = spec.n;
  FluidSkeleton sk;
  sk.n = n;
  sk.theta = pe.theta;
  sk.alpha = dot(pe.v, dq.cbar) / (dq.rho - 1.0);

  sk.slope = Matrix(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double pij = spec.routing(i, j) - (i == j ? 1.0 : 0.0);
      sk.slope(i, j) = spec.lambda[j] + dq.mu[i] * pij;
    }
  sk.total_slope = total_slopes(spec);

  sk.bbar.assign(n + 1, 0.0);
  sk.abar = Matrix(n + 1, n);
  sk.bbar[0] = 1.0;
  for (int j = 0; j < n; ++j) sk.abar(0, j) = pe.v[j] / sk.alpha;
  for (int i = 0; i < n; ++i) {
    const double db = sk.abar(i, i) * dq.t[i];
    sk.bbar[i + 1] = sk.bbar[i] + db;
    for (int j = 0; j < n; ++j) sk.abar(i + 1, j) = sk.abar(i, j) + sk.slope(i, j) * db;
  }

  for (int i = 0; i <= n; ++i)
    for (int j = 0; j < n; ++j)
      if (sk.abar(i, j) < -1e-12) {
        std::ostringstream m;
        m << "fluid corner a(" << (i + 1) << "," << (j + 1) << ") = " << sk.abar(i, j)
          << " negative beyond roundoff; inconsistent model inputs";
        throw NumericError(m.str());
      }

  // cross-checks against the branching construction: a_{i+1} = a_i M_i and the
  // self-similar closure b_{N+1} = theta; failures mean the inputs do not
  // belong to the same spec
  double scale = std::max(1.0, max_abs(pe.v) / sk.alpha);
  for (int i = 0; i < n; ++i) {
    Vec prod = sk.abar.row(i) * om.Mk[i];
    for (int j = 0; j < n; ++j)
      if (std::abs(prod[j] - sk.abar(i + 1, j)) > 1e-9 * scale)
        throw NumericError("skeleton corners inconsistent with offspring matrices");
    scale = std::max(scale, max_abs(prod));
  }
  if (std::abs(sk.bbar[n] - sk.theta) > 1e-9 * std::max(1.0, sk.theta))
    throw NumericError("skeleton breakpoints do not close at theta");

  sk.b.resize(n + 1);
  sk.a = Matrix(n + 1, n);
  for (int i = 0; i <= n; ++i) {
    sk.b[i] = sk.alpha * sk.bbar[i];
    for (int j = 0; j < n; ++j) sk.a(i, j) = sk.alpha * sk.abar(i, j);
  }
  return sk;
}

std::pair<int, int> FluidSkeleton::locate(double t) const {
  if (!(t > 0.0)) throw std::domain_error("locate: t must be positive");
  int k = static_cast<int>(std::floor(std::log(t) / std::log(theta)));
  double s = t / std::pow(theta, k);
  // guard roundoff at period boundaries; keep s in [1, theta)
  while (s < 1.0) {
    --k;
    s = t / std::pow(theta, k);
  }
  while (s >= theta) {
    ++k;
    s = t / std::pow(theta, k);
  }
  const auto it = std::upper_bound(bbar.begin(), bbar.end(), s);
  int i = static_cast<int>(it - bbar.begin()) - 1;
  i = std::clamp(i, 0, n - 1);
  return {k, i};
}

Vec FluidSkeleton::eval(double t) const {
  if (t < 0.0) throw std::domain_error("eval: t must be nonnegative");
  if (t == 0.0) return Vec(n, 0.0);
  const auto [k, i] = locate(t);
  const double scale = std::pow(theta, k);
  const double dt = t - scale * bbar[i];
  Vec x(n);
  for (int j = 0; j < n; ++j) x[j] = scale * abar(i, j) + dt * slope(i, j);
  return x;
}

double FluidSkeleton::beta() const {
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    double hi = 0.0, hn = 0.0;
    for (int j = 0; j < n; ++j) {
      hi += abar(i, j);
      hn += abar(i + 1, j);
    }
    s += (hi + hn) * (bbar[i + 1] - bbar[i]);
  }
  return s / (theta * theta - 1.0);
}

std::vector<std::pair<double, Vec>> FluidSkeleton::sample_trajectory(double xi,
                                                                     const Vec& grid) const {
  if (!(xi >= 1.0) || !(xi < theta))
    throw std::domain_error("sample_trajectory: xi must lie in [1, theta)");
  std::vector<std::pair<double, Vec>> out;
  out.reserve(grid.size());
  for (double t : grid) {
    Vec x = eval(t / xi);
    for (double& v : x) v *= xi;
    out.emplace_back(t, std::move(x));
  }
  return out;
}

}  // namespace pollnet
