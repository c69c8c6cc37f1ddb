#ifndef POLLNET_TESTS_SUPPORT_TEST_SPECS_HPP
#define POLLNET_TESTS_SUPPORT_TEST_SPECS_HPP

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "pollnet/model.hpp"
#include "pollnet/rng.hpp"

namespace pollnet::testing {

// The 3-queue reference network used across the suites: Poisson rates (1,1,1),
// exponential service rates (8,5,2) and routing rows (.1,.25,.2 / .2,.1,.2 /
// .2,.1,.25). Overloaded: rho = 1.8568.
inline NetworkSpec reference_spec(const std::vector<GatingIndexDistribution>& gating) {
  NetworkSpec s;
  s.n = 3;
  s.lambda = {1.0, 1.0, 1.0};
  s.service = {ServiceDistribution::exponential(8.0), ServiceDistribution::exponential(5.0),
               ServiceDistribution::exponential(2.0)};
  s.routing = Matrix(3, 3);
  const double p[3][3] = {{0.1, 0.25, 0.2}, {0.2, 0.1, 0.2}, {0.2, 0.1, 0.25}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s.routing(i, j) = p[i][j];
  s.gating = gating;
  return s;
}

inline NetworkSpec reference_exhaustive() {
  return reference_spec(std::vector<GatingIndexDistribution>(3, GatingIndexDistribution::exhaustive()));
}

inline NetworkSpec reference_gated() {
  return reference_spec(std::vector<GatingIndexDistribution>(3, GatingIndexDistribution::point(1)));
}

inline NetworkSpec reference_optimal() {
  return reference_spec({GatingIndexDistribution::exhaustive(),
                         GatingIndexDistribution::exhaustive(), GatingIndexDistribution::point(1)});
}

// Reference values, frozen from independent evaluation of the closed forms
// (traffic fixed point, hand matrix products, eigen decomposition, trapezoid
// quadrature) and cross-checked against simulation.
namespace oracle {
inline constexpr double gamma[3] = {2.0816733067729083, 1.957171314741036, 2.4103585657370523};
inline constexpr double cbar[3] = {0.47485059760956183, 0.5194223107569722, 0.8625498007968129};
inline constexpr double rho = 1.856822709163347;
inline constexpr double bE[3] = {0.1388888888888889, 0.2222222222222222, 0.6666666666666666};
inline constexpr double phi[3] = {0.16129032258064516, 0.2857142857142857, 2.0};
inline constexpr double f_gated[3] = {0.775, 0.7, 0.25};
inline constexpr double m_exhaustive[3][3] = {{2.2248847926267285, 1.670046082949309, 0.0},
                                              {2.1714285714285713, 1.3714285714285714, 0.0},
                                              {2.8, 2.4, 0.0}};
inline constexpr double theta_exhaustive = 3.7496900946275864;
inline constexpr double theta_gated = 1.6393610337558902;
inline constexpr double theta_optimal = 1.8215391208697205;
inline constexpr double v_dir_exhaustive[3] = {1.0, 0.702212968, 0.0};
inline constexpr double v_dir_gated[3] = {1.0, 0.7111075398, 0.6404398667};
inline constexpr double beta_exhaustive = 1.5612731645174107;
inline constexpr double beta_gated = 1.3290537034410608;
inline constexpr double beta_optimal = 1.2711590421200458;
inline constexpr double bbar_exhaustive[4] = {1.0, 1.1645997168, 1.5104340869, 3.7496900946};
inline constexpr double abar1_exhaustive[3] = {1.0205182440, 0.7166211451, 0.0};
inline constexpr double total_slopes[3] = {-0.6, 0.5, 2.1};
}  // namespace oracle

/// Random structurally valid, overloaded spec with N in {2..6}; rejection
/// sampling against the full validator.
inline NetworkSpec random_valid_spec(RngStream& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    NetworkSpec s;
    s.n = 2 + static_cast<int>(rng.below(5));
    s.lambda.resize(s.n);
    for (double& l : s.lambda) l = 0.1 + 1.9 * rng.uniform01();

    s.routing = Matrix(s.n, s.n);
    for (int i = 0; i < s.n; ++i) {
      double raw_sum = 0.0;
      std::vector<double> raw(s.n);
      for (int j = 0; j < s.n; ++j) {
        raw[j] = rng.uniform01();
        raw_sum += raw[j];
      }
      const double row_total = 0.15 + 0.6 * rng.uniform01();
      for (int j = 0; j < s.n; ++j) s.routing(i, j) = raw[j] / raw_sum * row_total;
    }

    // service means small enough for finite visits, then rescaled toward
    // an overloaded total load
    std::vector<double> mean(s.n);
    for (int i = 0; i < s.n; ++i) {
      const double cap = 0.9 * (1.0 - s.routing(i, i)) / s.lambda[i];
      mean[i] = std::min(0.05 + 0.75 * rng.uniform01(), cap * (0.3 + 0.6 * rng.uniform01()));
    }
    for (int scale_pass = 0; scale_pass < 40; ++scale_pass) {
      // rho = sum lambda_i cbar_i is linear in the means; push it above 1
      // without breaking the per-queue finiteness margins
      double rho_est = 0.0;
      {
        // crude series estimate of cbar via a few fixed-point sweeps
        std::vector<double> cb = mean;
        for (int it = 0; it < 200; ++it) {
          std::vector<double> nx(s.n);
          for (int i = 0; i < s.n; ++i) {
            nx[i] = mean[i];
            for (int j = 0; j < s.n; ++j) nx[i] += s.routing(i, j) * cb[j];
          }
          cb = nx;
        }
        for (int i = 0; i < s.n; ++i) rho_est += s.lambda[i] * cb[i];
      }
      if (rho_est > 1.1) break;
      bool grew = false;
      for (int i = 0; i < s.n; ++i) {
        const double cap = 0.90 * (1.0 - s.routing(i, i)) / s.lambda[i];
        const double nm = std::min(mean[i] * 1.35, cap);
        if (nm > mean[i]) grew = true;
        mean[i] = nm;
      }
      if (!grew) break;
    }

    s.service.resize(s.n);
    for (int i = 0; i < s.n; ++i) {
      switch (rng.below(3)) {
        case 0: s.service[i] = ServiceDistribution::exponential(1.0 / mean[i]); break;
        case 1: s.service[i] = ServiceDistribution::deterministic(mean[i]); break;
        default: {
          const double shape = 0.5 + 3.5 * rng.uniform01();
          s.service[i] = ServiceDistribution::gamma(shape, shape / mean[i]);
        }
      }
    }

    s.gating.resize(s.n);
    for (int i = 0; i < s.n; ++i) {
      switch (rng.below(4)) {
        case 0: s.gating[i] = GatingIndexDistribution::exhaustive(); break;
        case 1: s.gating[i] = GatingIndexDistribution::point(1 + static_cast<int>(rng.below(5))); break;
        default: {
          std::map<int, double> pmf;
          double left = 1.0;
          const int atoms = 2 + static_cast<int>(rng.below(2));
          for (int a = 0; a < atoms - 1; ++a) {
            const double w = left * rng.uniform01();
            pmf[1 + static_cast<int>(rng.below(6))] += w;
            left -= w;
          }
          if (rng.below(2) == 0)
            pmf[kGateInf] += left;
          else
            pmf[1 + static_cast<int>(rng.below(6))] += left;
          s.gating[i] = GatingIndexDistribution::from_atoms(pmf);
        }
      }
    }

    if (validate(s).ok()) return s;
  }
  throw std::runtime_error("random_valid_spec: rejection sampling failed");
}

}  // namespace pollnet::testing

#endif
