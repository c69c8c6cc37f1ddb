#ifndef POLLNET_FLUID_HPP
#define POLLNET_FLUID_HPP

#include <utility>
#include <vector>

#include "pollnet/branching.hpp"
#include "pollnet/linalg.hpp"
#include "pollnet/model.hpp"

namespace pollnet {

/// Breakpoints and corner states of one self-similar period [1, theta) of the
/// fluid limit, plus the per-segment slopes needed to evaluate the trajectory
/// anywhere. bbar[0] = 1 and bbar[n] = theta; corner i+1 follows corner i by
/// a linear segment of duration abar(i,i) * t_i.
class FluidSkeleton {
 public:
  int n = 0;
  double theta = 0.0;
  double alpha = 0.0;  // sum_i v_i cbar_i / (rho - 1), time units
  Vec bbar;            // size n+1, normalized breakpoints
  Matrix abar;         // (n+1) x n, normalized corner states; row 0 is v/alpha
  Vec b;               // unnormalized breakpoints, b = alpha * bbar
  Matrix a;            // unnormalized corners, a = alpha * abar (row 0 is v)
  Matrix slope;        // n x n; row i = lambda + mu_i p_i with diagonal p_ii - 1
  Vec total_slope;     // sum_j lambda_j - p_{i,0} mu_i per segment

  /// Segment containing time t > 0: the unique (k, i), k any integer and
  /// 0 <= i < n, with theta^k bbar[i] <= t < theta^k bbar[i+1].
  std::pair<int, int> locate(double t) const;

  /// Trajectory value at t >= 0 (0-vector at t = 0).
  Vec eval(double t) const;

  /// Average growth rate of the total population over one period.
  double beta() const;

  /// xi * eval(t / xi) on the grid, xi in [1, theta).
  std::vector<std::pair<double, Vec>> sample_trajectory(double xi, const Vec& grid) const;
};

/// Builds the skeleton from mutually consistent derived quantities, offspring
/// matrices and Perron pair. Throws NumericError if a corner state is negative
/// beyond roundoff (signals an inconsistent model rather than clipping).
FluidSkeleton build_skeleton(const NetworkSpec& spec, const DerivedQuantities& dq,
                             const OffspringMatrices& om, const PerronEigenpair& pe);

/// Slopes of the total population per visited queue (same values as
/// FluidSkeleton::total_slope, computable without the skeleton).
Vec total_slopes(const NetworkSpec& spec);

}  // namespace pollnet

#endif
