#ifndef POLLNET_SIMULATOR_HPP
#define POLLNET_SIMULATOR_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "pollnet/fluid.hpp"
#include "pollnet/model.hpp"
#include "pollnet/rng.hpp"

namespace pollnet {

struct SimConfig {
  std::uint64_t seed = 1;
  double horizon = 0.0;          // required > 0
  int scale_n = -1;              // provenance when horizon = theta^n * window
  std::vector<double> record_grid;
  int replication_id = 0;
  std::int64_t event_cap = 100000000;
};

enum class SimEvent { CycleStart, VisitStart, GateClose, Arrival, Reroute, Exit };

/// Test/diagnostic observer: (event, time, queue, total population after).
using EventHook = std::function<void(SimEvent, double, int, std::int64_t)>;

/// Event-level record of one run. cycle_instants[n] is t^(n+1) in 1-based
/// terms (the n-th before-Q_1 instant); visit_instants[i][n] the matching
/// visit-start instants. A trace always closes with a final cycle instant, so
/// cycle_instants.size() == visit_instants[i].size() + 1.
struct SimTrace {
  int n_queues = 0;
  double horizon = 0.0;
  std::vector<double> cycle_instants;
  std::vector<std::vector<std::int64_t>> cycle_states;   // X at each cycle instant
  std::vector<std::vector<double>> visit_instants;       // [queue][cycle]
  std::vector<double> grid;
  std::vector<std::vector<std::int64_t>> queue_path;     // [grid point][queue]
  std::vector<std::vector<double>> occupation;           // cumulative I_i(t) on the grid
  int nu = 0;                                            // last cycle index (1-based) observed empty
  std::int64_t event_count = 0;
};

struct ScaledTrace {
  int n = 0;  // scaling exponent
  double theta = 0.0;
  std::vector<double> grid;
  std::vector<Vec> values;  // X(theta^n t) / theta^n
};

/// Runs the polling network from an empty system at t = 0 until the horizon
/// (finishing the cycle in progress). Requires a structurally valid spec;
/// overload is not needed. Deterministic given (spec, cfg).
SimTrace run(const NetworkSpec& spec, const SimConfig& cfg, const EventHook& hook = {});

/// Exact rescaling X(theta^n t)/theta^n of the recorded step path.
ScaledTrace scaled(const SimTrace& trace, double theta, int n, const Vec& grid);

/// One draw of the session offspring of a single customer at Q_i: the state
/// one full cycle after starting with exactly that customer, external arrivals
/// during the (positive-duration) cycle included.
std::vector<std::int64_t> session_offspring_sample(const NetworkSpec& spec, int i,
                                                   RngStream& rng);

/// One draw of the visit offspring: the state right after a single visit to
/// Q_i starting from exactly one customer there.
std::vector<std::int64_t> visit_offspring_sample(const NetworkSpec& spec, int i,
                                                 RngStream& rng);

struct MonteCarloMean {
  double mean = 0.0;
  double half_width = 0.0;  // 95% CI half width
  int reps = 0;
};

/// Monte Carlo mean visit duration at Q_i starting from one customer there.
MonteCarloMean visit_time_mc(const NetworkSpec& spec, int i, int reps, std::uint64_t seed);

struct XiFit {
  double xi_hat = 1.0;
  double fit_error = 0.0;  // achieved mean relative sup-distance
};

/// Fits the free scale xi in [1, theta): grid search at resolution
/// 1e-3 (theta - 1) then golden-section refinement, minimizing the mean over
/// queues of the sup-distance between the scaled trace and xi * Xbar(. / xi),
/// each queue normalized by its fluid sup.
XiFit estimate_xi(const ScaledTrace& st, const FluidSkeleton& sk);

/// First cycle index (1-based) whose instant reaches theta^n; 0 for n < 0.
int eta_index(const SimTrace& trace, double theta, int n);

}  // namespace pollnet

#endif
