#include "pollnet/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pollnet/errors.hpp"

namespace pollnet {

namespace {

void require_structural(const NetworkSpec& spec) {
  ValidationReport rep = validate(spec);
  if (!rep.structural_ok) throw ModelError(rep.errors.front());
}

// Single-server polling engine. Queues are customer counts: customers are
// statistically exchangeable because service times are drawn at service start
// and routing at completion, so no per-customer state is kept. Everything is
// driven by one logical clock; switches are instantaneous.
//
// Visit mechanics at Q_i: draw kappa_i, then up to kappa_i stages. Each stage
// closes the gate on the customers currently present and serves exactly that
// batch; arrivals and self-routed completions during the stage wait behind
// the gate for the next stage. The visit ends early when the queue is empty
// at a stage boundary. Ties between a completion and an arrival at the same
// instant resolve completion-first (arrivals strictly earlier are processed
// first), which also places an arrival at the exact instant of a gate closure
// behind the new gate.
class Engine {
 public:
  Engine(const NetworkSpec& spec, RngStream& seed_source, std::int64_t event_cap,
         const EventHook& hook)
      : spec_(spec),
        n_(spec.n),
        arrivals_(RngStream(seed_source.next())),
        services_(RngStream(seed_source.next())),
        routing_(RngStream(seed_source.next())),
        gates_(RngStream(seed_source.next())),
        event_cap_(event_cap),
        hook_(hook),
        behind_(spec.n, 0),
        next_arrival_(spec.n, 0.0),
        occupation_(spec.n, 0.0) {
    for (int i = 0; i < n_; ++i)
      next_arrival_[i] = arrivals_.exponential(spec_.lambda[i]);
    exit_threshold_.resize(n_);
    for (int i = 0; i < n_; ++i) exit_threshold_[i] = spec_.exit_prob(i);
  }

  void seed_customer(int queue) {
    ++behind_[queue];
    ++total_;
  }

  double now() const { return now_; }
  std::int64_t total() const { return total_; }
  std::int64_t events() const { return event_count_; }
  const std::vector<std::int64_t>& queues() const { return behind_; }
  const std::vector<double>& occupation() const { return occupation_; }

  void attach_recorder(SimTrace* trace) { trace_ = trace; }

  /// Serves one full visit at Q_i; returns its duration.
  double visit(int i) {
    const double start = now_;
    const int kappa = spec_.gating[i].sample(gates_);
    serving_ = i;
    for (long stage = 0; stage < static_cast<long>(kappa); ++stage) {
      if (behind_[i] == 0) break;
      std::int64_t gated = behind_[i];
      behind_[i] = 0;
      gated_ = gated;
      emit(SimEvent::GateClose, i);
      while (gated_ > 0) {
        const double completion = now_ + spec_.service[i].sample(services_);
        process_arrivals_before(completion);
        advance(completion);
        --gated_;
        count_event();
        route_completion(i);
      }
    }
    serving_ = -1;
    return now_ - start;
  }

  /// Waits (server idle before Q_1) until the next external arrival.
  void wait_for_arrival() {
    int j = 0;
    for (int q = 1; q < n_; ++q)
      if (next_arrival_[q] < next_arrival_[j]) j = q;
    advance(next_arrival_[j]);
    apply_arrival(j);
  }

  /// Queue length vector including any in-progress gated batch.
  std::vector<std::int64_t> state() const {
    std::vector<std::int64_t> x = behind_;
    if (serving_ >= 0) x[serving_] += gated_;
    return x;
  }

  /// Records remaining grid points up to the horizon with the final state.
  void flush_grid() {
    if (!trace_) return;
    while (grid_pos_ < trace_->grid.size()) record_grid_point(trace_->grid[grid_pos_++]);
  }

 private:
  void emit(SimEvent e, int queue) {
    if (hook_) hook_(e, now_, queue, total_);
  }

  void count_event() {
    if (++event_count_ > event_cap_)
      throw NumericError("horizon too large: event cap exceeded");
  }

  void process_arrivals_before(double tnew) {
    for (;;) {
      int j = 0;
      for (int q = 1; q < n_; ++q)
        if (next_arrival_[q] < next_arrival_[j]) j = q;
      if (next_arrival_[j] >= tnew) return;
      advance(next_arrival_[j]);
      apply_arrival(j);
    }
  }

  void apply_arrival(int j) {
    ++behind_[j];
    ++total_;
    next_arrival_[j] = now_ + arrivals_.exponential(spec_.lambda[j]);
    count_event();
    emit(SimEvent::Arrival, j);
  }

  void route_completion(int i) {
    double u = routing_.uniform01();
    // u in (0,1]: first exit_threshold_ mass exits, remainder routes by row i
    if (u <= exit_threshold_[i]) {
      --total_;
      emit(SimEvent::Exit, i);
      return;
    }
    u -= exit_threshold_[i];
    int dest = n_ - 1;
    for (int j = 0; j < n_; ++j) {
      u -= spec_.routing(i, j);
      if (u <= 0.0) {
        dest = j;
        break;
      }
    }
    ++behind_[dest];
    emit(SimEvent::Reroute, dest);
  }

  // Moves the clock, recording grid points strictly before tnew and accruing
  // server occupation.
  void advance(double tnew) {
    if (trace_) {
      while (grid_pos_ < trace_->grid.size() && trace_->grid[grid_pos_] < tnew)
        record_grid_point(trace_->grid[grid_pos_++]);
    }
    if (serving_ >= 0) occupation_[serving_] += tnew - now_;
    now_ = tnew;
  }

  void record_grid_point(double g) {
    trace_->queue_path.push_back(state());
    std::vector<double> occ = occupation_;
    if (serving_ >= 0) occ[serving_] += std::max(0.0, g - now_);
    trace_->occupation.push_back(std::move(occ));
  }

  const NetworkSpec& spec_;
  int n_;
  RngStream arrivals_, services_, routing_, gates_;
  std::int64_t event_cap_;
  EventHook hook_;

  std::vector<std::int64_t> behind_;
  std::vector<double> next_arrival_;
  std::vector<double> occupation_;
  Vec exit_threshold_;
  double now_ = 0.0;
  std::int64_t total_ = 0;
  std::int64_t gated_ = 0;
  int serving_ = -1;
  std::int64_t event_count_ = 0;

  SimTrace* trace_ = nullptr;
  std::size_t grid_pos_ = 0;
};

}  // namespace

SimTrace run(const NetworkSpec& spec, const SimConfig& cfg, const EventHook& hook) {
  require_structural(spec);
  if (!(cfg.horizon > 0.0)) throw std::invalid_argument("run: horizon must be positive");
  for (double g : cfg.record_grid)
    if (g < 0.0 || g > cfg.horizon)
      throw std::invalid_argument("run: record grid times must lie in [0, horizon]");

  SimTrace trace;
  trace.n_queues = spec.n;
  trace.horizon = cfg.horizon;
  trace.grid = cfg.record_grid;
  std::sort(trace.grid.begin(), trace.grid.end());
  trace.visit_instants.resize(spec.n);

  RngStream root = RngStream::derive(cfg.seed, {0x706F6C6C72756EULL,
                                                static_cast<std::uint64_t>(cfg.replication_id)});
  Engine eng(spec, root, cfg.event_cap, hook);
  eng.attach_recorder(&trace);

  for (;;) {
    trace.cycle_instants.push_back(eng.now());
    trace.cycle_states.push_back(eng.state());
    if (hook) hook(SimEvent::CycleStart, eng.now(), -1, eng.total());
    if (eng.total() == 0) trace.nu = static_cast<int>(trace.cycle_instants.size());
    if (eng.now() >= cfg.horizon) break;
    if (eng.total() == 0) eng.wait_for_arrival();
    for (int i = 0; i < spec.n; ++i) {
      trace.visit_instants[i].push_back(eng.now());
      if (hook) hook(SimEvent::VisitStart, eng.now(), i, eng.total());
      eng.visit(i);
    }
  }
  eng.flush_grid();
  trace.event_count = eng.events();
  return trace;
}

ScaledTrace scaled(const SimTrace& trace, double theta, int n, const Vec& grid) {
  if (trace.grid.empty()) throw std::invalid_argument("scaled: trace has no recorded grid");
  ScaledTrace st;
  st.n = n;
  st.theta = theta;
  st.grid = grid;
  const double scale = std::pow(theta, n);
  for (double g : grid) {
    const double s = g * scale;
    if (s > trace.horizon * (1.0 + 1e-12))
      throw std::invalid_argument("scaled: theta^n * grid exceeds the trace horizon");
    // value of the recorded step path at time s
    auto it = std::upper_bound(trace.grid.begin(), trace.grid.end(), s);
    Vec x(trace.n_queues, 0.0);
    if (it != trace.grid.begin()) {
      const std::size_t idx = static_cast<std::size_t>(it - trace.grid.begin()) - 1;
      for (int j = 0; j < trace.n_queues; ++j)
        x[j] = static_cast<double>(trace.queue_path[idx][j]) / scale;
    }
    st.values.push_back(std::move(x));
  }
  return st;
}

std::vector<std::int64_t> session_offspring_sample(const NetworkSpec& spec, int i,
                                                   RngStream& rng) {
  Engine eng(spec, rng, std::numeric_limits<std::int64_t>::max(), {});
  eng.seed_customer(i);
  for (int q = 0; q < spec.n; ++q) eng.visit(q);
  return eng.state();
}

std::vector<std::int64_t> visit_offspring_sample(const NetworkSpec& spec, int i,
                                                 RngStream& rng) {
  Engine eng(spec, rng, std::numeric_limits<std::int64_t>::max(), {});
  eng.seed_customer(i);
  eng.visit(i);
  return eng.state();
}

MonteCarloMean visit_time_mc(const NetworkSpec& spec, int i, int reps, std::uint64_t seed) {
  require_structural(spec);
  double sum = 0.0, sumsq = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng = RngStream::derive(seed, {0x76697369746D63ULL, static_cast<std::uint64_t>(rep)});
    Engine eng(spec, rng, std::numeric_limits<std::int64_t>::max(), {});
    eng.seed_customer(i);
    const double d = eng.visit(i);
    sum += d;
    sumsq += d * d;
  }
  MonteCarloMean mc;
  mc.reps = reps;
  mc.mean = sum / reps;
  const double var = std::max(0.0, (sumsq - sum * sum / reps) / (reps - 1));
  mc.half_width = 1.959963984540054 * std::sqrt(var / reps);
  return mc;
}

namespace {

double xi_objective(const ScaledTrace& st, const FluidSkeleton& sk, double xi) {
  const int n = sk.n;
  Vec sup_diff(n, 0.0), sup_fluid(n, 0.0);
  for (std::size_t g = 0; g < st.grid.size(); ++g) {
    Vec fl = sk.eval(st.grid[g] / xi);
    for (int j = 0; j < n; ++j) {
      const double f = xi * fl[j];
      sup_fluid[j] = std::max(sup_fluid[j], f);
      sup_diff[j] = std::max(sup_diff[j], std::abs(st.values[g][j] - f));
    }
  }
  double fmax = 0.0;
  for (int j = 0; j < n; ++j) fmax = std::max(fmax, sup_fluid[j]);
  double obj = 0.0;
  for (int j = 0; j < n; ++j)
    obj += sup_diff[j] / std::max(sup_fluid[j], 0.05 * fmax);
  return obj / n;
}

}  // namespace

XiFit estimate_xi(const ScaledTrace& st, const FluidSkeleton& sk) {
  if (st.grid.empty() || st.grid.front() <= 0.0)
    throw std::invalid_argument("estimate_xi: grid must cover a window with t_lo > 0");
  bool all_zero = true;
  for (const Vec& v : st.values)
    for (double x : v)
      if (x != 0.0) all_zero = false;
  if (all_zero) throw NumericError("trace too short: scaled trace is identically zero");

  const double theta = sk.theta;
  const double res = 1e-3 * (theta - 1.0);
  double best_xi = 1.0, best = xi_objective(st, sk, 1.0);
  for (double xi = 1.0 + res; xi < theta; xi += res) {
    const double o = xi_objective(st, sk, xi);
    if (o < best) {
      best = o;
      best_xi = xi;
    }
  }
  // golden-section refinement on the bracketing interval
  const double gr = 0.6180339887498949;
  double lo = std::max(1.0, best_xi - res);
  double hi = std::min(theta * (1.0 - 1e-12), best_xi + res);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = xi_objective(st, sk, x1), f2 = xi_objective(st, sk, x2);
  for (int it = 0; it < 80 && hi - lo > 1e-10; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = xi_objective(st, sk, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = xi_objective(st, sk, x2);
    }
  }
  const double mid = 0.5 * (lo + hi);
  const double fmid = xi_objective(st, sk, mid);
  XiFit fit;
  if (fmid <= best) {
    fit.xi_hat = mid;
    fit.fit_error = fmid;
  } else {
    fit.xi_hat = best_xi;
    fit.fit_error = best;
  }
  return fit;
}

int eta_index(const SimTrace& trace, double theta, int n) {
  if (n < 0) return 0;
  const double target = std::pow(theta, n);
  for (std::size_t k = 0; k < trace.cycle_instants.size(); ++k)
    if (trace.cycle_instants[k] >= target) return static_cast<int>(k) + 1;
  return 0;
}

}  // namespace pollnet
