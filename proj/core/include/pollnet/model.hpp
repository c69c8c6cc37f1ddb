#ifndef POLLNET_MODEL_HPP
#define POLLNET_MODEL_HPP

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "pollnet/linalg.hpp"
#include "pollnet/rng.hpp"

namespace pollnet {

/// Sentinel gating index for exhaustive service. Sorts after every finite index.
inline constexpr int kGateInf = std::numeric_limits<int>::max();

/// Service time distribution of one queue. The analytic layer uses only the
/// mean; the simulator samples the full distribution.
struct ServiceDistribution {
  enum class Kind { Exponential, Deterministic, Gamma };

  Kind kind = Kind::Exponential;
  double a = 1.0;  // exponential/gamma: rate; deterministic: value
  double b = 0.0;  // gamma: shape

  static ServiceDistribution exponential(double rate) {
    return {Kind::Exponential, rate, 0.0};
  }
  static ServiceDistribution deterministic(double value) {
    return {Kind::Deterministic, value, 0.0};
  }
  static ServiceDistribution gamma(double shape, double rate) {
    return {Kind::Gamma, rate, shape};
  }

  double mean() const {
    switch (kind) {
      case Kind::Exponential: return 1.0 / a;
      case Kind::Deterministic: return a;
      case Kind::Gamma: return b / a;
    }
    return 0.0;
  }

  double sample(RngStream& rng) const {
    switch (kind) {
      case Kind::Exponential: return rng.exponential(a);
      case Kind::Deterministic: return a;
      case Kind::Gamma: return rng.gamma(b, a);
    }
    return 0.0;
  }
};

/// Distribution of the gating index kappa: atoms on {1, 2, ...} plus an
/// explicit atom at infinity (exhaustive service), keyed by kGateInf.
class GatingIndexDistribution {
 public:
  GatingIndexDistribution() = default;

  static GatingIndexDistribution point(int k) {
    GatingIndexDistribution g;
    g.pmf_[k] = 1.0;
    return g;
  }
  static GatingIndexDistribution exhaustive() { return point(kGateInf); }
  static GatingIndexDistribution from_atoms(const std::map<int, double>& pmf) {
    GatingIndexDistribution g;
    g.pmf_ = pmf;
    return g;
  }

  const std::map<int, double>& pmf() const { return pmf_; }

  /// E[x^kappa] for 0 <= x < 1; the infinity atom contributes 0.
  double expect_pow(double x) const {
    double e = 0.0;
    for (const auto& [k, p] : pmf_)
      if (k != kGateInf) e += p * std::pow(x, static_cast<double>(k));
    return e;
  }

  /// Inverse-CDF draw; returns a finite index or kGateInf.
  int sample(RngStream& rng) const {
    double u = rng.uniform01();
    for (const auto& [k, p] : pmf_) {
      u -= p;
      if (u <= 0.0) return k;
    }
    return pmf_.rbegin()->first;
  }

  bool is_exhaustive() const {
    return pmf_.size() == 1 && pmf_.begin()->first == kGateInf;
  }

 private:
  std::map<int, double> pmf_;
};

/// Full parameterization of the polling network: external arrival rates,
/// service distributions, customer routing matrix and gating distributions.
/// Queue indexes are 0-based throughout the library.
struct NetworkSpec {
  int n = 0;
  Vec lambda;
  std::vector<ServiceDistribution> service;
  Matrix routing;  // n x n, row i: p_{i,j}; exit probability is 1 - row sum
  std::vector<GatingIndexDistribution> gating;

  double exit_prob(int i) const {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += routing(i, j);
    return 1.0 - s;
  }
};

struct ValidationReport {
  std::vector<std::string> errors;    // structural and assumption failures; abort analysis
  std::vector<std::string> warnings;  // e.g. per-queue load gamma_i/mu_i >= 1
  bool structural_ok = false;         // type invariants hold (enough for simulation)
  bool overloaded = false;            // rho > 1

  bool ok() const { return errors.empty(); }
};

/// Closed-form quantities derived from a spec: traffic solution, loads,
/// per-customer sojourn service, exhaustiveness and mean visit times.
struct DerivedQuantities {
  Vec gamma;      // total arrival rates, gamma_i = lambda_i + sum_j gamma_j p_{j,i}
  Vec cbar;       // total service mean of an external arrival at Q_i
  Vec rho_gamma;  // gamma_i / mu_i
  Vec rho_lc;     // lambda_i * cbar_i
  double rho = 0.0;
  Vec bE;   // mean total service until leaving the queue, 1/(mu_i (1 - p_ii))
  Vec phi;  // bE_i / (1 - lambda_i bE_i)
  Vec f;    // exhaustiveness, 1 - E[(lambda_i/mu_i + p_ii)^kappa_i]
  Vec t;    // mean visit time given one customer at visit start
  Vec mu;   // service rates 1/E[B_i]
};

/// Checks type invariants and the traffic assumptions. Hard errors abort
/// downstream analysis; warnings do not.
ValidationReport validate(const NetworkSpec& spec);

/// Computes all derived quantities. Requires a fully valid, overloaded spec.
DerivedQuantities derive(const NetworkSpec& spec);

/// Mean visit duration at Q_i under a fixed k-gated discipline
/// (k = kGateInf gives the exhaustive limit; k = 0 gives 0).
double mean_visit_time_k(const NetworkSpec& spec, int i, int k);

}  // namespace pollnet

#endif
