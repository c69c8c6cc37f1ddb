#ifndef POLLNET_BRANCHING_HPP
#define POLLNET_BRANCHING_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "pollnet/linalg.hpp"
#include "pollnet/model.hpp"

namespace pollnet {

/// Per-visit mean replacement matrices and their composition over a cycle.
///
/// Row k of Mk[k] holds 1 - f_k on the diagonal and f_k phi_k (mu_k p_{k,j} + lambda_j)
/// off the diagonal; every other row is the identity row. M = M_1 * ... * M_N is the
/// mean matrix of the branching process embedded at cycle instants.
struct OffspringMatrices {
  std::vector<Matrix> Mk;
  Matrix M;
  Matrix mcheck;    // visit-offspring means; row i equals row i of Mk[i]
  Matrix msession;  // session-offspring means via the backward recursion
};

OffspringMatrices build_matrices(const DerivedQuantities& dq, const NetworkSpec& spec);

/// Dominant eigenpair of a nonnegative matrix, v M = theta v and M u = theta u,
/// normalized so max_i v_i = 1 and v . u = 1.
struct PerronEigenpair {
  double theta = 0.0;
  Vec v;  // left eigenvector
  Vec u;  // right eigenvector
  long iterations = 0;
};

/// Power iteration on M and on M^T; Rayleigh-quotient stopping at 1e-12 with a
/// 10^6 iteration cap. Throws NumericError on non-convergence (dominant
/// eigenvalue tie or periodicity) or a defective dominant pair.
PerronEigenpair perron(const Matrix& m);

/// lambda_i / sum_j lambda_j; composing these weights with per-type session
/// offspring samplers yields an immigration sampler.
Vec immigration_weights(const NetworkSpec& spec);

/// Draws one offspring vector (counts per type) for a single individual of
/// the given type.
using OffspringSampler =
    std::function<std::vector<std::int64_t>(int type, RngStream& rng)>;

struct ExtinctionEstimate {
  double q_hat = 0.0;       // extinct fraction over all replications
  double half_width = 0.0;  // 95% normal-approximation half width
  int extinct = 0;
  int survived = 0;
  int inconclusive = 0;  // neither bound hit within the generation budget
  int reps = 0;
};

/// Monte Carlo extinction probability of the embedded multi-type branching
/// process started from a single type-i individual. A replication is extinct
/// when the population hits 0 within `generations`, surviving when the total
/// exceeds `truncation`. Replications use independent streams derived from
/// (seed, replication index).
ExtinctionEstimate estimate_extinction(const OffspringSampler& sampler, int i,
                                       int generations, std::int64_t truncation,
                                       int reps, std::uint64_t seed);

}  // namespace pollnet

#endif
