#pragma once

#include <Eigen/Dense>
#include <array>

#include "ddms/errors.hpp"
#include "ddms/links.hpp"

namespace ddms {

/// A (regime, duration) pair. Durations are stored capped at tau, so the
/// valid range is [1, tau].
struct ExtendedState {
  int regime = 0;   // 0 or 1
  int duration = 1; // 1..tau
};

/// Canonical index of an extended state: regime * tau + (duration - 1).
/// Bijective onto {0, ..., 2*tau - 1}.
inline int state_index(int regime, int duration, int tau) {
  return regime * tau + (duration - 1);
}
inline ExtendedState state_from_index(int idx, int tau) {
  return {idx / tau, idx % tau + 1};
}
inline int n_states(int tau) { return 2 * tau; }

/// Duration recursion D(S_t) = min{D(S_{t-1}) I(S_t = S_{t-1}) + 1, tau}.
int next_duration(int d_prev, bool same_state, int tau);

/// Transition matrix of the extended chain, in the orientation
/// xi_{t+1|t} = P * xi_{t|t}: entry (j, i) is the probability of moving to
/// extended state j given state i, so each COLUMN sums to 1. Every column
/// has exactly two nonzero entries (stay and switch).
struct TransitionMatrix {
  int tau = 1;
  Eigen::MatrixXd P;

  int size() const { return static_cast<int>(P.rows()); }
};

/// Per-regime transition parameters (gamma1(0), gamma2(0), gamma1(1),
/// gamma2(1)) in that order.
using TransitionGammas = std::array<double, 4>;

/// Stay probability of regime r at duration d under `gammas`.
inline double regime_stay_probability(const LinkSpec& link,
                                      const TransitionGammas& gammas, int r,
                                      int d, int tau) {
  return stay_probability(link, gammas[2 * r], gammas[2 * r + 1], d, tau);
}

TransitionMatrix build_transition_matrix(const LinkSpec& link,
                                         const TransitionGammas& gammas,
                                         int tau);

/// Reciprocal condition number in the 1-norm, estimated from an LU
/// factorization (LAPACK-style Higham-Tisseur estimate, the same measure
/// Matlab's rcond reports). Returns 0 for an exactly singular, zero, or
/// nonfinite matrix.
double reciprocal_condition(const Eigen::MatrixXd& m);

inline constexpr double kDefaultRcondMin = 1e-9;

/// Unconditional (stationary) distribution pi = (A'A)^{-1} A' [0_N; 1] with
/// A = [I_N - P; 1_N']. Throws SingularChain when rcond(A'A) < rcond_min.
/// Tiny negative round-off entries are clamped to zero and the vector
/// renormalized. When `rcond_out` is non-null the measured rcond(A'A) is
/// stored there (also on the throwing path).
Eigen::VectorXd unconditional_probabilities(const TransitionMatrix& P,
                                            double rcond_min = kDefaultRcondMin,
                                            double* rcond_out = nullptr);

/// Same solve given the transition matrix directly.
Eigen::VectorXd unconditional_probabilities(const Eigen::MatrixXd& P,
                                            double rcond_min = kDefaultRcondMin,
                                            double* rcond_out = nullptr);

} // namespace ddms
