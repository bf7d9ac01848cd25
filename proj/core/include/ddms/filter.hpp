#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ddms/models.hpp"

namespace ddms {

/// Per-time probability vectors over extended states. Row t of `predictive`
/// is xi_{t|t-1}, of `filtered` xi_{t|t}, of `smoothed` xi_{t|T}; every row
/// sums to 1. loglik = sum_t log(1'(xi_{t|t-1} (*) eta_t)).
struct FilterOutput {
  Eigen::MatrixXd predictive;
  Eigen::MatrixXd filtered;
  Eigen::MatrixXd smoothed;
  double loglik = 0.0;
};

/// Hamilton filter over the duration-extended chain, initialized at the
/// stationary distribution xi_{0|0} = (A'A)^{-1} A' E, followed by the Kim
/// backward recursion for the smoothed rows. Throws SingularChain when the
/// initial distribution does not exist and DegenerateLikelihood when a
/// normalizer is not strictly positive.
FilterOutput run_filter(const DdmsParams& model, const std::vector<double>& y,
                        double rcond_min = kDefaultRcondMin);

/// Log-likelihood only; same recursion as run_filter without storing paths.
/// This is the objective evaluated inside the estimation loop. `rcond_out`,
/// when non-null, receives rcond(A'A) of the chain (used by the estimation
/// barrier).
double filter_loglik(const DdmsParams& model, const std::vector<double>& y,
                     double rcond_min = kDefaultRcondMin,
                     double* rcond_out = nullptr);

/// Kim (1994) backward recursion:
/// xi_{t|T}(j) = xi_{t|t}(j) * sum_k P(k,j) xi_{t+1|T}(k) / xi_{t+1|t}(k).
/// Predictive probabilities are floored at 1e-300 in the division; states
/// with zero predictive mass contribute zero.
Eigen::MatrixXd kim_smoother(const Eigen::MatrixXd& filtered,
                             const Eigen::MatrixXd& predictive,
                             const TransitionMatrix& P);

/// Collapses extended-state probabilities to per-regime marginals (T x 2).
Eigen::MatrixXd regime_marginals(const Eigen::MatrixXd& probs, int tau);

/// Independent verification oracle: log-likelihood by explicit enumeration
/// of all 2^T regime paths, tracking durations deterministically along each
/// path and weighting by a stationary initial distribution obtained by power
/// iteration. Shares only the link functions with the filter; the chain
/// matrix, least-squares initialization and filter recursion are not used.
/// Refuses series longer than 12.
double brute_force_loglik(const DdmsParams& model,
                          const std::vector<double>& y);

} // namespace ddms
