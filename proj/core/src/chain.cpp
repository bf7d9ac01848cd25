#include "ddms/chain.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>

namespace ddms {

int next_duration(int d_prev, bool same_state, int tau) {
  if (tau < 1) throw std::domain_error("next_duration: tau must be >= 1");
  if (d_prev < 1 || d_prev > tau)
    throw std::domain_error("next_duration: d_prev must lie in [1, tau]");
  return same_state ? std::min(d_prev + 1, tau) : 1;
}

TransitionMatrix build_transition_matrix(const LinkSpec& link,
                                         const TransitionGammas& gammas,
                                         int tau) {
  if (tau < 1)
    throw std::domain_error("build_transition_matrix: tau must be >= 1");
  const int n = n_states(tau);
  TransitionMatrix out;
  out.tau = tau;
  out.P = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < 2; ++r) {
    for (int d = 1; d <= tau; ++d) {
      const int from = state_index(r, d, tau);
      const double p = regime_stay_probability(link, gammas, r, d, tau);
      out.P(state_index(r, next_duration(d, true, tau), tau), from) = p;
      out.P(state_index(1 - r, 1, tau), from) = 1.0 - p;
    }
  }
  return out;
}

double reciprocal_condition(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("reciprocal_condition: matrix must be square");
  if (m.rows() == 0) return 0.0;
  if (!m.allFinite()) return 0.0;
  const double rc = Eigen::PartialPivLU<Eigen::MatrixXd>(m).rcond();
  if (!std::isfinite(rc) || rc < 0.0) return 0.0;
  return rc;
}

Eigen::VectorXd unconditional_probabilities(const Eigen::MatrixXd& P,
                                            double rcond_min,
                                            double* rcond_out) {
  const auto n = P.rows();
  // A = [I - P; 1'], solve A'A x = A'[0;1]; A'[0;1] = 1_N.
  Eigen::MatrixXd a(n + 1, n);
  a.topRows(n) = Eigen::MatrixXd::Identity(n, n) - P;
  a.bottomRows(1).setOnes();
  const Eigen::MatrixXd gram = a.transpose() * a;
  const double rc = reciprocal_condition(gram);
  if (rcond_out) *rcond_out = rc;
  if (!(rc >= rcond_min)) throw SingularChain(rc, rcond_min);
  Eigen::VectorXd pi = gram.ldlt().solve(Eigen::VectorXd::Ones(n));
  // Least-squares round-off can leave entries like -1e-17.
  for (auto i = 0; i < pi.size(); ++i) pi(i) = std::max(pi(i), 0.0);
  const double total = pi.sum();
  if (!(total > 0.0)) throw SingularChain(rc, rcond_min);
  return pi / total;
}

Eigen::VectorXd unconditional_probabilities(const TransitionMatrix& P,
                                            double rcond_min,
                                            double* rcond_out) {
  return unconditional_probabilities(P.P, rcond_min, rcond_out);
}

} // namespace ddms
