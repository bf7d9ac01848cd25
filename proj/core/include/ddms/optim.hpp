#pragma once

#include <Eigen/Dense>
#include <functional>

namespace ddms {

/// Objective for box-constrained maximization. May return -infinity to mark
/// an infeasible point; must never throw (wrap exceptions upstream).
using Objective = std::function<double(const Eigen::VectorXd&)>;

struct BoxOptConfig {
  int max_iter = 250;
  double optimality_tol = 1e-4; // on the projected-gradient infinity norm
  double fd_rel_step = 1e-6;    // central differences, scaled by max(1,|x|)
  int max_line_search = 40;
};

struct BoxOptResult {
  Eigen::VectorXd x;
  double f = 0.0;                  // objective at x
  double first_order_norm = 0.0;   // ||x - proj(x + g)||_inf at x
  int iterations = 0;
  int n_evals = 0;
  bool gradient_converged = false; // first_order_norm <= optimality_tol
};

/// Dense BFGS ascent with gradient projection onto the box [lo, hi] and
/// central finite-difference gradients (probe points clipped to the box, so
/// faces fall back to one-sided differences). Intended for the small, smooth
/// likelihoods this project estimates; the first-order norm reported is the
/// projected-gradient infinity norm.
BoxOptResult maximize_box(const Objective& f, Eigen::VectorXd x0,
                          const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                          const BoxOptConfig& cfg = {});

} // namespace ddms
