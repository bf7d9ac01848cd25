#include "ddms/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ddms {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd project(Eigen::VectorXd x, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x(i) = std::min(std::max(x(i), lo(i)), hi(i));
  return x;
}

} // namespace

BoxOptResult maximize_box(const Objective& f, Eigen::VectorXd x0,
                          const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                          const BoxOptConfig& cfg) {
  const auto n = x0.size();
  if (lo.size() != n || hi.size() != n)
    throw std::invalid_argument("maximize_box: bound size mismatch");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(lo(i) <= hi(i)))
      throw std::invalid_argument("maximize_box: empty box");

  BoxOptResult res;
  res.x = project(std::move(x0), lo, hi);

  const auto eval = [&](const Eigen::VectorXd& x) {
    ++res.n_evals;
    return f(x);
  };

  double fx = eval(res.x);
  if (!std::isfinite(fx)) {
    res.f = fx;
    res.first_order_norm = kInf;
    return res;
  }

  // Finite-difference gradient with probes clipped into the box. Forward
  // differences suffice while far from stationarity; central differences
  // (twice the cost, O(h^2) accurate) take over near convergence where the
  // measure must be trusted against optimality_tol.
  const auto gradient = [&](const Eigen::VectorXd& x, double f_at_x,
                            bool central) {
    Eigen::VectorXd g(n);
    Eigen::VectorXd p = x;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double h = cfg.fd_rel_step * std::max(1.0, std::abs(x(i)));
      const double a = std::min(x(i) + h, hi(i));
      const double b = central ? std::max(x(i) - h, lo(i)) : x(i);
      if (a <= b) {
        // At the upper face a forward probe is unavailable; fall back to a
        // backward one.
        const double bb = std::max(x(i) - h, lo(i));
        if (bb >= x(i)) {
          g(i) = 0.0;
          continue;
        }
        p(i) = bb;
        const double fb = eval(p);
        p(i) = x(i);
        g(i) = std::isfinite(fb) ? (f_at_x - fb) / (x(i) - bb) : 0.0;
        continue;
      }
      p(i) = a;
      double fa = a == x(i) ? f_at_x : eval(p);
      p(i) = b;
      double fb = b == x(i) ? f_at_x : eval(p);
      p(i) = x(i);
      if (std::isfinite(fa) && std::isfinite(fb)) {
        g(i) = (fa - fb) / (a - b);
      } else if (std::isfinite(fa)) {
        g(i) = (fa - f_at_x) / (a - x(i));
      } else if (std::isfinite(fb)) {
        g(i) = (f_at_x - fb) / (x(i) - b);
      } else {
        g(i) = 0.0;
      }
    }
    return g;
  };

  const auto pg_norm = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
    return (x - project(x + g, lo, hi)).cwiseAbs().maxCoeff();
  };

  const bool central = true;
  Eigen::VectorXd g = gradient(res.x, fx, central);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  bool h_fresh = true; // rescale on the next curvature pair (Shanno-Phua)
  for (res.iterations = 0; res.iterations < cfg.max_iter; ++res.iterations) {
    res.first_order_norm = pg_norm(res.x, g);
    if (res.first_order_norm <= cfg.optimality_tol) {
      res.gradient_converged = true;
      break;
    }
    // A start still far from stationarity after substantial work is riding
    // a constraint face or a flat ridge; stop burning evaluations on it.
    if (res.iterations == 100 && res.first_order_norm > 0.3) break;

    // Freeze coordinates pinned at a face with the gradient pointing out.
    Eigen::VectorXd g_free = g;
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((res.x(i) <= lo(i) && g(i) < 0.0) ||
          (res.x(i) >= hi(i) && g(i) > 0.0))
        g_free(i) = 0.0;
    }

    Eigen::VectorXd d = h_inv * g_free;
    for (Eigen::Index i = 0; i < n; ++i)
      if (g_free(i) == 0.0) d(i) = 0.0;
    if (!(d.dot(g_free) >
          1e-12 * std::max(1.0, d.norm() * g_free.norm()))) {
      h_inv.setIdentity();
      h_fresh = true;
      d = g_free;
    }

    // Backtracking search along the projected arc: Armijo sufficient
    // ascent, relaxed to plain improvement once alpha is deep into the
    // backtrack (likelihood differences there sit near the fp noise floor).
    const auto line_search = [&](const Eigen::VectorXd& dir, double& f_out,
                                 Eigen::VectorXd& x_out) {
      double alpha = 1.0;
      for (int ls = 0; ls < cfg.max_line_search; ++ls) {
        x_out = project(res.x + alpha * dir, lo, hi);
        const Eigen::VectorXd step = x_out - res.x;
        if (step.cwiseAbs().maxCoeff() == 0.0) return false;
        f_out = eval(x_out);
        if (std::isfinite(f_out)) {
          if (f_out >= fx + 1e-4 * g.dot(step)) return true;
          // Deep in the backtrack Armijo drowns in fp noise; accept plain
          // improvement there.
          if (ls >= cfg.max_line_search / 2 && f_out > fx) return true;
        }
        alpha *= 0.5;
      }
      return false;
    };

    double f_new = -kInf;
    Eigen::VectorXd x_new;
    bool moved = line_search(d, f_new, x_new);
    if (!moved && (d - g_free).cwiseAbs().maxCoeff() > 0.0) {
      // Quasi-Newton direction exhausted; retry along the raw gradient.
      h_inv.setIdentity();
      h_fresh = true;
      moved = line_search(g_free, f_new, x_new);
    }
    if (!moved) break; // no measurable ascent left

    const Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd g_new = gradient(x_new, f_new, central);
    const Eigen::VectorXd yv = g_new - g;
    const double sy = -s.dot(yv); // curvature of -f
    if (sy > 1e-10 * s.norm() * yv.norm()) {
      if (h_fresh) {
        h_inv *= sy / yv.squaredNorm();
        h_fresh = false;
      }
      // Inverse BFGS update on the minimization of -f.
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd left =
          Eigen::MatrixXd::Identity(n, n) + rho * s * yv.transpose();
      h_inv = left * h_inv * left.transpose() + rho * s * s.transpose();
    }
    res.x = std::move(x_new);
    fx = f_new;
    g = std::move(g_new);
  }

  res.first_order_norm = pg_norm(res.x, g);
  res.gradient_converged = res.first_order_norm <= cfg.optimality_tol;

  // End-game polish: the BFGS line search dies into the fp noise floor
  // slightly short of tight first-order tolerances on ill-conditioned
  // likelihoods. A couple of coordinate-wise Newton sweeps (quadratic fit
  // through x-h, x, x+h per coordinate) close that gap cheaply.
  for (int sweep = 0; sweep < 3 && !res.gradient_converged; ++sweep) {
    bool changed = false;
    Eigen::VectorXd p = res.x;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double h = cfg.fd_rel_step * std::max(1.0, std::abs(res.x(i)));
      const double a = std::min(res.x(i) + h, hi(i));
      const double b = std::max(res.x(i) - h, lo(i));
      if (a <= b) continue;
      p(i) = a;
      const double fa = eval(p);
      p(i) = b;
      const double fb = eval(p);
      p(i) = res.x(i);
      if (!std::isfinite(fa) || !std::isfinite(fb)) continue;
      const double gi = (fa - fb) / (a - b);
      const double curv = (fa - 2.0 * fx + fb) / (0.5 * (a - b) * (a - b));
      double step;
      if (curv < 0.0) {
        step = -gi / curv; // Newton step toward the 1-d maximum
      } else {
        step = gi > 0.0 ? (hi(i) - res.x(i)) : (lo(i) - res.x(i));
      }
      step = std::clamp(step, lo(i) - res.x(i), hi(i) - res.x(i));
      if (step == 0.0) continue;
      p(i) = res.x(i) + step;
      double fp = eval(p);
      int halvings = 0;
      while (!(std::isfinite(fp) && fp >= fx) && ++halvings <= 8) {
        p(i) = res.x(i) + step * std::pow(0.5, halvings);
        fp = eval(p);
      }
      if (std::isfinite(fp) && fp >= fx) {
        res.x(i) = p(i);
        fx = fp;
        changed = true;
      } else {
        p(i) = res.x(i);
      }
    }
    if (!changed) break;
    g = gradient(res.x, fx, true);
    res.first_order_norm = pg_norm(res.x, g);
    res.gradient_converged = res.first_order_norm <= cfg.optimality_tol;
  }

  res.f = fx;
  return res;
}

} // namespace ddms
