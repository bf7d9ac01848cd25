#include "ddms/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ddms/filter.hpp"
#include "ddms/parallel.hpp"
#include "ddms/rng.hpp"

namespace ddms {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWide = 1e30; // stands in for an unrestricted coordinate
constexpr double kSigmaMin = 1e-6;

} // namespace

bool is_ddms(ModelFamily family) {
  return family == ModelFamily::MeanSwitch ||
         family == ModelFamily::DurationVol;
}

bool uses_lambda(const FitSpec& spec) {
  return is_ddms(spec.family) && spec.link == LinkKind::ArandaOrdaz;
}

int param_count(const FitSpec& spec) {
  switch (spec.family) {
    case ModelFamily::MeanSwitch:
    case ModelFamily::DurationVol:
      return uses_lambda(spec) ? 9 : 8;
    case ModelFamily::Garch:
      return 3;
    case ModelFamily::MsGarch:
      return 8;
  }
  throw std::logic_error("param_count: unknown family");
}

DdmsParams make_ddms_params(const FitSpec& spec, const Eigen::VectorXd& theta) {
  if (!is_ddms(spec.family))
    throw std::invalid_argument("make_ddms_params: not a DDMS family");
  if (theta.size() != param_count(spec))
    throw std::invalid_argument("make_ddms_params: theta size mismatch");
  LinkSpec link;
  switch (spec.link) {
    case LinkKind::Logit: link = LinkSpec::logit(); break;
    case LinkKind::Cloglog: link = LinkSpec::cloglog(); break;
    case LinkKind::ArandaOrdaz:
      link = LinkSpec::aranda_ordaz(theta(8));
      break;
  }
  const TransitionGammas gammas{theta(4), theta(5), theta(6), theta(7)};
  if (spec.family == ModelFamily::MeanSwitch) {
    MeanSwitchParams p;
    p.mu0 = theta(0);
    p.mu1 = theta(1);
    p.sigma0 = theta(2);
    p.sigma1 = theta(3);
    p.gammas = gammas;
    p.link = link;
    p.tau = spec.tau;
    return p;
  }
  DurationVolParams p;
  p.omega0 = theta(0);
  p.omega1 = theta(1);
  p.zeta0 = theta(2);
  p.zeta1 = theta(3);
  p.gammas = gammas;
  p.link = link;
  p.tau = spec.tau;
  return p;
}

GarchParams make_garch_params(const FitSpec& spec,
                              const Eigen::VectorXd& theta) {
  GarchParams p;
  if (spec.family == ModelFamily::Garch) {
    p.n_regimes = 1;
    p.omega[0] = theta(0);
    p.alpha[0] = theta(1);
    p.beta[0] = theta(2);
    return p;
  }
  if (spec.family != ModelFamily::MsGarch)
    throw std::invalid_argument("make_garch_params: not a GARCH family");
  p.n_regimes = 2;
  for (int k = 0; k < 2; ++k) {
    p.omega[k] = theta(3 * k);
    p.alpha[k] = theta(3 * k + 1);
    p.beta[k] = theta(3 * k + 2);
  }
  p.p00 = theta(6);
  p.p11 = theta(7);
  return p;
}

Eigen::VectorXd pack_ddms_params(const DdmsParams& params) {
  const bool ao = model_link(params).kind == LinkKind::ArandaOrdaz;
  Eigen::VectorXd theta(ao ? 9 : 8);
  const auto& g = model_gammas(params);
  if (const auto* ms = std::get_if<MeanSwitchParams>(&params)) {
    theta(0) = ms->mu0;
    theta(1) = ms->mu1;
    theta(2) = ms->sigma0;
    theta(3) = ms->sigma1;
  } else {
    const auto& dv = std::get<DurationVolParams>(params);
    theta(0) = dv.omega0;
    theta(1) = dv.omega1;
    theta(2) = dv.zeta0;
    theta(3) = dv.zeta1;
  }
  theta(4) = g[0];
  theta(5) = g[1];
  theta(6) = g[2];
  theta(7) = g[3];
  if (ao) theta(8) = model_link(params).lambda;
  return theta;
}

NaturalBounds natural_bounds(const FitSpec& spec) {
  const int k = param_count(spec);
  NaturalBounds b;
  b.lo = Eigen::VectorXd::Constant(k, -kWide);
  b.hi = Eigen::VectorXd::Constant(k, kWide);
  b.restricted.assign(static_cast<std::size_t>(k), false);
  switch (spec.family) {
    case ModelFamily::MeanSwitch:
      b.lo(2) = b.lo(3) = kSigmaMin;
      b.restricted[2] = b.restricted[3] = true;
      break;
    case ModelFamily::DurationVol:
      break; // every coordinate sign-free
    case ModelFamily::Garch:
    case ModelFamily::MsGarch: {
      const int regimes = spec.family == ModelFamily::Garch ? 1 : 2;
      for (int r = 0; r < regimes; ++r) {
        b.lo(3 * r) = 1e-10;                       // omega > 0
        b.lo(3 * r + 1) = 0.0;                     // alpha >= 0
        b.lo(3 * r + 2) = 0.0;                     // beta >= 0
        b.hi(3 * r + 1) = 1.0 - 1e-6;
        b.hi(3 * r + 2) = 1.0 - 1e-6;
        b.restricted[static_cast<std::size_t>(3 * r)] = true;
        b.restricted[static_cast<std::size_t>(3 * r + 1)] = true;
        b.restricted[static_cast<std::size_t>(3 * r + 2)] = true;
      }
      if (regimes == 2) {
        b.lo(6) = b.lo(7) = 1e-4;
        b.hi(6) = b.hi(7) = 1.0 - 1e-4;
        b.restricted[6] = b.restricted[7] = true;
      }
      break;
    }
  }
  if (uses_lambda(spec)) {
    b.lo(8) = kLambdaMin;
    b.hi(8) = kLambdaMax;
    b.restricted[8] = true;
  }
  return b;
}

std::vector<std::pair<double, double>> default_c_bounds(const FitSpec& spec) {
  switch (spec.family) {
    case ModelFamily::MeanSwitch:
      return {{-3.0, 3.0}, {-3.0, 3.0}, {1e-3, 10.0}, {1e-3, 10.0},
              {-5.0, 5.0}, {-2.0, 2.0}, {-5.0, 5.0}, {-2.0, 2.0}};
    case ModelFamily::DurationVol: {
      // Keep the duration slope's predictor span |g2|*tau bounded, so
      // candidate transition probabilities are not drawn saturated.
      const double g2 = std::min(2.0, 8.0 / std::max(1, spec.tau));
      return {{-3.0, 3.0}, {-3.0, 3.0}, {-0.5, 0.5}, {-0.5, 0.5},
              {-5.0, 5.0}, {-g2, g2}, {-5.0, 5.0}, {-g2, g2}};
    }
    case ModelFamily::Garch:
      return {{1e-4, 1.0}, {0.01, 0.3}, {0.4, 0.97}};
    case ModelFamily::MsGarch:
      return {{1e-4, 1.0}, {0.01, 0.3}, {0.4, 0.97},
              {1e-4, 1.0}, {0.01, 0.3}, {0.4, 0.97},
              {0.8, 0.995}, {0.8, 0.995}};
  }
  throw std::logic_error("default_c_bounds: unknown family");
}

double penalized_loglik(const FitSpec& spec, const std::vector<double>& y,
                        const Eigen::VectorXd& theta,
                        const LocalSearchConfig& cfg, RejectReason* reason) {
  if (reason) *reason = RejectReason::None;
  const auto bounds = natural_bounds(spec);
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!std::isfinite(theta(i)) || theta(i) < bounds.lo(i) ||
        theta(i) > bounds.hi(i)) {
      if (reason) *reason = RejectReason::InvalidParams;
      return -kInf;
    }
  }
  try {
    double ll;
    if (is_ddms(spec.family)) {
      double rc = 0.0;
      ll = filter_loglik(make_ddms_params(spec, theta), y, cfg.rcond_min, &rc);
      // Smooth barrier: zero beyond two decades of the threshold, pushes
      // away from the rejection wall inside them.
      const double rc_edge = 100.0 * cfg.rcond_min;
      if (rc < rc_edge) {
        const double z = std::log(rc_edge / rc);
        ll -= z * z;
      }
    } else {
      const auto gp = make_garch_params(spec, theta);
      if (!gp.stationary()) {
        if (reason) *reason = RejectReason::InvalidParams;
        return -kInf;
      }
      ll = garch_filter(gp, y).loglik;
    }
    if (!std::isfinite(ll)) {
      if (reason) *reason = RejectReason::NonFinite;
      return -kInf;
    }
    return ll;
  } catch (const SingularChain&) {
    if (reason) *reason = RejectReason::SingularChain;
  } catch (const DegenerateLikelihood&) {
    if (reason) *reason = RejectReason::DegenerateLikelihood;
  } catch (const std::exception&) {
    if (reason) *reason = RejectReason::InvalidParams;
  }
  return -kInf;
}

double exact_loglik(const FitSpec& spec, const std::vector<double>& y,
                    const Eigen::VectorXd& theta, double rcond_min) {
  if (is_ddms(spec.family))
    return filter_loglik(make_ddms_params(spec, theta), y, rcond_min);
  return garch_filter(make_garch_params(spec, theta), y).loglik;
}

std::vector<ScoredStart> generate_starts(const FitSpec& spec,
                                         const std::vector<double>& y,
                                         const StartSearchConfig& start_cfg,
                                         const LocalSearchConfig& local_cfg,
                                         int workers) {
  const int kappa = param_count(spec);
  const int n_c = uses_lambda(spec) ? kappa - 1 : kappa;
  auto bounds = start_cfg.c_bounds.empty() ? default_c_bounds(spec)
                                           : start_cfg.c_bounds;
  if (static_cast<int>(bounds.size()) != n_c)
    throw std::invalid_argument("generate_starts: c_bounds size mismatch");
  for (const auto& [lo, hi] : bounds)
    if (!(lo <= hi))
      throw std::invalid_argument("generate_starts: ill-ordered c_bounds");

  // The C matrix depends only on (seed, bounds, n_random), so the logit and
  // Aranda-Ordaz searches on a dataset share it.
  StreamRng rng(start_cfg.seed, 0);
  Eigen::MatrixXd c(n_c, start_cfg.n_random);
  for (int j = 0; j < start_cfg.n_random; ++j)
    for (int i = 0; i < n_c; ++i)
      c(i, j) = bounds[static_cast<std::size_t>(i)].first +
                rng.uniform() * (bounds[static_cast<std::size_t>(i)].second -
                                 bounds[static_cast<std::size_t>(i)].first);

  std::vector<Eigen::VectorXd> candidates;
  if (uses_lambda(spec)) {
    candidates.reserve(static_cast<std::size_t>(start_cfg.n_random) *
                       static_cast<std::size_t>(start_cfg.lambda_grid_size));
    for (int g = 0; g < start_cfg.lambda_grid_size; ++g) {
      const double lambda =
          start_cfg.lambda_grid_size == 1
              ? start_cfg.lambda_lo
              : start_cfg.lambda_lo +
                    g * (start_cfg.lambda_hi - start_cfg.lambda_lo) /
                        (start_cfg.lambda_grid_size - 1);
      for (int j = 0; j < start_cfg.n_random; ++j) {
        Eigen::VectorXd theta(kappa);
        theta.head(n_c) = c.col(j);
        theta(kappa - 1) = lambda;
        candidates.push_back(std::move(theta));
      }
    }
  } else {
    candidates.reserve(static_cast<std::size_t>(start_cfg.n_random));
    for (int j = 0; j < start_cfg.n_random; ++j)
      candidates.emplace_back(c.col(j));
  }

  const int n_cand = static_cast<int>(candidates.size());
  std::vector<double> scores(candidates.size());
  std::vector<RejectReason> reasons(candidates.size());
  parallel_for(n_cand, workers, [&](int i) {
    const auto idx = static_cast<std::size_t>(i);
    scores[idx] =
        penalized_loglik(spec, y, candidates[idx], local_cfg, &reasons[idx]);
  });

  std::vector<int> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });

  std::vector<ScoredStart> top;
  for (int idx : order) {
    if (!std::isfinite(scores[idx])) break;
    top.push_back({candidates[static_cast<std::size_t>(idx)], scores[idx]});
    if (static_cast<int>(top.size()) >= start_cfg.s_keep) break;
  }
  if (top.empty()) {
    int singular = 0, degenerate = 0, invalid = 0, nonfinite = 0;
    for (auto r : reasons) {
      switch (r) {
        case RejectReason::SingularChain: ++singular; break;
        case RejectReason::DegenerateLikelihood: ++degenerate; break;
        case RejectReason::InvalidParams: ++invalid; break;
        case RejectReason::NonFinite: ++nonfinite; break;
        case RejectReason::None: break;
      }
    }
    std::ostringstream msg;
    msg << "generate_starts: all " << n_cand
        << " candidates infeasible (singular chain: " << singular
        << ", degenerate likelihood: " << degenerate
        << ", invalid parameters: " << invalid
        << ", nonfinite: " << nonfinite << ")";
    throw std::runtime_error(msg.str());
  }
  return top;
}

LocalSearchResult local_optimize(const FitSpec& spec,
                                 const std::vector<double>& y,
                                 const Eigen::VectorXd& start,
                                 const Eigen::VectorXd& radii,
                                 const LocalSearchConfig& cfg) {
  return local_optimize_from(spec, y, start, start, radii, cfg);
}

LocalSearchResult local_optimize_from(const FitSpec& spec,
                                      const std::vector<double>& y,
                                      const Eigen::VectorXd& center,
                                      const Eigen::VectorXd& from,
                                      const Eigen::VectorXd& radii,
                                      const LocalSearchConfig& cfg) {
  const auto bounds = natural_bounds(spec);
  const auto k = center.size();
  if (radii.size() != k)
    throw std::invalid_argument("local_optimize: radii size mismatch");
  Eigen::VectorXd lo(k), hi(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    lo(i) = std::max(center(i) - radii(i), bounds.lo(i));
    hi(i) = std::min(center(i) + radii(i), bounds.hi(i));
    if (lo(i) > hi(i)) lo(i) = hi(i) = std::clamp(center(i), bounds.lo(i),
                                                  bounds.hi(i));
  }

  // Coordinates restricted to be positive (lambda, sigma, GARCH omega, ...)
  // are searched on the log scale: their likelihood curvature explodes near
  // zero in raw coordinates (lambda approaching the cloglog corner stalls a
  // quasi-Newton ascent otherwise). Boxes and the reported estimate stay in
  // raw coordinates.
  std::vector<bool> log_coord(static_cast<std::size_t>(k), false);
  for (Eigen::Index i = 0; i < k; ++i)
    log_coord[static_cast<std::size_t>(i)] = bounds.lo(i) > 0.0;
  const auto to_u = [&](Eigen::VectorXd x) {
    for (Eigen::Index i = 0; i < k; ++i)
      if (log_coord[static_cast<std::size_t>(i)]) x(i) = std::log(x(i));
    return x;
  };
  const auto to_raw = [&](Eigen::VectorXd u) {
    for (Eigen::Index i = 0; i < k; ++i)
      if (log_coord[static_cast<std::size_t>(i)]) u(i) = std::exp(u(i));
    return u;
  };

  BoxOptConfig opt_cfg;
  opt_cfg.max_iter = cfg.max_iter;
  opt_cfg.optimality_tol = cfg.optimality_tol;
  opt_cfg.fd_rel_step = cfg.fd_rel_step;
  const auto objective = [&](const Eigen::VectorXd& u) {
    return penalized_loglik(spec, y, to_raw(u), cfg);
  };
  const auto res =
      maximize_box(objective, to_u(from), to_u(lo), to_u(hi), opt_cfg);

  LocalSearchResult out;
  out.theta = to_raw(res.x);
  // Clip round-trip round-off back into the box.
  for (Eigen::Index i = 0; i < k; ++i)
    out.theta(i) = std::clamp(out.theta(i), lo(i), hi(i));
  out.first_order_norm = res.first_order_norm;
  out.optimality_ok = res.gradient_converged;
  out.n_evals = res.n_evals;
  out.loglik = std::isfinite(res.f)
                   ? exact_loglik(spec, y, out.theta, cfg.rcond_min)
                   : res.f;
  return out;
}

ProximityResult proximity_check(const Eigen::VectorXd& theta1,
                                const Eigen::VectorXd& theta0,
                                const Eigen::VectorXd& radii, double delta,
                                const std::vector<bool>& natural_mask) {
  ProximityResult res;
  res.min_ratio = kInf;
  for (Eigen::Index i = 0; i < theta1.size(); ++i) {
    if (natural_mask[static_cast<std::size_t>(i)]) continue;
    const double lo_face = theta0(i) - radii(i);
    const double hi_face = theta0(i) + radii(i);
    const double denom = std::abs(theta1(i));
    double l_minus, l_plus;
    if (denom < 1e-8) {
      // Near-zero estimate: absolute distance against delta * r, expressed
      // as a ratio so the same `> delta` comparison applies.
      l_minus = std::abs(theta1(i) - lo_face) / radii(i);
      l_plus = std::abs(theta1(i) - hi_face) / radii(i);
    } else {
      l_minus = std::abs(theta1(i) - lo_face) / denom;
      l_plus = std::abs(theta1(i) - hi_face) / denom;
    }
    if (std::min(l_minus, l_plus) < res.min_ratio) {
      res.min_ratio = std::min(l_minus, l_plus);
      res.min_index = static_cast<int>(i);
    }
  }
  res.pass = res.min_ratio > delta;
  return res;
}

namespace {

std::vector<bool> natural_pin_mask(const Eigen::VectorXd& theta,
                                   const NaturalBounds& bounds) {
  std::vector<bool> mask(static_cast<std::size_t>(theta.size()), false);
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!bounds.restricted[static_cast<std::size_t>(i)]) continue;
    const double scale_lo = std::max(1.0, std::abs(bounds.lo(i)));
    const double scale_hi = std::max(1.0, std::abs(bounds.hi(i)));
    if (std::abs(theta(i) - bounds.lo(i)) < 1e-6 * scale_lo ||
        std::abs(theta(i) - bounds.hi(i)) < 1e-6 * scale_hi)
      mask[static_cast<std::size_t>(i)] = true;
  }
  return mask;
}

} // namespace

namespace {

struct LadderOutcome {
  LocalSearchResult local;
  ProximityResult prox;
};

// One retained start through the r1 -> r2 -> r3 ladder. The search box is
// always centered on theta0; wider stages resume the ascent from the
// previous stage's solution.
std::optional<LadderOutcome> start_ladder(const FitSpec& spec,
                                          const std::vector<double>& y,
                                          const NaturalBounds& bounds,
                                          const Eigen::VectorXd& theta0,
                                          const LocalSearchConfig& local_cfg,
                                          std::ostringstream& diag,
                                          int start_id) {
  const auto k = theta0.size();
  const auto attempt = [&](const Eigen::VectorXd& radii,
                           const Eigen::VectorXd& from, const char* stage)
      -> LadderOutcome {
    Eigen::VectorXd x0 = from;
    for (Eigen::Index i = 0; i < k; ++i)
      x0(i) = std::clamp(x0(i), theta0(i) - radii(i), theta0(i) + radii(i));
    LadderOutcome out;
    out.local = local_optimize_from(spec, y, theta0, x0, radii, local_cfg);
    const auto mask = natural_pin_mask(out.local.theta, bounds);
    out.prox = proximity_check(out.local.theta, theta0, radii,
                               local_cfg.delta, mask);
    diag << "start " << start_id << ": " << stage
         << " loglik=" << out.local.loglik
         << " opt=" << out.local.first_order_norm
         << " prox=" << out.prox.min_ratio << " pin=" << out.prox.min_index
         << "\n";
    return out;
  };

  const Eigen::VectorXd r1 = Eigen::VectorXd::Constant(k, local_cfg.r1);
  auto o1 = attempt(r1, theta0, "r1");
  if (!o1.local.optimality_ok) return std::nullopt; // next start
  if (o1.prox.pass) return o1;

  // Proximity failed with first-order optimality met: widen to r2.
  const Eigen::VectorXd r2 = Eigen::VectorXd::Constant(k, local_cfg.r2);
  auto o2 = attempt(r2, o1.local.theta, "r2");
  if (o2.local.optimality_ok && o2.prox.pass) return o2;
  if (!o2.local.optimality_ok) return std::nullopt;

  // Still pinned: r3 on the offending coordinates only.
  Eigen::VectorXd r3 = r2;
  const auto mask2 = natural_pin_mask(o2.local.theta, bounds);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (mask2[static_cast<std::size_t>(i)]) continue;
    const double denom = std::abs(o2.local.theta(i));
    const double lm = std::abs(o2.local.theta(i) - (theta0(i) - r2(i)));
    const double lp = std::abs(o2.local.theta(i) - (theta0(i) + r2(i)));
    const bool offending =
        denom < 1e-8 ? std::min(lm, lp) <= local_cfg.delta * r2(i)
                     : std::min(lm, lp) / denom <= local_cfg.delta;
    if (offending) r3(i) = local_cfg.r3;
  }
  auto o3 = attempt(r3, o2.local.theta, "r3");
  if (o3.local.optimality_ok && o3.prox.pass) return o3;
  return std::nullopt;
}

FitResult make_fit_result(const FitSpec& spec, const LadderOutcome& outcome,
                          int n_starts_used) {
  FitResult res;
  res.theta = outcome.local.theta;
  res.loglik = outcome.local.loglik;
  res.converged = true;
  res.n_starts_used = n_starts_used;
  res.first_order_norm = outcome.local.first_order_norm;
  res.boundary_proximity = outcome.prox.min_ratio;
  if (uses_lambda(spec)) res.lambda_hat = res.theta(res.theta.size() - 1);
  return res;
}

} // namespace

FitResult fit(const std::vector<double>& y, const FitSpec& spec,
              const StartSearchConfig& start_cfg,
              const LocalSearchConfig& local_cfg,
              const std::vector<Eigen::VectorXd>& extra_starts, int workers) {
  if (y.size() < 50)
    throw std::invalid_argument("fit: need at least 50 observations");

  auto starts = generate_starts(spec, y, start_cfg, local_cfg, workers);
  for (auto it = extra_starts.rbegin(); it != extra_starts.rend(); ++it) {
    RejectReason reason;
    const double score = penalized_loglik(spec, y, *it, local_cfg, &reason);
    if (std::isfinite(score)) starts.insert(starts.begin(), {*it, score});
  }

  const auto bounds = natural_bounds(spec);
  std::ostringstream diag;
  int n_used = 0;
  for (const auto& start : starts) {
    ++n_used;
    const auto outcome =
        start_ladder(spec, y, bounds, start.theta, local_cfg, diag, n_used);
    if (outcome) return make_fit_result(spec, *outcome, n_used);
  }
  throw EstimationFailed(diag.str());
}

std::optional<FitResult> fit_single_start(const std::vector<double>& y,
                                          const FitSpec& spec,
                                          const Eigen::VectorXd& start,
                                          const LocalSearchConfig& local_cfg) {
  const auto bounds = natural_bounds(spec);
  std::ostringstream diag;
  const auto outcome = start_ladder(spec, y, bounds, start, local_cfg, diag, 1);
  if (!outcome) return std::nullopt;
  return make_fit_result(spec, *outcome, 1);
}

} // namespace ddms
