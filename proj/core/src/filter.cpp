#include "ddms/filter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "ddms/errors.hpp"

namespace ddms {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727;
constexpr double kPredFloor = 1e-300;

struct ChainTables {
  int tau;
  int n;
  Eigen::VectorXd stay; // stay probability per extended state
  StateDensityTable density;
  // Per-group Gaussian coefficients: log density = -y_c^2 * a - b with
  // y_c = y - mean.
  Eigen::ArrayXd coef_a; // 0.5 / sigma^2
  Eigen::ArrayXd coef_b; // log(sigma) + log(sqrt(2*pi))
  Eigen::ArrayXd gmean;
  bool identity_groups; // group[j] == j (duration-volatility layout)
};

ChainTables make_tables(const DdmsParams& model) {
  ChainTables t;
  t.tau = model_tau(model);
  t.n = n_states(t.tau);
  t.stay.resize(t.n);
  const auto& link = model_link(model);
  const auto& gammas = model_gammas(model);
  for (int r = 0; r < 2; ++r)
    for (int d = 1; d <= t.tau; ++d)
      t.stay(state_index(r, d, t.tau)) =
          regime_stay_probability(link, gammas, r, d, t.tau);
  t.density = build_density_table(model);
  const auto n_groups = t.density.group_mean.size();
  t.coef_a.resize(n_groups);
  t.coef_b.resize(n_groups);
  t.gmean = t.density.group_mean.array();
  for (Eigen::Index g = 0; g < n_groups; ++g) {
    const double s = std::max(t.density.group_sigma(g), 1e-12);
    t.coef_a(g) = 0.5 / (s * s);
    t.coef_b(g) = std::log(s) + kLogSqrt2Pi;
  }
  t.identity_groups = n_groups == t.n;
  return t;
}

// xi_out = P xi_in using the two-successor structure; O(N).
void propagate(const ChainTables& t, const Eigen::VectorXd& xi_in,
               Eigen::VectorXd& xi_out) {
  xi_out.setZero();
  for (int r = 0; r < 2; ++r) {
    for (int d = 1; d <= t.tau; ++d) {
      const int j = state_index(r, d, t.tau);
      const double m = xi_in(j);
      if (m == 0.0) continue;
      const double p = t.stay(j);
      xi_out(state_index(r, std::min(d + 1, t.tau), t.tau)) += p * m;
      xi_out(state_index(1 - r, 1, t.tau)) += (1.0 - p) * m;
    }
  }
}

Eigen::MatrixXd dense_transitions(const ChainTables& t) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(t.n, t.n);
  for (int r = 0; r < 2; ++r) {
    for (int d = 1; d <= t.tau; ++d) {
      const int j = state_index(r, d, t.tau);
      p(state_index(r, std::min(d + 1, t.tau), t.tau), j) = t.stay(j);
      p(state_index(1 - r, 1, t.tau), j) = 1.0 - t.stay(j);
    }
  }
  return p;
}

// One filter step: shifted log-density evaluation, update in place.
// Returns log of the normalizer 1'(xi (*) eta).
double filter_step(const ChainTables& t, double y, const Eigen::VectorXd& pred,
                   Eigen::VectorXd& filt, std::size_t step_index,
                   Eigen::ArrayXd& wg) {
  wg = y - t.gmean;
  wg = -(wg * wg) * t.coef_a - t.coef_b;
  const double lmax = wg.maxCoeff();
  wg = (wg - lmax).exp();
  double c;
  if (t.identity_groups) {
    filt = pred.array() * wg;
    c = filt.sum();
  } else {
    c = 0.0;
    for (int j = 0; j < t.n; ++j) {
      const double v = pred(j) * wg(t.density.group[j]);
      filt(j) = v;
      c += v;
    }
  }
  if (!(c > 0.0)) throw DegenerateLikelihood(step_index);
  filt /= c;
  return lmax + std::log(c);
}

} // namespace

double filter_loglik(const DdmsParams& model, const std::vector<double>& y,
                     double rcond_min, double* rcond_out) {
  const auto t = make_tables(model);
  Eigen::VectorXd xi =
      unconditional_probabilities(dense_transitions(t), rcond_min, rcond_out);
  Eigen::VectorXd pred(t.n), filt(t.n);
  Eigen::ArrayXd wg(t.gmean.size());
  double loglik = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    propagate(t, xi, pred);
    loglik += filter_step(t, y[i], pred, filt, i + 1, wg);
    xi.swap(filt);
  }
  return loglik;
}

FilterOutput run_filter(const DdmsParams& model, const std::vector<double>& y,
                        double rcond_min) {
  const auto t = make_tables(model);
  const auto t_len = static_cast<Eigen::Index>(y.size());
  FilterOutput out;
  out.predictive.resize(t_len, t.n);
  out.filtered.resize(t_len, t.n);
  out.loglik = 0.0;

  Eigen::VectorXd xi = unconditional_probabilities(dense_transitions(t), rcond_min);
  Eigen::VectorXd pred(t.n), filt(t.n);
  Eigen::ArrayXd wg(t.gmean.size());
  for (Eigen::Index i = 0; i < t_len; ++i) {
    propagate(t, xi, pred);
    out.predictive.row(i) = pred.transpose();
    out.loglik +=
        filter_step(t, y[static_cast<std::size_t>(i)], pred, filt,
                    static_cast<std::size_t>(i) + 1, wg);
    out.filtered.row(i) = filt.transpose();
    xi.swap(filt);
  }

  TransitionMatrix tm;
  tm.tau = t.tau;
  tm.P = dense_transitions(t);
  out.smoothed = kim_smoother(out.filtered, out.predictive, tm);
  return out;
}

Eigen::MatrixXd kim_smoother(const Eigen::MatrixXd& filtered,
                             const Eigen::MatrixXd& predictive,
                             const TransitionMatrix& P) {
  const auto t_len = filtered.rows();
  const auto n = filtered.cols();
  if (predictive.rows() != t_len || predictive.cols() != n)
    throw std::invalid_argument("kim_smoother: shape mismatch");
  Eigen::MatrixXd smoothed(t_len, n);
  if (t_len == 0) return smoothed;
  smoothed.row(t_len - 1) = filtered.row(t_len - 1);
  Eigen::VectorXd ratio(n);
  for (auto t = t_len - 2; t >= 0; --t) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double pk = predictive(t + 1, k);
      ratio(k) = pk > 0.0 ? smoothed(t + 1, k) / std::max(pk, kPredFloor) : 0.0;
    }
    const Eigen::VectorXd back = P.P.transpose() * ratio;
    smoothed.row(t) = filtered.row(t).cwiseProduct(back.transpose());
  }
  return smoothed;
}

Eigen::MatrixXd regime_marginals(const Eigen::MatrixXd& probs, int tau) {
  if (probs.cols() != n_states(tau))
    throw std::invalid_argument("regime_marginals: column count != 2*tau");
  Eigen::MatrixXd out(probs.rows(), 2);
  out.col(0) = probs.leftCols(tau).rowwise().sum();
  out.col(1) = probs.rightCols(tau).rowwise().sum();
  return out;
}

double brute_force_loglik(const DdmsParams& model,
                          const std::vector<double>& y) {
  const std::size_t t_len = y.size();
  if (t_len > 12)
    throw std::invalid_argument("brute_force_loglik: refusing T > 12");
  const int tau = model_tau(model);
  const int n = n_states(tau);
  const auto& link = model_link(model);
  const auto& gammas = model_gammas(model);

  const auto stay_of = [&](int regime, int d) {
    return regime_stay_probability(link, gammas, regime, d, tau);
  };
  const auto log_density = [&](int regime, int d, double obs) {
    double mean = 0.0, sigma = 1.0;
    if (const auto* ms = std::get_if<MeanSwitchParams>(&model)) {
      mean = regime == 0 ? ms->mu0 : ms->mu1;
      sigma = regime == 0 ? ms->sigma0 : ms->sigma1;
    } else {
      const auto& dv = std::get<DurationVolParams>(model);
      const double om = regime == 0 ? dv.omega0 : dv.omega1;
      const double ze = regime == 0 ? dv.zeta0 : dv.zeta1;
      const double lin = om + ze * static_cast<double>(d);
      sigma = lin * lin;
    }
    const double s = std::max(sigma, 1e-12);
    const double z = (obs - mean) / s;
    return -0.5 * z * z - std::log(s) - kLogSqrt2Pi;
  };

  // Stationary initial distribution by fixed-point iteration on the
  // (regime, duration) process itself.
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / n);
  Eigen::VectorXd next(n);
  for (int iter = 0; iter < 1000000; ++iter) {
    next.setZero();
    for (int r = 0; r < 2; ++r) {
      for (int d = 1; d <= tau; ++d) {
        const double mass = pi(state_index(r, d, tau));
        if (mass == 0.0) continue;
        const double p = stay_of(r, d);
        next(state_index(r, std::min(d + 1, tau), tau)) += p * mass;
        next(state_index(1 - r, 1, tau)) += (1.0 - p) * mass;
      }
    }
    const double diff = (next - pi).cwiseAbs().maxCoeff();
    pi.swap(next);
    if (diff < 1e-15) break;
  }

  double total = 0.0;
  const std::uint64_t n_paths = std::uint64_t{1} << t_len;
  for (int s0 = 0; s0 < n; ++s0) {
    const double base = pi(s0);
    if (base == 0.0) continue;
    const int r0 = s0 / tau;
    const int d0 = s0 % tau + 1;
    for (std::uint64_t path = 0; path < n_paths; ++path) {
      double log_p = std::log(base);
      int regime = r0, dur = d0;
      for (std::size_t t = 0; t < t_len; ++t) {
        const int s_t = static_cast<int>((path >> t) & 1u);
        const double p_stay = stay_of(regime, dur);
        log_p += std::log(s_t == regime ? p_stay : 1.0 - p_stay);
        dur = s_t == regime ? std::min(dur + 1, tau) : 1;
        regime = s_t;
        log_p += log_density(regime, dur, y[t]);
      }
      total += std::exp(log_p);
    }
  }
  return std::log(total);
}

} // namespace ddms
