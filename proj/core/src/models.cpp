#include "ddms/models.hpp"

#include <cmath>
#include <stdexcept>

namespace ddms {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727; // log(sqrt(2*pi))
constexpr double kSigmaFloor = 1e-12;

double log_normal_pdf(double y, double mean, double sigma) {
  const double s = std::max(sigma, kSigmaFloor);
  const double z = (y - mean) / s;
  return -0.5 * z * z - std::log(s) - kLogSqrt2Pi;
}

} // namespace

double state_sigma(const DurationVolParams& params, int regime, int d) {
  if (d < 1 || d > params.tau)
    throw std::domain_error("state_sigma: d must lie in [1, tau]");
  const double omega = regime == 0 ? params.omega0 : params.omega1;
  const double zeta = regime == 0 ? params.zeta0 : params.zeta1;
  const double lin = omega + zeta * static_cast<double>(d);
  return lin * lin;
}

StateDensityTable build_density_table(const DdmsParams& model) {
  StateDensityTable table;
  const int tau = model_tau(model);
  const int n = n_states(tau);
  table.mean.resize(n);
  table.sigma.resize(n);
  table.group.resize(n);
  if (const auto* ms = std::get_if<MeanSwitchParams>(&model)) {
    table.group_mean.resize(2);
    table.group_sigma.resize(2);
    table.group_mean << ms->mu0, ms->mu1;
    table.group_sigma << ms->sigma0, ms->sigma1;
    for (int i = 0; i < n; ++i) {
      const int r = state_from_index(i, tau).regime;
      table.group[i] = r;
      table.mean(i) = table.group_mean(r);
      table.sigma(i) = table.group_sigma(r);
    }
  } else {
    const auto& dv = std::get<DurationVolParams>(model);
    table.group_mean = Eigen::VectorXd::Zero(n);
    table.group_sigma.resize(n);
    for (int i = 0; i < n; ++i) {
      const auto st = state_from_index(i, tau);
      table.group[i] = i;
      table.mean(i) = 0.0;
      table.sigma(i) = state_sigma(dv, st.regime, st.duration);
      table.group_sigma(i) = table.sigma(i);
    }
  }
  return table;
}

Eigen::VectorXd density_vector(const DdmsParams& model, double y) {
  if (!std::isfinite(y))
    throw std::invalid_argument("density_vector: observation must be finite");
  const auto table = build_density_table(model);
  const auto n = table.mean.size();
  Eigen::VectorXd eta(n);
  for (Eigen::Index i = 0; i < n; ++i)
    eta(i) = std::exp(log_normal_pdf(y, table.mean(i), table.sigma(i)));
  return eta;
}

GarchFilterOutput garch_filter(const GarchParams& params,
                               const std::vector<double>& y) {
  if (params.n_regimes != 1 && params.n_regimes != 2)
    throw std::invalid_argument("garch_filter: n_regimes must be 1 or 2");
  if (!params.stationary())
    throw std::invalid_argument("garch_filter: parameters violate "
                                "stationarity bounds");
  const int k = params.n_regimes;
  const auto t_len = static_cast<Eigen::Index>(y.size());
  GarchFilterOutput out;
  out.sigma2.resize(t_len, k);
  out.filtered.resize(t_len, k);
  out.loglik = 0.0;

  std::array<double, 2> s2{};
  for (int j = 0; j < k; ++j)
    s2[j] = params.omega[j] / (1.0 - params.alpha[j] - params.beta[j]);

  // Stationary start for the regime chain.
  std::array<double, 2> prob{1.0, 0.0};
  if (k == 2) {
    const double denom = 2.0 - params.p00 - params.p11;
    prob[0] = denom > 0.0 ? (1.0 - params.p11) / denom : 0.5;
    prob[1] = 1.0 - prob[0];
  }

  for (Eigen::Index t = 0; t < t_len; ++t) {
    if (t > 0) {
      const double y2 = y[t - 1] * y[t - 1];
      for (int j = 0; j < k; ++j)
        s2[j] = params.omega[j] + params.alpha[j] * y2 + params.beta[j] * s2[j];
    }
    // Predictive regime probabilities.
    std::array<double, 2> pred = prob;
    if (k == 2 && t > 0) {
      pred[0] = params.p00 * prob[0] + (1.0 - params.p11) * prob[1];
      pred[1] = (1.0 - params.p00) * prob[0] + params.p11 * prob[1];
    }
    double norm = 0.0;
    std::array<double, 2> post{};
    for (int j = 0; j < k; ++j) {
      const double dens =
          std::exp(log_normal_pdf(y[t], 0.0, std::sqrt(s2[j])));
      post[j] = pred[j] * dens;
      norm += post[j];
    }
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw std::invalid_argument("garch_filter: nonfinite likelihood");
    out.loglik += std::log(norm);
    for (int j = 0; j < k; ++j) {
      prob[j] = post[j] / norm;
      out.sigma2(t, j) = s2[j];
      out.filtered(t, j) = prob[j];
    }
  }
  if (!std::isfinite(out.loglik))
    throw std::invalid_argument("garch_filter: nonfinite likelihood");
  return out;
}

double garch_forecast_sigma2(const GarchParams& params,
                             const std::vector<double>& y) {
  if (y.empty())
    throw std::invalid_argument("garch_forecast_sigma2: empty series");
  const auto fo = garch_filter(params, y);
  const auto t_last = fo.sigma2.rows() - 1;
  const double y2 = y.back() * y.back();
  const int k = params.n_regimes;
  std::array<double, 2> s2next{};
  for (int j = 0; j < k; ++j)
    s2next[j] = params.omega[j] + params.alpha[j] * y2 +
                params.beta[j] * fo.sigma2(t_last, j);
  if (k == 1) return s2next[0];
  const double f0 = fo.filtered(t_last, 0);
  const double f1 = fo.filtered(t_last, 1);
  const double pred0 = params.p00 * f0 + (1.0 - params.p11) * f1;
  const double pred1 = (1.0 - params.p00) * f0 + params.p11 * f1;
  return pred0 * s2next[0] + pred1 * s2next[1];
}

} // namespace ddms
