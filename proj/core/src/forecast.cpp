#include "ddms/forecast.hpp"

#include <cmath>
#include <stdexcept>

namespace ddms {

Eigen::MatrixXd forecast_states(const TransitionMatrix& P,
                                const Eigen::VectorXd& xi_tt, int h) {
  if (h < 1) throw std::invalid_argument("forecast_states: h must be >= 1");
  if (xi_tt.size() != P.P.cols())
    throw std::invalid_argument("forecast_states: state vector size mismatch");
  Eigen::MatrixXd out(h, xi_tt.size());
  Eigen::VectorXd xi = xi_tt;
  for (int k = 0; k < h; ++k) {
    xi = P.P * xi;
    out.row(k) = xi.transpose();
  }
  return out;
}

double forecast_sigma2(const DurationVolParams& params,
                       const Eigen::VectorXd& state_probs_row) {
  const int n = n_states(params.tau);
  if (state_probs_row.size() != n)
    throw std::invalid_argument("forecast_sigma2: probability row size mismatch");
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto st = state_from_index(i, params.tau);
    const double sd = state_sigma(params, st.regime, st.duration);
    acc += state_probs_row(i) * sd * sd;
  }
  return acc;
}

double predictive_variance(const DdmsParams& model,
                           const Eigen::VectorXd& state_probs_row) {
  if (const auto* dv = std::get_if<DurationVolParams>(&model))
    return forecast_sigma2(*dv, state_probs_row);
  const auto& ms = std::get<MeanSwitchParams>(model);
  const int tau = ms.tau;
  double m1 = 0.0, m2 = 0.0, v = 0.0;
  for (int i = 0; i < n_states(tau); ++i) {
    const double p = state_probs_row(i);
    const int r = state_from_index(i, tau).regime;
    const double mu = r == 0 ? ms.mu0 : ms.mu1;
    const double sd = r == 0 ? ms.sigma0 : ms.sigma1;
    m1 += p * mu;
    m2 += p * mu * mu;
    v += p * sd * sd;
  }
  return v + m2 - m1 * m1;
}

ForecastPath forecast_path(const DdmsParams& model, const TransitionMatrix& P,
                           const Eigen::VectorXd& xi_tt, int h) {
  ForecastPath out;
  out.state_probs = forecast_states(P, xi_tt, h);
  out.sigma2_hat.resize(static_cast<std::size_t>(h));
  for (int k = 0; k < h; ++k)
    out.sigma2_hat[static_cast<std::size_t>(k)] =
        predictive_variance(model, out.state_probs.row(k).transpose());
  return out;
}

double mape(const std::vector<double>& forecasts,
            const std::vector<double>& truths) {
  if (forecasts.size() != truths.size())
    throw std::invalid_argument("mape: length mismatch");
  if (forecasts.empty()) throw std::invalid_argument("mape: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (!(truths[i] > 0.0))
      throw std::domain_error("mape: truths must be strictly positive");
    acc += std::abs(forecasts[i] - truths[i]) / truths[i];
  }
  return acc / static_cast<double>(truths.size());
}

} // namespace ddms
