#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ddms/models.hpp"

namespace ddms {

/// h-step state-probability forecasts: row k-1 is P^k xi_tt (exact
/// Chapman-Kolmogorov propagation; no simulation).
Eigen::MatrixXd forecast_states(const TransitionMatrix& P,
                                const Eigen::VectorXd& xi_tt, int h);

/// Expected conditional variance over extended states:
/// sum_j state_sigma(r_j, d_j)^2 * p_j.
double forecast_sigma2(const DurationVolParams& params,
                       const Eigen::VectorXd& state_probs_row);

/// One-step-ahead predictive variance of the observation for either DDMS
/// family; for the duration-volatility model this equals forecast_sigma2,
/// for the mean-switching model it is the mixture variance
/// E[sigma^2] + E[mu^2] - E[mu]^2.
double predictive_variance(const DdmsParams& model,
                           const Eigen::VectorXd& state_probs_row);

struct ForecastPath {
  Eigen::MatrixXd state_probs;     // h x N
  std::vector<double> sigma2_hat;  // length h
};

/// State propagation plus per-horizon variance forecasts from the filtered
/// state xi_tt.
ForecastPath forecast_path(const DdmsParams& model, const TransitionMatrix& P,
                           const Eigen::VectorXd& xi_tt, int h);

/// Mean absolute percentage error (1/h) sum |forecast - truth| / truth over
/// the whole input. Throws std::domain_error on nonpositive truths.
double mape(const std::vector<double>& forecasts,
            const std::vector<double>& truths);

/// Signed gap MAPE_logit - MAPE_AO; positive values favor the second.
inline double mape_difference(double mape_logit, double mape_ao) {
  return mape_logit - mape_ao;
}

} // namespace ddms
