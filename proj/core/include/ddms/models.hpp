#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

#include "ddms/chain.hpp"
#include "ddms/links.hpp"

namespace ddms {

/// Two-regime mean/variance switching model: Y_t = mu(S_t) + sigma(S_t) Z_t,
/// with duration entering only through the transition probabilities.
/// Units follow log returns multiplied by 100.
struct MeanSwitchParams {
  double mu0 = 0.0, mu1 = 0.0;
  double sigma0 = 1.0, sigma1 = 1.0;
  TransitionGammas gammas{};
  LinkSpec link;
  int tau = 1;
};

/// Duration-dependent volatility model: Y_t = sigma(S_t, D(S_t)) Z_t with
/// sigma(S, d) = (omega(S) + zeta(S) d)^2 read literally as the conditional
/// standard deviation; the forecast target downstream is its square.
struct DurationVolParams {
  double omega0 = 1.0, omega1 = 1.0;
  double zeta0 = 0.0, zeta1 = 0.0;
  TransitionGammas gammas{};
  LinkSpec link;
  int tau = 1;
};

using DdmsParams = std::variant<MeanSwitchParams, DurationVolParams>;

inline int model_tau(const DdmsParams& m) {
  return std::visit([](const auto& p) { return p.tau; }, m);
}
inline const LinkSpec& model_link(const DdmsParams& m) {
  return std::visit([](const auto& p) -> const LinkSpec& { return p.link; }, m);
}
inline const TransitionGammas& model_gammas(const DdmsParams& m) {
  return std::visit(
      [](const auto& p) -> const TransitionGammas& { return p.gammas; }, m);
}

/// Conditional standard deviation (omega_r + zeta_r * d)^2 of the
/// duration-volatility model for regime r at duration d.
double state_sigma(const DurationVolParams& params, int regime, int d);

/// Per extended state conditional mean and standard deviation, plus a
/// grouping of states that share the same density (both regimes' durations
/// collapse to two groups in the mean-switching model). The filter uses the
/// groups to evaluate only the distinct Gaussians.
struct StateDensityTable {
  Eigen::VectorXd mean;   // length N
  Eigen::VectorXd sigma;  // length N
  std::vector<int> group; // length N, index into distinct (mean, sigma)
  Eigen::VectorXd group_mean;
  Eigen::VectorXd group_sigma;
};

StateDensityTable build_density_table(const DdmsParams& model);

/// eta_t: Gaussian density of y at every extended state. Entries are
/// computed in log space and exponentiated once.
Eigen::VectorXd density_vector(const DdmsParams& model, double y);

/// Gaussian GARCH(1,1) per regime with constant switching (Haas
/// parallel-recursion form). n_regimes = 1 reduces to the plain model, in
/// which case the transition parameters are ignored.
struct GarchParams {
  int n_regimes = 1; // 1 or 2
  std::array<double, 2> omega{0.1, 0.1};
  std::array<double, 2> alpha{0.05, 0.05};
  std::array<double, 2> beta{0.9, 0.9};
  double p00 = 0.95, p11 = 0.95; // used when n_regimes == 2

  bool stationary() const {
    for (int k = 0; k < n_regimes; ++k)
      if (!(omega[k] > 0.0 && alpha[k] >= 0.0 && beta[k] >= 0.0 &&
            alpha[k] + beta[k] < 1.0))
        return false;
    if (n_regimes == 2 &&
        !(p00 > 0.0 && p00 < 1.0 && p11 > 0.0 && p11 < 1.0))
      return false;
    return true;
  }
};

struct GarchFilterOutput {
  Eigen::MatrixXd sigma2;   // T x K per-regime conditional variances
  Eigen::MatrixXd filtered; // T x K regime probabilities (all-ones for K=1)
  double loglik = 0.0;
};

/// Runs the per-regime variance recursions sigma2_{k,t} = omega_k +
/// alpha_k y_{t-1}^2 + beta_k sigma2_{k,t-1}, initialized at the
/// unconditional level omega_k / (1 - alpha_k - beta_k), mixing regimes via
/// the 2-state Hamilton filter when K = 2. Throws std::invalid_argument on
/// nonfinite likelihood or non-stationary parameters.
GarchFilterOutput garch_filter(const GarchParams& params,
                               const std::vector<double>& y);

/// One-step-ahead variance forecast E[sigma2_{T+1} | F_T] from the filter
/// state at the end of the sample.
double garch_forecast_sigma2(const GarchParams& params,
                             const std::vector<double>& y);

} // namespace ddms
