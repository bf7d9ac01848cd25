#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ddms/errors.hpp"

namespace ddms {

/// Daily realized measures from one day of intraday returns.
struct RealizedMeasures {
  double rv = 0.0;
  double bv = 0.0;
  double minrv = 0.0;
  double medrv = 0.0;
};

/// RV, bipower variation, MinRV and MedRV of a vector of m >= 3 intraday
/// returns.
RealizedMeasures realized_measures(const std::vector<double>& returns);

enum class LossKind { Mse, Qlike, Rlf, RlfLiteral };

LossKind loss_from_name(const std::string& name);
std::string loss_name(LossKind kind);

/// Robust losses of a variance forecast against a variance proxy:
///   MSE   = (proxy - forecast)^2 / 2
///   QLIKE = proxy/forecast - log(proxy/forecast) - 1
///   RLF   = forecast - proxy + proxy * log(proxy/forecast)
/// RLF is the form minimized at forecast = proxy; RlfLiteral evaluates
/// forecast - proxy * (log(proxy/forecast) - 1), which differs by the
/// constant 2*proxy and is kept for comparison with sources that print it.
/// QLIKE and RLF require strictly positive inputs.
double loss(LossKind kind, double proxy_sigma2, double forecast_sigma2);

std::vector<double> loss_series(LossKind kind,
                                const std::vector<double>& proxy_sigma2,
                                const std::vector<double>& forecast_sigma2);

struct DmWestResult {
  double t_stat = 0.0;
  double p_value = 1.0;
  double mean_diff = 0.0; // mean(loss_a - loss_b)
  int hac_lags = 0;
};

/// Diebold-Mariano-West test of equal predictive accuracy with a
/// Bartlett-kernel HAC long-run variance. Positive t means stream a has the
/// larger average loss. hac_lags < 0 selects floor(T^(1/3)). Throws
/// DegenerateDifferences when the differential has zero variance.
DmWestResult dm_west_test(const std::vector<double>& loss_a,
                          const std::vector<double>& loss_b,
                          int hac_lags = -1);

struct FluctuationResult {
  std::vector<int> window_end;   // index of the last observation per window
  std::vector<double> t_stats;
  double critical_5 = 0.0;       // two-sided 5% critical value
  double critical_10 = 0.0;      // two-sided 10% critical value
  int window_length = 0;
};

/// Rolling DM-West statistics over windows of ceil(window_frac * T)
/// observations. Two-sided critical values follow Giacomini & Rossi (2010),
/// tabulated for window_frac in {0.1, 0.2, 0.3}; window_frac = 1 degenerates
/// to the full-sample test with standard normal critical values; other
/// fractions are rejected.
FluctuationResult fluctuation_test(const std::vector<double>& loss_a,
                                   const std::vector<double>& loss_b,
                                   double window_frac);

struct McsResult {
  std::vector<int> members;           // surviving model indices
  std::vector<int> elimination_order; // first eliminated = worst
  std::vector<double> mcs_pvalues;    // per model
  std::vector<int> ranks;             // 1 = best (by mean loss)
};

/// Hansen-style model confidence set with the range statistic over pairwise
/// mean loss differentials and a stationary bootstrap (geometric blocks of
/// the given mean length) under the null. Models are eliminated until the
/// equal-predictive-ability null is no longer rejected at level alpha.
McsResult model_confidence_set(const Eigen::MatrixXd& losses, double alpha,
                               int n_boot = 1000, double mean_block_len = 10.0,
                               std::uint64_t seed = 7);

struct DescriptiveStats {
  int n = 0;
  double mean = 0.0;
  double std_dev = 0.0; // sample (n-1) denominator
  double max = 0.0;
  double min = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0; // non-excess; normal -> 3
  double jb_stat = 0.0;
  double jb_pvalue = 1.0;
  double lm_arch = 0.0;
  double lm_pvalue = 1.0;
  double ljung_box_sq = 0.0;
  double lb_pvalue = 1.0;
  int lags = 0;
};

/// Summary statistics plus the Jarque-Bera normality test, the LM test for
/// ARCH effects (n*R^2 from a regression of squared demeaned returns on k
/// lags) and the Ljung-Box statistic on squared demeaned returns. Throws
/// std::domain_error for constant series.
DescriptiveStats descriptive_stats(const std::vector<double>& y, int lags = 8);

/// Standard normal CDF (used for the DM-West p-value).
double normal_cdf(double x);

/// Upper-tail chi-squared p-value with k degrees of freedom.
double chi_squared_pvalue(double stat, int k);

} // namespace ddms
