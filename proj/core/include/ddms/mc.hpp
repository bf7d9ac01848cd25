#pragma once

#include <cstdint>
#include <vector>

#include "ddms/backtest.hpp"
#include "ddms/simulate.hpp"

namespace ddms {

/// Bull/bear mean-switching DGP of the in-sample study: bear regime with
/// negative mean and high variance, momentum in both regimes, duration cap 8.
MeanSwitchParams bull_bear_dgp();

/// Duration-dependent volatility DGP of the forecasting study, with the
/// requested true duration cap.
DurationVolParams duration_vol_dgp(int tau0);

/// Deterministic seed mixing for per-(rep, tau, ...) substreams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

struct McInsampleConfig {
  int n_reps = 100;
  std::uint64_t seed = 42;
  std::vector<int> taus{4, 6, 8, 10, 12};
  int n_keep = 800;
  int n_burn = 200;
  StartSearchConfig start_cfg;
  LocalSearchConfig local_cfg;
  int workers = 1;
};

/// Per-tau aggregates of the in-sample comparison: proportion of
/// replications where the Aranda-Ordaz probability MAPE is below the
/// logit's, the mean MAPE gap (logit - AO, positive favoring AO), and the
/// frequency of a higher Aranda-Ordaz log-likelihood.
struct McInsampleCell {
  int tau = 0;
  int n_pairs = 0;      // replications where both links converged
  int n_fail_logit = 0;
  int n_fail_ao = 0;
  double prop_pred = 0.0;
  double prop_filt = 0.0;
  double prop_smooth = 0.0;
  double diff_pred = 0.0;
  double diff_filt = 0.0;
  double diff_smooth = 0.0;
  double loglik_sup_freq = 0.0;
};

struct McInsampleReport {
  std::vector<McInsampleCell> cells;
  int n_reps = 0;
  std::uint64_t seed = 0;
};

/// Simulates the bull/bear DGP, fits both links at every requested tau, and
/// compares predictive/filtered/smoothed regime probabilities against those
/// of the true model (probability MAPE) plus the likelihood ordering.
McInsampleReport mc_insample(const McInsampleConfig& config);

struct McForecastConfig {
  int tau0 = 15;
  std::vector<int> taus; // empty -> {tau0-10, tau0-5, tau0, tau0+5, tau0+10}
  int n_reps = 100;
  std::uint64_t seed = 43;
  int h_max = 10;
  int n_train = 1000;
  int n_burn = 200;
  StartSearchConfig start_cfg;
  LocalSearchConfig local_cfg;
  int workers = 1;
};

struct McForecastCell {
  int tau = 0;
  int n_pairs = 0;
  int n_fail_logit = 0;
  int n_fail_ao = 0;
  std::vector<double> mean_d;  // mean D(h) = MAPE_logit(h) - MAPE_AO(h)
  double loglik_sup_freq = 0.0;
};

struct McForecastReport {
  std::vector<McForecastCell> cells;
  int tau0 = 0;
  int n_reps = 0;
  std::uint64_t seed = 0;
};

/// Simulates the duration-volatility DGP with a 10-observation holdout, fits
/// both links at every requested tau, forecasts sigma^2 for h = 1..h_max and
/// aggregates the MAPE gaps D(h) and the likelihood ordering.
McForecastReport mc_forecast(const McForecastConfig& config);

} // namespace ddms
