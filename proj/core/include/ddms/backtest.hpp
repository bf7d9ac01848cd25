#pragma once

#include <string>
#include <vector>

#include "ddms/estimate.hpp"

namespace ddms {

/// Expanding-window layout: forecasts are produced for indices
/// oos_start..T-1, each using only observations before the target index.
/// refit_every = 1 refits at every origin; 0 fits once at the first origin
/// and afterwards only updates the filtered state.
struct WindowPlan {
  int oos_start = 0;
  int refit_every = 1;
};

struct ModelSetup {
  std::string name;
  FitSpec spec;
  StartSearchConfig start_cfg;
  LocalSearchConfig local_cfg;
  bool warm_start = true; // previous window's estimate prepended to starts
};

struct WindowRecord {
  int target = 0; // forecast target index
  bool ok = false;
  bool refitted = false;
  double loglik = 0.0;
  Eigen::VectorXd theta;
  std::string error;
};

struct ExpandingResult {
  std::vector<double> sigma2_hat; // aligned with targets; NaN when failed
  std::vector<bool> valid;
  std::vector<int> targets;
  std::vector<double> lambda_hat; // per window, NaN unless Aranda-Ordaz
  std::vector<WindowRecord> windows;
};

/// One-step-ahead variance forecasts through expanding windows. A window
/// whose estimation fails is recorded, flagged invalid, and skipped; when a
/// fit is reused between refits only the filtered state is updated with the
/// new observations. With warm_start enabled, execution is sequential and
/// each refit receives the previous estimate as an extra start.
ExpandingResult expanding_forecasts(const std::vector<double>& y,
                                    const ModelSetup& setup,
                                    const WindowPlan& plan, int workers = 1);

/// Elementwise arithmetic mean across forecast streams of equal length.
std::vector<double> combine_forecasts(
    const std::vector<std::vector<double>>& streams);

} // namespace ddms
