#include "ddms/backtest.hpp"

#include <cmath>
#include <limits>

#include "ddms/filter.hpp"
#include "ddms/forecast.hpp"
#include "ddms/parallel.hpp"

namespace ddms {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ddms_one_step(const FitSpec& spec, const Eigen::VectorXd& theta,
                     const std::vector<double>& prefix, double rcond_min) {
  const auto params = make_ddms_params(spec, theta);
  const auto fo = run_filter(params, prefix, rcond_min);
  const auto tm = build_transition_matrix(model_link(params),
                                          model_gammas(params),
                                          model_tau(params));
  const Eigen::VectorXd xi_tt =
      fo.filtered.row(fo.filtered.rows() - 1).transpose();
  return predictive_variance(params, (tm.P * xi_tt).eval());
}

double garch_one_step(const FitSpec& spec, const Eigen::VectorXd& theta,
                      const std::vector<double>& prefix) {
  return garch_forecast_sigma2(make_garch_params(spec, theta), prefix);
}

} // namespace

ExpandingResult expanding_forecasts(const std::vector<double>& y,
                                    const ModelSetup& setup,
                                    const WindowPlan& plan, int workers) {
  const int t_total = static_cast<int>(y.size());
  if (plan.oos_start < 200)
    throw std::invalid_argument(
        "expanding_forecasts: need at least 200 pre-sample observations");
  if (plan.oos_start >= t_total)
    throw std::invalid_argument("expanding_forecasts: empty out-of-sample range");

  const int n_oos = t_total - plan.oos_start;
  ExpandingResult res;
  res.sigma2_hat.assign(static_cast<std::size_t>(n_oos), kNaN);
  res.valid.assign(static_cast<std::size_t>(n_oos), false);
  res.lambda_hat.assign(static_cast<std::size_t>(n_oos), kNaN);
  res.targets.resize(static_cast<std::size_t>(n_oos));
  res.windows.resize(static_cast<std::size_t>(n_oos));

  const auto needs_refit = [&](int w) {
    if (w == 0) return true;
    return plan.refit_every > 0 && w % plan.refit_every == 0;
  };

  const auto run_window = [&](int w, const std::vector<Eigen::VectorXd>& warm,
                              const FitResult* reuse) -> FitResult {
    const int target = plan.oos_start + w;
    const std::vector<double> prefix(y.begin(), y.begin() + target);
    auto& rec = res.windows[static_cast<std::size_t>(w)];
    rec.target = target;
    res.targets[static_cast<std::size_t>(w)] = target;
    FitResult fr;
    try {
      if (reuse) {
        fr = *reuse;
        rec.refitted = false;
      } else {
        fr = fit(prefix, setup.spec, setup.start_cfg, setup.local_cfg, warm,
                 workers);
        rec.refitted = true;
      }
      const double s2 =
          is_ddms(setup.spec.family)
              ? ddms_one_step(setup.spec, fr.theta, prefix,
                              setup.local_cfg.rcond_min)
              : garch_one_step(setup.spec, fr.theta, prefix);
      res.sigma2_hat[static_cast<std::size_t>(w)] = s2;
      res.valid[static_cast<std::size_t>(w)] = true;
      if (fr.lambda_hat)
        res.lambda_hat[static_cast<std::size_t>(w)] = *fr.lambda_hat;
      rec.ok = true;
      rec.loglik = fr.loglik;
      rec.theta = fr.theta;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
      fr.converged = false;
    }
    return fr;
  };

  if (!setup.warm_start && plan.refit_every == 1) {
    // Independent windows; safe to run them in parallel.
    parallel_for(n_oos, workers,
                 [&](int w) { run_window(w, {}, nullptr); });
    return res;
  }

  FitResult last;
  bool have_last = false;
  for (int w = 0; w < n_oos; ++w) {
    if (needs_refit(w) || !have_last) {
      std::vector<Eigen::VectorXd> warm;
      if (setup.warm_start && have_last && last.converged)
        warm.push_back(last.theta);
      const FitResult fr = run_window(w, warm, nullptr);
      if (fr.converged) {
        last = fr;
        have_last = true;
      }
    } else {
      run_window(w, {}, &last);
    }
  }
  return res;
}

std::vector<double> combine_forecasts(
    const std::vector<std::vector<double>>& streams) {
  if (streams.empty())
    throw std::invalid_argument("combine_forecasts: empty stream list");
  const auto t_len = streams.front().size();
  for (const auto& s : streams)
    if (s.size() != t_len)
      throw std::invalid_argument("combine_forecasts: length mismatch");
  std::vector<double> out(t_len, 0.0);
  for (const auto& s : streams)
    for (std::size_t i = 0; i < t_len; ++i) out[i] += s[i];
  for (auto& v : out) v /= static_cast<double>(streams.size());
  return out;
}

} // namespace ddms
