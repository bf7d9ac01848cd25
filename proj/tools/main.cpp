#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "cli_common.hpp"
#include "ddms/evaluate.hpp"
#include "ddms/filter.hpp"
#include "ddms/forecast.hpp"
#include "ddms/mc.hpp"
#include "ddms/parallel.hpp"
#include "ddms/simulate.hpp"

namespace {

using namespace ddms;
using namespace ddms::cli;
namespace fs = std::filesystem;

struct EstimationOptions {
  StartSearchConfig start_cfg;
  LocalSearchConfig local_cfg;
  std::string config_path;

  void apply_config_file() {
    if (config_path.empty()) return;
    const json cfg = load_json(config_path);
    if (cfg.contains("n_random")) start_cfg.n_random = cfg["n_random"];
    if (cfg.contains("lambda_grid_size"))
      start_cfg.lambda_grid_size = cfg["lambda_grid_size"];
    if (cfg.contains("lambda_lo")) start_cfg.lambda_lo = cfg["lambda_lo"];
    if (cfg.contains("lambda_hi")) start_cfg.lambda_hi = cfg["lambda_hi"];
    if (cfg.contains("s_keep")) start_cfg.s_keep = cfg["s_keep"];
    if (cfg.contains("c_bounds")) {
      start_cfg.c_bounds.clear();
      for (const auto& pair : cfg["c_bounds"])
        start_cfg.c_bounds.emplace_back(pair[0].get<double>(),
                                        pair[1].get<double>());
    }
    if (cfg.contains("r1")) local_cfg.r1 = cfg["r1"];
    if (cfg.contains("r2")) local_cfg.r2 = cfg["r2"];
    if (cfg.contains("r3")) local_cfg.r3 = cfg["r3"];
    if (cfg.contains("delta")) local_cfg.delta = cfg["delta"];
    if (cfg.contains("rcond_min")) local_cfg.rcond_min = cfg["rcond_min"];
    if (cfg.contains("optimality_tol"))
      local_cfg.optimality_tol = cfg["optimality_tol"];
    if (cfg.contains("max_iter")) local_cfg.max_iter = cfg["max_iter"];
  }

  json to_json() const {
    json j;
    j["n_random"] = start_cfg.n_random;
    j["lambda_grid_size"] = start_cfg.lambda_grid_size;
    j["lambda_lo"] = start_cfg.lambda_lo;
    j["lambda_hi"] = start_cfg.lambda_hi;
    j["s_keep"] = start_cfg.s_keep;
    j["r1"] = local_cfg.r1;
    j["r2"] = local_cfg.r2;
    j["r3"] = local_cfg.r3;
    j["delta"] = local_cfg.delta;
    j["rcond_min"] = local_cfg.rcond_min;
    j["optimality_tol"] = local_cfg.optimality_tol;
    j["max_iter"] = local_cfg.max_iter;
    return j;
  }
};

DdmsParams params_from_fit_json(const json& j) {
  const FitSpec spec = fit_spec_from_json(j);
  if (!is_ddms(spec.family))
    throw std::runtime_error("params file does not describe a DDMS model");
  return make_ddms_params(spec, theta_from_json(j.at("theta")));
}

// ---------------------------------------------------------------- simulate
int cmd_simulate(const std::string& preset, int tau0, int n_keep, int n_burn,
                 std::uint64_t seed, int rep, const std::string& out) {
  SimConfig cfg;
  if (preset == "bullbear") {
    MeanSwitchParams p = bull_bear_dgp();
    if (tau0 > 0) p.tau = tau0;
    cfg.model = p;
  } else if (preset == "volatility") {
    cfg.model = duration_vol_dgp(tau0 > 0 ? tau0 : 15);
  } else {
    throw std::runtime_error("unknown preset: " + preset +
                             " (bullbear|volatility)");
  }
  cfg.n_keep = n_keep;
  cfg.n_burn = n_burn;
  cfg.seed = seed;
  const SimPath path = simulate_path(cfg, rep);

  std::vector<std::vector<double>> rows;
  rows.reserve(path.y.size());
  for (std::size_t t = 0; t < path.y.size(); ++t)
    rows.push_back({static_cast<double>(t), path.y[t],
                    static_cast<double>(path.states[t].regime),
                    static_cast<double>(path.states[t].duration),
                    path.sigma2[t]});
  write_csv(out, {"t", "y", "regime", "duration", "sigma2"}, rows);

  json config;
  config["schema_version"] = "ddms.sim.v1";
  config["preset"] = preset;
  config["tau0"] = model_tau(cfg.model);
  config["n_keep"] = n_keep;
  config["n_burn"] = n_burn;
  config["seed"] = seed;
  config["rep"] = rep;
  write_manifest(out + ".manifest.json", "simulate", config);
  std::cout << "wrote " << path.y.size() << " observations to " << out << "\n";
  return kExitOk;
}

// --------------------------------------------------------------------- fit
int cmd_fit(const std::string& input, const std::string& column,
            const std::string& family, const std::string& link, int tau,
            std::uint64_t seed, int workers, EstimationOptions& opts,
            const std::string& out) {
  opts.apply_config_file();
  const auto y = csv_numeric_column(read_csv(input), column);
  FitSpec spec;
  spec.family = parse_family(family);
  spec.link = parse_link(link);
  spec.tau = tau;
  opts.start_cfg.seed = seed;
  const FitResult fr =
      fit(y, spec, opts.start_cfg, opts.local_cfg, {}, workers);
  json j = fit_result_to_json(spec, fr, seed);
  j["n_obs"] = y.size();
  j["input"] = input;
  json config = opts.to_json();
  config["family"] = family;
  config["link"] = link;
  config["tau"] = tau;
  config["seed"] = seed;
  j["config_hash"] = config_hash(config);
  write_json(out, j);
  write_manifest(out + ".manifest.json", "fit", config);
  std::cout << "loglik " << fr.loglik << " after " << fr.n_starts_used
            << " start(s); wrote " << out << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------ filter
int cmd_filter(const std::string& input, const std::string& column,
               const std::string& params_path, const std::string& out,
               const std::string& dump_transition) {
  const auto y = csv_numeric_column(read_csv(input), column);
  const json pj = load_json(params_path);
  const DdmsParams params = params_from_fit_json(pj);
  const int tau = model_tau(params);

  if (!dump_transition.empty()) {
    const auto tm =
        build_transition_matrix(model_link(params), model_gammas(params), tau);
    std::vector<std::string> header;
    for (int j = 0; j < tm.size(); ++j) header.push_back("s" + std::to_string(j));
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < tm.size(); ++i) {
      std::vector<double> row;
      for (int j = 0; j < tm.size(); ++j) row.push_back(tm.P(i, j));
      rows.push_back(std::move(row));
    }
    write_csv(dump_transition, header, rows);
  }

  const FilterOutput fo = run_filter(params, y);
  const auto pred_m = regime_marginals(fo.predictive, tau);
  const auto filt_m = regime_marginals(fo.filtered, tau);
  const auto smooth_m = regime_marginals(fo.smoothed, tau);

  std::vector<std::string> header{"t"};
  for (int j = 0; j < n_states(tau); ++j)
    header.push_back("filtered_s" + std::to_string(j));
  for (const char* name :
       {"predictive_r0", "predictive_r1", "filtered_r0", "filtered_r1",
        "smoothed_r0", "smoothed_r1"})
    header.emplace_back(name);
  std::vector<std::vector<double>> rows;
  for (Eigen::Index t = 0; t < fo.filtered.rows(); ++t) {
    std::vector<double> row{static_cast<double>(t)};
    for (Eigen::Index j = 0; j < fo.filtered.cols(); ++j)
      row.push_back(fo.filtered(t, j));
    row.insert(row.end(), {pred_m(t, 0), pred_m(t, 1), filt_m(t, 0),
                           filt_m(t, 1), smooth_m(t, 0), smooth_m(t, 1)});
    rows.push_back(std::move(row));
  }
  write_csv(out, header, rows);

  json config;
  config["input"] = input;
  config["params"] = params_path;
  config["loglik"] = fo.loglik;
  write_manifest(out + ".manifest.json", "filter", config);
  std::cout << "loglik " << fo.loglik << "; wrote " << out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- forecast
int cmd_forecast(const std::string& input, const std::string& column,
                 const std::string& params_path, int horizon,
                 const std::string& out) {
  const auto y = csv_numeric_column(read_csv(input), column);
  const DdmsParams params = params_from_fit_json(load_json(params_path));
  const int tau = model_tau(params);
  const FilterOutput fo = run_filter(params, y);
  const auto tm =
      build_transition_matrix(model_link(params), model_gammas(params), tau);
  const Eigen::VectorXd xi_tt =
      fo.filtered.row(fo.filtered.rows() - 1).transpose();
  const ForecastPath fp = forecast_path(params, tm, xi_tt, horizon);

  std::vector<std::vector<double>> rows;
  for (int h = 1; h <= horizon; ++h) {
    const auto marg =
        regime_marginals(fp.state_probs.row(h - 1), tau);
    rows.push_back({static_cast<double>(h),
                    fp.sigma2_hat[static_cast<std::size_t>(h - 1)],
                    marg(0, 0), marg(0, 1)});
  }
  write_csv(out, {"horizon", "sigma2_hat", "regime0_prob", "regime1_prob"},
            rows);
  json config;
  config["input"] = input;
  config["params"] = params_path;
  config["horizon"] = horizon;
  write_manifest(out + ".manifest.json", "forecast", config);
  std::cout << "wrote " << horizon << " horizons to " << out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- realized
int cmd_realized(const std::string& input, const std::string& format,
                 int min_bars, const std::string& out) {
  const CsvTable table = read_csv(input);
  const int day_col = table.column("day");
  const int value_col = table.column("value");
  if (day_col < 0 || value_col < 0)
    throw std::runtime_error("intraday CSV needs 'day' and 'value' columns");
  const bool from_prices = format == "prices";
  if (!from_prices && format != "returns")
    throw std::runtime_error("--format must be prices or returns");

  // Rows arrive in intraday order, grouped by day.
  std::vector<std::string> days;
  std::vector<std::vector<double>> day_values;
  for (const auto& row : table.rows) {
    const auto& day = row[static_cast<std::size_t>(day_col)];
    const double v = std::stod(row[static_cast<std::size_t>(value_col)]);
    if (days.empty() || days.back() != day) {
      days.push_back(day);
      day_values.emplace_back();
    }
    day_values.back().push_back(v);
  }

  std::vector<std::vector<double>> rows;
  std::vector<std::string> kept_days;
  for (std::size_t d = 0; d < days.size(); ++d) {
    std::vector<double> returns;
    if (from_prices) {
      const auto& prices = day_values[d];
      for (std::size_t i = 1; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0 && prices[i - 1] > 0.0))
          throw std::runtime_error("nonpositive price on day " + days[d]);
        returns.push_back(std::log(prices[i]) - std::log(prices[i - 1]));
      }
    } else {
      returns = day_values[d];
    }
    if (static_cast<int>(returns.size()) < min_bars)
      throw std::runtime_error("day " + days[d] + " has fewer than " +
                               std::to_string(min_bars) + " returns");
    const RealizedMeasures rm = realized_measures(returns);
    kept_days.push_back(days[d]);
    rows.push_back({static_cast<double>(d), static_cast<double>(returns.size()),
                    rm.rv, rm.bv, rm.minrv, rm.medrv});
  }

  // Day labels preserved in a sidecar column file would complicate the
  // schema; emit the label as the manifest's day list and an index here.
  write_csv(out, {"day_index", "m", "rv", "bv", "minrv", "medrv"}, rows);
  json config;
  config["input"] = input;
  config["format"] = format;
  config["days"] = kept_days;
  write_manifest(out + ".manifest.json", "realized", config);
  std::cout << "wrote " << rows.size() << " daily rows to " << out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate
int cmd_evaluate(const std::string& forecasts_path, const std::string& proxy_path,
                 const std::string& proxy_column, const std::string& benchmark,
                 double alpha, int n_boot, double window_frac,
                 std::uint64_t seed, const std::string& out,
                 const std::string& fluct_out) {
  const CsvTable ftab = read_csv(forecasts_path);
  const auto proxy = csv_numeric_column(read_csv(proxy_path), proxy_column);

  std::vector<std::string> models;
  std::vector<std::vector<double>> forecasts;
  for (const auto& name : ftab.header) {
    if (name == "t" || name == "index") continue;
    models.push_back(name);
    forecasts.push_back(csv_numeric_column(ftab, name));
  }
  if (models.empty()) throw std::runtime_error("no forecast columns found");
  for (const auto& f : forecasts)
    if (f.size() != proxy.size())
      throw std::runtime_error("forecast/proxy length mismatch");

  // Pairwise alignment: keep rows where the proxy and every forecast are
  // finite and positive.
  std::vector<std::size_t> keep;
  for (std::size_t t = 0; t < proxy.size(); ++t) {
    bool ok = std::isfinite(proxy[t]) && proxy[t] > 0.0;
    for (const auto& f : forecasts)
      ok = ok && std::isfinite(f[t]) && f[t] > 0.0;
    if (ok) keep.push_back(t);
  }
  const auto take = [&](const std::vector<double>& v) {
    std::vector<double> out_v;
    out_v.reserve(keep.size());
    for (auto t : keep) out_v.push_back(v[t]);
    return out_v;
  };
  const auto proxy_kept = take(proxy);

  int bench_idx = 0;
  if (!benchmark.empty()) {
    const auto it = std::find(models.begin(), models.end(), benchmark);
    if (it == models.end())
      throw std::runtime_error("benchmark column not found: " + benchmark);
    bench_idx = static_cast<int>(it - models.begin());
  }

  json report;
  report["schema_version"] = "ddms.eval.v1";
  report["models"] = models;
  report["benchmark"] = models[static_cast<std::size_t>(bench_idx)];
  report["n_obs_used"] = keep.size();
  report["n_obs_dropped"] = proxy.size() - keep.size();

  std::vector<std::vector<double>> fluct_rows;
  for (const LossKind kind : {LossKind::Mse, LossKind::Qlike, LossKind::Rlf}) {
    std::vector<std::vector<double>> losses;
    for (const auto& f : forecasts)
      losses.push_back(loss_series(kind, proxy_kept, take(f)));

    json jl;
    for (std::size_t m = 0; m < models.size(); ++m) {
      double mean = 0.0;
      for (double v : losses[m]) mean += v;
      jl["mean"][models[m]] = mean / static_cast<double>(losses[m].size());
    }
    for (std::size_t m = 0; m < models.size(); ++m) {
      if (static_cast<int>(m) == bench_idx) continue;
      try {
        const auto dm = dm_west_test(losses[m],
                                     losses[static_cast<std::size_t>(bench_idx)]);
        jl["dm_vs_benchmark"][models[m]] = {{"t", dm.t_stat},
                                            {"p", dm.p_value},
                                            {"hac_lags", dm.hac_lags}};
      } catch (const DegenerateDifferences&) {
        jl["dm_vs_benchmark"][models[m]] = {{"degenerate", true}};
      }
      if (window_frac > 0.0) {
        try {
          const auto fl = fluctuation_test(
              losses[m], losses[static_cast<std::size_t>(bench_idx)],
              window_frac);
          jl["fluctuation"][models[m]] = {{"critical_5", fl.critical_5},
                                          {"critical_10", fl.critical_10},
                                          {"window", fl.window_length}};
          if (!fluct_out.empty()) {
            for (std::size_t k = 0; k < fl.t_stats.size(); ++k)
              fluct_rows.push_back({static_cast<double>(kind == LossKind::Mse
                                                            ? 0
                                                            : kind == LossKind::Qlike
                                                                  ? 1
                                                                  : 2),
                                    static_cast<double>(m),
                                    static_cast<double>(fl.window_end[k]),
                                    fl.t_stats[k]});
          }
        } catch (const std::exception& e) {
          jl["fluctuation"][models[m]] = {{"error", e.what()}};
        }
      }
    }
    if (models.size() >= 2) {
      Eigen::MatrixXd lmat(static_cast<Eigen::Index>(keep.size()),
                           static_cast<Eigen::Index>(models.size()));
      for (std::size_t m = 0; m < models.size(); ++m)
        for (std::size_t t = 0; t < keep.size(); ++t)
          lmat(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(m)) =
              losses[m][t];
      const McsResult mcs =
          model_confidence_set(lmat, alpha, n_boot, 10.0, seed);
      json jm;
      jm["members"] = json::array();
      for (int m : mcs.members)
        jm["members"].push_back(models[static_cast<std::size_t>(m)]);
      for (std::size_t m = 0; m < models.size(); ++m) {
        jm["pvalues"][models[m]] = mcs.mcs_pvalues[m];
        jm["ranks"][models[m]] = mcs.ranks[m];
      }
      jl["mcs"] = jm;
    }
    report["losses"][loss_name(kind)] = jl;
  }
  write_json(out, report);
  if (!fluct_out.empty())
    write_csv(fluct_out, {"loss_id", "model_id", "window_end", "t_stat"},
              fluct_rows);

  json config;
  config["forecasts"] = forecasts_path;
  config["proxy"] = proxy_path;
  config["proxy_column"] = proxy_column;
  config["alpha"] = alpha;
  config["n_boot"] = n_boot;
  config["window_frac"] = window_frac;
  config["seed"] = seed;
  write_manifest(out + ".manifest.json", "evaluate", config);
  std::cout << "wrote " << out << " using " << keep.size() << " rows\n";
  return kExitOk;
}

// ----------------------------------------------------------- empirical-run
int cmd_empirical_run(const std::string& input, const std::string& column,
                      const std::string& models_path, int oos_start,
                      int refit_every, std::uint64_t seed, int workers,
                      const std::string& out_dir) {
  const auto y = csv_numeric_column(read_csv(input), column);
  const json mj = load_json(models_path);
  fs::create_directories(out_dir);

  EstimationOptions base_opts;
  if (mj.contains("estimation")) {
    // Same keys as the --config file of `fit`.
    const auto tmp_path = out_dir + "/.estimation.json";
    write_json(tmp_path, mj["estimation"]);
    base_opts.config_path = tmp_path;
    base_opts.apply_config_file();
  }

  WindowPlan plan;
  plan.oos_start = oos_start;
  plan.refit_every = refit_every;

  json run_manifest;
  run_manifest["input"] = input;
  run_manifest["oos_start"] = oos_start;
  run_manifest["refit_every"] = refit_every;
  run_manifest["seed"] = seed;
  run_manifest["models"] = json::array();

  int model_index = 0;
  for (const auto& spec_json : mj.at("models")) {
    ModelSetup setup;
    setup.name = spec_json.at("name").get<std::string>();
    setup.spec.family = parse_family(spec_json.at("family").get<std::string>());
    if (is_ddms(setup.spec.family)) {
      setup.spec.link = parse_link(spec_json.at("link").get<std::string>());
      setup.spec.tau = spec_json.at("tau").get<int>();
    }
    setup.start_cfg = base_opts.start_cfg;
    setup.local_cfg = base_opts.local_cfg;
    setup.start_cfg.seed = mix_seed(seed, static_cast<std::uint64_t>(model_index));
    setup.warm_start = spec_json.value("warm_start", true);

    const ExpandingResult er = expanding_forecasts(y, setup, plan, workers);
    std::vector<std::vector<double>> rows;
    int n_failed = 0;
    for (std::size_t w = 0; w < er.sigma2_hat.size(); ++w) {
      rows.push_back({static_cast<double>(er.targets[w]), er.sigma2_hat[w],
                      er.valid[w] ? 1.0 : 0.0, er.lambda_hat[w]});
      if (!er.valid[w]) ++n_failed;
    }
    const std::string out_csv = out_dir + "/" + setup.name + ".csv";
    write_csv(out_csv, {"t", "sigma2_hat", "valid", "lambda_hat"}, rows);
    run_manifest["models"].push_back(
        {{"name", setup.name},
         {"file", out_csv},
         {"n_forecasts", er.sigma2_hat.size()},
         {"n_failed", n_failed}});
    std::cout << setup.name << ": " << er.sigma2_hat.size() - n_failed << "/"
              << er.sigma2_hat.size() << " windows ok\n";
    ++model_index;
  }
  write_manifest(out_dir + "/run.manifest.json", "empirical-run", run_manifest);
  return kExitOk;
}

// --------------------------------------------------------------- mc tables
void write_insample_outputs(const McInsampleReport& report,
                            const std::string& prefix) {
  std::vector<std::vector<double>> rows;
  for (const auto& c : report.cells)
    rows.push_back({static_cast<double>(c.tau), c.prop_pred, c.prop_filt,
                    c.prop_smooth, c.diff_pred, c.diff_filt, c.diff_smooth,
                    c.loglik_sup_freq, static_cast<double>(c.n_pairs),
                    static_cast<double>(c.n_fail_logit),
                    static_cast<double>(c.n_fail_ao)});
  write_csv(prefix + "_table.csv",
            {"tau", "prop_pred", "prop_filt", "prop_smooth", "diff_pred",
             "diff_filt", "diff_smooth", "loglik_sup_freq", "n_pairs",
             "n_fail_logit", "n_fail_ao"},
            rows);
  json j;
  j["schema_version"] = "ddms.mc-insample.v1";
  j["n_reps"] = report.n_reps;
  j["seed"] = report.seed;
  for (const auto& c : report.cells) {
    json cell;
    cell["tau"] = c.tau;
    cell["prop"] = {{"predictive", c.prop_pred},
                    {"filtered", c.prop_filt},
                    {"smoothed", c.prop_smooth}};
    cell["diff"] = {{"predictive", c.diff_pred},
                    {"filtered", c.diff_filt},
                    {"smoothed", c.diff_smooth}};
    cell["loglik_sup_freq"] = c.loglik_sup_freq;
    cell["n_pairs"] = c.n_pairs;
    cell["n_fail_logit"] = c.n_fail_logit;
    cell["n_fail_ao"] = c.n_fail_ao;
    j["cells"].push_back(cell);
  }
  write_json(prefix + "_report.json", j);
}

int cmd_mc_insample(int reps, std::uint64_t seed, std::vector<int> taus,
                    int workers, EstimationOptions& opts,
                    const std::string& prefix) {
  opts.apply_config_file();
  McInsampleConfig cfg;
  cfg.n_reps = reps;
  cfg.seed = seed;
  if (!taus.empty()) cfg.taus = std::move(taus);
  cfg.start_cfg = opts.start_cfg;
  cfg.local_cfg = opts.local_cfg;
  cfg.workers = workers;
  const auto report = mc_insample(cfg);
  write_insample_outputs(report, prefix);

  json config = opts.to_json();
  config["reps"] = reps;
  config["seed"] = seed;
  config["taus"] = cfg.taus;
  write_manifest(prefix + "_report.json.manifest.json", "mc-insample", config);
  for (const auto& c : report.cells)
    std::cout << "tau=" << c.tau << " loglik_sup=" << c.loglik_sup_freq
              << " prop_filt=" << c.prop_filt << " (" << c.n_pairs
              << " pairs)\n";
  return kExitOk;
}

int cmd_mc_forecast(int tau0, std::vector<int> taus, int reps,
                    std::uint64_t seed, int workers, EstimationOptions& opts,
                    const std::string& prefix) {
  opts.apply_config_file();
  McForecastConfig cfg;
  cfg.tau0 = tau0;
  cfg.taus = std::move(taus);
  cfg.n_reps = reps;
  cfg.seed = seed;
  cfg.start_cfg = opts.start_cfg;
  cfg.local_cfg = opts.local_cfg;
  cfg.workers = workers;
  const auto report = mc_forecast(cfg);

  std::vector<std::string> header{"tau"};
  for (int h = 1; h <= cfg.h_max; ++h) header.push_back("D" + std::to_string(h));
  header.insert(header.end(),
                {"loglik_sup_freq", "n_pairs", "n_fail_logit", "n_fail_ao"});
  std::vector<std::vector<double>> rows;
  for (const auto& c : report.cells) {
    std::vector<double> row{static_cast<double>(c.tau)};
    row.insert(row.end(), c.mean_d.begin(), c.mean_d.end());
    row.insert(row.end(), {c.loglik_sup_freq, static_cast<double>(c.n_pairs),
                           static_cast<double>(c.n_fail_logit),
                           static_cast<double>(c.n_fail_ao)});
    rows.push_back(std::move(row));
  }
  write_csv(prefix + "_table.csv", header, rows);

  json j;
  j["schema_version"] = "ddms.mc-forecast.v1";
  j["tau0"] = report.tau0;
  j["n_reps"] = report.n_reps;
  j["seed"] = report.seed;
  for (const auto& c : report.cells) {
    json cell;
    cell["tau"] = c.tau;
    cell["mean_d"] = c.mean_d;
    cell["loglik_sup_freq"] = c.loglik_sup_freq;
    cell["n_pairs"] = c.n_pairs;
    cell["n_fail_logit"] = c.n_fail_logit;
    cell["n_fail_ao"] = c.n_fail_ao;
    j["cells"].push_back(cell);
  }
  write_json(prefix + "_report.json", j);

  json config = opts.to_json();
  config["tau0"] = tau0;
  config["reps"] = reps;
  config["seed"] = seed;
  write_manifest(prefix + "_report.json.manifest.json", "mc-forecast", config);
  for (const auto& c : report.cells)
    std::cout << "tau=" << c.tau << " D(1)=" << c.mean_d.front()
              << " loglik_sup=" << c.loglik_sup_freq << " (" << c.n_pairs
              << " pairs)\n";
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Duration-dependent Markov-switching volatility toolkit"};
  app.require_subcommand(1);

  // simulate
  std::string sim_preset = "bullbear", sim_out = "sim.csv";
  int sim_tau0 = 0, sim_n = 800, sim_burn = 200, sim_rep = 0;
  std::uint64_t sim_seed = 1;
  auto* sim = app.add_subcommand("simulate", "Simulate a DDMS path");
  sim->add_option("--preset", sim_preset, "bullbear|volatility");
  sim->add_option("--tau0", sim_tau0, "true duration cap (0 = preset default)");
  sim->add_option("--n", sim_n, "observations kept");
  sim->add_option("--burn", sim_burn, "burn-in discarded");
  sim->add_option("--seed", sim_seed);
  sim->add_option("--rep", sim_rep, "replication index");
  sim->add_option("--out", sim_out);

  // fit
  std::string fit_input, fit_column = "y", fit_family = "mean-switch",
              fit_link = "logit", fit_out = "fit.json";
  int fit_tau = 8, fit_workers = default_workers();
  std::uint64_t fit_seed = 1;
  EstimationOptions fit_opts;
  auto* fitc = app.add_subcommand("fit", "Maximum-likelihood estimation");
  fitc->add_option("--input", fit_input)->required();
  fitc->add_option("--column", fit_column);
  fitc->add_option("--family", fit_family);
  fitc->add_option("--link", fit_link);
  fitc->add_option("--tau", fit_tau);
  fitc->add_option("--seed", fit_seed);
  fitc->add_option("--workers", fit_workers);
  fitc->add_option("--config", fit_opts.config_path, "JSON config overrides");
  fitc->add_option("--out", fit_out);

  // filter
  std::string flt_input, flt_column = "y", flt_params, flt_out = "filter.csv",
              flt_dump;
  auto* flt = app.add_subcommand("filter", "State probabilities for a fit");
  flt->add_option("--input", flt_input)->required();
  flt->add_option("--column", flt_column);
  flt->add_option("--params", flt_params)->required();
  flt->add_option("--out", flt_out);
  flt->add_option("--dump-transition", flt_dump,
                  "also write the dense transition matrix CSV");

  // forecast
  std::string fc_input, fc_column = "y", fc_params, fc_out = "forecast.csv";
  int fc_h = 10;
  auto* fc = app.add_subcommand("forecast", "h-step sigma^2 forecasts");
  fc->add_option("--input", fc_input)->required();
  fc->add_option("--column", fc_column);
  fc->add_option("--params", fc_params)->required();
  fc->add_option("--horizon", fc_h);
  fc->add_option("--out", fc_out);

  // realized
  std::string rl_input, rl_format = "returns", rl_out = "realized.csv";
  int rl_min_bars = 3;
  auto* rl = app.add_subcommand("realized", "Daily realized measures");
  rl->add_option("--input", rl_input)->required();
  rl->add_option("--format", rl_format, "prices|returns");
  rl->add_option("--min-bars", rl_min_bars);
  rl->add_option("--out", rl_out);

  // evaluate
  std::string ev_forecasts, ev_proxy, ev_proxy_col = "rv", ev_benchmark,
              ev_out = "eval.json", ev_fluct_out;
  double ev_alpha = 0.2, ev_window_frac = 0.1;
  int ev_nboot = 1000;
  std::uint64_t ev_seed = 7;
  auto* ev = app.add_subcommand("evaluate", "Loss tables, DM-West, MCS");
  ev->add_option("--forecasts", ev_forecasts)->required();
  ev->add_option("--proxy", ev_proxy)->required();
  ev->add_option("--proxy-column", ev_proxy_col);
  ev->add_option("--benchmark", ev_benchmark, "benchmark forecast column");
  ev->add_option("--alpha", ev_alpha, "MCS elimination level");
  ev->add_option("--n-boot", ev_nboot);
  ev->add_option("--window-frac", ev_window_frac,
                 "fluctuation window fraction (0 disables)");
  ev->add_option("--seed", ev_seed);
  ev->add_option("--out", ev_out);
  ev->add_option("--fluctuation-out", ev_fluct_out);

  // empirical-run
  std::string er_input, er_column = "y", er_models, er_out_dir = "empirical";
  int er_oos_start = 0, er_refit = 1, er_workers = default_workers();
  std::uint64_t er_seed = 1;
  auto* er = app.add_subcommand("empirical-run",
                                "Expanding-window forecasts for model set");
  er->add_option("--input", er_input)->required();
  er->add_option("--column", er_column);
  er->add_option("--models", er_models, "models config JSON")->required();
  er->add_option("--oos-start", er_oos_start)->required();
  er->add_option("--refit-every", er_refit);
  er->add_option("--seed", er_seed);
  er->add_option("--workers", er_workers);
  er->add_option("--out-dir", er_out_dir);

  // mc-insample
  int mi_reps = 100, mi_workers = default_workers();
  std::uint64_t mi_seed = 42;
  std::vector<int> mi_taus;
  EstimationOptions mi_opts;
  std::string mi_prefix = "mc_insample";
  auto* mi = app.add_subcommand("mc-insample",
                                "Monte Carlo: in-sample probability study");
  mi->add_option("--reps", mi_reps);
  mi->add_option("--seed", mi_seed);
  mi->add_option("--taus", mi_taus, "fit duration caps (default 4 6 8 10 12)");
  mi->add_option("--workers", mi_workers);
  mi->add_option("--config", mi_opts.config_path);
  mi->add_option("--out-prefix", mi_prefix);

  // mc-forecast
  int mf_tau0 = 15, mf_reps = 100, mf_workers = default_workers();
  std::uint64_t mf_seed = 43;
  std::vector<int> mf_taus;
  EstimationOptions mf_opts;
  std::string mf_prefix = "mc_forecast";
  auto* mf = app.add_subcommand("mc-forecast",
                                "Monte Carlo: volatility forecasting study");
  mf->add_option("--tau0", mf_tau0, "true duration cap (15|25|35)");
  mf->add_option("--taus", mf_taus, "fit duration caps (default tau0 +/- {0,5,10})");
  mf->add_option("--reps", mf_reps);
  mf->add_option("--seed", mf_seed);
  mf->add_option("--workers", mf_workers);
  mf->add_option("--config", mf_opts.config_path);
  mf->add_option("--out-prefix", mf_prefix);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e); // --help
    app.exit(e);
    return ddms::cli::kExitInput;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(sim_preset, sim_tau0, sim_n, sim_burn, sim_seed,
                          sim_rep, sim_out);
    if (fitc->parsed())
      return cmd_fit(fit_input, fit_column, fit_family, fit_link, fit_tau,
                     fit_seed, fit_workers, fit_opts, fit_out);
    if (flt->parsed())
      return cmd_filter(flt_input, flt_column, flt_params, flt_out, flt_dump);
    if (fc->parsed())
      return cmd_forecast(fc_input, fc_column, fc_params, fc_h, fc_out);
    if (rl->parsed()) return cmd_realized(rl_input, rl_format, rl_min_bars, rl_out);
    if (ev->parsed())
      return cmd_evaluate(ev_forecasts, ev_proxy, ev_proxy_col, ev_benchmark,
                          ev_alpha, ev_nboot, ev_window_frac, ev_seed, ev_out,
                          ev_fluct_out);
    if (er->parsed())
      return cmd_empirical_run(er_input, er_column, er_models, er_oos_start,
                               er_refit, er_seed, er_workers, er_out_dir);
    if (mi->parsed())
      return cmd_mc_insample(mi_reps, mi_seed, mi_taus, mi_workers, mi_opts,
                             mi_prefix);
    if (mf->parsed())
      return cmd_mc_forecast(mf_tau0, mf_taus, mf_reps, mf_seed, mf_workers,
                             mf_opts, mf_prefix);
  } catch (const ddms::EstimationFailed& e) {
    std::cerr << "estimation failed: " << e.what() << "\n";
    return ddms::cli::kExitEstimation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ddms::cli::kExitInput;
  }
  return ddms::cli::kExitOk;
}
