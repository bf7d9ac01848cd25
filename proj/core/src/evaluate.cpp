#include "ddms/evaluate.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ddms/rng.hpp"

namespace ddms {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

} // namespace

RealizedMeasures realized_measures(const std::vector<double>& returns) {
  const auto m = returns.size();
  if (m < 3)
    throw std::invalid_argument("realized_measures: need at least 3 returns");
  const double md = static_cast<double>(m);
  RealizedMeasures out;
  for (double r : returns) out.rv += r * r;
  double bv_sum = 0.0, min_sum = 0.0;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double a = std::abs(returns[i]);
    const double b = std::abs(returns[i + 1]);
    bv_sum += a * b;
    const double mn = std::min(a, b);
    min_sum += mn * mn;
  }
  out.bv = (kPi / 2.0) * (md / (md - 1.0)) * bv_sum;
  out.minrv = (kPi / (kPi - 2.0)) * (md / (md - 1.0)) * min_sum;
  double med_sum = 0.0;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double v = median3(std::abs(returns[i - 1]), std::abs(returns[i]),
                             std::abs(returns[i + 1]));
    med_sum += v * v;
  }
  out.medrv =
      (kPi / (6.0 - 4.0 * std::sqrt(3.0) + kPi)) * (md / (md - 2.0)) * med_sum;
  return out;
}

LossKind loss_from_name(const std::string& name) {
  if (name == "mse" || name == "MSE") return LossKind::Mse;
  if (name == "qlike" || name == "QLIKE") return LossKind::Qlike;
  if (name == "rlf" || name == "RLF") return LossKind::Rlf;
  if (name == "rlf-literal") return LossKind::RlfLiteral;
  throw std::invalid_argument("unknown loss name: " + name);
}

std::string loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::Mse: return "MSE";
    case LossKind::Qlike: return "QLIKE";
    case LossKind::Rlf: return "RLF";
    case LossKind::RlfLiteral: return "RLF-literal";
  }
  return "?";
}

double loss(LossKind kind, double proxy_sigma2, double forecast_sigma2) {
  switch (kind) {
    case LossKind::Mse: {
      const double d = proxy_sigma2 - forecast_sigma2;
      return d * d / 2.0;
    }
    case LossKind::Qlike: {
      if (!(proxy_sigma2 > 0.0 && forecast_sigma2 > 0.0))
        throw std::domain_error("QLIKE requires strictly positive inputs");
      const double ratio = proxy_sigma2 / forecast_sigma2;
      return ratio - std::log(ratio) - 1.0;
    }
    case LossKind::Rlf: {
      if (!(proxy_sigma2 > 0.0 && forecast_sigma2 > 0.0))
        throw std::domain_error("RLF requires strictly positive inputs");
      return forecast_sigma2 - proxy_sigma2 +
             proxy_sigma2 * std::log(proxy_sigma2 / forecast_sigma2);
    }
    case LossKind::RlfLiteral: {
      if (!(proxy_sigma2 > 0.0 && forecast_sigma2 > 0.0))
        throw std::domain_error("RLF requires strictly positive inputs");
      return forecast_sigma2 -
             proxy_sigma2 * (std::log(proxy_sigma2 / forecast_sigma2) - 1.0);
    }
  }
  throw std::logic_error("loss: unknown kind");
}

std::vector<double> loss_series(LossKind kind,
                                const std::vector<double>& proxy_sigma2,
                                const std::vector<double>& forecast_sigma2) {
  if (proxy_sigma2.size() != forecast_sigma2.size())
    throw std::invalid_argument("loss_series: length mismatch");
  std::vector<double> out(proxy_sigma2.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = loss(kind, proxy_sigma2[i], forecast_sigma2[i]);
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double chi_squared_pvalue(double stat, int k) {
  if (stat <= 0.0) return 1.0;
  const boost::math::chi_squared_distribution<double> dist(k);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

DmWestResult dm_west_test(const std::vector<double>& loss_a,
                          const std::vector<double>& loss_b, int hac_lags) {
  if (loss_a.size() != loss_b.size())
    throw std::invalid_argument("dm_west_test: length mismatch");
  const auto t_len = loss_a.size();
  if (t_len < 30)
    throw std::invalid_argument("dm_west_test: need at least 30 observations");
  std::vector<double> d(t_len);
  for (std::size_t i = 0; i < t_len; ++i) d[i] = loss_a[i] - loss_b[i];
  const double dbar = mean_of(d);

  const int lags = hac_lags >= 0
                       ? hac_lags
                       : static_cast<int>(std::floor(
                             std::cbrt(static_cast<double>(t_len))));
  // Bartlett-kernel long-run variance.
  double omega = 0.0;
  for (std::size_t i = 0; i < t_len; ++i)
    omega += (d[i] - dbar) * (d[i] - dbar);
  omega /= static_cast<double>(t_len);
  for (int l = 1; l <= lags; ++l) {
    double gamma = 0.0;
    for (std::size_t i = static_cast<std::size_t>(l); i < t_len; ++i)
      gamma += (d[i] - dbar) * (d[i - static_cast<std::size_t>(l)] - dbar);
    gamma /= static_cast<double>(t_len);
    omega += 2.0 * (1.0 - static_cast<double>(l) / (lags + 1.0)) * gamma;
  }
  if (!(omega > 0.0)) throw DegenerateDifferences();

  DmWestResult res;
  res.mean_diff = dbar;
  res.hac_lags = lags;
  res.t_stat = dbar / std::sqrt(omega / static_cast<double>(t_len));
  res.p_value = 2.0 * (1.0 - normal_cdf(std::abs(res.t_stat)));
  return res;
}

FluctuationResult fluctuation_test(const std::vector<double>& loss_a,
                                   const std::vector<double>& loss_b,
                                   double window_frac) {
  if (loss_a.size() != loss_b.size())
    throw std::invalid_argument("fluctuation_test: length mismatch");
  if (!(window_frac > 0.0 && window_frac <= 1.0))
    throw std::invalid_argument("fluctuation_test: window_frac must lie in (0,1]");
  const auto t_len = loss_a.size();
  const int w = static_cast<int>(
      std::ceil(window_frac * static_cast<double>(t_len)));
  if (w < 10)
    throw std::invalid_argument("fluctuation_test: window shorter than 10");

  FluctuationResult res;
  res.window_length = w;
  // Two-sided critical values from Giacomini & Rossi (2010), Table 1,
  // mu = window/sample ratio. window_frac = 1 is the full-sample DM-West
  // test, so standard normal critical values apply there.
  if (std::abs(window_frac - 0.1) < 1e-12) {
    res.critical_5 = 3.393;
    res.critical_10 = 3.170;
  } else if (std::abs(window_frac - 0.2) < 1e-12) {
    res.critical_5 = 3.179;
    res.critical_10 = 2.948;
  } else if (std::abs(window_frac - 0.3) < 1e-12) {
    res.critical_5 = 3.012;
    res.critical_10 = 2.766;
  } else if (std::abs(window_frac - 1.0) < 1e-12) {
    res.critical_5 = 1.959963984540054;
    res.critical_10 = 1.6448536269514722;
  } else {
    throw std::domain_error(
        "fluctuation_test: critical values tabulated only for window_frac in "
        "{0.1, 0.2, 0.3, 1.0}");
  }

  const auto wu = static_cast<std::size_t>(w);
  for (std::size_t end = wu; end <= t_len; ++end) {
    const std::vector<double> a(loss_a.begin() +
                                    static_cast<std::ptrdiff_t>(end - wu),
                                loss_a.begin() + static_cast<std::ptrdiff_t>(end));
    const std::vector<double> b(loss_b.begin() +
                                    static_cast<std::ptrdiff_t>(end - wu),
                                loss_b.begin() + static_cast<std::ptrdiff_t>(end));
    res.window_end.push_back(static_cast<int>(end) - 1);
    res.t_stats.push_back(dm_west_test(a, b).t_stat);
  }
  return res;
}

namespace {

// Stationary bootstrap time indices (Politis-Romano): geometric block
// lengths with the given mean, wrapping around the sample.
std::vector<int> stationary_bootstrap_indices(int t_len, double mean_block_len,
                                              StreamRng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(t_len));
  const double p_new = 1.0 / std::max(1.0, mean_block_len);
  int cur = static_cast<int>(rng.uniform() * t_len) % t_len;
  for (int t = 0; t < t_len; ++t) {
    idx[static_cast<std::size_t>(t)] = cur;
    if (rng.uniform() < p_new) {
      cur = static_cast<int>(rng.uniform() * t_len) % t_len;
    } else {
      cur = (cur + 1) % t_len;
    }
  }
  return idx;
}

} // namespace

McsResult model_confidence_set(const Eigen::MatrixXd& losses, double alpha,
                               int n_boot, double mean_block_len,
                               std::uint64_t seed) {
  const auto t_len = static_cast<int>(losses.rows());
  const auto m = static_cast<int>(losses.cols());
  if (m < 2)
    throw std::invalid_argument("model_confidence_set: need at least 2 models");
  if (t_len < 50)
    throw std::invalid_argument("model_confidence_set: need at least 50 rows");

  McsResult res;
  res.mcs_pvalues.assign(static_cast<std::size_t>(m), 1.0);

  // Ranks by mean loss (1 = lowest).
  {
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    const Eigen::VectorXd means = losses.colwise().mean();
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return means(a) < means(b); });
    res.ranks.assign(static_cast<std::size_t>(m), 0);
    for (int r = 0; r < m; ++r)
      res.ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] =
          r + 1;
  }

  // Pre-draw bootstrap index sets; reused across elimination rounds as in
  // Hansen's implementation.
  StreamRng rng(seed, 0);
  std::vector<std::vector<int>> boot_idx(static_cast<std::size_t>(n_boot));
  for (auto& b : boot_idx)
    b = stationary_bootstrap_indices(t_len, mean_block_len, rng);

  std::vector<int> active(static_cast<std::size_t>(m));
  std::iota(active.begin(), active.end(), 0);
  double p_running = 0.0;

  while (active.size() > 1) {
    const auto na = active.size();
    // Mean loss per active model, full sample and per bootstrap replicate.
    Eigen::VectorXd mu(na);
    for (std::size_t i = 0; i < na; ++i)
      mu(static_cast<Eigen::Index>(i)) =
          losses.col(active[i]).mean();
    Eigen::MatrixXd mu_boot(n_boot, static_cast<Eigen::Index>(na));
    for (int b = 0; b < n_boot; ++b) {
      for (std::size_t i = 0; i < na; ++i) {
        double acc = 0.0;
        for (int idx : boot_idx[static_cast<std::size_t>(b)])
          acc += losses(idx, active[i]);
        mu_boot(b, static_cast<Eigen::Index>(i)) =
            acc / static_cast<double>(t_len);
      }
    }

    // Bootstrap variance of each pairwise differential, then the range
    // statistic T_R = max |t_ij|.
    double t_range = 0.0;
    Eigen::MatrixXd inv_sd(static_cast<Eigen::Index>(na),
                           static_cast<Eigen::Index>(na));
    inv_sd.setZero();
    Eigen::VectorXd t_max_per_model =
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(na),
                                  -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < na; ++i) {
      for (std::size_t j = i + 1; j < na; ++j) {
        const double dij = mu(static_cast<Eigen::Index>(i)) -
                           mu(static_cast<Eigen::Index>(j));
        double var = 0.0;
        for (int b = 0; b < n_boot; ++b) {
          const double db = mu_boot(b, static_cast<Eigen::Index>(i)) -
                            mu_boot(b, static_cast<Eigen::Index>(j)) - dij;
          var += db * db;
        }
        var /= static_cast<double>(n_boot);
        const double isd = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
        inv_sd(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = isd;
        inv_sd(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = isd;
        const double tij = dij * isd;
        t_range = std::max(t_range, std::abs(tij));
        t_max_per_model(static_cast<Eigen::Index>(i)) =
            std::max(t_max_per_model(static_cast<Eigen::Index>(i)), tij);
        t_max_per_model(static_cast<Eigen::Index>(j)) =
            std::max(t_max_per_model(static_cast<Eigen::Index>(j)), -tij);
      }
    }

    // Null distribution of the recentered range statistic.
    int exceed = 0;
    for (int b = 0; b < n_boot; ++b) {
      double tb = 0.0;
      for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = i + 1; j < na; ++j) {
          const double dij = mu(static_cast<Eigen::Index>(i)) -
                             mu(static_cast<Eigen::Index>(j));
          const double db = mu_boot(b, static_cast<Eigen::Index>(i)) -
                            mu_boot(b, static_cast<Eigen::Index>(j)) - dij;
          tb = std::max(tb, std::abs(db) * inv_sd(static_cast<Eigen::Index>(i),
                                                  static_cast<Eigen::Index>(j)));
        }
      }
      if (tb >= t_range) ++exceed;
    }
    const double p = static_cast<double>(exceed) / n_boot;
    p_running = std::max(p_running, p);

    if (p >= alpha) {
      for (int model : active)
        res.mcs_pvalues[static_cast<std::size_t>(model)] = p_running;
      break;
    }

    // Eliminate the model with the largest t statistic against any rival.
    Eigen::Index worst = 0;
    t_max_per_model.maxCoeff(&worst);
    const int eliminated = active[static_cast<std::size_t>(worst)];
    res.mcs_pvalues[static_cast<std::size_t>(eliminated)] = p_running;
    res.elimination_order.push_back(eliminated);
    active.erase(active.begin() + worst);
  }

  res.members = active;
  if (active.size() == 1)
    res.mcs_pvalues[static_cast<std::size_t>(active.front())] = 1.0;
  return res;
}

DescriptiveStats descriptive_stats(const std::vector<double>& y, int lags) {
  const auto n = y.size();
  if (lags < 1) throw std::invalid_argument("descriptive_stats: lags < 1");
  if (n < static_cast<std::size_t>(lags) + 2)
    throw std::invalid_argument("descriptive_stats: series too short");

  DescriptiveStats s;
  s.n = static_cast<int>(n);
  s.lags = lags;
  s.mean = mean_of(y);
  s.max = *std::max_element(y.begin(), y.end());
  s.min = *std::min_element(y.begin(), y.end());

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : y) {
    const double d = v - s.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  const double nd = static_cast<double>(n);
  s.std_dev = std::sqrt(m2 / (nd - 1.0));
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;
  if (!(m2 > 0.0))
    throw std::domain_error("descriptive_stats: constant series");
  s.skewness = m3 / std::pow(m2, 1.5);
  s.kurtosis = m4 / (m2 * m2);
  s.jb_stat = nd * (s.skewness * s.skewness / 6.0 +
                    (s.kurtosis - 3.0) * (s.kurtosis - 3.0) / 24.0);
  s.jb_pvalue = chi_squared_pvalue(s.jb_stat, 2);

  // Squared demeaned returns for the ARCH diagnostics.
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = y[i] - s.mean;
    x[i] = d * d;
  }

  // LM test: regress x_t on a constant and k lags; statistic = T_reg * R^2.
  {
    const auto k = static_cast<std::size_t>(lags);
    const auto rows = n - k;
    Eigen::MatrixXd design(rows, k + 1);
    Eigen::VectorXd target(rows);
    for (std::size_t t = 0; t < rows; ++t) {
      design(static_cast<Eigen::Index>(t), 0) = 1.0;
      for (std::size_t l = 1; l <= k; ++l)
        design(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(l)) =
            x[t + k - l];
      target(static_cast<Eigen::Index>(t)) = x[t + k];
    }
    const Eigen::VectorXd coef =
        design.colPivHouseholderQr().solve(target);
    const Eigen::VectorXd resid = target - design * coef;
    const double tss =
        (target.array() - target.mean()).matrix().squaredNorm();
    const double rss = resid.squaredNorm();
    const double r2 = tss > 0.0 ? 1.0 - rss / tss : 0.0;
    s.lm_arch = static_cast<double>(rows) * r2;
    s.lm_pvalue = chi_squared_pvalue(s.lm_arch, lags);
  }

  // Ljung-Box on the squared demeaned returns.
  {
    const double xbar = mean_of(x);
    double denom = 0.0;
    for (double v : x) denom += (v - xbar) * (v - xbar);
    double q = 0.0;
    for (int l = 1; l <= lags; ++l) {
      double num = 0.0;
      for (std::size_t i = static_cast<std::size_t>(l); i < n; ++i)
        num += (x[i] - xbar) * (x[i - static_cast<std::size_t>(l)] - xbar);
      const double rho = denom > 0.0 ? num / denom : 0.0;
      q += rho * rho / (nd - l);
    }
    s.ljung_box_sq = nd * (nd + 2.0) * q;
    s.lb_pvalue = chi_squared_pvalue(s.ljung_box_sq, lags);
  }
  return s;
}

} // namespace ddms
