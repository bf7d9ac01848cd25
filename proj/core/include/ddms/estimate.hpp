#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ddms/errors.hpp"
#include "ddms/models.hpp"
#include "ddms/optim.hpp"

namespace ddms {

enum class ModelFamily { MeanSwitch, DurationVol, Garch, MsGarch };

/// What to fit: a model family plus, for the DDMS families, the link and the
/// duration cap.
struct FitSpec {
  ModelFamily family = ModelFamily::MeanSwitch;
  LinkKind link = LinkKind::Logit;
  int tau = 1;
};

bool is_ddms(ModelFamily family);
bool uses_lambda(const FitSpec& spec); // true for Aranda-Ordaz DDMS fits

/// Number of free parameters kappa. Layouts (lambda always last):
///   MeanSwitch:  (mu0, mu1, sigma0, sigma1, g1(0), g2(0), g1(1), g2(1)[, lambda])
///   DurationVol: (om0, om1, ze0, ze1, g1(0), g2(0), g1(1), g2(1)[, lambda])
///   Garch:       (omega, alpha, beta)
///   MsGarch:     (om0, al0, be0, om1, al1, be1, p00, p11)
int param_count(const FitSpec& spec);

DdmsParams make_ddms_params(const FitSpec& spec, const Eigen::VectorXd& theta);
GarchParams make_garch_params(const FitSpec& spec,
                              const Eigen::VectorXd& theta);
Eigen::VectorXd pack_ddms_params(const DdmsParams& params);

/// Hard parameter-space restrictions (sigma > 0, lambda in [1e-4, 50],
/// GARCH positivity, ...). `restricted` marks coordinates whose bound is a
/// genuine parameter-space restriction, exempt from the proximity criterion
/// when an estimate pins against it.
struct NaturalBounds {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  std::vector<bool> restricted;
};
NaturalBounds natural_bounds(const FitSpec& spec);

inline constexpr double kLambdaMin = 1e-4;
inline constexpr double kLambdaMax = 50.0;

/// Start-candidate construction (random matrix C of size (kappa[-1]) x
/// n_random plus, for Aranda-Ordaz, a lambda grid crossed with the columns
/// of C). The same seed and bounds reproduce the same C for the logit and
/// Aranda-Ordaz runs on a dataset, which keeps the searches comparable.
struct StartSearchConfig {
  int n_random = 100;
  int lambda_grid_size = 100;
  double lambda_lo = 0.1;
  double lambda_hi = 10.0;
  int s_keep = 10;
  /// Per-coordinate uniform sampling ranges for C (excluding lambda); empty
  /// selects the per-family defaults.
  std::vector<std::pair<double, double>> c_bounds;
  std::uint64_t seed = 1;
};

std::vector<std::pair<double, double>> default_c_bounds(const FitSpec& spec);

struct LocalSearchConfig {
  double r1 = 1.0;
  double r2 = 2.0;
  double r3 = 10.0;
  double delta = 0.01;        // proximity threshold
  double rcond_min = 1e-9;    // feasibility threshold on rcond(A'A)
  double optimality_tol = 1e-4;
  int max_iter = 250;
  double fd_rel_step = 1e-6;
};

/// Reason a likelihood evaluation was rejected; kept per candidate so an
/// all-infeasible start search can report what went wrong.
enum class RejectReason { None, SingularChain, DegenerateLikelihood,
                          InvalidParams, NonFinite };

/// Penalized objective used throughout estimation: the exact log-likelihood,
/// -infinity outside the feasible region (invalid parameters, singular
/// chain, degenerate likelihood), plus a smooth barrier that switches on
/// within two decades of the rcond threshold.
double penalized_loglik(const FitSpec& spec, const std::vector<double>& y,
                        const Eigen::VectorXd& theta,
                        const LocalSearchConfig& cfg,
                        RejectReason* reason = nullptr);

/// Exact (unpenalized) log-likelihood at theta; throws on infeasibility.
double exact_loglik(const FitSpec& spec, const std::vector<double>& y,
                    const Eigen::VectorXd& theta, double rcond_min);

struct ScoredStart {
  Eigen::VectorXd theta;
  double loglik; // penalized score used for ranking
};

/// Scores every candidate with the exact log-likelihood and returns the top
/// s_keep, best first. Throws std::runtime_error listing rejection counts
/// when every candidate is infeasible.
std::vector<ScoredStart> generate_starts(const FitSpec& spec,
                                         const std::vector<double>& y,
                                         const StartSearchConfig& start_cfg,
                                         const LocalSearchConfig& local_cfg,
                                         int workers = 1);

struct LocalSearchResult {
  Eigen::VectorXd theta;
  double loglik = 0.0; // exact log-likelihood at theta
  double first_order_norm = 0.0;
  bool optimality_ok = false;
  int n_evals = 0;
};

/// One bounded local search: maximizes the penalized log-likelihood over
/// [start - radius, start + radius] (per coordinate, intersected with the
/// natural bounds).
LocalSearchResult local_optimize(const FitSpec& spec,
                                 const std::vector<double>& y,
                                 const Eigen::VectorXd& start,
                                 const Eigen::VectorXd& radii,
                                 const LocalSearchConfig& cfg);

/// Same search box (centered on `center`) but with the ascent beginning at
/// `from`; used by the retry ladder to resume a widened search where the
/// narrower one stopped.
LocalSearchResult local_optimize_from(const FitSpec& spec,
                                      const std::vector<double>& y,
                                      const Eigen::VectorXd& center,
                                      const Eigen::VectorXd& from,
                                      const Eigen::VectorXd& radii,
                                      const LocalSearchConfig& cfg);

struct ProximityResult {
  bool pass = false;
  double min_ratio = 0.0;
  int min_index = -1; // coordinate attaining the minimum
};

/// Absolute percentage distance of theta1 to the box faces theta0 -/+ radii:
/// l-_i = |theta1_i - (theta0_i - r_i)| / |theta1_i| and symmetrically l+_i.
/// Passes when the minimum over unmasked coordinates exceeds delta. Masked
/// coordinates (estimates pinned at natural parameter-space restrictions)
/// are excluded. Coordinates with |theta1_i| < 1e-8 are judged on absolute
/// distance against delta * r_i instead.
ProximityResult proximity_check(const Eigen::VectorXd& theta1,
                                const Eigen::VectorXd& theta0,
                                const Eigen::VectorXd& radii, double delta,
                                const std::vector<bool>& natural_mask);

struct FitResult {
  Eigen::VectorXd theta;
  double loglik = 0.0;
  bool converged = false;
  int n_starts_used = 0;
  double first_order_norm = 0.0;
  double boundary_proximity = 0.0;
  std::optional<double> lambda_hat;
};

/// Full estimation: start search, then for each retained start the bounded
/// local search with the retry ladder (next start on an optimality failure;
/// widen r1 -> r2 on a proximity failure; widen to r3 on the offending
/// coordinates only). Throws EstimationFailed with per-start diagnostics
/// after every retained start fails. `extra_starts` (e.g. a warm start from
/// a previous window) are tried first.
FitResult fit(const std::vector<double>& y, const FitSpec& spec,
              const StartSearchConfig& start_cfg = {},
              const LocalSearchConfig& local_cfg = {},
              const std::vector<Eigen::VectorXd>& extra_starts = {},
              int workers = 1);

/// Runs the retry ladder for one starting point; empty when the start fails
/// the acceptance criteria at every box width.
std::optional<FitResult> fit_single_start(const std::vector<double>& y,
                                          const FitSpec& spec,
                                          const Eigen::VectorXd& start,
                                          const LocalSearchConfig& local_cfg);

} // namespace ddms
