#pragma once

#include <stdexcept>

namespace ddms {

enum class LinkKind { Logit, ArandaOrdaz, Cloglog };

/// Which inverse-link maps a linear predictor to a stay-probability.
/// `lambda` is meaningful only for ArandaOrdaz and must be positive.
struct LinkSpec {
  LinkKind kind = LinkKind::Logit;
  double lambda = 1.0;

  static LinkSpec logit() { return {LinkKind::Logit, 1.0}; }
  static LinkSpec aranda_ordaz(double lambda) {
    if (!(lambda > 0.0))
      throw std::domain_error("Aranda-Ordaz lambda must be positive");
    return {LinkKind::ArandaOrdaz, lambda};
  }
  static LinkSpec cloglog() { return {LinkKind::Cloglog, 0.0}; }
};

/// Aranda-Ordaz transform g(y; lambda) = log(((1-y)^(-lambda) - 1) / lambda),
/// mapping (0,1) -> R. Strictly increasing in y.
double ao_link(double y, double lambda);

/// Inverse transform g^{-1}(x; lambda) = 1 - (1 + lambda e^x)^(-1/lambda).
/// Evaluated as -expm1(-log1p(lambda e^x)/lambda) with a large-x branch using
/// x + log(lambda), so extreme predictors neither overflow nor lose the
/// complement. lambda = 1 reproduces the logistic exactly; lambda -> 0+ tends
/// to the cloglog inverse 1 - exp(-exp(x)).
double ao_inverse(double x, double lambda);

/// Logistic e^x / (1 + e^x), computed through the 1/(1 + e^{-x}) branch for
/// positive x so large |x| saturates without overflow.
double logit_inverse(double x);

/// log(y / (1-y)).
double logit_link(double y);

/// 1 - exp(-exp(x)), the lambda -> 0 limit of ao_inverse.
double cloglog_inverse(double x);

/// log(-log(1-y)).
double cloglog_link(double y);

/// Dispatch on the link spec: predictor -> probability in (0,1).
double inverse_link(const LinkSpec& link, double x);

/// Dispatch on the link spec: probability -> predictor.
double link_value(const LinkSpec& link, double y);

/// Clamp applied to probabilities before they enter log-likelihood terms
/// (keeps log() away from 0 and 1).
inline constexpr double kProbClamp = 1e-12;
inline double clamp_probability(double p) {
  if (p < kProbClamp) return kProbClamp;
  if (p > 1.0 - kProbClamp) return 1.0 - kProbClamp;
  return p;
}

/// Stay probability P(S_t = i | S_{t-1} = i, D = d) = g^{-1}(gamma1 +
/// gamma2 * min(d, tau)). Identical for all d >= tau.
double stay_probability(const LinkSpec& link, double gamma1, double gamma2,
                        int d, int tau);

} // namespace ddms
