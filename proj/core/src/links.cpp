#include "ddms/links.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ddms {

namespace {

// log(1 + e^t) without overflow at either end.
double softplus(double t) {
  if (t > 36.0) return t;
  if (t < -36.0) return std::exp(t);
  return std::log1p(std::exp(t));
}

// Keep results strictly inside (0,1).
double to_open_unit(double p) {
  const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  if (p >= 1.0) return hi;
  if (p <= 0.0) return std::numeric_limits<double>::min();
  return p;
}

} // namespace

double ao_link(double y, double lambda) {
  if (!(y > 0.0 && y < 1.0))
    throw std::domain_error("ao_link: y must lie in (0,1)");
  if (!(lambda > 0.0))
    throw std::domain_error("ao_link: lambda must be positive");
  // (1-y)^(-lambda) - 1 = expm1(u) with u = -lambda * log(1-y) > 0.
  const double u = -lambda * std::log1p(-y);
  double log_num;
  if (u > 36.0) {
    log_num = u; // log(expm1(u)) = u up to e^{-u}
  } else {
    log_num = std::log(std::expm1(u));
  }
  return log_num - std::log(lambda);
}

double ao_inverse(double x, double lambda) {
  if (!(lambda > 0.0))
    throw std::domain_error("ao_inverse: lambda must be positive");
  // s = log(1 + lambda e^x) / lambda, result = 1 - e^{-s}.
  const double s = softplus(x + std::log(lambda)) / lambda;
  return to_open_unit(-std::expm1(-s));
}

double logit_inverse(double x) {
  double p;
  if (x >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    p = e / (1.0 + e);
  }
  return to_open_unit(p);
}

double logit_link(double y) {
  if (!(y > 0.0 && y < 1.0))
    throw std::domain_error("logit_link: y must lie in (0,1)");
  return std::log(y) - std::log1p(-y);
}

double cloglog_inverse(double x) {
  // 1 - exp(-exp(x)); exp(x) saturates safely for large x.
  const double e = x > 700.0 ? std::numeric_limits<double>::infinity()
                             : std::exp(x);
  return to_open_unit(-std::expm1(-e));
}

double cloglog_link(double y) {
  if (!(y > 0.0 && y < 1.0))
    throw std::domain_error("cloglog_link: y must lie in (0,1)");
  return std::log(-std::log1p(-y));
}

double inverse_link(const LinkSpec& link, double x) {
  switch (link.kind) {
    case LinkKind::Logit: return logit_inverse(x);
    case LinkKind::ArandaOrdaz: return ao_inverse(x, link.lambda);
    case LinkKind::Cloglog: return cloglog_inverse(x);
  }
  throw std::logic_error("inverse_link: unknown link kind");
}

double link_value(const LinkSpec& link, double y) {
  switch (link.kind) {
    case LinkKind::Logit: return logit_link(y);
    case LinkKind::ArandaOrdaz: return ao_link(y, link.lambda);
    case LinkKind::Cloglog: return cloglog_link(y);
  }
  throw std::logic_error("link_value: unknown link kind");
}

double stay_probability(const LinkSpec& link, double gamma1, double gamma2,
                        int d, int tau) {
  if (d < 1) throw std::domain_error("stay_probability: d must be >= 1");
  if (tau < 1) throw std::domain_error("stay_probability: tau must be >= 1");
  const double capped = static_cast<double>(std::min(d, tau));
  return inverse_link(link, gamma1 + gamma2 * capped);
}

} // namespace ddms
