#pragma once

#include <stdexcept>
#include <string>

namespace ddms {

/// Thrown when the extended chain admits no unconditional distribution:
/// the Gram matrix A'A of the stacked system [I - P; 1'] is numerically
/// singular (reciprocal condition number below the feasibility threshold).
class SingularChain : public std::runtime_error {
public:
  SingularChain(double rcond, double threshold)
      : std::runtime_error("singular extended chain: rcond(A'A) = " +
                           std::to_string(rcond) + " < " +
                           std::to_string(threshold)),
        rcond_(rcond) {}
  double rcond() const noexcept { return rcond_; }

private:
  double rcond_;
};

/// Thrown by the filter when a per-step normalizer 1'(xi (*) eta) is not
/// strictly positive, i.e. every state density underflowed at some
/// observation.
class DegenerateLikelihood : public std::runtime_error {
public:
  explicit DegenerateLikelihood(std::size_t t)
      : std::runtime_error("degenerate likelihood: normalizer <= 0 at t = " +
                           std::to_string(t)) {}
};

/// Thrown by forecast-comparison tests when the loss differential series has
/// zero variance (identical losses).
class DegenerateDifferences : public std::runtime_error {
public:
  DegenerateDifferences()
      : std::runtime_error("loss differential has zero variance") {}
};

/// Thrown by fit() after every retained start has failed the first-order
/// optimality or proximity criteria. Carries per-start diagnostics.
class EstimationFailed : public std::runtime_error {
public:
  explicit EstimationFailed(std::string diagnostics)
      : std::runtime_error("estimation failed: no start met the acceptance "
                           "criteria"),
        diagnostics_(std::move(diagnostics)) {}
  const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
  std::string diagnostics_;
};

} // namespace ddms
