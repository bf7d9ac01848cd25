#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace ddms {

/// Deterministic per-stream random source. Streams are keyed by
/// (seed, stream): the engine is a mt19937_64 seeded via seed_seq over both
/// words, so parallel consumers drawing from distinct streams reproduce the
/// same numbers regardless of scheduling. Standard normals use the inverse
/// CDF (not std::normal_distribution, whose output is
/// implementation-defined).
class StreamRng {
public:
  StreamRng(std::uint64_t seed, std::uint64_t stream);

  /// Uniform draw strictly inside (0,1): ((x >> 11) + 0.5) * 2^-53.
  double uniform();

  /// Standard normal via the inverse CDF.
  double normal();

  /// Index draw from a probability vector (entries assumed to sum to 1).
  int categorical(const Eigen::VectorXd& probs);

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

/// Human-readable description of the generator, recorded in run manifests.
const char* rng_description();

/// Inverse standard-normal CDF used by StreamRng::normal.
double normal_quantile(double p);

} // namespace ddms
