#pragma once

#include <cstdint>
#include <vector>

#include "ddms/filter.hpp"
#include "ddms/models.hpp"
#include "ddms/rng.hpp"

namespace ddms {

/// Data-generating configuration. Per-replication substreams are derived
/// deterministically from (seed, rep), so replications may run in any order
/// or in parallel without changing output.
struct SimConfig {
  DdmsParams model;
  int n_keep = 1000;
  int n_burn = 200;
  std::uint64_t seed = 0;
  int n_reps = 1;
};

struct SimPath {
  std::vector<double> y;
  std::vector<ExtendedState> states;
  std::vector<double> sigma2; // true conditional variance path
};

/// Simulates one replication: the initial (regime, duration) pair is drawn
/// from the unconditional distribution, the regime evolves through the stay
/// probabilities, durations through next_duration, and the first n_burn
/// observations are discarded. Throws SingularChain for non-ergodic DGPs.
SimPath simulate_path(const SimConfig& config, int rep);

struct HoldoutSplit {
  std::vector<double> train;
  std::vector<double> test;
};

/// Splits off the last h_max observations for forecast evaluation.
HoldoutSplit holdout_split(const std::vector<double>& y, int h_max);

} // namespace ddms
