#include "ddms/simulate.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <stdexcept>

namespace ddms {

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double StreamRng::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double StreamRng::normal() { return normal_quantile(uniform()); }

int StreamRng::categorical(const Eigen::VectorXd& probs) {
  const double u = uniform();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

const char* rng_description() {
  return "mt19937_64 seeded by seed_seq(seed, stream); uniforms "
         "((x>>11)+0.5)*2^-53; normals by inverse CDF (Boost.Math quantile)";
}

double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> dist;
  return boost::math::quantile(dist, p);
}

namespace {

void validate(const SimConfig& config, int rep) {
  if (config.n_keep < 1)
    throw std::invalid_argument("simulate_path: n_keep must be >= 1");
  if (config.n_burn < 0)
    throw std::invalid_argument("simulate_path: n_burn must be >= 0");
  if (rep < 0) throw std::invalid_argument("simulate_path: rep must be >= 0");
}

struct Emission {
  double mean;
  double sigma;    // conditional std. deviation
  double variance; // sigma^2, the forecast target
};

Emission emission_for(const DdmsParams& model, int regime, int duration) {
  if (const auto* ms = std::get_if<MeanSwitchParams>(&model)) {
    const double mu = regime == 0 ? ms->mu0 : ms->mu1;
    const double sd = regime == 0 ? ms->sigma0 : ms->sigma1;
    return {mu, sd, sd * sd};
  }
  const auto& dv = std::get<DurationVolParams>(model);
  const double sd = state_sigma(dv, regime, duration);
  return {0.0, sd, sd * sd};
}

} // namespace

SimPath simulate_path(const SimConfig& config, int rep) {
  validate(config, rep);
  const auto& model = config.model;
  const int tau = model_tau(model);
  const auto tm = build_transition_matrix(model_link(model),
                                          model_gammas(model), tau);
  const Eigen::VectorXd pi = unconditional_probabilities(tm);

  StreamRng rng(config.seed, static_cast<std::uint64_t>(rep));
  ExtendedState state = state_from_index(rng.categorical(pi), tau);

  const int total = config.n_burn + config.n_keep;
  SimPath out;
  out.y.reserve(config.n_keep);
  out.states.reserve(config.n_keep);
  out.sigma2.reserve(config.n_keep);
  for (int t = 0; t < total; ++t) {
    const double p_stay =
        regime_stay_probability(model_link(model), model_gammas(model),
                                state.regime, state.duration, tau);
    const bool stay = rng.uniform() < p_stay;
    state.duration = next_duration(state.duration, stay, tau);
    if (!stay) state.regime = 1 - state.regime;
    const auto em = emission_for(model, state.regime, state.duration);
    const double obs = em.mean + em.sigma * rng.normal();
    if (t >= config.n_burn) {
      out.y.push_back(obs);
      out.states.push_back(state);
      out.sigma2.push_back(em.variance);
    }
  }
  return out;
}

HoldoutSplit holdout_split(const std::vector<double>& y, int h_max) {
  if (h_max < 0) throw std::invalid_argument("holdout_split: h_max < 0");
  if (static_cast<std::size_t>(h_max) >= y.size())
    throw std::invalid_argument("holdout_split: h_max leaves no training data");
  HoldoutSplit s;
  s.train.assign(y.begin(), y.end() - h_max);
  s.test.assign(y.end() - h_max, y.end());
  return s;
}

} // namespace ddms
