#pragma once

#include <fstream>
#include <json.hpp>
#include <string>

#include "ddms/backtest.hpp"
#include "ddms/csv.hpp"
#include "ddms/estimate.hpp"
#include "ddms/rng.hpp"

namespace ddms::cli {

// Exit codes: 0 success, 2 estimation failure, 3 input/schema error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitEstimation = 2;
inline constexpr int kExitInput = 3;

using json = nlohmann::json; // std::map-backed: keys serialize sorted

inline LinkKind parse_link(const std::string& s) {
  if (s == "logit") return LinkKind::Logit;
  if (s == "ao" || s == "aranda-ordaz") return LinkKind::ArandaOrdaz;
  if (s == "cloglog") return LinkKind::Cloglog;
  throw std::runtime_error("unknown link: " + s + " (logit|ao|cloglog)");
}

inline std::string link_name(LinkKind k) {
  switch (k) {
    case LinkKind::Logit: return "logit";
    case LinkKind::ArandaOrdaz: return "ao";
    case LinkKind::Cloglog: return "cloglog";
  }
  return "?";
}

inline ModelFamily parse_family(const std::string& s) {
  if (s == "mean-switch") return ModelFamily::MeanSwitch;
  if (s == "duration-vol") return ModelFamily::DurationVol;
  if (s == "garch") return ModelFamily::Garch;
  if (s == "ms-garch") return ModelFamily::MsGarch;
  throw std::runtime_error("unknown model family: " + s +
                           " (mean-switch|duration-vol|garch|ms-garch)");
}

inline std::string family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::MeanSwitch: return "mean-switch";
    case ModelFamily::DurationVol: return "duration-vol";
    case ModelFamily::Garch: return "garch";
    case ModelFamily::MsGarch: return "ms-garch";
  }
  return "?";
}

inline json theta_to_json(const Eigen::VectorXd& theta) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < theta.size(); ++i) arr.push_back(theta(i));
  return arr;
}

inline Eigen::VectorXd theta_from_json(const json& arr) {
  Eigen::VectorXd theta(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i)
    theta(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return theta;
}

inline std::string config_hash(const json& config) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx",
                static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

/// Every subcommand writes a manifest next to its outputs: the full config,
/// its hash, the seed and the RNG description, enough to reproduce the run.
inline void write_manifest(const std::string& path, const std::string& command,
                           const json& config) {
  json manifest;
  manifest["schema_version"] = "ddms.manifest.v1";
  manifest["command"] = command;
  manifest["config"] = config;
  manifest["config_hash"] = config_hash(config);
  manifest["rng"] = rng_description();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << manifest.dump(2) << "\n";
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

inline json fit_result_to_json(const FitSpec& spec, const FitResult& fr,
                               std::uint64_t seed) {
  json j;
  j["schema_version"] = "ddms.fit.v1";
  j["family"] = family_name(spec.family);
  j["link"] = link_name(spec.link);
  j["tau"] = spec.tau;
  j["theta"] = theta_to_json(fr.theta);
  j["loglik"] = fr.loglik;
  j["converged"] = fr.converged;
  j["n_starts_used"] = fr.n_starts_used;
  j["first_order_norm"] = fr.first_order_norm;
  j["boundary_proximity"] = fr.boundary_proximity;
  if (fr.lambda_hat) j["lambda_hat"] = *fr.lambda_hat;
  j["seed"] = seed;
  return j;
}

inline FitSpec fit_spec_from_json(const json& j) {
  FitSpec spec;
  spec.family = parse_family(j.at("family").get<std::string>());
  spec.link = parse_link(j.at("link").get<std::string>());
  spec.tau = j.at("tau").get<int>();
  return spec;
}

} // namespace ddms::cli
