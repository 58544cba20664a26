#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdpjls/model.hpp"

namespace mdpjls {

/// Randomized method-comparison configuration; parsed from a JSON spec file.
struct StudySpec {
  std::uint64_t seed = 1;
  int instances = 25;
  int num_modes = 4;
  int state_dim = 4;
  int num_actions = 2;
  double rho_min = 0.63;
  double rho_max = 0.98;
  bool transportation_mdp = true;  // 4-mode, 2-action fixed transfer tensors
  std::vector<std::string> methods{"ms-cd", "ms-sdp", "p1-dep", "p1-ind"};
  int cd_max_iter = 500;
  double epsilon = 1e-6;
  double bisect_tol = 1.0 / 128.0;
};

StudySpec parse_study_spec(const std::string& document);
std::string serialize_study_spec(const StudySpec& spec);

struct MethodOutcome {
  std::string method;
  int successes = 0;
  std::vector<bool> success;      // per instance
  std::vector<double> seconds;    // per instance wall time of the solve
  double mean_seconds = 0.0;
  double median_seconds = 0.0;
};

struct StudyResult {
  StudySpec spec;
  std::vector<MethodOutcome> methods;
};

/// Draws one instance: dynamics scaled to a target spectral radius, the MDP
/// fixed (transportation tensors) or sampled row-stochastic.
MdpJls make_study_instance(const StudySpec& spec, int index);

/// Runs every requested method on every instance; parallel across instances.
/// Timing convention: p1 methods time the LP solve (coefficients are computed
/// beforehand and shared), ms methods time the full synthesis call.
StudyResult run_study(const StudySpec& spec);

std::string study_table(const StudyResult& result);
std::string study_json(const StudyResult& result);

}  // namespace mdpjls
