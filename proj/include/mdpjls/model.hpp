#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mdpjls/mat.hpp"
#include "mdpjls/numerics.hpp"

namespace mdpjls {

struct SchemaError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct PolicyMismatch : Error {
  using Error::Error;
};
struct TooManyPolicies : Error {
  using Error::Error;
};

/// Mode-indexed family of n x n dynamics matrices.
struct SwitchedSystem {
  int state_dim = 0;
  std::vector<std::string> mode_names;
  std::vector<Mat> dynamics;

  int num_modes() const { return int(dynamics.size()); }
  void validate() const;
};

/// Finite MDP over the modes. transition[sigma] is the N x N matrix T_sigma;
/// an all-zero row marks the action unavailable in that state.
struct Mdp {
  std::vector<std::string> state_names;
  int initial_state = 0;
  std::vector<std::string> action_names;
  std::vector<Mat> transition;
  std::vector<std::vector<bool>> available;  // [state][action]

  int num_states() const { return int(state_names.size()); }
  int num_actions() const { return int(action_names.size()); }
  double t(int i, int sigma, int j) const { return transition[sigma](i, j); }
  int num_available(int state) const;
  void validate() const;
};

/// Randomized policy pi(s, sigma), rows on the probability simplex.
struct Policy {
  Mat probs;  // N x |Sigma|

  void validate_for(const Mdp& mdp, double tol = 1e-9) const;
};

/// Induced discrete-time Markov chain.
struct Dtmc {
  Mat p;  // N x N row-stochastic
  int initial_state = 0;

  int num_states() const { return p.rows(); }
  void validate(double tol = 1e-9) const;
};

/// Switched dynamics + MDP + per-mode costs.
struct MdpJls {
  SwitchedSystem system;
  Mdp mdp;
  std::vector<double> costs;
  // Provenance of each mode's dynamics when parsed from a continuous block.
  std::vector<std::optional<Discretization>> discretization;

  int num_modes() const { return system.num_modes(); }
  void validate() const;
};

/// Parses and fully validates a model document (JSON text).
MdpJls parse_model(const std::string& document);
std::string serialize_model(const MdpJls& m);

/// P_ij = sum_sigma T(i, sigma, j) pi(i, sigma).
Dtmc induce_chain(const Mdp& mdp, const Policy& policy);

/// All maps state -> available action as 0/1 policies, lexicographic in the
/// action indices. Guard: at most 2^20 policies.
std::vector<Policy> enumerate_deterministic_policies(const Mdp& mdp);
std::uint64_t count_deterministic_policies(const Mdp& mdp);

}  // namespace mdpjls
