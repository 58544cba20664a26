#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdpjls/mat.hpp"
#include "mdpjls/model.hpp"

namespace mdpjls {

/// Mean-square stability verdict from the augmented spectral radius.
struct MsVerdict {
  double rho = 0.0;
  bool stable = false;
  std::string mode_of_failure;
};

/// The Nn^2 x Nn^2 matrix (P' (x) I) diag(A_i (x) A_i).
Mat build_augmented(const SwitchedSystem& system, const Dtmc& chain);

/// rho of the augmented operator; dense eigenvalues at small size, Arnoldi on
/// the second-moment map beyond that.
MsVerdict check_ms(const SwitchedSystem& system, const Dtmc& chain, double margin = 1e-9);

/// Theorem-style LMI predicate: V_i > 0 and V_j - sum_i P_ij A_i V_i A_i' > 0.
bool check_lmi_condition(const SwitchedSystem& system, const Dtmc& chain,
                         const std::vector<Mat>& v, double margin = 1e-9);

/// One application of the second-moment operator: Q_j+ = sum_i P_ij A_i Q_i A_i'.
std::vector<Mat> second_moment_step(const SwitchedSystem& system, const Dtmc& chain,
                                    const std::vector<Mat>& q);

struct DeterministicStudy {
  Policy best_policy;
  double best_rho = 0.0;
  std::vector<std::pair<Policy, double>> table;
};

/// Evaluates every deterministic policy; parallel over policies.
DeterministicStudy deterministic_study(const MdpJls& jls);

enum class MsStatus { Success, Infeasible, NotCertified, Failed };

struct MsSynthesis {
  MsStatus status = MsStatus::Failed;
  Policy policy;
  Dtmc chain;
  MsVerdict verdict;
  std::vector<Mat> v;  // Lyapunov witness (diagonal alphas for the SDP route)
  int iterations = 0;
  double gamma = 0.0;
  std::string note;

  bool ok() const { return status == MsStatus::Success; }
};

/// Occupation-style SDP relaxation with V_i = alpha_i I and K = pi * alpha.
MsSynthesis synthesize_ms_sdp(const MdpJls& jls, double gamma0 = 1e-7);

struct CdOptions {
  int max_iter = 500;
  double prox_weight = 1e-3;   // L
  double gamma_margin = 1e-8;  // accept once gamma exceeds this
  double perturb = 1e-3;       // delta, uniform policy perturbation
  std::uint64_t seed = 0;
  double gamma_cap = 1.0;      // normalization bound on the slack
};

/// Coordinate descent alternating the V-step and pi-step with proximal terms.
MsSynthesis synthesize_ms_cd(const MdpJls& jls, const CdOptions& opts = {});

}  // namespace mdpjls
