#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdpjls/lyapunov.hpp"
#include "mdpjls/markov.hpp"
#include "mdpjls/model.hpp"

namespace mdpjls {

struct ConsistencyFailure : Error {
  using Error::Error;
};

inline constexpr double kDefaultEpsilon = 1e-6;
inline constexpr double kDefaultGamma0 = 1e-7;

/// LP variables after the change of variables pi_hat = diag(p) pi,
/// P_hat = diag(p) P.
struct OccupationSolution {
  Mat pi_hat;
  std::vector<double> p_inf;
  Mat p_hat;
  double epsilon = kDefaultEpsilon;

  /// Worst violation of the reconstruction identities against the MDP.
  double max_identity_residual(const Mdp& mdp) const;
};

struct RobustVerdict {
  double nominal_lhs = 0.0;
  double robust_lhs = 0.0;
  double rhs = 0.0;
  double delta = 0.0;
  bool satisfied = false;
};

struct SynthesisResult {
  Policy policy;
  Dtmc chain;
  StationaryAnalysis analysis;
  double margin = 0.0;     // threshold - P_jump, or -(mode-dependent LHS)
  double objective = 0.0;  // sum_s c(s) p_inf(s)
  std::string method;
  bool mode_dependent = false;
  double alpha_uniform = 0.0;
  double mu_uniform = 0.0;
  std::vector<double> alpha_mode;
  std::vector<double> mu_mode;
  OccupationSolution occupation;
  std::vector<std::string> warnings;
  std::optional<RobustVerdict> robust;
};

struct P1Outcome {
  bool feasible = false;
  SynthesisResult result;
  std::string note;
};

/// Mode-independent LP: occupancy constraints plus 1 - Tr(P_hat) bounded by
/// the jump threshold for (alpha, mu).
P1Outcome synthesize_p1_independent(const MdpJls& jls, double alpha, double mu,
                                    double eps = kDefaultEpsilon, double gamma0 = kDefaultGamma0,
                                    double tighten = 0.0);

/// Mode-dependent LP: stability row sum_i (sum_{j!=i} P_hat_ji) ln(mu_i)
/// + p_inf_i ln(1-alpha_i) <= -gamma0.
P1Outcome synthesize_p1_dependent(const MdpJls& jls, const LyapunovCertificate& cert,
                                  double eps = kDefaultEpsilon, double gamma0 = kDefaultGamma0,
                                  double tighten = 0.0);

RobustVerdict verify_robust_independent(const Policy& policy, const MdpJls& jls_estimate,
                                        double delta, double alpha, double mu);

RobustVerdict verify_robust_dependent(const Policy& policy, const MdpJls& jls_estimate,
                                      double delta, const LyapunovCertificate& cert);

enum class RobustMode { Independent, Dependent };

/// Verified outer loop: scan a tightening grid, return the least-tightened LP
/// solution whose own chain passes the robust verdict at this delta.
P1Outcome synthesize_p1_robust(const MdpJls& jls_estimate, double delta,
                               const LyapunovCertificate& cert, double eps, RobustMode mode);

}  // namespace mdpjls
