#pragma once

#include <vector>

#include "mdpjls/mat.hpp"
#include "mdpjls/model.hpp"

namespace mdpjls {

struct UnstableMode : Error {
  using Error::Error;
};
struct NotPositiveDefinite : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct SolverFailure : Error {
  using Error::Error;
};

/// Per-mode quadratic Lyapunov data: V_s(x) = x' M_s x with decay alpha_s
/// inside mode s and growth mu(s, s') at jumps into s from s'.
struct LyapunovCertificate {
  std::vector<Mat> m;
  std::vector<double> alpha;
  Mat mu_pair;                  // mu(s, s'), destination s, source s'; 0 on the diagonal
  double alpha_uniform = 0.0;   // min_s alpha_s
  double mu_uniform = 0.0;      // max over pairs
  std::vector<double> mu_mode;  // per destination: max over sources

  int num_modes() const { return int(m.size()); }
};

inline constexpr double kMuFloor = 1.0 + 1e-9;
inline constexpr double kDefaultBisectTol = 1.0 / 128.0;

struct AlphaResult {
  double alpha = 0.0;
  Mat m;
  bool flip_checked = false;  // infeasibility probed at alpha + bisect_tol
};

/// Largest decay rate on a bisection grid over [0, 1): each probe is the LMI
/// feasibility  M' = M >= I,  A'MA <= (1-alpha)M. The witness M is then
/// re-minimized in trace at the final alpha so downstream mu values are
/// reproducible.
AlphaResult compute_alpha(const Mat& a, double bisect_tol = kDefaultBisectTol);

/// Smallest growth factor with M_s <= mu M_t: the top generalized eigenvalue
/// of (M_s, M_t), clamped to stay > 1.
double compute_mu(const Mat& m_s, const Mat& m_t);

/// Runs compute_alpha per mode and compute_mu per ordered pair, then fills
/// the aggregates used by the mode-independent conditions.
LyapunovCertificate certify(const SwitchedSystem& system, double bisect_tol = kDefaultBisectTol);

/// ln(1/(1-alpha)) / ln(mu); the jump-probability bound.
double threshold(double alpha, double mu);

/// True when the three LMI families of the certificate hold at the slack.
bool certificate_valid(const LyapunovCertificate& cert, const SwitchedSystem& system,
                       double slack = 1e-7);

}  // namespace mdpjls
