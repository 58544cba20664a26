#include "mdpjls/synth.hpp"

#include <algorithm>
#include <cmath>

#include "mdpjls/lp.hpp"

namespace mdpjls {

double OccupationSolution::max_identity_residual(const Mdp& mdp) const {
  const int n = int(p_inf.size());
  const int na = mdp.num_actions();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int s = 0; s < na; ++s) row += pi_hat(i, s);
    worst = std::max(worst, std::fabs(row - p_inf[i]));
  }
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    double col = 0.0;
    for (int i = 0; i < n; ++i) col += p_hat(i, j);
    worst = std::max(worst, std::fabs(col - p_inf[j]));
    total += p_inf[j];
  }
  worst = std::max(worst, std::fabs(total - 1.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int s = 0; s < na; ++s) acc += mdp.t(i, s, j) * pi_hat(i, s);
      worst = std::max(worst, std::fabs(p_hat(i, j) - acc));
    }
  return worst;
}

namespace {

// Extra tightening of the stability row so the margin still holds after the
// policy is recovered and the chain re-analyzed (LP residual + consistency
// slack both eat into it).
constexpr double kRecoverySlack = 2e-8;

struct LpLayout {
  int n = 0, na = 0;
  int pi_hat0 = 0, p_inf0 = 0, p_hat0 = 0, total = 0;
  int pi_hat(int i, int s) const { return pi_hat0 + i * na + s; }
  int p_inf(int i) const { return p_inf0 + i; }
  int p_hat(int i, int j) const { return p_hat0 + i * n + j; }
};

LpLayout make_layout(const Mdp& mdp) {
  LpLayout l;
  l.n = mdp.num_states();
  l.na = mdp.num_actions();
  l.pi_hat0 = 0;
  l.p_inf0 = l.n * l.na;
  l.p_hat0 = l.p_inf0 + l.n;
  l.total = l.p_hat0 + l.n * l.n;
  return l;
}

// Shared occupancy constraints of both LPs.
LpProblem occupation_lp(const MdpJls& jls, const LpLayout& l, double eps) {
  const Mdp& mdp = jls.mdp;
  LpProblem lp;
  lp.objective.assign(l.total, 0.0);
  for (int i = 0; i < l.n; ++i) lp.objective[l.p_inf(i)] = jls.costs[i];
  lp.lower_bounds.assign(l.total, 0.0);
  for (int i = 0; i < l.n; ++i) lp.lower_bounds[l.p_inf(i)] = eps;

  int unavailable = 0;
  for (int i = 0; i < l.n; ++i)
    for (int s = 0; s < l.na; ++s)
      if (!mdp.available[i][s]) ++unavailable;

  const int rows = l.n + 1 + l.n + l.n * l.n + unavailable;
  lp.eq_a = Mat(rows, l.total);
  lp.eq_b.assign(rows, 0.0);
  int r = 0;
  for (int i = 0; i < l.n; ++i, ++r) {  // pi_hat 1 = p_inf
    for (int s = 0; s < l.na; ++s) lp.eq_a(r, l.pi_hat(i, s)) = 1.0;
    lp.eq_a(r, l.p_inf(i)) = -1.0;
  }
  for (int i = 0; i < l.n; ++i) lp.eq_a(r, l.p_inf(i)) = 1.0;  // 1' p_inf = 1
  lp.eq_b[r] = 1.0;
  ++r;
  for (int j = 0; j < l.n; ++j, ++r) {  // P_hat' 1 = p_inf
    for (int i = 0; i < l.n; ++i) lp.eq_a(r, l.p_hat(i, j)) = 1.0;
    lp.eq_a(r, l.p_inf(j)) = -1.0;
  }
  for (int i = 0; i < l.n; ++i)  // P_hat_ij = sum_sigma T(i,sigma,j) pi_hat(i,sigma)
    for (int j = 0; j < l.n; ++j, ++r) {
      lp.eq_a(r, l.p_hat(i, j)) = 1.0;
      for (int s = 0; s < l.na; ++s)
        if (mdp.available[i][s]) lp.eq_a(r, l.pi_hat(i, s)) = -mdp.t(i, s, j);
    }
  for (int i = 0; i < l.n; ++i)  // unavailable actions carry no occupation mass
    for (int s = 0; s < l.na; ++s)
      if (!mdp.available[i][s]) {
        lp.eq_a(r, l.pi_hat(i, s)) = 1.0;
        ++r;
      }
  return lp;
}

// Solution recovery plus the from-scratch re-analysis both LPs share.
P1Outcome recover(const MdpJls& jls, const LpLayout& l, const SolveReport& rep, double eps,
                  const std::string& method, bool mode_dependent) {
  P1Outcome out;
  if (rep.status == SolveStatus::Infeasible) {
    out.note = "LP infeasible: " + rep.note;
    return out;
  }
  if (!rep.ok()) throw SolverFailure("p1 synthesis LP: " + to_string(rep.status) + " " + rep.note);

  SynthesisResult& res = out.result;
  res.method = method;
  res.mode_dependent = mode_dependent;
  res.occupation.epsilon = eps;
  res.occupation.pi_hat = Mat(l.n, l.na);
  res.occupation.p_hat = Mat(l.n, l.n);
  res.occupation.p_inf.resize(l.n);
  for (int i = 0; i < l.n; ++i) {
    res.occupation.p_inf[i] = rep.y[l.p_inf(i)];
    for (int s = 0; s < l.na; ++s) res.occupation.pi_hat(i, s) = rep.y[l.pi_hat(i, s)];
    for (int j = 0; j < l.n; ++j) res.occupation.p_hat(i, j) = rep.y[l.p_hat(i, j)];
  }

  // pi = diag(p)^-1 pi_hat; divide by the actual row mass so rows are exactly
  // stochastic (the row mass equals p_inf up to the LP residual).
  res.policy.probs = Mat(l.n, l.na);
  for (int i = 0; i < l.n; ++i) {
    double mass = 0.0;
    for (int s = 0; s < l.na; ++s) mass += std::max(0.0, res.occupation.pi_hat(i, s));
    if (mass <= 0.0) throw ConsistencyFailure("p1 recovery: empty occupation row");
    for (int s = 0; s < l.na; ++s)
      res.policy.probs(i, s) = std::max(0.0, res.occupation.pi_hat(i, s)) / mass;
  }
  res.chain = induce_chain(jls.mdp, res.policy);

  try {
    res.analysis = stationary_distribution(res.chain);
  } catch (const NonUnichain& e) {
    throw ConsistencyFailure(std::string("p1 recovery: ") + e.what());
  }
  if (res.analysis.classification == ChainClass::UnichainPeriodic)
    res.warnings.push_back(
        "induced chain is a periodic unichain; stationary frequencies assume ergodicity");

  double dev = 0.0;
  for (int i = 0; i < l.n; ++i)
    dev = std::max(dev, std::fabs(res.analysis.p_inf[i] - res.occupation.p_inf[i]));
  if (dev > 1e-8)
    throw ConsistencyFailure("p1 recovery: recomputed stationary distribution deviates by " +
                             std::to_string(dev));

  res.objective = dot(jls.costs, res.analysis.p_inf);
  out.feasible = true;
  return out;
}

}  // namespace

P1Outcome synthesize_p1_independent(const MdpJls& jls, double alpha, double mu, double eps,
                                    double gamma0, double tighten) {
  jls.validate();
  const double th = threshold(alpha, mu);
  const LpLayout l = make_layout(jls.mdp);
  LpProblem lp = occupation_lp(jls, l, eps);

  // 1 - Tr(P_hat) <= th - gamma0 - tighten
  lp.le_a = Mat(1, l.total);
  for (int i = 0; i < l.n; ++i) lp.le_a(0, l.p_hat(i, i)) = -1.0;
  lp.le_b = {th - gamma0 - tighten - 1.0};

  P1Outcome out = recover(jls, l, solve_lp(lp, 1e-9), eps, "p1-ind", false);
  if (!out.feasible) return out;

  SynthesisResult& res = out.result;
  res.alpha_uniform = alpha;
  res.mu_uniform = mu;
  res.margin = th - res.analysis.p_jump;
  if (res.margin <= 0.0)
    throw ConsistencyFailure("p1-ind: recomputed jump probability exceeds the threshold");
  return out;
}

P1Outcome synthesize_p1_dependent(const MdpJls& jls, const LyapunovCertificate& cert, double eps,
                                  double gamma0, double tighten) {
  jls.validate();
  if (cert.num_modes() != jls.num_modes())
    throw DimensionMismatch("p1-dep: certificate does not match the model");
  const LpLayout l = make_layout(jls.mdp);
  LpProblem lp = occupation_lp(jls, l, eps);

  // sum_i (sum_{j != i} P_hat_ji) ln(mu_i) + p_inf_i ln(1 - alpha_i) <= -gamma0 - tighten
  lp.le_a = Mat(1, l.total);
  for (int i = 0; i < l.n; ++i) {
    const double lmu = std::log(cert.mu_mode[i]);
    for (int j = 0; j < l.n; ++j)
      if (j != i) lp.le_a(0, l.p_hat(j, i)) = lmu;
    lp.le_a(0, l.p_inf(i)) += std::log(1.0 - cert.alpha[i]);
  }
  lp.le_b = {-gamma0 - tighten};

  P1Outcome out = recover(jls, l, solve_lp(lp, 1e-9), eps, "p1-dep", true);
  if (!out.feasible) return out;

  SynthesisResult& res = out.result;
  res.alpha_mode = cert.alpha;
  res.mu_mode = cert.mu_mode;
  res.alpha_uniform = cert.alpha_uniform;
  res.mu_uniform = cert.mu_uniform;
  double lhs = 0.0;
  for (int i = 0; i < l.n; ++i)
    lhs += res.analysis.inbound[i] * std::log(cert.mu_mode[i]) +
           res.analysis.p_inf[i] * std::log(1.0 - cert.alpha[i]);
  res.margin = -lhs;
  if (res.margin <= 0.0)
    throw ConsistencyFailure("p1-dep: recomputed mode-dependent condition not satisfied");
  return out;
}

RobustVerdict verify_robust_independent(const Policy& policy, const MdpJls& jls_estimate,
                                        double delta, double alpha, double mu) {
  Dtmc chain = induce_chain(jls_estimate.mdp, policy);
  StationaryAnalysis st = stationary_distribution(chain);
  DeltaBound bound = delta_bounds(chain, delta);
  RobustVerdict v;
  v.delta = delta;
  v.nominal_lhs = st.p_jump;
  v.robust_lhs = st.p_jump + bound.pjump_excess;
  v.rhs = threshold(alpha, mu);
  v.satisfied = v.robust_lhs < v.rhs;
  return v;
}

RobustVerdict verify_robust_dependent(const Policy& policy, const MdpJls& jls_estimate,
                                      double delta, const LyapunovCertificate& cert) {
  Dtmc chain = induce_chain(jls_estimate.mdp, policy);
  StationaryAnalysis st = stationary_distribution(chain);
  DeltaBound bound = delta_bounds(chain, delta);
  const int n = chain.num_states();
  RobustVerdict v;
  v.delta = delta;
  v.rhs = 0.0;
  for (int i = 0; i < n; ++i) {
    const double lmu = std::log(cert.mu_mode[i]);
    const double lal = std::log(1.0 - cert.alpha[i]);
    v.nominal_lhs += st.inbound[i] * lmu + st.p_inf[i] * lal;
    // N Delta^2 max_j |h#_ij| = Delta * stationary_dev_i
    v.robust_lhs += (st.inbound[i] + bound.inbound_excess[i]) * lmu +
                    (st.p_inf[i] + delta * bound.stationary_dev[i]) * lal;
  }
  v.satisfied = v.robust_lhs < v.rhs;
  return v;
}

P1Outcome synthesize_p1_robust(const MdpJls& jls_estimate, double delta,
                               const LyapunovCertificate& cert, double eps, RobustMode mode) {
  auto solve_at = [&](double tighten) -> P1Outcome {
    if (mode == RobustMode::Independent)
      return synthesize_p1_independent(jls_estimate, cert.alpha_uniform, cert.mu_uniform, eps,
                                       kDefaultGamma0, tighten);
    return synthesize_p1_dependent(jls_estimate, cert, eps, kDefaultGamma0, tighten);
  };

  P1Outcome nominal = solve_at(0.0);
  if (!nominal.feasible) {
    nominal.note = "nominal LP infeasible; " + nominal.note;
    return nominal;
  }
  const double margin0 = nominal.result.margin;

  std::vector<double> grid{0.0};
  for (int k = 10; k >= 1; --k) grid.push_back(margin0 * std::ldexp(1.0, -k));

  for (double tighten : grid) {
    P1Outcome attempt;
    try {
      attempt = tighten == 0.0 ? nominal : solve_at(tighten);
    } catch (const ConsistencyFailure&) {
      continue;
    }
    if (!attempt.feasible) continue;
    RobustVerdict v =
        mode == RobustMode::Independent
            ? verify_robust_independent(attempt.result.policy, jls_estimate, delta,
                                        cert.alpha_uniform, cert.mu_uniform)
            : verify_robust_dependent(attempt.result.policy, jls_estimate, delta, cert);
    if (v.satisfied) {
      attempt.result.robust = v;
      attempt.result.method =
          mode == RobustMode::Independent ? "p1-robust-ind" : "p1-robust-dep";
      attempt.note = "verified at tightening " + std::to_string(tighten);
      return attempt;
    }
  }
  P1Outcome out;
  out.note = "no tightening on the grid passed the robust verification";
  return out;
}

}  // namespace mdpjls
