#include "mdpjls/lyapunov.hpp"

#include <algorithm>
#include <cmath>

#include "mdpjls/eig.hpp"
#include "mdpjls/numerics.hpp"
#include "mdpjls/sdp.hpp"

namespace mdpjls {

namespace {

// Feasibility of { M >= I, A'MA <= (1-alpha) M } for fixed alpha.
SdpProblem alpha_problem(const Mat& a, double alpha, bool minimize_trace) {
  const int n = a.rows();
  SdpProblem p;
  const int g = p.add_group(n);

  SdpBlock lower;  // M - I >= 0
  lower.f0 = -1.0 * Mat::identity(n);
  lower.cong_terms.push_back({g, 1.0, Mat::identity(n)});
  p.blocks.push_back(std::move(lower));

  SdpBlock decay;  // (1-alpha) M - A'MA >= 0
  decay.f0 = Mat::zeros(n, n);
  decay.cong_terms.push_back({g, 1.0 - alpha, Mat::identity(n)});
  decay.cong_terms.push_back({g, -1.0, a.transpose()});
  p.blocks.push_back(std::move(decay));

  if (minimize_trace) {
    p.objective.assign(p.num_vars, 0.0);
    auto tr = svec(Mat::identity(n));
    for (size_t k = 0; k < tr.size(); ++k) p.objective[p.groups[g].offset + k] = tr[k];
  }
  return p;
}

bool alpha_feasible(const Mat& a, double alpha, Mat* witness) {
  SdpProblem p = alpha_problem(a, alpha, false);
  SdpOptions opts;
  opts.want_optimum = false;
  SolveReport rep = solve_sdp(p, 1e-9, opts);
  if (rep.status == SolveStatus::Feasible) {
    if (witness) {
      const auto& g = p.groups[0];
      *witness = unsvec(
          std::vector<double>(rep.y.begin() + g.offset, rep.y.begin() + g.offset + svec_dim(g.dim)),
          g.dim);
    }
    return true;
  }
  if (rep.status == SolveStatus::Infeasible) return false;
  throw SolverFailure("alpha feasibility probe: " + to_string(rep.status) + " " + rep.note);
}

}  // namespace

AlphaResult compute_alpha(const Mat& a, double bisect_tol) {
  if (!a.square()) throw DimensionMismatch("compute_alpha: square mode matrix required");
  if (!(bisect_tol > 0.0) || bisect_tol >= 1.0)
    throw DomainError("compute_alpha: bisection tolerance out of range");
  const double rho = spectral_radius(a);
  if (rho >= 1.0 - 1e-9)
    throw UnstableMode("compute_alpha: spectral radius " + std::to_string(rho) + " >= 1");

  AlphaResult out;
  double lo = 0.0, hi = 1.0;
  Mat witness;
  bool have_witness = false;
  const int steps = int(std::ceil(std::log2(1.0 / bisect_tol)));
  for (int k = 0; k < steps; ++k) {
    const double mid = 0.5 * (lo + hi);
    Mat w;
    if (alpha_feasible(a, mid, &w)) {
      lo = mid;
      witness = std::move(w);
      have_witness = true;
    } else {
      hi = mid;
    }
  }
  if (!have_witness) {
    if (!alpha_feasible(a, lo, &witness))
      throw SolverFailure("compute_alpha: infeasible at alpha = 0 despite rho < 1");
  }
  out.alpha = lo;
  out.flip_checked = hi - lo <= bisect_tol + 1e-15;

  // Fix the witness deterministically: minimal trace at the final alpha.
  SdpProblem p = alpha_problem(a, lo, true);
  SolveReport rep = solve_sdp(p, 1e-9);
  if (rep.status == SolveStatus::Optimal) {
    const auto& g = p.groups[0];
    out.m = unsvec(
        std::vector<double>(rep.y.begin() + g.offset, rep.y.begin() + g.offset + svec_dim(g.dim)),
        g.dim);
    out.m = out.m.symmetrized();
  } else {
    out.m = witness.symmetrized();
  }
  return out;
}

double compute_mu(const Mat& m_s, const Mat& m_t) {
  if (m_s.rows() != m_t.rows() || !m_s.square() || !m_t.square())
    throw DimensionMismatch("compute_mu: matching square inputs required");
  Mat ls, lt;
  if (!cholesky(m_s.symmetrized(), ls) || !cholesky(m_t.symmetrized(), lt))
    throw NotPositiveDefinite("compute_mu: inputs must be positive definite");
  // lambda_max of L_t^-1 M_s L_t^-T
  Mat w = forward_subst(lt, forward_subst(lt, m_s.symmetrized()).transpose());
  const auto eig = sym_eig(w.symmetrized());
  return std::max(kMuFloor, eig.values.back());
}

LyapunovCertificate certify(const SwitchedSystem& system, double bisect_tol) {
  system.validate();
  const int nmodes = system.num_modes();
  LyapunovCertificate cert;
  cert.m.resize(nmodes);
  cert.alpha.resize(nmodes);

  std::vector<std::string> failures(nmodes);
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < nmodes; ++s) {
    try {
      AlphaResult r = compute_alpha(system.dynamics[s], bisect_tol);
      cert.alpha[s] = r.alpha;
      cert.m[s] = r.m;
    } catch (const std::exception& e) {
      failures[s] = e.what();
    }
  }
  for (int s = 0; s < nmodes; ++s)
    if (!failures[s].empty())
      throw UnstableMode("mode " + std::to_string(s) + " (" + system.mode_names[s] +
                         "): " + failures[s]);

  cert.mu_pair = Mat(nmodes, nmodes);
  for (int s = 0; s < nmodes; ++s)
    for (int t = 0; t < nmodes; ++t)
      if (s != t) cert.mu_pair(s, t) = compute_mu(cert.m[s], cert.m[t]);

  cert.alpha_uniform = *std::min_element(cert.alpha.begin(), cert.alpha.end());
  cert.mu_uniform = kMuFloor;
  cert.mu_mode.assign(nmodes, kMuFloor);
  for (int s = 0; s < nmodes; ++s)
    for (int t = 0; t < nmodes; ++t) {
      if (s == t) continue;
      cert.mu_uniform = std::max(cert.mu_uniform, cert.mu_pair(s, t));
      cert.mu_mode[s] = std::max(cert.mu_mode[s], cert.mu_pair(s, t));
    }
  return cert;
}

double threshold(double alpha, double mu) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw DomainError("threshold: alpha must lie in (0,1)");
  if (!(mu > 1.0)) throw DomainError("threshold: mu must exceed 1");
  return std::log(1.0 / (1.0 - alpha)) / std::log(mu);
}

bool certificate_valid(const LyapunovCertificate& cert, const SwitchedSystem& system,
                       double slack) {
  const SymTol tol{slack, 1e-9};
  for (int s = 0; s < cert.num_modes(); ++s) {
    const Mat& m = cert.m[s];
    const Mat& a = system.dynamics[s];
    if (!(cert.alpha[s] > 0.0) || !(cert.alpha[s] < 1.0)) return false;
    Mat lower = m - Mat::identity(m.rows());
    if (!is_psd(lower, tol)) return false;
    Mat decay = (1.0 - cert.alpha[s]) * m - a.transpose() * m * a;
    if (!is_psd(decay.symmetrized(), tol)) return false;
    for (int t = 0; t < cert.num_modes(); ++t) {
      if (s == t) continue;
      if (!(cert.mu_pair(s, t) > 1.0)) return false;
      Mat jump = cert.mu_pair(s, t) * cert.m[t] - cert.m[s];
      if (!is_psd(jump.symmetrized(), tol)) return false;
    }
  }
  return true;
}

}  // namespace mdpjls
