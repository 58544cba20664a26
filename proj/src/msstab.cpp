#include "mdpjls/msstab.hpp"

#include <algorithm>
#include <cmath>

#include "mdpjls/eig.hpp"
#include "mdpjls/lyapunov.hpp"
#include "mdpjls/numerics.hpp"
#include "mdpjls/sdp.hpp"
#include "mdpjls/simulate.hpp"

namespace mdpjls {

namespace {

constexpr int kDenseAugmentedLimit = 700;  // Nn^2 above this goes to Arnoldi

void check_aligned(const SwitchedSystem& system, const Dtmc& chain) {
  if (system.num_modes() != chain.num_states())
    throw DimensionMismatch("augmented operator: modes and chain states must align");
}

// Arnoldi estimate of the dominant eigenvalue modulus of the second-moment
// operator; the operator preserves the PSD cone so an identity start has
// overlap with the dominant eigenvector.
double arnoldi_rho(const SwitchedSystem& system, const Dtmc& chain) {
  const int nmodes = system.num_modes();
  const int n = system.state_dim;
  const int dim = nmodes * n * n;
  const int m = std::min(dim, 90);

  auto apply = [&](const std::vector<double>& x) {
    std::vector<Mat> q(nmodes, Mat(n, n));
    for (int i = 0; i < nmodes; ++i)
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) q[i](r, c) = x[size_t(i) * n * n + r * n + c];
    std::vector<Mat> out(nmodes);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < nmodes; ++j) {
      Mat acc(n, n);
      for (int i = 0; i < nmodes; ++i) {
        const double pij = chain.p(i, j);
        if (pij == 0.0) continue;
        acc += pij * (system.dynamics[i] * q[i] * system.dynamics[i].transpose());
      }
      out[j] = std::move(acc);
    }
    std::vector<double> y(dim);
    for (int i = 0; i < nmodes; ++i)
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) y[size_t(i) * n * n + r * n + c] = out[i](r, c);
    return y;
  };

  std::vector<std::vector<double>> basis;
  Mat h(m + 1, m);
  std::vector<double> v(dim, 0.0);
  for (int i = 0; i < nmodes; ++i)
    for (int r = 0; r < n; ++r) v[size_t(i) * n * n + r * n + r] = 1.0;
  double nv = vec_norm2(v);
  for (auto& x : v) x /= nv;
  basis.push_back(v);

  int built = 0;
  for (int k = 0; k < m; ++k) {
    std::vector<double> w = apply(basis[k]);
    for (int j = 0; j <= k; ++j) {
      double hjk = dot(basis[j], w);
      h(j, k) = hjk;
      for (int i = 0; i < dim; ++i) w[i] -= hjk * basis[j][i];
    }
    // one re-orthogonalization pass for stability
    for (int j = 0; j <= k; ++j) {
      double c = dot(basis[j], w);
      h(j, k) += c;
      for (int i = 0; i < dim; ++i) w[i] -= c * basis[j][i];
    }
    double nw = vec_norm2(w);
    h(k + 1, k) = nw;
    built = k + 1;
    if (nw < 1e-13) break;
    for (auto& x : w) x /= nw;
    basis.push_back(std::move(w));
  }

  Mat hk(built, built);
  for (int i = 0; i < built; ++i)
    for (int j = 0; j < built; ++j) hk(i, j) = h(i, j);
  double best = 0.0;
  for (const auto& l : eigenvalues(hk)) best = std::max(best, std::abs(l));
  return best;
}

}  // namespace

Mat build_augmented(const SwitchedSystem& system, const Dtmc& chain) {
  check_aligned(system, chain);
  const int nmodes = system.num_modes();
  const int n = system.state_dim;
  const int nn = n * n;
  Mat a(nmodes * nn, nmodes * nn);
  for (int i = 0; i < nmodes; ++i) {
    const Mat ak = kron(system.dynamics[i], system.dynamics[i]);
    for (int j = 0; j < nmodes; ++j) {
      const double pij = chain.p(i, j);
      if (pij == 0.0) continue;
      for (int r = 0; r < nn; ++r)
        for (int c = 0; c < nn; ++c) a(j * nn + r, i * nn + c) = pij * ak(r, c);
    }
  }
  return a;
}

MsVerdict check_ms(const SwitchedSystem& system, const Dtmc& chain, double margin) {
  check_aligned(system, chain);
  MsVerdict v;
  const long dim = long(system.num_modes()) * system.state_dim * system.state_dim;
  if (dim <= kDenseAugmentedLimit)
    v.rho = spectral_radius(build_augmented(system, chain));
  else
    v.rho = arnoldi_rho(system, chain);
  v.stable = v.rho < 1.0 - margin;
  if (!v.stable)
    v.mode_of_failure = "augmented spectral radius " + std::to_string(v.rho) + " >= 1";
  return v;
}

bool check_lmi_condition(const SwitchedSystem& system, const Dtmc& chain,
                         const std::vector<Mat>& v, double margin) {
  check_aligned(system, chain);
  if (int(v.size()) != system.num_modes())
    throw DimensionMismatch("lmi condition: one V per mode required");
  const int n = system.state_dim;
  for (const auto& vi : v)
    if (vi.rows() != n || vi.cols() != n)
      throw DimensionMismatch("lmi condition: V dimension mismatch");
  for (const auto& vi : v)
    if (sym_eig_min(vi.symmetrized()) < margin) return false;
  std::vector<Mat> tv = second_moment_step(system, chain, v);
  for (int j = 0; j < system.num_modes(); ++j) {
    Mat diff = v[j] - tv[j];
    if (sym_eig_min(diff.symmetrized()) < margin) return false;
  }
  return true;
}

std::vector<Mat> second_moment_step(const SwitchedSystem& system, const Dtmc& chain,
                                    const std::vector<Mat>& q) {
  check_aligned(system, chain);
  const int nmodes = system.num_modes();
  std::vector<Mat> out(nmodes);
  for (int j = 0; j < nmodes; ++j) {
    Mat acc(system.state_dim, system.state_dim);
    for (int i = 0; i < nmodes; ++i) {
      const double pij = chain.p(i, j);
      if (pij == 0.0) continue;
      acc += pij * (system.dynamics[i] * q[i] * system.dynamics[i].transpose());
    }
    out[j] = std::move(acc);
  }
  return out;
}

DeterministicStudy deterministic_study(const MdpJls& jls) {
  jls.validate();
  std::vector<Policy> policies = enumerate_deterministic_policies(jls.mdp);
  std::vector<double> rho(policies.size());
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < int(policies.size()); ++k) {
    Dtmc chain = induce_chain(jls.mdp, policies[k]);
    rho[k] = check_ms(jls.system, chain).rho;
  }
  DeterministicStudy out;
  size_t best = 0;
  for (size_t k = 0; k < policies.size(); ++k) {
    out.table.emplace_back(policies[k], rho[k]);
    if (rho[k] < rho[best]) best = k;
  }
  out.best_policy = policies[best];
  out.best_rho = rho[best];
  return out;
}

MsSynthesis synthesize_ms_sdp(const MdpJls& jls, double gamma0) {
  jls.validate();
  const int nmodes = jls.num_modes();
  const int nact = jls.mdp.num_actions();
  const int n = jls.system.state_dim;

  std::vector<Mat> gram(nmodes);
  for (int i = 0; i < nmodes; ++i)
    gram[i] = jls.system.dynamics[i] * jls.system.dynamics[i].transpose();

  SdpProblem p;
  std::vector<std::vector<int>> kvar(nmodes, std::vector<int>(nact, -1));
  for (int i = 0; i < nmodes; ++i)
    for (int s = 0; s < nact; ++s)
      if (jls.mdp.available[i][s]) {
        kvar[i][s] = p.add_var();
        p.lower.emplace_back(kvar[i][s], 0.0);
      }

  // For each j: sum_i sum_sigma K_i,sigma [1{i=j} I - T(i,sigma,j) A_i A_i'] - gamma0 I >= 0
  for (int j = 0; j < nmodes; ++j) {
    SdpBlock blk;
    blk.f0 = -gamma0 * Mat::identity(n);
    for (int i = 0; i < nmodes; ++i)
      for (int s = 0; s < nact; ++s) {
        if (kvar[i][s] < 0) continue;
        Mat f = -jls.mdp.t(i, s, j) * gram[i];
        if (i == j) f += Mat::identity(n);
        if (f.max_abs() == 0.0) continue;
        blk.scalar_terms.push_back({kvar[i][s], f.symmetrized()});
      }
    p.blocks.push_back(std::move(blk));
  }
  // alpha_i = sum_sigma K_i,sigma >= 1 (scale normalization)
  for (int i = 0; i < nmodes; ++i) {
    SdpBlock blk;
    blk.f0 = Mat{{-1.0}};
    for (int s = 0; s < nact; ++s)
      if (kvar[i][s] >= 0) blk.scalar_terms.push_back({kvar[i][s], Mat{{1.0}}});
    p.blocks.push_back(std::move(blk));
  }

  SdpOptions opts;
  opts.want_optimum = false;
  std::vector<double> start(p.num_vars, 2.0);
  opts.initial = start;

  MsSynthesis out;
  SolveReport rep = solve_sdp(p, 1e-9, opts);
  out.iterations = rep.iterations;
  if (rep.status == SolveStatus::Infeasible) {
    out.status = MsStatus::Infeasible;
    out.note = rep.note;
    return out;
  }
  if (rep.status != SolveStatus::Feasible) {
    out.status = MsStatus::Failed;
    out.note = to_string(rep.status) + " " + rep.note;
    return out;
  }

  out.policy.probs = Mat(nmodes, nact);
  out.v.assign(nmodes, Mat());
  for (int i = 0; i < nmodes; ++i) {
    double alpha = 0.0;
    for (int s = 0; s < nact; ++s)
      if (kvar[i][s] >= 0) alpha += rep.y[kvar[i][s]];
    for (int s = 0; s < nact; ++s)
      if (kvar[i][s] >= 0) out.policy.probs(i, s) = rep.y[kvar[i][s]] / alpha;
    out.v[i] = alpha * Mat::identity(n);
  }
  out.chain = induce_chain(jls.mdp, out.policy);
  out.verdict = check_ms(jls.system, out.chain);
  out.gamma = gamma0;
  out.status = out.verdict.stable ? MsStatus::Success : MsStatus::Failed;
  if (!out.verdict.stable) out.note = "relaxation feasible but spectral re-check failed";
  return out;
}

namespace {

double min_gamma(const MdpJls& jls, const std::vector<Mat>& v, const Dtmc& chain) {
  std::vector<Mat> tv = second_moment_step(jls.system, chain, v);
  double g = std::numeric_limits<double>::infinity();
  for (int j = 0; j < jls.num_modes(); ++j)
    g = std::min(g, sym_eig_min((v[j] - tv[j]).symmetrized()));
  return g;
}

}  // namespace

MsSynthesis synthesize_ms_cd(const MdpJls& jls, const CdOptions& opts) {
  jls.validate();
  const int nmodes = jls.num_modes();
  const int nact = jls.mdp.num_actions();
  const int n = jls.system.state_dim;
  const double l_wt = opts.prox_weight;

  MsSynthesis out;
  out.v.assign(nmodes, Mat::identity(n));
  out.policy.probs = Mat(nmodes, nact);
  for (int i = 0; i < nmodes; ++i) {
    const int na = jls.mdp.num_available(i);
    for (int s = 0; s < nact; ++s)
      if (jls.mdp.available[i][s]) out.policy.probs(i, s) = 1.0 / na;
  }

  auto accept = [&](int iter) -> bool {
    Dtmc chain = induce_chain(jls.mdp, out.policy);
    double g = min_gamma(jls, out.v, chain);
    double vmin = std::numeric_limits<double>::infinity();
    for (const auto& vi : out.v) vmin = std::min(vmin, sym_eig_min(vi.symmetrized()));
    if (g > opts.gamma_margin && vmin > 0.0) {
      out.chain = chain;
      out.verdict = check_ms(jls.system, chain);
      out.gamma = g;
      out.iterations = iter;
      out.status = out.verdict.stable ? MsStatus::Success : MsStatus::Failed;
      if (!out.verdict.stable) out.note = "gamma positive but spectral re-check failed";
      return true;
    }
    return false;
  };

  if (accept(0)) return out;

  RunRng rng(opts.seed, 0x9e3779b97f4a7c15ull);

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    Dtmc chain = induce_chain(jls.mdp, out.policy);

    // ---- V-step: min -gamma + L sum t_i at fixed pi ----
    {
      SdpProblem p;
      std::vector<int> vg(nmodes);
      for (int i = 0; i < nmodes; ++i) vg[i] = p.add_group(n);
      const int gv = p.add_var();  // gamma
      p.upper.emplace_back(gv, opts.gamma_cap);
      std::vector<int> tvars(nmodes);
      for (int i = 0; i < nmodes; ++i) {
        tvars[i] = p.add_var();
        p.lower.emplace_back(tvars[i], 0.0);
      }

      for (int i = 0; i < nmodes; ++i) {  // V_i >= 1e-7 I
        SdpBlock blk;
        blk.f0 = -1e-7 * Mat::identity(n);
        blk.cong_terms.push_back({vg[i], 1.0, Mat::identity(n)});
        p.blocks.push_back(std::move(blk));
      }
      for (int j = 0; j < nmodes; ++j) {  // V_j - T_j(V) - gamma I >= 0
        SdpBlock blk;
        blk.f0 = Mat::zeros(n, n);
        blk.cong_terms.push_back({vg[j], 1.0, Mat::identity(n)});
        for (int i = 0; i < nmodes; ++i) {
          const double pij = chain.p(i, j);
          if (pij == 0.0) continue;
          blk.cong_terms.push_back({vg[i], -pij, jls.system.dynamics[i]});
        }
        blk.scalar_terms.push_back({gv, -1.0 * Mat::identity(n)});
        p.blocks.push_back(std::move(blk));
      }
      for (int i = 0; i < nmodes; ++i) {  // || svec(V_i) - svec(V_prev) || <= t_i
        SdpProblem::Soc soc;
        soc.tvar = tvars[i];
        auto prev = svec(out.v[i]);
        const int off = p.groups[vg[i]].offset;
        for (int k = 0; k < svec_dim(n); ++k) {
          LinExpr arm;
          arm.terms.emplace_back(off + k, 1.0);
          arm.constant = -prev[k];
          soc.arms.push_back(std::move(arm));
        }
        p.socs.push_back(std::move(soc));
      }
      p.objective.assign(p.num_vars, 0.0);
      p.objective[gv] = -1.0;
      for (int i = 0; i < nmodes; ++i) p.objective[tvars[i]] = l_wt;

      // strictly feasible start from the previous iterate
      std::vector<double> y0(p.num_vars, 0.0);
      for (int i = 0; i < nmodes; ++i) {
        auto sv = svec(out.v[i]);
        std::copy(sv.begin(), sv.end(), y0.begin() + p.groups[vg[i]].offset);
      }
      double g_now = min_gamma(jls, out.v, chain);
      y0[gv] = std::min(g_now, opts.gamma_cap) - 1.0;
      for (int i = 0; i < nmodes; ++i) y0[tvars[i]] = 1.0;
      SdpOptions sopts;
      sopts.initial = y0;
      SolveReport rep = solve_sdp(p, 1e-7, sopts);
      if (!rep.ok()) {
        out.status = MsStatus::Failed;
        out.note = "V-step " + to_string(rep.status) + " " + rep.note;
        out.iterations = iter;
        return out;
      }
      for (int i = 0; i < nmodes; ++i) {
        const int off = p.groups[vg[i]].offset;
        out.v[i] = unsvec(std::vector<double>(rep.y.begin() + off,
                                              rep.y.begin() + off + svec_dim(n)),
                          n)
                       .symmetrized();
      }
    }
    if (accept(iter)) return out;

    // ---- pi-step: min -gamma + L sum u_i at fixed V ----
    {
      std::vector<Mat> gramv(nmodes);
      for (int i = 0; i < nmodes; ++i)
        gramv[i] =
            (jls.system.dynamics[i] * out.v[i] * jls.system.dynamics[i].transpose()).symmetrized();

      SdpProblem p;
      // reduced coordinates: per state, all available actions except the last
      std::vector<std::vector<int>> pvar(nmodes, std::vector<int>(nact, -1));
      std::vector<int> last_avail(nmodes, -1);
      for (int i = 0; i < nmodes; ++i) {
        for (int s = nact - 1; s >= 0; --s)
          if (jls.mdp.available[i][s]) {
            last_avail[i] = s;
            break;
          }
        for (int s = 0; s < nact; ++s)
          if (jls.mdp.available[i][s] && s != last_avail[i]) {
            pvar[i][s] = p.add_var();
            p.lower.emplace_back(pvar[i][s], 0.0);
          }
      }
      const int gv = p.add_var();
      p.upper.emplace_back(gv, opts.gamma_cap);
      std::vector<int> uvars(nmodes);
      for (int i = 0; i < nmodes; ++i) {
        uvars[i] = p.add_var();
        p.lower.emplace_back(uvars[i], 0.0);
      }

      // pi(i, last) = 1 - sum of reduced coordinates >= 0
      for (int i = 0; i < nmodes; ++i) {
        bool any = false;
        for (int s = 0; s < nact; ++s) any = any || pvar[i][s] >= 0;
        if (!any) continue;
        SdpBlock blk;
        blk.f0 = Mat{{1.0}};
        for (int s = 0; s < nact; ++s)
          if (pvar[i][s] >= 0) blk.scalar_terms.push_back({pvar[i][s], Mat{{-1.0}}});
        p.blocks.push_back(std::move(blk));
      }
      // V_j - sum_i sum_sigma T(i,sigma,j) pi(i,sigma) A_i V_i A_i' - gamma I >= 0
      for (int j = 0; j < nmodes; ++j) {
        SdpBlock blk;
        blk.f0 = out.v[j];
        for (int i = 0; i < nmodes; ++i) {
          const int sl = last_avail[i];
          blk.f0 -= jls.mdp.t(i, sl, j) * gramv[i];
          for (int s = 0; s < nact; ++s) {
            if (pvar[i][s] < 0) continue;
            const double coef = jls.mdp.t(i, s, j) - jls.mdp.t(i, sl, j);
            if (coef == 0.0) continue;
            blk.scalar_terms.push_back({pvar[i][s], -coef * gramv[i]});
          }
        }
        blk.f0 = blk.f0.symmetrized();
        blk.scalar_terms.push_back({gv, -1.0 * Mat::identity(n)});
        p.blocks.push_back(std::move(blk));
      }
      // || pi_row - pi_prev_row || <= u_i over the full action coordinates
      for (int i = 0; i < nmodes; ++i) {
        SdpProblem::Soc soc;
        soc.tvar = uvars[i];
        for (int s = 0; s < nact; ++s) {
          if (!jls.mdp.available[i][s]) continue;
          LinExpr arm;
          if (s == last_avail[i]) {
            arm.constant = 1.0 - out.policy.probs(i, s);
            for (int s2 = 0; s2 < nact; ++s2)
              if (pvar[i][s2] >= 0) arm.terms.emplace_back(pvar[i][s2], -1.0);
          } else {
            arm.terms.emplace_back(pvar[i][s], 1.0);
            arm.constant = -out.policy.probs(i, s);
          }
          soc.arms.push_back(std::move(arm));
        }
        p.socs.push_back(std::move(soc));
      }
      p.objective.assign(p.num_vars, 0.0);
      p.objective[gv] = -1.0;
      for (int i = 0; i < nmodes; ++i) p.objective[uvars[i]] = l_wt;

      // interior start: shrink the previous policy towards uniform
      std::vector<double> y0(p.num_vars, 0.0);
      Policy pmid = out.policy;
      for (int i = 0; i < nmodes; ++i) {
        const int na = jls.mdp.num_available(i);
        for (int s = 0; s < nact; ++s)
          if (jls.mdp.available[i][s])
            pmid.probs(i, s) = 0.99 * out.policy.probs(i, s) + 0.01 / na;
      }
      for (int i = 0; i < nmodes; ++i)
        for (int s = 0; s < nact; ++s)
          if (pvar[i][s] >= 0) y0[pvar[i][s]] = pmid.probs(i, s);
      Dtmc cmid = induce_chain(jls.mdp, pmid);
      y0[gv] = std::min(min_gamma(jls, out.v, cmid), opts.gamma_cap) - 1.0;
      for (int i = 0; i < nmodes; ++i) {
        double d2 = 0.0;
        for (int s = 0; s < nact; ++s) {
          const double d = pmid.probs(i, s) - out.policy.probs(i, s);
          d2 += d * d;
        }
        y0[uvars[i]] = std::sqrt(d2) + 1.0;
      }
      SdpOptions sopts;
      sopts.initial = y0;
      SolveReport rep = solve_sdp(p, 1e-7, sopts);
      if (!rep.ok()) {
        out.status = MsStatus::Failed;
        out.note = "pi-step " + to_string(rep.status) + " " + rep.note;
        out.iterations = iter;
        return out;
      }
      for (int i = 0; i < nmodes; ++i) {
        double rest = 0.0;
        for (int s = 0; s < nact; ++s)
          if (pvar[i][s] >= 0) {
            out.policy.probs(i, s) = std::max(0.0, rep.y[pvar[i][s]]);
            rest += out.policy.probs(i, s);
          }
        for (int s = 0; s < nact; ++s)
          if (!jls.mdp.available[i][s]) out.policy.probs(i, s) = 0.0;
        out.policy.probs(i, last_avail[i]) = std::max(0.0, 1.0 - rest);
        double total = 0.0;
        for (int s = 0; s < nact; ++s) total += out.policy.probs(i, s);
        for (int s = 0; s < nact; ++s) out.policy.probs(i, s) /= total;
      }
    }
    if (accept(iter)) return out;

    // seeded saddle-point escape: uniform noise on available actions
    for (int i = 0; i < nmodes; ++i) {
      double total = 0.0;
      for (int s = 0; s < nact; ++s) {
        if (!jls.mdp.available[i][s]) continue;
        double v = out.policy.probs(i, s) + rng.uniform(-opts.perturb, opts.perturb);
        out.policy.probs(i, s) = std::max(1e-12, v);
        total += out.policy.probs(i, s);
      }
      for (int s = 0; s < nact; ++s)
        if (jls.mdp.available[i][s]) out.policy.probs(i, s) /= total;
    }
  }

  out.status = MsStatus::NotCertified;
  out.iterations = opts.max_iter;
  out.note = "gamma did not exceed the margin within the iteration budget";
  return out;
}

}  // namespace mdpjls
