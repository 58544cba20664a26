#include "mdpjls/sdp.hpp"

#include <algorithm>
#include <cmath>

#include "mdpjls/eig.hpp"

namespace mdpjls {

void SdpProblem::check() const {
  if (!objective.empty() && int(objective.size()) != num_vars)
    throw DimensionMismatch("sdp: objective length");
  for (const auto& blk : blocks) {
    if (!blk.f0.square()) throw DimensionMismatch("sdp: block F0 must be square");
    if (blk.f0.asymmetry() > 1e-12) throw Error("sdp: block F0 must be symmetric");
    for (const auto& st : blk.scalar_terms) {
      if (st.var < 0 || st.var >= num_vars) throw Error("sdp: scalar term variable out of range");
      if (st.f.rows() != blk.dim() || st.f.cols() != blk.dim())
        throw DimensionMismatch("sdp: scalar term dimension");
      if (st.f.asymmetry() > 1e-12) throw Error("sdp: scalar term must be symmetric");
    }
    for (const auto& ct : blk.cong_terms) {
      if (ct.group < 0 || ct.group >= int(groups.size()))
        throw Error("sdp: congruence group out of range");
      if (ct.b.rows() != blk.dim() || ct.b.cols() != groups[ct.group].dim)
        throw DimensionMismatch("sdp: congruence factor dimension");
    }
  }
}

Mat sdp_block_value(const SdpBlock& blk, const SdpProblem& p, const std::vector<double>& y) {
  Mat s = blk.f0;
  for (const auto& st : blk.scalar_terms) {
    const double w = y[st.var];
    if (w == 0.0) continue;
    for (int i = 0; i < s.rows(); ++i)
      for (int j = 0; j < s.cols(); ++j) s(i, j) += w * st.f(i, j);
  }
  for (const auto& ct : blk.cong_terms) {
    const auto& g = p.groups[ct.group];
    Mat v = unsvec(std::vector<double>(y.begin() + g.offset, y.begin() + g.offset + svec_dim(g.dim)),
                   g.dim);
    Mat bv = ct.b * v * ct.b.transpose();
    for (int i = 0; i < s.rows(); ++i)
      for (int j = 0; j < s.cols(); ++j) s(i, j) += ct.coeff * bv(i, j);
  }
  return s;
}

double sdp_min_block_eig(const SdpProblem& p, const std::vector<double>& y) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& blk : p.blocks)
    best = std::min(best, sym_eig_min(sdp_block_value(blk, p, y)));
  return best;
}

namespace {

// svec index (i, j), i <= j, position within a group's packed coordinates.
// Layout matches svec(): row-major upper triangle.
inline int sidx(int n, int i, int j) {
  // i <= j assumed; offset of row i start plus (j - i)
  return i * n - i * (i - 1) / 2 + (j - i);
}

const double kRt2 = std::sqrt(2.0);

// Accumulates the bilinear form tr(X W Y W') over svec coordinates of X
// (rows, group dim n1) and Y (cols, group dim n2), scaled, into h.
// Serial reference; see symkron_accumulate for the parallel version.
void symkron_accumulate_serial(Mat& h, int row_off, int col_off, const Mat& w, double scale) {
  const int n1 = w.rows(), n2 = w.cols();
  for (int i = 0; i < n1; ++i) {
    for (int j = i; j < n1; ++j) {
      const int r = row_off + sidx(n1, i, j);
      for (int k = 0; k < n2; ++k) {
        for (int l = k; l < n2; ++l) {
          const int c = col_off + sidx(n2, k, l);
          double v;
          if (i == j && k == l)
            v = w(i, k) * w(i, k);
          else if (i == j)
            v = kRt2 * w(i, k) * w(i, l);
          else if (k == l)
            v = kRt2 * w(i, k) * w(j, k);
          else
            v = w(i, l) * w(j, k) + w(i, k) * w(j, l);
          h(r, c) += scale * v;
        }
      }
    }
  }
}

void symkron_accumulate(Mat& h, int row_off, int col_off, const Mat& w, double scale) {
  const int n1 = w.rows(), n2 = w.cols();
  if (long(n1) * n1 * n2 * n2 < 200000) {
    symkron_accumulate_serial(h, row_off, col_off, w, scale);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n1; ++i) {
    for (int j = i; j < n1; ++j) {
      const int r = row_off + sidx(n1, i, j);
      for (int k = 0; k < n2; ++k) {
        for (int l = k; l < n2; ++l) {
          const int c = col_off + sidx(n2, k, l);
          double v;
          if (i == j && k == l)
            v = w(i, k) * w(i, k);
          else if (i == j)
            v = kRt2 * w(i, k) * w(i, l);
          else if (k == l)
            v = kRt2 * w(i, k) * w(j, k);
          else
            v = w(i, l) * w(j, k) + w(i, k) * w(j, l);
          h(r, c) += scale * v;
        }
      }
    }
  }
}

// Cholesky solve with OpenMP on the column updates; falls back to adding a
// diagonal ridge when the matrix loses definiteness to roundoff.
bool spd_factor(Mat& h) {
  const int n = h.rows();
  for (int j = 0; j < n; ++j) {
    double d = h(j, j);
    for (int k = 0; k < j; ++k) d -= h(j, k) * h(j, k);
    if (d <= 0.0) return false;
    const double ljj = std::sqrt(d);
    h(j, j) = ljj;
    const double inv = 1.0 / ljj;
#pragma omp parallel for schedule(static) if (n - j > 128)
    for (int i = j + 1; i < n; ++i) {
      double s = h(i, j);
      for (int k = 0; k < j; ++k) s -= h(i, k) * h(j, k);
      h(i, j) = s * inv;
    }
  }
  return true;
}

std::vector<double> spd_solve_factored(const Mat& l, std::vector<double> b) {
  const int n = l.rows();
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= l(i, k) * b[k];
    b[i] = s / l(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= l(k, i) * b[k];
    b[i] = s / l(i, i);
  }
  return b;
}

struct Barrier {
  const SdpProblem& p;
  int nvars;

  explicit Barrier(const SdpProblem& prob) : p(prob), nvars(prob.num_vars) {}

  // Returns false when y is not strictly feasible.
  bool value(const std::vector<double>& y, double& phi) {
    phi = 0.0;
    for (const auto& blk : p.blocks) {
      Mat s = sdp_block_value(blk, p, y);
      Mat l;
      if (!cholesky(s, l)) return false;
      phi -= chol_logdet(l);
    }
    for (auto [i, lo] : p.lower) {
      const double d = y[i] - lo;
      if (d <= 0.0) return false;
      phi -= std::log(d);
    }
    for (auto [i, hi] : p.upper) {
      const double d = hi - y[i];
      if (d <= 0.0) return false;
      phi -= std::log(d);
    }
    for (const auto& soc : p.socs) {
      double u2 = 0.0;
      for (const auto& arm : soc.arms) {
        const double v = arm.eval(y);
        u2 += v * v;
      }
      const double t = y[soc.tvar];
      const double d = t * t - u2;
      if (t <= 0.0 || d <= 0.0) return false;
      phi -= std::log(d);
    }
    return true;
  }

  // Gradient and Hessian of the barrier at a strictly feasible y.
  bool derivatives(const std::vector<double>& y, std::vector<double>& grad, Mat& hess) {
    grad.assign(nvars, 0.0);
    hess = Mat(nvars, nvars);
    for (const auto& blk : p.blocks) {
      Mat s = sdp_block_value(blk, p, y);
      Mat l;
      if (!cholesky(s, l)) return false;
      Mat inv = back_subst_t(l, forward_subst(l, Mat::identity(blk.dim())));

      // gradient
      for (const auto& st : blk.scalar_terms) {
        double g = 0.0;
        for (int i = 0; i < blk.dim(); ++i)
          for (int j = 0; j < blk.dim(); ++j) g += inv(i, j) * st.f(i, j);
        grad[st.var] -= g;
      }
      std::vector<Mat> sinv_b(blk.cong_terms.size());  // Sinv * B per term
      for (size_t tknd = 0; tknd < blk.cong_terms.size(); ++tknd) {
        const auto& ct = blk.cong_terms[tknd];
        sinv_b[tknd] = inv * ct.b;
        Mat g = ct.b.transpose() * sinv_b[tknd];  // B' Sinv B
        auto gv = svec(g);
        const int off = p.groups[ct.group].offset;
        for (size_t k = 0; k < gv.size(); ++k) grad[off + k] -= ct.coeff * gv[k];
      }

      // Hessian: scalar-scalar via transformed matrices, congruence pairs via
      // the symmetric Kronecker of small Gram matrices.
      if (!blk.scalar_terms.empty()) {
        std::vector<Mat> ft(blk.scalar_terms.size());
        for (size_t a = 0; a < blk.scalar_terms.size(); ++a)
          ft[a] = back_subst_t(l, forward_subst(l, blk.scalar_terms[a].f));
        for (size_t a = 0; a < blk.scalar_terms.size(); ++a) {
          for (size_t b2 = a; b2 < blk.scalar_terms.size(); ++b2) {
            double v = 0.0;  // tr(Sinv Fa Sinv Fb) = tr(ft_a * Fb * Sinv) ... use tr(ft_a ft_b')
            for (int i = 0; i < blk.dim(); ++i)
              for (int j = 0; j < blk.dim(); ++j) v += ft[a](i, j) * ft[b2](j, i);
            const int va = blk.scalar_terms[a].var;
            const int vb = blk.scalar_terms[b2].var;
            hess(va, vb) += v;
            if (va != vb) hess(vb, va) += v;
          }
        }
        // scalar x congruence
        for (size_t a = 0; a < blk.scalar_terms.size(); ++a) {
          Mat fa_sinv = ft[a] * inv;  // Sinv Fa Sinv
          for (size_t tknd = 0; tknd < blk.cong_terms.size(); ++tknd) {
            const auto& ct = blk.cong_terms[tknd];
            Mat cross = ct.b.transpose() * fa_sinv * ct.b;
            auto cv = svec(cross.symmetrized());
            const int va = blk.scalar_terms[a].var;
            const int off = p.groups[ct.group].offset;
            for (size_t k = 0; k < cv.size(); ++k) {
              hess(va, off + k) += ct.coeff * cv[k];
              hess(off + k, va) += ct.coeff * cv[k];
            }
          }
        }
      }
      for (size_t t1 = 0; t1 < blk.cong_terms.size(); ++t1) {
        const auto& c1 = blk.cong_terms[t1];
        for (size_t t2 = t1; t2 < blk.cong_terms.size(); ++t2) {
          const auto& c2 = blk.cong_terms[t2];
          Mat w = c1.b.transpose() * sinv_b[t2];  // B1' Sinv B2
          const int off1 = p.groups[c1.group].offset;
          const int off2 = p.groups[c2.group].offset;
          const double scale = c1.coeff * c2.coeff;
          symkron_accumulate(hess, off1, off2, w, scale);
          if (t1 != t2) symkron_accumulate(hess, off2, off1, w.transpose(), scale);
        }
      }
    }

    for (auto [i, lo] : p.lower) {
      const double d = y[i] - lo;
      grad[i] -= 1.0 / d;
      hess(i, i) += 1.0 / (d * d);
    }
    for (auto [i, hi] : p.upper) {
      const double d = hi - y[i];
      grad[i] += 1.0 / d;
      hess(i, i) += 1.0 / (d * d);
    }

    for (const auto& soc : p.socs) {
      const double t = y[soc.tvar];
      std::vector<double> u(soc.arms.size());
      double u2 = 0.0;
      for (size_t k = 0; k < soc.arms.size(); ++k) {
        u[k] = soc.arms[k].eval(y);
        u2 += u[k] * u[k];
      }
      const double d = t * t - u2;
      if (d <= 0.0) return false;
      // w = J'u over the variables the arms touch
      std::vector<double> w(nvars, 0.0);
      for (size_t k = 0; k < soc.arms.size(); ++k)
        for (auto [v, c] : soc.arms[k].terms) w[v] += c * u[k];
      grad[soc.tvar] += -2.0 * t / d;
      const double c1 = 2.0 / d, c2 = 4.0 / (d * d);
      for (int v = 0; v < nvars; ++v)
        if (w[v] != 0.0) grad[v] += c1 * w[v];
      // structure part (2/d) J'J
      for (const auto& arm : soc.arms)
        for (auto [v1, cc1] : arm.terms)
          for (auto [v2, cc2] : arm.terms) hess(v1, v2) += c1 * cc1 * cc2;
      // rank-one parts
      std::vector<int> touched;
      for (int v = 0; v < nvars; ++v)
        if (w[v] != 0.0) touched.push_back(v);
      for (int v1 : touched)
        for (int v2 : touched) hess(v1, v2) += c2 * w[v1] * w[v2];
      hess(soc.tvar, soc.tvar) += -2.0 / d + c2 * t * t;
      for (int v : touched) {
        hess(soc.tvar, v) += -c2 * t * w[v];
        hess(v, soc.tvar) += -c2 * t * w[v];
      }
    }
    return true;
  }

  double complexity() const {
    double nu = 0.0;
    for (const auto& blk : p.blocks) nu += blk.dim();
    nu += double(p.lower.size() + p.upper.size());
    nu += 2.0 * double(p.socs.size());
    return std::max(nu, 1.0);
  }
};

// Minimizes t_barrier * c'y + phi(y) for a fixed barrier parameter by damped
// Newton. Returns false on a hard numerical failure.
struct PathState {
  std::vector<double> y;
  int newton_steps = 0;
};

bool center(Barrier& bar, const std::vector<double>& c, double t_barrier, PathState& st,
            int max_newton, double* early_exit_value, int early_exit_var, double early_exit_below) {
  std::vector<double> grad;
  Mat hess;
  for (int it = 0; it < max_newton; ++it) {
    if (!bar.derivatives(st.y, grad, hess)) return false;
    for (int i = 0; i < bar.nvars; ++i) grad[i] += t_barrier * c[i];

    // factor with escalating ridge
    Mat l = hess;
    double bump = 0.0;
    double scale = 0.0;
    for (int i = 0; i < bar.nvars; ++i) scale = std::max(scale, hess(i, i));
    while (!spd_factor(l)) {
      bump = bump == 0.0 ? 1e-12 * std::max(scale, 1.0) : bump * 100.0;
      if (bump > 1e6 * std::max(scale, 1.0)) return false;
      l = hess;
      for (int i = 0; i < bar.nvars; ++i) l(i, i) += bump;
    }
    std::vector<double> neg(grad.size());
    for (size_t i = 0; i < grad.size(); ++i) neg[i] = -grad[i];
    std::vector<double> dy = spd_solve_factored(l, neg);
    ++st.newton_steps;

    double decrement2 = 0.0;
    for (int i = 0; i < bar.nvars; ++i) decrement2 -= grad[i] * dy[i];
    if (decrement2 <= 1e-9) return true;

    double phi0;
    if (!bar.value(st.y, phi0)) return false;
    double f0 = phi0 + t_barrier * dot(c, st.y);
    double step = 1.0;
    std::vector<double> trial(st.y.size());
    for (int ls = 0; ls < 60; ++ls) {
      for (size_t i = 0; i < st.y.size(); ++i) trial[i] = st.y[i] + step * dy[i];
      double phi;
      if (bar.value(trial, phi)) {
        double f = phi + t_barrier * dot(c, trial);
        if (f <= f0 - 0.25 * step * decrement2) break;
      }
      step *= 0.5;
      if (ls == 59) step = 0.0;
    }
    if (step == 0.0) return true;  // stalled; current point is the best we have
    st.y = trial;
    if (early_exit_var >= 0 && st.y[early_exit_var] < early_exit_below) {
      if (early_exit_value) *early_exit_value = st.y[early_exit_var];
      return true;
    }
  }
  return true;
}

}  // namespace

SolveReport solve_sdp(const SdpProblem& p, double tol, const SdpOptions& opts) {
  p.check();
  SolveReport rep;
  const int n = p.num_vars;

  // Starting point: caller-provided, else bounded vars sit 1 inside their
  // bound (midpoint when boxed), groups at identity, SOC slacks widened below.
  std::vector<double> y0(n, 0.0);
  if (opts.initial) {
    y0 = *opts.initial;
    if (int(y0.size()) != n) throw DimensionMismatch("sdp: initial point length");
  } else {
    std::vector<double> lo(n, -std::numeric_limits<double>::infinity());
    std::vector<double> hi(n, std::numeric_limits<double>::infinity());
    for (auto [i, v] : p.lower) lo[i] = std::max(lo[i], v);
    for (auto [i, v] : p.upper) hi[i] = std::min(hi[i], v);
    for (int i = 0; i < n; ++i) {
      if (std::isfinite(lo[i]) && std::isfinite(hi[i]))
        y0[i] = 0.5 * (lo[i] + hi[i]);
      else if (std::isfinite(lo[i]))
        y0[i] = lo[i] + 1.0;
      else if (std::isfinite(hi[i]))
        y0[i] = hi[i] - 1.0;
    }
    for (const auto& g : p.groups) {
      auto v = svec(Mat::identity(g.dim));
      for (size_t k = 0; k < v.size(); ++k) y0[g.offset + k] = v[k];
    }
    for (const auto& soc : p.socs) {
      double u2 = 0.0;
      for (const auto& arm : soc.arms) {
        double v = arm.eval(y0);
        u2 += v * v;
      }
      y0[soc.tvar] = std::sqrt(u2) + 1.0;
    }
  }

  Barrier bar(p);
  const double nu = bar.complexity();
  int total_newton = 0;

  // Phase 1 unless the start is already strictly feasible.
  double phi_probe;
  bool interior = bar.value(y0, phi_probe);
  std::vector<double> y = y0;
  if (!interior) {
    SdpProblem aug = p;
    const int svar = aug.add_var();
    for (auto& blk : aug.blocks) blk.scalar_terms.push_back({svar, Mat::identity(blk.dim())});
    double worst = 0.0;
    for (const auto& blk : p.blocks) worst = std::min(worst, sym_eig_min(sdp_block_value(blk, p, y0)));
    std::vector<double> z0 = y0;
    z0.push_back(-worst + 1.0);

    Barrier abar(aug);
    std::vector<double> c(aug.num_vars, 0.0);
    c[svar] = 1.0;
    PathState st{z0, 0};
    double t_b = 1.0;
    const double t_max = abar.complexity() / std::max(opts.feas_margin, 1e-12);
    bool found = false;
    while (t_b <= t_max * 5.0) {
      if (!center(abar, c, t_b, st, opts.max_newton, nullptr, svar, -opts.feas_margin)) break;
      total_newton += st.newton_steps;
      st.newton_steps = 0;
      if (st.y[svar] < -opts.feas_margin) {
        found = true;
        break;
      }
      // stop early when even the barrier bound cannot push s negative
      if (st.y[svar] - abar.complexity() / t_b > opts.feas_margin && t_b > 1e4) break;
      t_b /= opts.barrier_decrease;
    }
    rep.iterations = total_newton;
    if (!found) {
      rep.status = SolveStatus::Infeasible;
      rep.note = "phase-1 shift " + std::to_string(st.y[svar]);
      return rep;
    }
    y.assign(st.y.begin(), st.y.begin() + n);
  }

  const bool feasibility_only =
      !opts.want_optimum || p.objective.empty() ||
      std::all_of(p.objective.begin(), p.objective.end(), [](double c) { return c == 0.0; });
  if (feasibility_only) {
    rep.y = y;
    rep.iterations = total_newton;
    rep.objective = p.objective.empty() ? 0.0 : dot(p.objective, y);
    rep.max_residual = std::max(0.0, -sdp_min_block_eig(p, y));
    rep.status = rep.max_residual <= tol ? SolveStatus::Feasible : SolveStatus::NumericalFailure;
    return rep;
  }

  // Phase 2: follow the central path on the true objective.
  PathState st{y, 0};
  double t_b = 1.0;
  const double t_final = nu / std::max(opts.gap_tol, 1e-12);
  while (true) {
    if (!center(bar, p.objective, t_b, st, opts.max_newton, nullptr, -1, 0.0)) {
      rep.status = SolveStatus::NumericalFailure;
      rep.note = "newton failure at barrier parameter " + std::to_string(t_b);
      rep.iterations = total_newton + st.newton_steps;
      return rep;
    }
    total_newton += st.newton_steps;
    st.newton_steps = 0;
    if (total_newton > 50 * opts.max_newton) {
      rep.status = SolveStatus::IterationLimit;
      rep.iterations = total_newton;
      return rep;
    }
    if (t_b >= t_final) break;
    t_b = std::min(t_b / opts.barrier_decrease, t_final);
  }

  rep.y = st.y;
  rep.iterations = total_newton;
  rep.objective = dot(p.objective, st.y);
  rep.max_residual = std::max(0.0, -sdp_min_block_eig(p, st.y));
  rep.status = rep.max_residual <= tol ? SolveStatus::Optimal : SolveStatus::NumericalFailure;
  return rep;
}

}  // namespace mdpjls
