#include "mdpjls/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mdpjls {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Feasible:
      return "feasible";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::IterationLimit:
      return "iteration-limit";
    case SolveStatus::NumericalFailure:
      return "numerical-failure";
  }
  return "?";
}

void LpProblem::check() const {
  const int n = num_vars();
  auto bad = [](double v) { return !std::isfinite(v); };
  if (std::any_of(objective.begin(), objective.end(), bad))
    throw Error("lp: non-finite objective");
  if (!eq_a.empty() && eq_a.cols() != n) throw DimensionMismatch("lp: eq_a column count");
  if (eq_a.rows() != int(eq_b.size())) throw DimensionMismatch("lp: eq_b length");
  if (!le_a.empty() && le_a.cols() != n) throw DimensionMismatch("lp: le_a column count");
  if (le_a.rows() != int(le_b.size())) throw DimensionMismatch("lp: le_b length");
  if (!lower_bounds.empty() && int(lower_bounds.size()) != n)
    throw DimensionMismatch("lp: lower_bounds length");
}

namespace {

constexpr double kPivotTol = 1e-11;
constexpr int kMaxIter = 200000;

// Full-tableau simplex state over min c'x, Ax = b, x >= 0.
struct Tableau {
  int m, n;                 // rows, structural+slack columns (artificials appended)
  std::vector<double> a;    // m x ncols
  std::vector<double> b;    // m
  std::vector<double> cost; // reduced-cost row, length ncols
  double shift = 0.0;       // objective offset
  std::vector<int> basis;   // m
  int ncols;

  double& at(int i, int j) { return a[size_t(i) * ncols + j]; }
  double at(int i, int j) const { return a[size_t(i) * ncols + j]; }

  void pivot(int row, int col) {
    const double piv = at(row, col);
    const double inv = 1.0 / piv;
    for (int j = 0; j < ncols; ++j) at(row, j) *= inv;
    b[row] *= inv;
    at(row, col) = 1.0;
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      const double f = at(i, col);
      if (f == 0.0) continue;
      for (int j = 0; j < ncols; ++j) at(i, j) -= f * at(row, j);
      at(i, col) = 0.0;
      b[i] -= f * b[row];
    }
    const double f = cost[col];
    if (f != 0.0) {
      for (int j = 0; j < ncols; ++j) cost[j] -= f * at(row, j);
      cost[col] = 0.0;
      shift -= f * b[row];
    }
    basis[row] = col;
  }

  // Bland: smallest-index entering among negative reduced costs; smallest
  // basis-index leaving on ratio ties. Returns 0 optimal, 1 unbounded,
  // 2 iteration limit.
  int run(int active_cols, int& iters) {
    while (true) {
      if (++iters > kMaxIter) return 2;
      int enter = -1;
      for (int j = 0; j < active_cols; ++j) {
        if (cost[j] < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter == -1) return 0;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        const double aij = at(i, enter);
        if (aij > kPivotTol) {
          const double ratio = b[i] / aij;
          if (ratio < best - 1e-15 ||
              (std::fabs(ratio - best) <= 1e-15 && (leave == -1 || basis[i] < basis[leave]))) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave == -1) return 1;
      pivot(leave, enter);
    }
  }
};

}  // namespace

SolveReport solve_lp(const LpProblem& p, double tol) {
  p.check();
  SolveReport rep;
  const int n = p.num_vars();
  const int me = p.eq_a.rows();
  const int ml = p.le_a.rows();
  const int m = me + ml;
  const int nslack = ml;
  const int nart = m;
  const int ncols = n + nslack + nart;

  std::vector<double> lb = p.lower_bounds.empty() ? std::vector<double>(n, 0.0) : p.lower_bounds;

  Tableau t;
  t.m = m;
  t.n = n + nslack;
  t.ncols = ncols;
  t.a.assign(size_t(m) * ncols, 0.0);
  t.b.assign(m, 0.0);
  t.basis.assign(m, -1);

  // Rows in shifted coordinates x = y - lb.
  for (int i = 0; i < me; ++i) {
    double rhs = p.eq_b[i];
    for (int j = 0; j < n; ++j) {
      t.at(i, j) = p.eq_a(i, j);
      rhs -= p.eq_a(i, j) * lb[j];
    }
    t.b[i] = rhs;
  }
  for (int i = 0; i < ml; ++i) {
    const int r = me + i;
    double rhs = p.le_b[i];
    for (int j = 0; j < n; ++j) {
      t.at(r, j) = p.le_a(i, j);
      rhs -= p.le_a(i, j) * lb[j];
    }
    t.at(r, n + i) = 1.0;  // slack
    t.b[r] = rhs;
  }
  for (int i = 0; i < m; ++i) {
    if (t.b[i] < 0.0) {
      for (int j = 0; j < n + nslack; ++j) t.at(i, j) = -t.at(i, j);
      t.b[i] = -t.b[i];
    }
    t.at(i, n + nslack + i) = 1.0;  // artificial
    t.basis[i] = n + nslack + i;
  }

  // Phase 1: minimize the artificial sum.
  t.cost.assign(ncols, 0.0);
  for (int i = 0; i < m; ++i) t.cost[n + nslack + i] = 1.0;
  t.shift = 0.0;
  for (int i = 0; i < m; ++i) {  // price out the starting basis
    for (int j = 0; j < ncols; ++j) t.cost[j] -= t.at(i, j);
    t.shift -= t.b[i];
  }
  int iters = 0;
  int rc = t.run(ncols, iters);
  rep.iterations = iters;
  if (rc == 2) {
    rep.status = SolveStatus::IterationLimit;
    return rep;
  }
  const double phase1 = -t.shift;  // current objective value
  if (rc == 1 || phase1 > std::max(tol, 1e-9)) {
    rep.status = SolveStatus::Infeasible;
    rep.note = "phase-1 optimum " + std::to_string(phase1);
    return rep;
  }

  // Drive leftover artificials out of the basis; redundant rows keep a zero
  // artificial which we freeze by clearing its column below.
  for (int i = 0; i < m; ++i) {
    if (t.basis[i] >= n + nslack) {
      int col = -1;
      for (int j = 0; j < n + nslack; ++j) {
        if (std::fabs(t.at(i, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col != -1) t.pivot(i, col);
    }
  }

  // Phase 2 with the true objective; artificial columns are barred.
  t.cost.assign(ncols, 0.0);
  for (int j = 0; j < n; ++j) t.cost[j] = p.objective[j];
  t.shift = 0.0;
  for (int j = 0; j < n; ++j) t.shift += p.objective[j] * lb[j];
  for (int i = 0; i < m; ++i) {
    const int bj = t.basis[i];
    if (bj < n + nslack && t.cost[bj] != 0.0) {
      const double f = t.cost[bj];
      for (int j = 0; j < ncols; ++j) t.cost[j] -= f * t.at(i, j);
      t.cost[bj] = 0.0;
      t.shift += f * t.b[i];
    }
  }
  // The shift bookkeeping: objective = shift + sum over basics priced out.
  // Recomputed directly from the solution at the end, so only used for logs.
  rc = t.run(n + nslack, iters);
  rep.iterations = iters;
  if (rc == 2) {
    rep.status = SolveStatus::IterationLimit;
    return rep;
  }
  if (rc == 1) {
    rep.status = SolveStatus::NumericalFailure;
    rep.note = "objective unbounded below";
    return rep;
  }

  rep.y.assign(n, 0.0);
  for (int i = 0; i < m; ++i)
    if (t.basis[i] < n) rep.y[t.basis[i]] = t.b[i];
  for (int j = 0; j < n; ++j) rep.y[j] += lb[j];

  rep.objective = dot(p.objective, rep.y);
  double res = 0.0;
  for (int i = 0; i < me; ++i) {
    double s = -p.eq_b[i];
    for (int j = 0; j < n; ++j) s += p.eq_a(i, j) * rep.y[j];
    res = std::max(res, std::fabs(s));
  }
  for (int i = 0; i < ml; ++i) {
    double s = -p.le_b[i];
    for (int j = 0; j < n; ++j) s += p.le_a(i, j) * rep.y[j];
    res = std::max(res, s);
  }
  for (int j = 0; j < n; ++j) res = std::max(res, lb[j] - rep.y[j]);
  rep.max_residual = res;
  if (res > tol) {
    rep.status = SolveStatus::NumericalFailure;
    rep.note = "solution residual " + std::to_string(res);
    return rep;
  }

  const bool pure_feasibility =
      std::all_of(p.objective.begin(), p.objective.end(), [](double c) { return c == 0.0; });
  rep.status = pure_feasibility ? SolveStatus::Feasible : SolveStatus::Optimal;
  return rep;
}

}  // namespace mdpjls
