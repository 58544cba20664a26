#pragma once

#include <string>
#include <vector>

#include "mdpjls/mat.hpp"

namespace mdpjls {

struct NumericalFailure : Error {
  using Error::Error;
};

enum class SolveStatus { Optimal, Feasible, Infeasible, IterationLimit, NumericalFailure };

std::string to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::vector<double> y;
  double objective = 0.0;
  double max_residual = 0.0;
  int iterations = 0;
  std::string note;

  bool ok() const { return status == SolveStatus::Optimal || status == SolveStatus::Feasible; }
};

/// min c'y  s.t.  eq_a y = eq_b,  le_a y <= le_b,  y >= lower_bounds.
/// Strict inequality rows are expected to arrive as <= rows with a margin
/// already folded into the right-hand side.
struct LpProblem {
  std::vector<double> objective;
  Mat eq_a;
  std::vector<double> eq_b;
  Mat le_a;
  std::vector<double> le_b;
  std::vector<double> lower_bounds;  // empty means all zeros

  int num_vars() const { return int(objective.size()); }
  void check() const;
};

/// Two-phase dense simplex with Bland's anti-cycling rule. Deterministic.
SolveReport solve_lp(const LpProblem& p, double tol = 1e-9);

}  // namespace mdpjls
