#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdpjls/lp.hpp"
#include "mdpjls/mat.hpp"
#include "mdpjls/numerics.hpp"

namespace mdpjls {

struct IterationLimit : Error {
  using Error::Error;
};

/// Sparse affine expression over the scalar variable vector y.
struct LinExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  double eval(const std::vector<double>& y) const {
    double v = constant;
    for (auto [i, c] : terms) v += c * y[i];
    return v;
  }
};

/// One LMI block  F0 + sum_a y_a F_a + sum_g coeff B (sym matrix g) B'  >= 0.
/// Congruence terms keep whole symmetric-matrix variables intact so the
/// barrier Hessian can be assembled from small Gram matrices instead of one
/// dense F per svec coordinate.
struct SdpBlock {
  struct ScalarTerm {
    int var;
    Mat f;  // symmetric, block dim
  };
  struct CongruenceTerm {
    int group;
    double coeff;
    Mat b;  // block dim x group dim
  };
  Mat f0;
  std::vector<ScalarTerm> scalar_terms;
  std::vector<CongruenceTerm> cong_terms;

  int dim() const { return f0.rows(); }
};

/// min c'y subject to LMI blocks, second-order cones ||arms(y)|| <= y_t,
/// and scalar bounds. Symmetric-matrix variables live in y as svec slices.
struct SdpProblem {
  int num_vars = 0;
  std::vector<double> objective;  // empty: pure feasibility
  std::vector<SdpBlock> blocks;
  struct SymGroup {
    int offset;
    int dim;
  };
  std::vector<SymGroup> groups;
  struct Soc {
    int tvar;
    std::vector<LinExpr> arms;
  };
  std::vector<Soc> socs;
  std::vector<std::pair<int, double>> lower;  // y_i >= v
  std::vector<std::pair<int, double>> upper;  // y_i <= v

  int add_var() { return num_vars++; }
  int add_group(int dim) {
    groups.push_back({num_vars, dim});
    num_vars += svec_dim(dim);
    return int(groups.size()) - 1;
  }
  void check() const;
};

struct SdpOptions {
  double gap_tol = 1e-7;        // barrier suboptimality target nu/t
  double feas_margin = 1e-9;    // phase-1 early exit once shift < -margin
  double barrier_decrease = 0.2;
  int max_newton = 400;  // per centering stage
  bool want_optimum = true;     // false: stop after a strictly feasible point
  std::optional<std::vector<double>> initial;  // strictly feasible start
};

/// Log-barrier interior point, damped Newton, deterministic.
SolveReport solve_sdp(const SdpProblem& p, double tol = 1e-7, const SdpOptions& opts = {});

/// Evaluates one block at y.
Mat sdp_block_value(const SdpBlock& blk, const SdpProblem& p, const std::vector<double>& y);

/// Smallest block eigenvalue over all blocks at y (for re-verification).
double sdp_min_block_eig(const SdpProblem& p, const std::vector<double>& y);

}  // namespace mdpjls
