#pragma once

#include <complex>
#include <vector>

#include "mdpjls/mat.hpp"

namespace mdpjls {

struct EigenFailure : Error {
  using Error::Error;
};
struct SingularMatrix : Error {
  using Error::Error;
};

/// Eigen-decomposition of a symmetric matrix: Householder tridiagonalization
/// followed by QL with implicit shifts. values ascending, vectors as columns.
struct SymEig {
  std::vector<double> values;
  Mat vectors;
};
SymEig sym_eig(const Mat& a);

/// Smallest eigenvalue of the symmetrized input.
double sym_eig_min(const Mat& a);

/// All eigenvalues of a general square matrix: balance, Hessenberg reduction,
/// Francis double-shift QR. Values only.
std::vector<std::complex<double>> eigenvalues(const Mat& a);

/// Cholesky A = L L'. Returns false when a pivot drops below eps (not PD).
bool cholesky(const Mat& a, Mat& l, double eps = 0.0);

/// In-place forward/back substitution against a lower-triangular factor.
std::vector<double> chol_solve(const Mat& l, std::vector<double> b);
/// log det A from its Cholesky factor.
double chol_logdet(const Mat& l);
/// L^{-1} B (forward substitution on each column).
Mat forward_subst(const Mat& l, Mat b);
/// L'^{-1} B (back substitution against the transposed factor).
Mat back_subst_t(const Mat& l, Mat b);

/// LU with partial pivoting.
struct Lu {
  Mat lu;
  std::vector<int> perm;
  int sign = 1;
  bool singular = false;
};
Lu lu_factor(const Mat& a, double pivot_tol = 0.0);
std::vector<double> lu_solve(const Lu& f, std::vector<double> b);
Mat lu_solve(const Lu& f, const Mat& b);
Mat inverse(const Mat& a);

/// Least squares min ||Ax - b||_2 via Householder QR (rows >= cols).
std::vector<double> lstsq(const Mat& a, const std::vector<double>& b);

}  // namespace mdpjls
