#pragma once

#include <vector>

#include "mdpjls/eig.hpp"
#include "mdpjls/mat.hpp"

namespace mdpjls {

struct NonSquareBlock : Error {
  using Error::Error;
};
struct AsymmetricInput : Error {
  using Error::Error;
};

/// Tolerances for positive-semidefiniteness checks.
struct SymTol {
  double psd_tol = 1e-9;  // eigenvalue slack
  double sym_tol = 1e-9;  // asymmetry slack
};

/// Kronecker product a (x) b.
Mat kron(const Mat& a, const Mat& b);

/// Block diagonal of square blocks, in order.
Mat block_diag(const std::vector<Mat>& blocks);

/// max modulus over all eigenvalues.
double spectral_radius(const Mat& a);

/// True iff lambda_min of the symmetrized input >= -tol.psd_tol.
/// Throws AsymmetricInput when the asymmetry exceeds tol.sym_tol.
bool is_psd(const Mat& a, const SymTol& tol = SymTol{});

enum class Discretization { Euler, Exact };

/// Euler: I + dt*A. Exact: expm(dt*A) by scaling-and-squaring with Pade.
Mat discretize(const Mat& a_cont, double dt, Discretization method);

/// Matrix exponential, scaling and squaring with a [13/13] Pade approximant.
Mat expm(const Mat& a);

/// Packed coordinates for symmetric matrices: off-diagonal entries scaled by
/// sqrt(2) so that dot(svec(X), svec(Y)) = trace(XY).
int svec_dim(int n);
std::vector<double> svec(const Mat& s);
Mat unsvec(const std::vector<double>& v, int n);

}  // namespace mdpjls
