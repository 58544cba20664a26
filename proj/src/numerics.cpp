#include "mdpjls/numerics.hpp"

#include <cmath>

namespace mdpjls {

Mat kron(const Mat& a, const Mat& b) {
  Mat c(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l)
          c(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return c;
}

Mat block_diag(const std::vector<Mat>& blocks) {
  int n = 0;
  for (const auto& b : blocks) {
    if (!b.square()) throw NonSquareBlock("block_diag: all blocks must be square");
    n += b.rows();
  }
  Mat c(n, n);
  int off = 0;
  for (const auto& b : blocks) {
    for (int i = 0; i < b.rows(); ++i)
      for (int j = 0; j < b.cols(); ++j) c(off + i, off + j) = b(i, j);
    off += b.rows();
  }
  return c;
}

double spectral_radius(const Mat& a) {
  if (!a.square()) throw DimensionMismatch("spectral_radius: square input required");
  double best = 0.0;
  for (const auto& l : eigenvalues(a)) best = std::max(best, std::abs(l));
  return best;
}

bool is_psd(const Mat& a, const SymTol& tol) {
  if (!a.square()) throw DimensionMismatch("is_psd: square input required");
  if (a.asymmetry() > tol.sym_tol)
    throw AsymmetricInput("is_psd: asymmetry " + std::to_string(a.asymmetry()) +
                          " exceeds tolerance");
  return sym_eig_min(a.symmetrized()) >= -tol.psd_tol;
}

Mat discretize(const Mat& a_cont, double dt, Discretization method) {
  if (!a_cont.square()) throw DimensionMismatch("discretize: square input required");
  if (!(dt > 0.0)) throw Error("discretize: dt must be positive");
  if (method == Discretization::Euler) return Mat::identity(a_cont.rows()) + dt * a_cont;
  return expm(dt * a_cont);
}

Mat expm(const Mat& a) {
  const int n = a.rows();
  // Scale so the [13/13] Pade approximant is well inside its accuracy radius.
  const double theta13 = 5.371920351148152;
  int squarings = 0;
  double nrm = a.norm_inf();
  if (nrm > theta13) {
    squarings = int(std::ceil(std::log2(nrm / theta13)));
    if (squarings < 0) squarings = 0;
  }
  Mat as = std::ldexp(1.0, -squarings) * a;

  static const double b[14] = {64764752532480000.0,
                               32382376266240000.0,
                               7771770303897600.0,
                               1187353796428800.0,
                               129060195264000.0,
                               10559470521600.0,
                               670442572800.0,
                               33522128640.0,
                               1323241920.0,
                               40840800.0,
                               960960.0,
                               16380.0,
                               182.0,
                               1.0};
  const Mat ident = Mat::identity(n);
  const Mat a2 = as * as;
  const Mat a4 = a2 * a2;
  const Mat a6 = a2 * a4;
  Mat u_inner = b[13] * a6 + b[11] * a4 + b[9] * a2;
  Mat u = as * (a6 * u_inner + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
  Mat v_inner = b[12] * a6 + b[10] * a4 + b[8] * a2;
  Mat v = a6 * v_inner + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;

  // (V - U) X = (V + U)
  Lu f = lu_factor(v - u, 1e-300);
  if (f.singular) throw SingularMatrix("expm: Pade denominator singular");
  Mat r = lu_solve(f, v + u);
  for (int k = 0; k < squarings; ++k) r = r * r;
  return r;
}

int svec_dim(int n) { return n * (n + 1) / 2; }

std::vector<double> svec(const Mat& s) {
  const int n = s.rows();
  static const double rt2 = std::sqrt(2.0);
  std::vector<double> v;
  v.reserve(svec_dim(n));
  for (int i = 0; i < n; ++i) {
    v.push_back(s(i, i));
    for (int j = i + 1; j < n; ++j) v.push_back(rt2 * 0.5 * (s(i, j) + s(j, i)));
  }
  return v;
}

Mat unsvec(const std::vector<double>& v, int n) {
  static const double inv_rt2 = 1.0 / std::sqrt(2.0);
  Mat s(n, n);
  size_t k = 0;
  for (int i = 0; i < n; ++i) {
    s(i, i) = v[k++];
    for (int j = i + 1; j < n; ++j) {
      s(i, j) = s(j, i) = inv_rt2 * v[k++];
    }
  }
  return s;
}

}  // namespace mdpjls
