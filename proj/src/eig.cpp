#include "mdpjls/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mdpjls {

namespace {

double hypot2(double a, double b) { return std::hypot(a, b); }

// Householder reduction to tridiagonal form (diag d, off-diag e) with the
// accumulated orthogonal transform left in z.
void tridiagonalize(Mat& z, std::vector<double>& d, std::vector<double>& e) {
  const int n = z.rows();
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (int i = n - 1; i > 0; --i) {
    int l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (int k = 0; k <= l; ++k) scale += std::fabs(z(i, k));
      if (scale == 0.0) {
        e[i] = z(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          z(i, k) /= scale;
          h += z(i, k) * z(i, k);
        }
        double f = z(i, l);
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        z(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          z(j, i) = z(i, j) / h;
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += z(j, k) * z(i, k);
          for (int k = j + 1; k <= l; ++k) g += z(k, j) * z(i, k);
          e[j] = g / h;
          f += e[j] * z(i, j);
        }
        double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = z(i, j);
          e[j] = g = e[j] - hh * f;
          for (int k = 0; k <= j; ++k) z(j, k) -= f * e[k] + g * z(i, k);
        }
      }
    } else {
      e[i] = z(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    int l = i - 1;
    if (d[i] != 0.0) {
      for (int j = 0; j <= l; ++j) {
        double g = 0.0;
        for (int k = 0; k <= l; ++k) g += z(i, k) * z(k, j);
        for (int k = 0; k <= l; ++k) z(k, j) -= g * z(k, i);
      }
    }
    d[i] = z(i, i);
    z(i, i) = 1.0;
    for (int j = 0; j <= l; ++j) z(j, i) = z(i, j) = 0.0;
  }
}

// QL with implicit shifts on a tridiagonal matrix; accumulates vectors in z.
void ql_implicit(std::vector<double>& d, std::vector<double>& e, Mat& z) {
  const int n = int(d.size());
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= 1e-300 || std::fabs(e[m]) <= 2.3e-16 * dd) break;
      }
      if (m != l) {
        if (++iter == 50) throw EigenFailure("symmetric QL: too many iterations");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = hypot2(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::fabs(r) : -std::fabs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          double b = c * e[i];
          r = hypot2(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < n; ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  // sort ascending, permuting vector columns alongside
  for (int i = 0; i < n - 1; ++i) {
    int k = i;
    for (int j = i + 1; j < n; ++j)
      if (d[j] < d[k]) k = j;
    if (k != i) {
      std::swap(d[i], d[k]);
      for (int r = 0; r < n; ++r) std::swap(z(r, i), z(r, k));
    }
  }
}

// Parlett-Reinsch balance; similarity by diagonal powers of two.
void balance(Mat& a) {
  const int n = a.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (int i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::fabs(a(j, i));
        r += std::fabs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / 2.0, f = 1.0, s = c + r;
      while (c < g) {
        f *= 2.0;
        c *= 4.0;
      }
      g = r * 2.0;
      while (c > g) {
        f /= 2.0;
        c /= 4.0;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        for (int j = 0; j < n; ++j) a(i, j) *= g;
        for (int j = 0; j < n; ++j) a(j, i) *= f;
      }
    }
  }
}

// Householder reduction to upper Hessenberg form (eigenvalues only, no
// transform accumulation).
void hessenberg(Mat& a) {
  const int n = a.rows();
  for (int m = 1; m < n - 1; ++m) {
    double x = 0.0;
    int i = m;
    for (int j = m; j < n; ++j) {
      if (std::fabs(a(j, m - 1)) > std::fabs(x)) {
        x = a(j, m - 1);
        i = j;
      }
    }
    if (i != m) {
      for (int j = m - 1; j < n; ++j) std::swap(a(i, j), a(m, j));
      for (int j = 0; j < n; ++j) std::swap(a(j, i), a(j, m));
    }
    if (x != 0.0) {
      for (i = m + 1; i < n; ++i) {
        double y = a(i, m - 1);
        if (y != 0.0) {
          y /= x;
          a(i, m - 1) = y;
          for (int j = m; j < n; ++j) a(i, j) -= y * a(m, j);
          for (int j = 0; j < n; ++j) a(j, m) += y * a(j, i);
        }
      }
    }
  }
  for (int i = 2; i < n; ++i)
    for (int j = 0; j < i - 1; ++j) a(i, j) = 0.0;
}

// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
std::vector<std::complex<double>> hqr(Mat& a) {
  const int n = a.rows();
  std::vector<std::complex<double>> w(n);
  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::fabs(a(i, j));
  int nn = n - 1;
  double t = 0.0;
  while (nn >= 0) {
    int its = 0;
    int l;
    do {
      for (l = nn; l >= 1; --l) {
        double s = std::fabs(a(l - 1, l - 1)) + std::fabs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::fabs(a(l, l - 1)) + s == s || std::fabs(a(l, l - 1)) <= 2.3e-16 * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      double x = a(nn, nn);
      if (l == nn) {
        w[nn--] = x + t;
      } else {
        double y = a(nn - 1, nn - 1);
        double z = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          double p = 0.5 * (y - x);
          double q = p * p + z;
          double zz = std::sqrt(std::fabs(q));
          x += t;
          if (q >= 0.0) {
            zz = p + (p >= 0.0 ? std::fabs(zz) : -std::fabs(zz));
            w[nn - 1] = w[nn] = x + zz;
            if (zz != 0.0) w[nn] = x - z / zz;
          } else {
            w[nn] = std::complex<double>(x + p, -zz);
            w[nn - 1] = std::conj(w[nn]);
          }
          nn -= 2;
        } else {
          double p = 0, q = 0, r = 0;
          if (its == 30 || its == 60) {
            // exceptional shift
            t += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            double s = std::fabs(a(nn, nn - 1)) + std::fabs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            z = -0.4375 * s * s;
          }
          if (++its > 100) throw EigenFailure("hessenberg QR: too many iterations");
          int m;
          for (m = nn - 2; m >= l; --m) {
            double zz = a(m, m);
            double rr = x - zz;
            double ss = y - zz;
            p = (rr * ss - z) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - zz - rr - ss;
            r = a(m + 2, m + 1);
            double s = std::fabs(p) + std::fabs(q) + std::fabs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            double u = std::fabs(a(m, m - 1)) * (std::fabs(q) + std::fabs(r));
            double v = std::fabs(p) *
                       (std::fabs(a(m - 1, m - 1)) + std::fabs(zz) + std::fabs(a(m + 1, m + 1)));
            if (u + v == v || u <= 2.3e-16 * v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k != nn - 1) r = a(k + 2, k - 1);
              x = std::fabs(p) + std::fabs(q) + std::fabs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            double s = std::sqrt(p * p + q * q + r * r);
            if (p < 0.0) s = -s;
            if (s == 0.0) continue;
            if (k == m) {
              if (l != m) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            double y2 = q / s;
            double z2 = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {
              p = a(k, j) + q * a(k + 1, j);
              if (k != nn - 1) {
                p += r * a(k + 2, j);
                a(k + 2, j) -= p * z2;
              }
              a(k + 1, j) -= p * y2;
              a(k, j) -= p * x;
            }
            int mmin = nn < k + 3 ? nn : k + 3;
            for (int i = l; i <= mmin; ++i) {
              p = x * a(i, k) + y2 * a(i, k + 1);
              if (k != nn - 1) {
                p += z2 * a(i, k + 2);
                a(i, k + 2) -= p * r;
              }
              a(i, k + 1) -= p * q;
              a(i, k) -= p;
            }
          }
        }
      }
    } while (l < nn - 1 && nn >= 0);
  }
  return w;
}

}  // namespace

SymEig sym_eig(const Mat& a) {
  if (!a.square()) throw DimensionMismatch("sym_eig: square input required");
  SymEig out;
  out.vectors = a.symmetrized();
  if (a.rows() == 0) return out;
  if (a.rows() == 1) {
    out.values = {a(0, 0)};
    out.vectors = Mat::identity(1);
    return out;
  }
  std::vector<double> d, e;
  tridiagonalize(out.vectors, d, e);
  ql_implicit(d, e, out.vectors);
  out.values = std::move(d);
  return out;
}

double sym_eig_min(const Mat& a) {
  // Cheap paths first: 1x1 and 2x2 closed forms.
  if (a.rows() == 1) return a(0, 0);
  if (a.rows() == 2) {
    const Mat s = a.symmetrized();
    double tr = s(0, 0) + s(1, 1);
    double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
    double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return tr / 2.0 - disc;
  }
  return sym_eig(a).values.front();
}

std::vector<std::complex<double>> eigenvalues(const Mat& a) {
  if (!a.square()) throw DimensionMismatch("eigenvalues: square input required");
  const int n = a.rows();
  if (n == 0) return {};
  if (n == 1) return {std::complex<double>(a(0, 0), 0.0)};
  Mat h = a;
  balance(h);
  hessenberg(h);
  return hqr(h);
}

bool cholesky(const Mat& a, Mat& l, double eps) {
  const int n = a.rows();
  l = Mat(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= eps) return false;
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return true;
}

std::vector<double> chol_solve(const Mat& l, std::vector<double> b) {
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

double chol_logdet(const Mat& l) {
  double s = 0.0;
  for (int i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

Mat forward_subst(const Mat& l, Mat b) {
  const int n = l.rows();
  for (int c = 0; c < b.cols(); ++c) {
    for (int i = 0; i < n; ++i) {
      double s = b(i, c);
      for (int k = 0; k < i; ++k) s -= l(i, k) * b(k, c);
      b(i, c) = s / l(i, i);
    }
  }
  return b;
}

Mat back_subst_t(const Mat& l, Mat b) {
  const int n = l.rows();
  for (int c = 0; c < b.cols(); ++c) {
    for (int i = n - 1; i >= 0; --i) {
      double s = b(i, c);
      for (int k = i + 1; k < n; ++k) s -= l(k, i) * b(k, c);
      b(i, c) = s / l(i, i);
    }
  }
  return b;
}

Lu lu_factor(const Mat& a, double pivot_tol) {
  Lu f;
  f.lu = a;
  const int n = a.rows();
  f.perm.resize(n);
  std::iota(f.perm.begin(), f.perm.end(), 0);
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::fabs(f.lu(i, k)) > std::fabs(f.lu(p, k))) p = i;
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(p, j));
      std::swap(f.perm[k], f.perm[p]);
      f.sign = -f.sign;
    }
    if (std::fabs(f.lu(k, k)) <= pivot_tol) {
      f.singular = true;
      return f;
    }
    for (int i = k + 1; i < n; ++i) {
      f.lu(i, k) /= f.lu(k, k);
      const double m = f.lu(i, k);
      if (m == 0.0) continue;
      for (int j = k + 1; j < n; ++j) f.lu(i, j) -= m * f.lu(k, j);
    }
  }
  return f;
}

std::vector<double> lu_solve(const Lu& f, std::vector<double> b) {
  if (f.singular) throw SingularMatrix("lu_solve: singular factor");
  const int n = f.lu.rows();
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  for (int i = 1; i < n; ++i) {
    double s = x[i];
    for (int k = 0; k < i; ++k) s -= f.lu(i, k) * x[k];
    x[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int k = i + 1; k < n; ++k) s -= f.lu(i, k) * x[k];
    x[i] = s / f.lu(i, i);
  }
  return x;
}

Mat lu_solve(const Lu& f, const Mat& b) {
  Mat x(b.rows(), b.cols());
  for (int c = 0; c < b.cols(); ++c) {
    auto col = lu_solve(f, b.col_vec(c));
    for (int i = 0; i < b.rows(); ++i) x(i, c) = col[i];
  }
  return x;
}

Mat inverse(const Mat& a) {
  Lu f = lu_factor(a, 1e-300);
  if (f.singular) throw SingularMatrix("inverse: singular matrix");
  return lu_solve(f, Mat::identity(a.rows()));
}

std::vector<double> lstsq(const Mat& a, const std::vector<double>& b) {
  const int m = a.rows(), n = a.cols();
  if (m < n) throw DimensionMismatch("lstsq: rows >= cols required");
  Mat qr = a;
  std::vector<double> rdiag(n);
  for (int k = 0; k < n; ++k) {
    double nrm = 0.0;
    for (int i = k; i < m; ++i) nrm = std::hypot(nrm, qr(i, k));
    if (nrm == 0.0) throw SingularMatrix("lstsq: rank-deficient system");
    if (qr(k, k) < 0.0) nrm = -nrm;
    for (int i = k; i < m; ++i) qr(i, k) /= nrm;
    qr(k, k) += 1.0;
    for (int j = k + 1; j < n; ++j) {
      double s = 0.0;
      for (int i = k; i < m; ++i) s += qr(i, k) * qr(i, j);
      s = -s / qr(k, k);
      for (int i = k; i < m; ++i) qr(i, j) += s * qr(i, k);
    }
    rdiag[k] = -nrm;
  }
  std::vector<double> y = b;
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int i = k; i < m; ++i) s += qr(i, k) * y[i];
    s = -s / qr(k, k);
    for (int i = k; i < m; ++i) y[i] += s * qr(i, k);
  }
  for (int k = n - 1; k >= 0; --k) {
    y[k] /= rdiag[k];
    for (int i = 0; i < k; ++i) y[i] -= y[k] * qr(i, k);
  }
  y.resize(n);
  return y;
}

}  // namespace mdpjls
