#include "mdpjls/mat.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace mdpjls {

Mat::Mat(int rows, int cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), a_(std::move(entries)) {
  if (a_.size() != size_t(rows) * size_t(cols))
    throw DimensionMismatch("Mat: entry count does not match rows*cols");
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = int(rows.size());
  cols_ = rows_ ? int(rows.begin()->size()) : 0;
  a_.reserve(size_t(rows_) * cols_);
  for (const auto& r : rows) {
    if (int(r.size()) != cols_) throw DimensionMismatch("Mat: ragged initializer");
    a_.insert(a_.end(), r.begin(), r.end());
  }
}

Mat Mat::identity(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::col(const std::vector<double>& v) { return Mat(int(v.size()), 1, v); }

Mat Mat::ones(int rows, int cols) {
  Mat m(rows, cols);
  for (auto& x : m.data()) x = 1.0;
  return m;
}

Mat Mat::diag(const std::vector<double>& d) {
  Mat m(int(d.size()), int(d.size()));
  for (int i = 0; i < int(d.size()); ++i) m(i, i) = d[i];
  return m;
}

Mat Mat::transpose() const {
  Mat t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

std::vector<double> Mat::row_vec(int i) const {
  return std::vector<double>(a_.begin() + size_t(i) * cols_, a_.begin() + size_t(i + 1) * cols_);
}

std::vector<double> Mat::col_vec(int j) const {
  std::vector<double> v(rows_);
  for (int i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

Mat& Mat::operator+=(const Mat& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionMismatch("Mat +=");
  for (size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
  return *this;
}

Mat& Mat::operator-=(const Mat& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionMismatch("Mat -=");
  for (size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (auto& x : a_) x *= s;
  return *this;
}

bool Mat::all_finite() const {
  for (double x : a_)
    if (!std::isfinite(x)) return false;
  return true;
}

double Mat::norm_inf() const {
  double best = 0.0;
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int j = 0; j < cols_; ++j) s += std::fabs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

double Mat::norm_fro() const {
  double s = 0.0;
  for (double x : a_) s += x * x;
  return std::sqrt(s);
}

double Mat::max_abs() const {
  double best = 0.0;
  for (double x : a_) best = std::max(best, std::fabs(x));
  return best;
}

double Mat::asymmetry() const {
  if (!square()) return 0.0;
  double best = 0.0;
  for (int i = 0; i < rows_; ++i)
    for (int j = i + 1; j < cols_; ++j)
      best = std::max(best, std::fabs((*this)(i, j) - (*this)(j, i)));
  return best;
}

Mat Mat::symmetrized() const {
  Mat s(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) s(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
  return s;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }
Mat operator*(double s, Mat a) { return a *= s; }
Mat operator*(Mat a, double s) { return a *= s; }

Mat mat_mul_serial(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("mat_mul: inner dimensions");
  Mat c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Mat mat_mul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("mat_mul: inner dimensions");
  const long work = long(a.rows()) * a.cols() * b.cols();
  if (work < 64 * 64 * 64) return mat_mul_serial(a, b);
  Mat c(a.rows(), b.cols());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Mat operator*(const Mat& a, const Mat& b) { return mat_mul(a, b); }

std::vector<double> mat_vec(const Mat& a, const std::vector<double>& x) {
  if (a.cols() != int(x.size())) throw DimensionMismatch("mat_vec");
  std::vector<double> y(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

std::vector<double> vec_mat(const std::vector<double>& x, const Mat& a) {
  if (a.rows() != int(x.size())) throw DimensionMismatch("vec_mat");
  std::vector<double> y(a.cols(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (int j = 0; j < a.cols(); ++j) y[j] += xi * a(i, j);
  }
  return y;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double vec_norm_inf(const std::vector<double>& v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::fabs(x));
  return best;
}

double vec_norm2(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

std::string to_string(const Mat& a) {
  std::string out;
  char buf[64];
  for (int i = 0; i < a.rows(); ++i) {
    out += i == 0 ? "[" : " ";
    for (int j = 0; j < a.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "% .6g", a(i, j));
      out += buf;
      if (j + 1 < a.cols()) out += " ";
    }
    out += i + 1 < a.rows() ? "\n" : "]";
  }
  return out;
}

}  // namespace mdpjls
