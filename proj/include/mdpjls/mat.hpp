#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdpjls {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

/// Dense real matrix, row-major. Small sizes only; everything is by value.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(size_t(rows) * cols, 0.0) {}
  Mat(int rows, int cols, std::vector<double> entries);
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat identity(int n);
  static Mat zeros(int rows, int cols) { return Mat(rows, cols); }
  static Mat col(const std::vector<double>& v);
  static Mat ones(int rows, int cols);
  static Mat diag(const std::vector<double>& d);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return a_.empty(); }
  bool square() const { return rows_ == cols_; }

  double& operator()(int i, int j) { return a_[size_t(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[size_t(i) * cols_ + j]; }

  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

  Mat transpose() const;
  std::vector<double> row_vec(int i) const;
  std::vector<double> col_vec(int j) const;

  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(double s);

  bool all_finite() const;

  /// max_i sum_j |a_ij|
  double norm_inf() const;
  double norm_fro() const;
  double max_abs() const;
  /// max_ij |a_ij - a_ji|, 0 for non-square
  double asymmetry() const;

  /// (A + A') / 2
  Mat symmetrized() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(double s, Mat a);
Mat operator*(Mat a, double s);

/// Serial triple loop, kept as the reference for mat_mul.
Mat mat_mul_serial(const Mat& a, const Mat& b);
/// OpenMP over output rows for larger operands, identical results.
Mat mat_mul(const Mat& a, const Mat& b);
Mat operator*(const Mat& a, const Mat& b);

std::vector<double> mat_vec(const Mat& a, const std::vector<double>& x);
/// x' A as a plain vector
std::vector<double> vec_mat(const std::vector<double>& x, const Mat& a);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double vec_norm_inf(const std::vector<double>& v);
double vec_norm2(const std::vector<double>& v);

std::string to_string(const Mat& a);

}  // namespace mdpjls
