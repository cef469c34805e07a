#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace lyap {

/// Dense m x m real matrix, row-major. Entries are always finite; the
/// checked factories reject NaN/Inf.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t dim);  // zero matrix

  static Matrix identity(std::size_t dim);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix diagonal(std::initializer_list<double> diag);
  /// Rows must all have the same length as the number of rows.
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  /// 2x2 rotation by `angle` radians.
  static Matrix rotation(double angle);

  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return dim_ == 0; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * dim_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * dim_ + j]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool is_finite() const noexcept;
  bool is_zero() const noexcept;
  double frobenius_norm() const noexcept;
  double max_abs() const noexcept;
  Matrix transpose() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s) noexcept;

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }
  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// out = a * b without allocating when `out` already has the right size.
/// `out` must not alias `a` or `b`.
void multiply_into(const Matrix& a, const Matrix& b, Matrix& out);

/// Singular values s_1 >= ... >= s_m >= 0.
struct SingularSpectrum {
  std::vector<double> values;

  double largest() const { return values.front(); }
  double smallest() const { return values.back(); }
  double product() const;
};

/// One-sided (Hestenes) Jacobi with a closed form for 2x2.
/// Throws InvalidInput on non-finite entries.
SingularSpectrum singular_values(const Matrix& g);

/// Operator 2-norm, equal to s_1(g).
double op_norm(const Matrix& g);

/// Determinant by LU with partial pivoting.
double determinant(const Matrix& g);

/// The C(m,k) x C(m,k) matrix of k x k minors of g. Rows and columns are
/// indexed by k-subsets of {0..m-1} in lexicographic order.
Matrix exterior_power(const Matrix& g, std::size_t k);

/// Lexicographic list of k-subsets of {0, ..., m-1}.
std::vector<std::vector<std::size_t>> index_subsets(std::size_t m, std::size_t k);

/// Binomial coefficient; saturates at SIZE_MAX.
std::size_t binomial(std::size_t m, std::size_t k) noexcept;

/// s_2 below this fraction of s_1 is treated as an exact zero by gap_ratio.
inline constexpr double kRankTolerance = 1e-12;

/// s_1 / s_2 in [1, +inf]. Returns +infinity when s_2 <= kRankTolerance * s_1.
/// Requires dim >= 2.
double gap_ratio(const Matrix& g);

}  // namespace lyap
