#include "lyap/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "lyap/errors.hpp"

namespace lyap {

Matrix::Matrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

Matrix Matrix::identity(std::size_t dim) {
  Matrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  if (!m.is_finite()) throw InvalidInput("matrix entries must be finite");
  return m;
}

Matrix Matrix::diagonal(std::initializer_list<double> diag) {
  return diagonal(std::span<const double>(diag.begin(), diag.size()));
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  if (n == 0) throw InvalidInput("matrix must have at least one row");
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw InvalidInput("matrix must be square");
    std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * n));
  }
  if (!m.is_finite()) throw InvalidInput("matrix entries must be finite");
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<std::vector<double>> r;
  r.reserve(rows.size());
  for (const auto& row : rows) r.emplace_back(row);
  return from_rows(r);
}

Matrix Matrix::rotation(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return from_rows({{c, -s}, {s, c}});
}

bool Matrix::is_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool Matrix::is_zero() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
}

double Matrix::frobenius_norm() const noexcept {
  // Scaled to avoid overflow for large entries.
  const double scale = max_abs();
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (double v : data_) {
    const double r = v / scale;
    sum += r * r;
  }
  return scale * std::sqrt(sum);
}

double Matrix::max_abs() const noexcept {
  double best = 0.0;
  for (double v : data_) best = std::max(best, std::abs(v));
  return best;
}

Matrix Matrix::transpose() const {
  Matrix t(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (other.dim_ != dim_) throw InvalidInput("dimension mismatch in matrix sum");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (other.dim_ != dim_) throw InvalidInput("dimension mismatch in matrix difference");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) noexcept {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  Matrix out(a.dim());
  multiply_into(a, b, out);
  return out;
}

void multiply_into(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::size_t n = a.dim();
  if (b.dim() != n) throw InvalidInput("dimension mismatch in matrix product");
  if (out.dim() != n) out = Matrix(n);
  if (n == 2) {
    const double a00 = a(0, 0), a01 = a(0, 1), a10 = a(1, 0), a11 = a(1, 1);
    const double b00 = b(0, 0), b01 = b(0, 1), b10 = b(1, 0), b11 = b(1, 1);
    out(0, 0) = a00 * b00 + a01 * b10;
    out(0, 1) = a00 * b01 + a01 * b11;
    out(1, 0) = a10 * b00 + a11 * b10;
    out(1, 1) = a10 * b01 + a11 * b11;
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < n; ++l) s += a(i, l) * b(l, j);
      out(i, j) = s;
    }
  }
}

double SingularSpectrum::product() const {
  return std::accumulate(values.begin(), values.end(), 1.0, std::multiplies<>());
}

namespace {

void require_finite(const Matrix& g) {
  if (g.empty()) throw InvalidInput("matrix must have dimension >= 1");
  if (!g.is_finite()) throw InvalidInput("matrix has non-finite entries");
}

SingularSpectrum singular_values_2x2(const Matrix& g) {
  const double a = g(0, 0), b = g(0, 1), c = g(1, 0), d = g(1, 1);
  if (b == 0.0 && c == 0.0) {
    const double x = std::abs(a), y = std::abs(d);
    return {{std::max(x, y), std::min(x, y)}};
  }
  const double p = std::hypot(a + d, c - b);
  const double q = std::hypot(a - d, b + c);
  const double s1 = 0.5 * (p + q);
  double s2 = 0.0;
  if (s1 > 0.0) {
    // |det| / s1 keeps full relative accuracy in s2 when the gap is large.
    s2 = std::min(s1, std::abs(a * d - b * c) / s1);
  }
  return {{s1, s2}};
}

SingularSpectrum singular_values_jacobi(const Matrix& g) {
  const std::size_t n = g.dim();
  const double scale = g.max_abs();
  if (scale == 0.0) return {std::vector<double>(n, 0.0)};

  // Column-major working copy of g / scale.
  std::vector<double> u(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) u[j * n + i] = g(i, j) / scale;

  constexpr double tol = 1e-15;
  constexpr int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      double* cp = &u[p * n];
      for (std::size_t q = p + 1; q < n; ++q) {
        double* cq = &u[q * n];
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          alpha += cp[i] * cp[i];
          beta += cq[i] * cq[i];
          gamma += cp[i] * cq[i];
        }
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < n; ++i) {
          const double x = cp[i];
          const double y = cq[i];
          cp[i] = c * x - s * y;
          cq[i] = s * x + c * y;
        }
      }
    }
    if (!rotated) break;
  }

  SingularSpectrum out;
  out.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += u[j * n + i] * u[j * n + i];
    out.values[j] = scale * std::sqrt(sum);
  }
  std::sort(out.values.begin(), out.values.end(), std::greater<>());
  return out;
}

}  // namespace

SingularSpectrum singular_values(const Matrix& g) {
  require_finite(g);
  if (g.dim() == 1) return {{std::abs(g(0, 0))}};
  if (g.dim() == 2) return singular_values_2x2(g);
  return singular_values_jacobi(g);
}

double op_norm(const Matrix& g) {
  require_finite(g);
  if (g.dim() == 1) return std::abs(g(0, 0));
  if (g.dim() == 2) return singular_values_2x2(g).values[0];
  return singular_values_jacobi(g).values[0];
}

double determinant(const Matrix& g) {
  require_finite(g);
  const std::size_t n = g.dim();
  if (n == 1) return g(0, 0);
  if (n == 2) return g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
  Matrix lu = g;
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(lu(r, col)) > std::abs(lu(pivot, col))) pivot = r;
    if (lu(pivot, col) == 0.0) return 0.0;
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(pivot, j), lu(col, j));
      det = -det;
    }
    const double d = lu(col, col);
    det *= d;
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = lu(r, col) / d;
      if (f == 0.0) continue;
      for (std::size_t j = col + 1; j < n; ++j) lu(r, j) -= f * lu(col, j);
    }
  }
  return det;
}

std::size_t binomial(std::size_t m, std::size_t k) noexcept {
  if (k > m) return 0;
  k = std::min(k, m - k);
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t num = m - k + i;
    if (r > std::numeric_limits<std::size_t>::max() / num) return std::numeric_limits<std::size_t>::max();
    r = r * num / i;
  }
  return r;
}

std::vector<std::vector<std::size_t>> index_subsets(std::size_t m, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  if (k > m) return out;
  std::vector<std::size_t> cur(k);
  std::iota(cur.begin(), cur.end(), std::size_t{0});
  while (true) {
    out.push_back(cur);
    // Advance to the next subset in lexicographic order.
    std::size_t i = k;
    while (i > 0 && cur[i - 1] == m - k + (i - 1)) --i;
    if (i == 0) break;
    ++cur[i - 1];
    for (std::size_t j = i; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

Matrix exterior_power(const Matrix& g, std::size_t k) {
  require_finite(g);
  const std::size_t m = g.dim();
  if (k < 1 || k > m) throw InvalidInput("exterior power degree must satisfy 1 <= k <= dim");
  if (k == 1) return g;
  if (k == m) return Matrix::from_rows({{determinant(g)}});

  const auto subsets = index_subsets(m, k);
  const std::size_t d = subsets.size();
  Matrix out(d);
  Matrix minor(k);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) minor(i, j) = g(subsets[r][i], subsets[c][j]);
      out(r, c) = determinant(minor);
    }
  }
  return out;
}

double gap_ratio(const Matrix& g) {
  if (g.dim() < 2) throw InvalidInput("gap_ratio requires dimension >= 2");
  const auto s = singular_values(g);
  if (s.values[1] <= kRankTolerance * s.values[0]) return std::numeric_limits<double>::infinity();
  return s.values[0] / s.values[1];
}

}  // namespace lyap
