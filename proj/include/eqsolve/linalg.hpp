#pragma once

// Dense row-major matrices, Gaussian elimination with partial pivoting and
// back substitution, and recovery of A·x = b from a linear equation system.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"
#include "vector.hpp"

namespace eqsolve {

class Matrix {
public:
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) throw DimensionMismatch("matrix needs at least one row and one column");
  }

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) throw DimensionMismatch("matrix needs at least one row and one column");
    if (data_.size() != rows * cols) throw DimensionMismatch("matrix data length does not match its shape");
    for (double v : data_)
      if (!std::isfinite(v)) throw DomainError("matrix entry is not finite");
  }

  Matrix(std::initializer_list<std::initializer_list<double>> rows)
      : Matrix(rows.size(), rows.size() == 0 ? 0 : rows.begin()->size(), flatten(rows)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  static std::vector<double> flatten(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<double> out;
    const std::size_t width = rows.size() == 0 ? 0 : rows.begin()->size();
    for (const auto& r : rows) {
      if (r.size() != width) throw DimensionMismatch("ragged matrix literal");
      out.insert(out.end(), r.begin(), r.end());
    }
    return out;
  }

  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// A·x = b.
struct LinearSystem {
  Matrix a;
  Vector b;

  LinearSystem(Matrix a_, Vector b_) : a(std::move(a_)), b(std::move(b_)) {
    if (b.size() != a.rows()) throw DimensionMismatch("right-hand side length does not match row count");
  }
};

// ---------------------------------------------------------------------------
// Elementary operations

inline Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

inline Matrix mat_mul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw DimensionMismatch("mat_mul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " times " +
                            std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline Vector mat_vec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionMismatch("mat_vec: vector length does not match column count");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

/// M + λI.
inline Matrix add_scaled_identity(Matrix m, double lambda) {
  if (!m.is_square()) throw DimensionMismatch("add_scaled_identity needs a square matrix");
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += lambda;
  return m;
}

// ---------------------------------------------------------------------------
// Elimination

/// Relative size below which a pivot candidate counts as zero.
inline constexpr double kPivotTolerance = 1e-12;

namespace detail {

struct Echelon {
  std::vector<std::vector<double>> rows;  // augmented [A | b], row-echelon form
  std::vector<double> scale;              // max |a_ij| of each row before elimination
  std::vector<std::size_t> pivot_cols;    // pivot column of row r, for r < rank
};

// Forward elimination with partial pivoting. A column whose best candidate is
// below kPivotTolerance times its row's original scale has no pivot.
inline Echelon row_echelon(const Matrix& a, std::span<const double> b) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Echelon e;
  e.rows.resize(m);
  e.scale.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    e.rows[i].assign(a.row(i).begin(), a.row(i).end());
    e.rows[i].push_back(b[i]);
    e.scale[i] = norm_inf(a.row(i));
  }

  std::size_t r = 0;
  for (std::size_t c = 0; c < n && r < m; ++c) {
    std::size_t best = r;
    for (std::size_t i = r + 1; i < m; ++i)
      if (std::abs(e.rows[i][c]) > std::abs(e.rows[best][c])) best = i;

    const double pivot = e.rows[best][c];
    if (pivot == 0.0 || std::abs(pivot) < kPivotTolerance * e.scale[best]) {
      for (std::size_t i = r; i < m; ++i)
        if (std::abs(e.rows[i][c]) < kPivotTolerance * e.scale[i]) e.rows[i][c] = 0.0;
      continue;
    }
    std::swap(e.rows[r], e.rows[best]);
    std::swap(e.scale[r], e.scale[best]);

    for (std::size_t i = r + 1; i < m; ++i) {
      const double factor = e.rows[i][c] / pivot;
      if (factor == 0.0) continue;
      e.rows[i][c] = 0.0;
      for (std::size_t j = c + 1; j <= n; ++j) e.rows[i][j] -= factor * e.rows[r][j];
    }
    e.pivot_cols.push_back(c);
    ++r;
  }
  return e;
}

// Back substitution over the pivot rows; free variables are 0.
inline Vector back_substitute(const Echelon& e, std::size_t n) {
  Vector x(n, 0.0);
  for (std::size_t r = e.pivot_cols.size(); r-- > 0;) {
    const std::size_t c = e.pivot_cols[r];
    double sum = e.rows[r][n];
    for (std::size_t j = c + 1; j < n; ++j) sum -= e.rows[r][j] * x[j];
    x[c] = sum / e.rows[r][c];
  }
  return x;
}

}  // namespace detail

/// Outcome of gaussian_solve. When `rank < n` the system was singular but
/// consistent and `solution` is the particular solution with free variables 0.
struct GaussSolution {
  Vector solution;
  std::size_t rank = 0;

  bool rank_deficient() const noexcept { return rank < solution.size(); }
};

/// Solves a square system by Gaussian elimination with partial pivoting and
/// back substitution.
///
/// Throws NonSquare for m != n and Inconsistent when a zero row of the
/// reduced coefficient matrix meets a nonzero right-hand side.
inline GaussSolution gaussian_solve(const LinearSystem& ls) {
  const std::size_t n = ls.a.cols();
  if (ls.a.rows() != n) throw NonSquare(ls.a.rows(), n);

  const auto e = detail::row_echelon(ls.a, ls.b);
  const std::size_t rank = e.pivot_cols.size();

  const double b_scale = std::max(1.0, norm_inf(ls.b));
  const double a_scale = std::max(1.0, norm_inf(ls.a.data()));
  for (std::size_t i = rank; i < ls.a.rows(); ++i)
    if (std::abs(e.rows[i][n]) > 1e-9 * std::max(a_scale, b_scale)) throw Inconsistent();

  return {detail::back_substitute(e, n), rank};
}

/// Solves a square full-rank system; used for Newton and damped normal
/// equations so no inverse is ever formed. Throws SingularMatrix otherwise.
inline Vector lin_solve_general(const Matrix& a, std::span<const double> b) {
  if (!a.is_square()) throw NonSquare(a.rows(), a.cols());
  if (b.size() != a.rows()) throw DimensionMismatch("right-hand side length does not match row count");
  const auto e = detail::row_echelon(a, b);
  if (e.pivot_cols.size() < a.cols()) throw SingularMatrix();
  Vector x = detail::back_substitute(e, a.cols());
  for (double v : x)
    if (!std::isfinite(v)) throw SingularMatrix();
  return x;
}

// ---------------------------------------------------------------------------
// Extraction from equation systems

namespace detail {

// SplitMix64: a fixed, portable sequence for probe points.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

inline constexpr std::size_t kLinearityProbes = 8;

/// Recovers A and b from residuals r(x) = A x - b, then checks the affine
/// model against the residuals at kLinearityProbes pseudorandom points.
inline LinearSystem extract_linear(const EquationSystem& system) {
  const std::size_t m = system.equation_count();
  const std::size_t n = system.variable_count();

  Vector origin(n, 0.0);
  const Vector r0 = residual_vector(system, origin);

  Matrix a(m, n);
  Vector b(m);
  for (std::size_t i = 0; i < m; ++i) b[i] = -r0[i];
  for (std::size_t j = 0; j < n; ++j) {
    Vector unit(n, 0.0);
    unit[j] = 1.0;
    const Vector rj = residual_vector(system, unit);
    for (std::size_t i = 0; i < m; ++i) a(i, j) = rj[i] - r0[i];
  }

  std::uint64_t state = 0x5EEDu;
  for (std::size_t p = 0; p < kLinearityProbes; ++p) {
    Vector probe(n);
    for (auto& v : probe) {
      const double u = static_cast<double>(detail::splitmix64(state) >> 11) * 0x1.0p-53;
      v = -10.0 + 20.0 * u;
    }
    Vector r;
    try {
      r = residual_vector(system, probe);
    } catch (const DomainError& e) {
      // An affine residual is defined everywhere.
      throw NotLinear(e.equation().value_or(0), probe);
    }
    const Vector model = mat_vec(a, probe);
    for (std::size_t i = 0; i < m; ++i) {
      const double predicted = model[i] - b[i];
      if (std::abs(r[i] - predicted) > 1e-9 * (1.0 + std::abs(r[i]))) throw NotLinear(i, probe);
    }
  }
  return {std::move(a), std::move(b)};
}

}  // namespace eqsolve
