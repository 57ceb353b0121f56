#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <utility>
#include <vector>

#include "mmobs/interval.hpp"

namespace mmobs {

/// Dense row-major real matrix. Sizes here are tiny (LMI blocks stay below ~12x12),
/// so everything is plain loops over a std::vector.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols, 0.0}; }
  static Matrix identity(std::size_t n);
  static Matrix diagonal(const Vector& d);
  static Matrix column(const Vector& v);
  static Matrix row(const Vector& v);

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] bool empty() const { return data_.empty(); }
  [[nodiscard]] bool is_square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  [[nodiscard]] const std::vector<double>& data() const { return data_; }
  [[nodiscard]] Vector row_vector(std::size_t i) const;
  [[nodiscard]] Vector col_vector(std::size_t j) const;

  [[nodiscard]] Matrix transpose() const;
  [[nodiscard]] Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const Matrix& b);

  [[nodiscard]] double max_abs() const;
  [[nodiscard]] double norm_inf() const;  // max absolute row sum
  [[nodiscard]] double norm_fro() const;
  [[nodiscard]] bool all_finite() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator-(Matrix a);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, const Vector& x);

// Vector helpers used across the library.
Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
double norm_inf(const Vector& v);

/// Entrywise interval matrix [lo, hi].
struct IntervalMatrix {
  Matrix lo;
  Matrix hi;

  IntervalMatrix() = default;
  IntervalMatrix(Matrix lo_, Matrix hi_);

  [[nodiscard]] std::size_t rows() const { return lo.rows(); }
  [[nodiscard]] std::size_t cols() const { return lo.cols(); }
  [[nodiscard]] Interval operator()(std::size_t i, std::size_t j) const { return {lo(i, j), hi(i, j)}; }
};

// Sign splits: M = pos - neg, |M| = pos + neg.
Matrix pos_part(const Matrix& m);
Matrix neg_part(const Matrix& m);
Matrix abs_mat(const Matrix& m);

// Square-only: M = diag + offdiag, metzlerized = diag + |offdiag|.
Matrix diag_part(const Matrix& m);
Matrix offdiag_part(const Matrix& m);
Matrix metzlerized(const Matrix& m);

bool is_metzler(const Matrix& m, double tol = 0.0);
bool is_nonneg(const Matrix& m, double tol = 0.0);
bool is_nonpos(const Matrix& m, double tol = 0.0);

/// Tight bounds of {A x : xlo <= x <= xhi}: (A+ xlo - A- xhi, A+ xhi - A- xlo).
std::pair<Vector, Vector> interval_matvec_bounds(const Matrix& a, const Vector& xlo, const Vector& xhi);
Box interval_matvec_bounds(const Matrix& a, const Box& box);

// Solves A X = B by LU with partial pivoting. Throws SingularMatrix when a
// pivot falls below 1e-12 times the largest entry of A.
Matrix lu_solve(const Matrix& a, const Matrix& b);
Vector lu_solve(const Matrix& a, const Vector& b);
Matrix inverse(const Matrix& a);

struct SymEig {
  Vector values;  // ascending
  Matrix vectors;  // orthogonal, column k pairs with values[k]
};

// Cyclic Jacobi rotations. Input must be symmetric up to 1e-9 relative
// asymmetry; it is symmetrized before iterating.
SymEig sym_eig(const Matrix& s);
double max_eigenvalue(const Matrix& s);
double min_eigenvalue(const Matrix& s);
bool is_pos_def(const Matrix& s, double margin = 0.0);

// Lower Cholesky factor, or nullopt when s is not numerically positive definite.
std::optional<Matrix> cholesky(const Matrix& s);

// Spectra of general square matrices (diagnostic only).
double spectral_radius(const Matrix& m);
double spectral_abscissa(const Matrix& m);

Matrix symmetrize(const Matrix& s);

}  // namespace mmobs
