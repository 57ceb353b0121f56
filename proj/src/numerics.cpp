#include "mmobs/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "mmobs/error.hpp"

namespace mmobs {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": shapes differ");
  }
}

void require_square(const Matrix& m, const char* what) {
  if (!m.is_square()) {
    throw Error(ErrorKind::NonSquare, std::string(what) + " needs a square matrix");
  }
}

Eigen::VectorXcd general_eigenvalues(const Matrix& m) {
  require_square(m, "eigenvalues");
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(e, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::SolverFailure, "nonsymmetric eigenvalue iteration did not converge");
  }
  return solver.eigenvalues();
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw Error(ErrorKind::DimensionMismatch, "ragged matrix literal");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const Vector& d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::column(const Vector& v) {
  Matrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

Matrix Matrix::row(const Vector& v) {
  Matrix m(1, v.size());
  for (std::size_t i = 0; i < v.size(); ++i) m(0, i) = v[i];
  return m;
}

Vector Matrix::row_vector(std::size_t i) const {
  return Vector(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
}

Vector Matrix::col_vector(std::size_t j) const {
  Vector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) {
    throw Error(ErrorKind::DimensionMismatch, "block out of range");
  }
  Matrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) {
    throw Error(ErrorKind::DimensionMismatch, "block out of range");
  }
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Matrix::norm_inf() const {
  double m = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
    m = std::max(m, s);
  }
  return m;
}

double Matrix::norm_fro() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& o) {
  require_same_shape(*this, o, "matrix addition");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  require_same_shape(*this, o, "matrix subtraction");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator-(Matrix a) { return a *= -1.0; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "matrix product: inner dimensions differ");
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vector operator*(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size()) {
    throw Error(ErrorKind::DimensionMismatch, "matrix-vector product: dimensions differ");
  }
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Vector add(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "vector addition");
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vector sub(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "vector subtraction");
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

double norm_inf(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

IntervalMatrix::IntervalMatrix(Matrix lo_, Matrix hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  require_same_shape(lo, hi, "interval matrix");
  for (std::size_t i = 0; i < lo.rows(); ++i)
    for (std::size_t j = 0; j < lo.cols(); ++j)
      if (!(lo(i, j) <= hi(i, j))) {
        throw Error(ErrorKind::DomainError, "interval matrix entry with lo > hi");
      }
}

Matrix pos_part(const Matrix& m) {
  Matrix r = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = std::max(m(i, j), 0.0);
  return r;
}

// M- = M+ - M, computed entrywise as max(-M, 0) which is the same value exactly.
Matrix neg_part(const Matrix& m) {
  Matrix r = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = std::max(-m(i, j), 0.0);
  return r;
}

Matrix abs_mat(const Matrix& m) {
  Matrix r = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = std::abs(m(i, j));
  return r;
}

Matrix diag_part(const Matrix& m) {
  require_square(m, "diag_part");
  Matrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) r(i, i) = m(i, i);
  return r;
}

Matrix offdiag_part(const Matrix& m) {
  require_square(m, "offdiag_part");
  Matrix r = m;
  for (std::size_t i = 0; i < m.rows(); ++i) r(i, i) = 0.0;
  return r;
}

Matrix metzlerized(const Matrix& m) {
  require_square(m, "metzlerized");
  Matrix r = abs_mat(m);
  for (std::size_t i = 0; i < m.rows(); ++i) r(i, i) = m(i, i);
  return r;
}

bool is_metzler(const Matrix& m, double tol) {
  require_square(m, "is_metzler");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) < -tol) return false;
  return true;
}

bool is_nonneg(const Matrix& m, double tol) {
  return std::all_of(m.data().begin(), m.data().end(), [tol](double v) { return v >= -tol; });
}

bool is_nonpos(const Matrix& m, double tol) {
  return std::all_of(m.data().begin(), m.data().end(), [tol](double v) { return v <= tol; });
}

std::pair<Vector, Vector> interval_matvec_bounds(const Matrix& a, const Vector& xlo, const Vector& xhi) {
  if (a.cols() != xlo.size() || xlo.size() != xhi.size()) {
    throw Error(ErrorKind::DimensionMismatch, "interval_matvec_bounds");
  }
  Vector lo(a.rows(), 0.0);
  Vector hi(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double l = 0.0;
    double h = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double p = std::max(a(i, j), 0.0);
      const double n = std::max(-a(i, j), 0.0);
      l += p * xlo[j] - n * xhi[j];
      h += p * xhi[j] - n * xlo[j];
    }
    lo[i] = l;
    hi[i] = h;
  }
  return {lo, hi};
}

Box interval_matvec_bounds(const Matrix& a, const Box& box) {
  auto [lo, hi] = interval_matvec_bounds(a, box.lo, box.hi);
  return {std::move(lo), std::move(hi)};
}

Matrix lu_solve(const Matrix& a, const Matrix& b) {
  require_square(a, "lu_solve");
  if (b.rows() != a.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "lu_solve: right-hand side rows differ");
  }
  const std::size_t n = a.rows();
  Matrix lu = a;
  Matrix x = b;
  const double scale = std::max(a.max_abs(), 1e-300);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
    if (std::abs(lu(piv, k)) < 1e-12 * scale) {
      throw Error(ErrorKind::SingularMatrix, "pivot " + std::to_string(k) + " below 1e-12 * scale");
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      for (std::size_t j = 0; j < x.cols(); ++j) std::swap(x(k, j), x(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu(i, k) / lu(k, k);
      lu(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
      for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= f * x(k, j);
    }
  }
  for (std::size_t c = 0; c < x.cols(); ++c) {
    for (std::size_t ii = n; ii-- > 0;) {
      double s = x(ii, c);
      for (std::size_t j = ii + 1; j < n; ++j) s -= lu(ii, j) * x(j, c);
      x(ii, c) = s / lu(ii, ii);
    }
  }
  return x;
}

Vector lu_solve(const Matrix& a, const Vector& b) { return lu_solve(a, Matrix::column(b)).col_vector(0); }

Matrix inverse(const Matrix& a) { return lu_solve(a, Matrix::identity(a.rows())); }

Matrix symmetrize(const Matrix& s) {
  require_square(s, "symmetrize");
  Matrix r = s;
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = i + 1; j < s.cols(); ++j) {
      const double v = 0.5 * (s(i, j) + s(j, i));
      r(i, j) = v;
      r(j, i) = v;
    }
  return r;
}

SymEig sym_eig(const Matrix& s) {
  require_square(s, "sym_eig");
  const std::size_t n = s.rows();
  const double scale = s.max_abs();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(s(i, j) - s(j, i)) > 1e-9 * std::max(1.0, scale)) {
        throw Error(ErrorKind::NonSymmetric, "asymmetry above 1e-9 at (" + std::to_string(i) + "," +
                                                 std::to_string(j) + ")");
      }

  Matrix a = symmetrize(s);
  Matrix q = Matrix::identity(n);
  const double target = 1e-14 * a.norm_fro();

  auto off_norm = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) acc += a(i, j) * a(i, j);
    return std::sqrt(acc);
  };

  for (int sweep = 0; sweep < 100 && off_norm() > target; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t r = p + 1; r < n; ++r) {
        const double apr = a(p, r);
        if (apr == 0.0) continue;
        const double theta = (a(r, r) - a(p, p)) / (2.0 * apr);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akr = a(k, r);
          a(k, p) = c * akp - sn * akr;
          a(k, r) = sn * akp + c * akr;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double ark = a(r, k);
          a(p, k) = c * apk - sn * ark;
          a(r, k) = sn * apk + c * ark;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double qkp = q(k, p);
          const double qkr = q(k, r);
          q(k, p) = c * qkp - sn * qkr;
          q(k, r) = sn * qkp + c * qkr;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  SymEig out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = q(i, order[k]);
  }
  return out;
}

double max_eigenvalue(const Matrix& s) {
  const auto e = sym_eig(s);
  return e.values.empty() ? 0.0 : e.values.back();
}

double min_eigenvalue(const Matrix& s) {
  const auto e = sym_eig(s);
  return e.values.empty() ? 0.0 : e.values.front();
}

bool is_pos_def(const Matrix& s, double margin) { return min_eigenvalue(s) >= margin; }

std::optional<Matrix> cholesky(const Matrix& s) {
  require_square(s, "cholesky");
  const std::size_t n = s.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = s(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return std::nullopt;
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

double spectral_radius(const Matrix& m) {
  double r = 0.0;
  for (const auto& z : general_eigenvalues(m)) r = std::max(r, std::abs(z));
  return r;
}

double spectral_abscissa(const Matrix& m) {
  const auto ev = general_eigenvalues(m);
  double a = -std::numeric_limits<double>::infinity();
  for (const auto& z : ev) a = std::max(a, z.real());
  return a;
}

}  // namespace mmobs
