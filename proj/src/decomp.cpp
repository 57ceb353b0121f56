#include "mmobs/decomp.hpp"

#include <cmath>
#include <string>

#include "mmobs/error.hpp"

namespace mmobs::decomp {

HChoice Strategy::at(std::size_t i, std::size_t j, std::size_t cols) const {
  switch (kind) {
    case Kind::Upper: return HChoice::Upper;
    case Kind::Lower: return HChoice::Lower;
    case Kind::PerEntry:
      if (i * cols + j >= per_entry.size()) {
        throw Error(ErrorKind::DimensionMismatch, "per-entry strategy smaller than the Jacobian");
      }
      return per_entry[i * cols + j];
  }
  return HChoice::Upper;
}

JssSplit::JssSplit(std::vector<expr::Expr> exprs, Matrix linear, Box domain, IntervalMatrix jac,
                   IntervalMatrix rem_jac, std::vector<std::vector<bool>> selectors)
    : exprs_(std::move(exprs)),
      linear_(std::move(linear)),
      domain_(std::move(domain)),
      jac_(std::move(jac)),
      rem_jac_(std::move(rem_jac)),
      selectors_(std::move(selectors)) {
  compiled_.reserve(exprs_.size());
  affine_rows_.assign(exprs_.size(), true);
  for (std::size_t i = 0; i < exprs_.size(); ++i) {
    compiled_.emplace_back(exprs_[i]);
    for (std::size_t j = 0; j < rem_jac_.cols(); ++j) {
      if (rem_jac_.lo(i, j) != 0.0 || rem_jac_.hi(i, j) != 0.0) affine_rows_[i] = false;
    }
  }
}

double JssSplit::remainder_row(std::size_t i, const double* x) const {
  double v = compiled_[i](x);
  for (std::size_t j = 0; j < linear_.cols(); ++j) v -= linear_(i, j) * x[j];
  return v;
}

std::vector<bool> vertex_selector(const Vector& rem_row_lo, const Vector& rem_row_hi) {
  if (rem_row_lo.size() != rem_row_hi.size()) {
    throw Error(ErrorKind::DimensionMismatch, "vertex_selector bounds differ in length");
  }
  std::vector<bool> d(rem_row_lo.size(), false);
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double lo = rem_row_lo[j];
    const double hi = rem_row_hi[j];
    const bool nondecreasing = lo >= -kSignTol;
    const bool nonincreasing = hi <= kSignTol;
    if (!nondecreasing && !nonincreasing) {
      throw Error(ErrorKind::SignUnstableRow,
                  "entry " + std::to_string(j) + " spans [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    d[j] = nondecreasing && hi > 0.0;
  }
  return d;
}

JssSplit jss_split(const std::vector<expr::Expr>& exprs, const Box& domain, const Strategy& strategy) {
  const std::size_t p = exprs.size();
  const std::size_t n = domain.dim();
  for (const auto& e : exprs) {
    if (expr::var_bound(e) > n) {
      throw Error(ErrorKind::DimensionMismatch, "expression references a variable outside the domain");
    }
  }
  IntervalMatrix jac;
  try {
    jac = expr::jacobian_bounds(exprs, domain);
  } catch (const Error& e) {
    throw Error(ErrorKind::NonFiniteJacobian, e.what());
  }
  Matrix h(p, n);
  Matrix rlo(p, n);
  Matrix rhi(p, n);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      h(i, j) = strategy.at(i, j, n) == HChoice::Upper ? jac.hi(i, j) : jac.lo(i, j);
      rlo(i, j) = jac.lo(i, j) - h(i, j);
      rhi(i, j) = jac.hi(i, j) - h(i, j);
    }
  }
  std::vector<std::vector<bool>> selectors;
  selectors.reserve(p);
  for (std::size_t i = 0; i < p; ++i) {
    selectors.push_back(vertex_selector(rlo.row_vector(i), rhi.row_vector(i)));
  }
  return {exprs, std::move(h), domain, std::move(jac), IntervalMatrix(std::move(rlo), std::move(rhi)),
          std::move(selectors)};
}

Vector remainder_eval(const JssSplit& s, const Vector& x) {
  if (x.size() != s.dim()) throw Error(ErrorKind::DimensionMismatch, "remainder_eval point dimension");
  Vector out(s.rows());
  for (std::size_t i = 0; i < s.rows(); ++i) out[i] = s.remainder_row(i, x.data());
  return out;
}

void tight_decomp_eval(const JssSplit& s, const double* x1, const double* x2, double* out) {
  const std::size_t n = s.dim();
  double vertex_inline[16];
  std::vector<double> vertex_heap;
  double* vertex = vertex_inline;
  if (n > 16) {
    vertex_heap.resize(n);
    vertex = vertex_heap.data();
  }
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const auto& d = s.selectors()[i];
    for (std::size_t j = 0; j < n; ++j) vertex[j] = d[j] ? x1[j] : x2[j];
    out[i] = s.remainder_row(i, vertex);
  }
}

Vector tight_decomp_eval(const JssSplit& s, const Vector& x1, const Vector& x2) {
  if (x1.size() != s.dim() || x2.size() != s.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "tight_decomp_eval point dimension");
  }
  Vector out(s.rows());
  tight_decomp_eval(s, x1.data(), x2.data(), out.data());
  return out;
}

}  // namespace mmobs::decomp
