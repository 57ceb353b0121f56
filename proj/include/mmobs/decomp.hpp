#pragma once

#include <cstddef>
#include <vector>

#include "mmobs/expr.hpp"
#include "mmobs/interval.hpp"
#include "mmobs/numerics.hpp"

namespace mmobs::decomp {

/// Which Jacobian bound becomes the linear part H, entry by entry.
enum class HChoice : unsigned char { Upper, Lower };

struct Strategy {
  enum class Kind { Upper, Lower, PerEntry } kind = Kind::Upper;
  // Row-major p x n choices, used only with Kind::PerEntry.
  std::vector<HChoice> per_entry;

  static Strategy upper() { return {Kind::Upper, {}}; }
  static Strategy lower() { return {Kind::Lower, {}}; }
  static Strategy entries(std::vector<HChoice> choices) { return {Kind::PerEntry, std::move(choices)}; }

  [[nodiscard]] HChoice at(std::size_t i, std::size_t j, std::size_t cols) const;
};

// Tolerance under which a remainder-Jacobian bound counts as zero.
inline constexpr double kSignTol = 1e-12;

/// f(x) = mu(x) + H x on a box, with mu Jacobian sign-stable.
///
/// `rem_jac` encloses the Jacobian of mu over `domain`; every entry keeps one
/// sign. `selectors[i][j]` is true when mu_i increases in x_j, i.e. the vertex
/// maximizing mu_i over [lower, upper] takes component j from `upper`.
class JssSplit {
 public:
  JssSplit() = default;
  JssSplit(std::vector<expr::Expr> exprs, Matrix linear, Box domain, IntervalMatrix jac, IntervalMatrix rem_jac,
           std::vector<std::vector<bool>> selectors);

  [[nodiscard]] const std::vector<expr::Expr>& exprs() const { return exprs_; }
  [[nodiscard]] const Matrix& linear() const { return linear_; }
  [[nodiscard]] const Box& domain() const { return domain_; }
  [[nodiscard]] const IntervalMatrix& jacobian() const { return jac_; }
  [[nodiscard]] const IntervalMatrix& rem_jac() const { return rem_jac_; }
  [[nodiscard]] const std::vector<std::vector<bool>>& selectors() const { return selectors_; }
  [[nodiscard]] std::size_t rows() const { return exprs_.size(); }
  [[nodiscard]] std::size_t dim() const { return domain_.dim(); }
  // Rows whose remainder is identically zero over the domain (affine rows).
  [[nodiscard]] bool row_is_affine(std::size_t i) const { return affine_rows_[i]; }

  // mu_i(x) = f_i(x) - H_i x.
  [[nodiscard]] double remainder_row(std::size_t i, const double* x) const;

 private:
  std::vector<expr::Expr> exprs_;
  std::vector<expr::CompiledExpr> compiled_;
  Matrix linear_;
  Box domain_;
  IntervalMatrix jac_;
  IntervalMatrix rem_jac_;
  std::vector<std::vector<bool>> selectors_;
  std::vector<bool> affine_rows_;
};

// Throws NonFiniteJacobian when the Jacobian cannot be bounded on the box.
JssSplit jss_split(const std::vector<expr::Expr>& exprs, const Box& domain, const Strategy& strategy = Strategy::upper());

// D[j] = 1 iff the remainder row is nondecreasing in x_j with a positive upper
// bound. Zero rows select 0. Throws SignUnstableRow.
std::vector<bool> vertex_selector(const Vector& rem_row_lo, const Vector& rem_row_hi);

Vector remainder_eval(const JssSplit& s, const Vector& x);

// Component i is mu_i(D_i x1 + (I - D_i) x2): the max of mu_i over [x2, x1]
// when x2 <= x1 and the min over [x1, x2] when x1 <= x2.
Vector tight_decomp_eval(const JssSplit& s, const Vector& x1, const Vector& x2);
void tight_decomp_eval(const JssSplit& s, const double* x1, const double* x2, double* out);

}  // namespace mmobs::decomp
