#include "mmobs/embed.hpp"

#include <string>

#include "mmobs/error.hpp"

namespace mmobs::embed {

std::pair<Matrix, Matrix> linear_updown(const Matrix& m, TimeDomain time) {
  if (!m.is_square()) throw Error(ErrorKind::NonSquare, "linear_updown needs a square matrix");
  if (time == TimeDomain::DT) return {pos_part(m), neg_part(m)};
  const Matrix nd = offdiag_part(m);
  return {diag_part(m) + pos_part(nd), neg_part(nd)};
}

Vector linear_embed_eval(const Matrix& m, TimeDomain time, const Vector& x1, const Vector& x2) {
  if (x1.size() != m.cols() || x2.size() != m.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "linear_embed_eval point dimension");
  }
  const auto [up, down] = linear_updown(m, time);
  return sub(up * x1, down * x2);
}

Vector nonlinear_embed_eval(const decomp::JssSplit& phi, const decomp::JssSplit& psi, const Matrix& gain,
                            const Vector& x1, const Vector& x2) {
  if (gain.rows() != phi.rows() || gain.cols() != psi.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "gain shape does not match the splits");
  }
  const Vector phi_d = decomp::tight_decomp_eval(phi, x1, x2);
  const Vector psi_21 = decomp::tight_decomp_eval(psi, x2, x1);
  const Vector psi_12 = decomp::tight_decomp_eval(psi, x1, x2);
  return add(sub(phi_d, pos_part(gain) * psi_21), neg_part(gain) * psi_12);
}

EmbeddingState::EmbeddingState(Vector upper_, Vector lower_) : upper(std::move(upper_)), lower(std::move(lower_)) {
  if (upper.size() != lower.size()) throw Error(ErrorKind::DimensionMismatch, "framer lengths differ");
  for (std::size_t i = 0; i < upper.size(); ++i) {
    if (lower[i] > upper[i]) {
      throw Error(ErrorKind::OrderingViolation, "lower framer exceeds upper at component " + std::to_string(i));
    }
  }
}

ObserverSystem::ObserverSystem(TimeDomain time, decomp::JssSplit phi, decomp::JssSplit psi, Matrix gain,
                               std::optional<Matrix> pre_gain)
    : time_(time), phi_(std::move(phi)), psi_(std::move(psi)), gain_(std::move(gain)), pre_gain_(std::move(pre_gain)) {
  const std::size_t n = phi_.dim();
  if (phi_.rows() != n || psi_.dim() != n) {
    throw Error(ErrorKind::DimensionMismatch, "phi must map R^n to R^n and psi must act on R^n");
  }
  if (gain_.rows() != n || gain_.cols() != psi_.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "gain must be n x l");
  }
  if (pre_gain_ && (pre_gain_->rows() != n || pre_gain_->cols() != psi_.rows())) {
    throw Error(ErrorKind::DimensionMismatch, "pre-injection gain must be n x l");
  }
  closed_loop_ = phi_.linear() - gain_ * psi_.linear();
  std::tie(up_, down_) = linear_updown(closed_loop_, time_);
  gain_pos_ = pos_part(gain_);
  gain_neg_ = neg_part(gain_);
  injection_gain_ = pre_gain_ ? gain_ + *pre_gain_ : gain_;
}

void ObserverSystem::rhs(const double* upper, const double* lower, const double* y, double* out_upper,
                         double* out_lower) const {
  const std::size_t n = this->n();
  const std::size_t l = this->l();
  double psi_ul[16], psi_lu[16];
  std::vector<double> heap;
  double* p_ul = psi_ul;
  double* p_lu = psi_lu;
  if (l > 16) {
    heap.resize(2 * l);
    p_ul = heap.data();
    p_lu = heap.data() + l;
  }
  // psi_d(upper, lower) and psi_d(lower, upper)
  decomp::tight_decomp_eval(psi_, upper, lower, p_ul);
  decomp::tight_decomp_eval(psi_, lower, upper, p_lu);
  decomp::tight_decomp_eval(phi_, upper, lower, out_upper);
  decomp::tight_decomp_eval(phi_, lower, upper, out_lower);

  for (std::size_t i = 0; i < n; ++i) {
    double inj = 0.0;
    double nl_u = 0.0;
    double nl_l = 0.0;
    for (std::size_t k = 0; k < l; ++k) {
      inj += injection_gain_(i, k) * y[k];
      nl_u += -gain_pos_(i, k) * p_lu[k] + gain_neg_(i, k) * p_ul[k];
      nl_l += -gain_pos_(i, k) * p_ul[k] + gain_neg_(i, k) * p_lu[k];
    }
    double lin_u = 0.0;
    double lin_l = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      lin_u += up_(i, j) * upper[j] - down_(i, j) * lower[j];
      lin_l += up_(i, j) * lower[j] - down_(i, j) * upper[j];
    }
    out_upper[i] = lin_u + inj + (out_upper[i] + nl_u);
    out_lower[i] = lin_l + inj + (out_lower[i] + nl_l);
  }
}

ObserverSystem::Parts ObserverSystem::rhs_parts(const EmbeddingState& st, const Vector& y) const {
  Parts p;
  p.linear_upper = linear_embed_eval(closed_loop_, time_, st.upper, st.lower);
  p.linear_lower = linear_embed_eval(closed_loop_, time_, st.lower, st.upper);
  p.injection = injection_gain_ * y;
  p.nonlinear_upper = nonlinear_embed_eval(phi_, psi_, gain_, st.upper, st.lower);
  p.nonlinear_lower = nonlinear_embed_eval(phi_, psi_, gain_, st.lower, st.upper);
  return p;
}

Increment observer_rhs(const ObserverSystem& sys, const EmbeddingState& st, const Vector& y) {
  if (st.upper.size() != sys.n() || y.size() != sys.l()) {
    throw Error(ErrorKind::DimensionMismatch, "observer_rhs state or output dimension");
  }
  Increment inc{Vector(sys.n()), Vector(sys.n())};
  sys.rhs(st.upper.data(), st.lower.data(), y.data(), inc.upper.data(), inc.lower.data());
  return inc;
}

}  // namespace mmobs::embed
