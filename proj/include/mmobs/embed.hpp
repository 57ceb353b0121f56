#pragma once

#include <optional>
#include <utility>

#include "mmobs/decomp.hpp"
#include "mmobs/numerics.hpp"

namespace mmobs::embed {

enum class TimeDomain { CT, DT };

/// Upper/lower parts of M used by the linear embedding.
///   CT: up = M^d + (M^nd)+, down = (M^nd)-
///   DT: up = M+,            down = M-
/// In both cases up - down == M exactly.
std::pair<Matrix, Matrix> linear_updown(const Matrix& m, TimeDomain time);

// up * x1 - down * x2
Vector linear_embed_eval(const Matrix& m, TimeDomain time, const Vector& x1, const Vector& x2);

// phi_d(x1, x2) - L+ psi_d(x2, x1) + L- psi_d(x1, x2)
Vector nonlinear_embed_eval(const decomp::JssSplit& phi, const decomp::JssSplit& psi, const Matrix& gain,
                            const Vector& x1, const Vector& x2);

/// Framer pair; lower <= upper always holds for a valid state.
struct EmbeddingState {
  Vector upper;
  Vector lower;

  EmbeddingState() = default;
  EmbeddingState(Vector upper_, Vector lower_);  // throws OrderingViolation

  [[nodiscard]] Vector width() const { return sub(upper, lower); }
};

/// Everything needed to evaluate the interval observer right-hand side.
///
/// A and C are the linear parts of the two splits. When `pre_gain` is set,
/// phi was built from f - K h and the known input K y is added to both
/// framer equations.
class ObserverSystem {
 public:
  ObserverSystem(TimeDomain time, decomp::JssSplit phi, decomp::JssSplit psi, Matrix gain,
                 std::optional<Matrix> pre_gain = std::nullopt);

  [[nodiscard]] TimeDomain time() const { return time_; }
  [[nodiscard]] const Matrix& a() const { return phi_.linear(); }
  [[nodiscard]] const Matrix& c() const { return psi_.linear(); }
  [[nodiscard]] const Matrix& gain() const { return gain_; }
  [[nodiscard]] const std::optional<Matrix>& pre_gain() const { return pre_gain_; }
  [[nodiscard]] const decomp::JssSplit& phi() const { return phi_; }
  [[nodiscard]] const decomp::JssSplit& psi() const { return psi_; }
  [[nodiscard]] const Box& domain() const { return phi_.domain(); }
  [[nodiscard]] std::size_t n() const { return phi_.dim(); }
  [[nodiscard]] std::size_t l() const { return psi_.rows(); }

  // A - L C and its up/down parts.
  [[nodiscard]] const Matrix& closed_loop() const { return closed_loop_; }
  [[nodiscard]] const Matrix& up() const { return up_; }
  [[nodiscard]] const Matrix& down() const { return down_; }

  // Writes the increment for (upper, lower) into (out_upper, out_lower):
  // next state for DT, time derivative for CT. Buffers are n long.
  void rhs(const double* upper, const double* lower, const double* y, double* out_upper, double* out_lower) const;

  struct Parts {
    Vector linear_upper, linear_lower;
    Vector injection;
    Vector nonlinear_upper, nonlinear_lower;
  };
  [[nodiscard]] Parts rhs_parts(const EmbeddingState& st, const Vector& y) const;

 private:
  TimeDomain time_;
  decomp::JssSplit phi_;
  decomp::JssSplit psi_;
  Matrix gain_;
  std::optional<Matrix> pre_gain_;
  Matrix closed_loop_;
  Matrix up_;
  Matrix down_;
  Matrix gain_pos_;
  Matrix gain_neg_;
  Matrix injection_gain_;  // L (+ K when pre-injection is active)
};

// Next framers (DT) or their time derivatives (CT); not ordered in general for CT.
struct Increment {
  Vector upper;
  Vector lower;
};

Increment observer_rhs(const ObserverSystem& sys, const EmbeddingState& st, const Vector& y);

}  // namespace mmobs::embed
