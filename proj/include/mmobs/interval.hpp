#pragma once

#include <cstddef>
#include <vector>

namespace mmobs {

using Vector = std::vector<double>;

/// Closed real interval [lo, hi] with finite endpoints.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double lo_, double hi_);
  static Interval point(double v) { return {v, v}; }

  [[nodiscard]] double width() const { return hi - lo; }
  [[nodiscard]] double mid() const { return 0.5 * (lo + hi); }
  [[nodiscard]] bool contains(double v, double slack = 0.0) const { return v >= lo - slack && v <= hi + slack; }
  [[nodiscard]] bool contains_zero() const { return lo <= 0.0 && hi >= 0.0; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval operator*(const Interval& a, const Interval& b);
// Throws DomainError when the divisor contains zero.
Interval operator/(const Interval& a, const Interval& b);

Interval pow_int(const Interval& a, unsigned k);
// Exact ranges: critical points at multiples of pi/2 inside [lo, hi] are located.
Interval sin(const Interval& a);
Interval cos(const Interval& a);
Interval exp(const Interval& a);

/// Axis-aligned box [lo, hi] in R^n.
struct Box {
  Vector lo;
  Vector hi;

  Box() = default;
  Box(Vector lo_, Vector hi_);

  [[nodiscard]] std::size_t dim() const { return lo.size(); }
  [[nodiscard]] Interval operator[](std::size_t i) const { return {lo[i], hi[i]}; }
  [[nodiscard]] bool contains(const Vector& x, double slack = 0.0) const;
  [[nodiscard]] bool contains(const Box& inner, double slack = 0.0) const;
  [[nodiscard]] Vector width() const;
  [[nodiscard]] double max_width() const;

  friend bool operator==(const Box&, const Box&) = default;
};

}  // namespace mmobs
