#include "mmobs/interval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mmobs/error.hpp"

namespace mmobs {

namespace {

void require_finite(const Interval& r) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    throw Error(ErrorKind::NonFiniteResult, "interval bound overflow");
  }
}

// True when some point c + k*period (k integer) lies in [lo, hi].
bool hits_lattice(double lo, double hi, double c, double period) {
  const double k = std::ceil((lo - c) / period);
  return c + k * period <= hi;
}

}  // namespace

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (!(lo <= hi)) {
    throw Error(ErrorKind::DomainError, "interval with lo > hi");
  }
}

Interval operator+(const Interval& a, const Interval& b) {
  Interval r{a.lo + b.lo, a.hi + b.hi};
  require_finite(r);
  return r;
}

Interval operator-(const Interval& a, const Interval& b) {
  Interval r{a.lo - b.hi, a.hi - b.lo};
  require_finite(r);
  return r;
}

Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

Interval operator*(const Interval& a, const Interval& b) {
  const double p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  Interval r{*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
  require_finite(r);
  return r;
}

Interval operator/(const Interval& a, const Interval& b) {
  if (b.contains_zero()) {
    throw Error(ErrorKind::DomainError, "divisor interval contains zero");
  }
  return a * Interval{1.0 / b.hi, 1.0 / b.lo};
}

Interval pow_int(const Interval& a, unsigned k) {
  if (k == 0) {
    return {1.0, 1.0};
  }
  const double plo = std::pow(a.lo, static_cast<double>(k));
  const double phi = std::pow(a.hi, static_cast<double>(k));
  Interval r;
  if (k % 2 == 1 || a.lo >= 0.0) {
    r = {plo, phi};
  } else if (a.hi <= 0.0) {
    r = {phi, plo};
  } else {
    r = {0.0, std::max(plo, phi)};
  }
  require_finite(r);
  return r;
}

Interval sin(const Interval& a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (a.width() >= two_pi) {
    return {-1.0, 1.0};
  }
  double lo = std::min(std::sin(a.lo), std::sin(a.hi));
  double hi = std::max(std::sin(a.lo), std::sin(a.hi));
  if (hits_lattice(a.lo, a.hi, 0.5 * std::numbers::pi, two_pi)) hi = 1.0;
  if (hits_lattice(a.lo, a.hi, -0.5 * std::numbers::pi, two_pi)) lo = -1.0;
  return {lo, hi};
}

Interval cos(const Interval& a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (a.width() >= two_pi) {
    return {-1.0, 1.0};
  }
  double lo = std::min(std::cos(a.lo), std::cos(a.hi));
  double hi = std::max(std::cos(a.lo), std::cos(a.hi));
  if (hits_lattice(a.lo, a.hi, 0.0, two_pi)) hi = 1.0;
  if (hits_lattice(a.lo, a.hi, std::numbers::pi, two_pi)) lo = -1.0;
  return {lo, hi};
}

Interval exp(const Interval& a) {
  Interval r{std::exp(a.lo), std::exp(a.hi)};
  require_finite(r);
  return r;
}

Box::Box(Vector lo_, Vector hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size()) {
    throw Error(ErrorKind::DimensionMismatch, "box bounds differ in length");
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i])) {
      throw Error(ErrorKind::DomainError, "box component " + std::to_string(i) + " has lo > hi or is not finite");
    }
  }
}

bool Box::contains(const Vector& x, double slack) const {
  if (x.size() != lo.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
  }
  return true;
}

bool Box::contains(const Box& inner, double slack) const {
  if (inner.dim() != dim()) return false;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (inner.lo[i] < lo[i] - slack || inner.hi[i] > hi[i] + slack) return false;
  }
  return true;
}

Vector Box::width() const {
  Vector w(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) w[i] = hi[i] - lo[i];
  return w;
}

double Box::max_width() const {
  double m = 0.0;
  for (std::size_t i = 0; i < lo.size(); ++i) m = std::max(m, hi[i] - lo[i]);
  return m;
}

}  // namespace mmobs
