#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "mmobs/numerics.hpp"

namespace mmobs::sdp {

/// base + sum_i v_i coeffs[i] <= 0 (negative semidefinite).
struct PsdBlock {
  std::string label;
  Matrix base;
  std::vector<Matrix> coeffs;  // one per variable, all symmetric

  [[nodiscard]] std::size_t size() const { return base.rows(); }
  [[nodiscard]] Matrix value(const Vector& v) const;
};

/// coeffs . v <= rhs
struct LinIneq {
  std::string label;
  Vector coeffs;
  double rhs = 0.0;

  [[nodiscard]] double value(const Vector& v) const;  // coeffs . v - rhs
};

struct LmiProblem {
  std::size_t nvars = 0;
  std::vector<PsdBlock> blocks;
  std::vector<LinIneq> ineqs;

  // Throws IllFormedProblem on inconsistent sizes, asymmetric data,
  // non-finite entries or missing labels.
  void validate() const;

  // Every coefficient and base entry multiplied by s.
  [[nodiscard]] LmiProblem scaled(double s) const;
};

enum class Status { Feasible, Infeasible, MaxIterations };
const char* to_string(Status s);

struct Margin {
  std::string label;
  double value = 0.0;  // max eigenvalue for blocks, coeffs.v - rhs for inequalities
  bool ok = false;
};

struct CheckReport {
  std::vector<Margin> blocks;
  std::vector<Margin> ineqs;
  double tol = 0.0;

  [[nodiscard]] bool passed() const;
  [[nodiscard]] double worst() const;  // largest margin over all constraints
  [[nodiscard]] const Margin* first_violation() const;
};

struct SdpSolution {
  Status status = Status::MaxIterations;
  Vector v;
  double phase1_t = 0.0;
  int iterations = 0;
  CheckReport margins;
};

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 500;
  double radius = 1e5;  // bound on |v| keeping the phase-I problem bounded
};

SdpSolution solve(const LmiProblem& p, const SolveOptions& opts = {});

// Independent re-certification. A constraint is ok when its margin is <= tol.
CheckReport check(const LmiProblem& p, const Vector& v, double tol = 1e-8);

// Interchange text format.
void write_lmi(std::ostream& os, const LmiProblem& p);
LmiProblem read_lmi(std::istream& is);
void write_point(std::ostream& os, const Vector& v);
Vector read_point(std::istream& is);

}  // namespace mmobs::sdp
