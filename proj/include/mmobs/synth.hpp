#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmobs/decomp.hpp"
#include "mmobs/embed.hpp"
#include "mmobs/error.hpp"
#include "mmobs/numerics.hpp"
#include "mmobs/sdp.hpp"

namespace mmobs::synth {

using embed::TimeDomain;

// 2 max(Jbar - H, 0) - Jlow + H, entrywise.
Matrix width_gain_matrix(const decomp::JssSplit& s);

/// Decision-variable layout shared by both LMIs.
///
/// Variables are P (upper triangle, row-major), then X (diagonal for CT, full
/// for DT), then J (l x n, row-major). With a fixed gain J is not a variable
/// and equals -L^T X.
struct VarLayout {
  TimeDomain time = TimeDomain::DT;
  std::size_t n = 0;
  std::size_t l = 0;
  std::optional<Matrix> fixed_gain;

  [[nodiscard]] std::size_t p_count() const { return n * (n + 1) / 2; }
  [[nodiscard]] std::size_t x_count() const { return time == TimeDomain::CT ? n : n * n; }
  [[nodiscard]] std::size_t j_count() const { return fixed_gain ? 0 : l * n; }
  [[nodiscard]] std::size_t nvars() const { return p_count() + x_count() + j_count(); }

  struct Vars {
    Matrix P, X, J;
  };
  [[nodiscard]] Vars decode(const Vector& v) const;
  [[nodiscard]] Vector encode(const Matrix& P, const Matrix& X, const Matrix& J) const;
};

struct LmiOptions {
  double delta = 1e-6;
  bool gamma_abs_c = true;
};

// P >= delta I, main block <= -delta I, J <= 0, J^T C Metzler.
sdp::LmiProblem assemble_ct_lmi(const Matrix& a, const Matrix& c, const Matrix& fphi, const Matrix& fpsi,
                                double alpha, double delta, const std::optional<Matrix>& fixed_gain = std::nullopt);

// P >= delta I, main block <= -delta I, J <= 0, J^T C <= 0, -X Metzler.
sdp::LmiProblem assemble_dt_lmi(const Matrix& a, const Matrix& c, const Matrix& fphi, const Matrix& fpsi,
                                double delta, bool gamma_abs_c = true,
                                const std::optional<Matrix>& fixed_gain = std::nullopt);

// L = -(X^T)^{-1} J^T. Throws SingularX, and SignAssertionFailed when L has a
// negative entry (both domains) or LC does (DT).
Matrix extract_gain(const Matrix& x, const Matrix& j, TimeDomain time, const Matrix& c);

/// Linear data of an observer design problem.
struct Design {
  TimeDomain time = TimeDomain::DT;
  Matrix a, c;        // linear parts of the phi and psi splits
  Matrix fphi, fpsi;  // width gains

  [[nodiscard]] std::size_t n() const { return a.rows(); }
  [[nodiscard]] std::size_t l() const { return c.rows(); }
};

Design make_design(TimeDomain time, const decomp::JssSplit& phi, const decomp::JssSplit& psi);

// CT: A^m - LC + Fphi + L Fpsi.  DT: |A| + LC + Fphi + L Fpsi.
Matrix comparison_matrix(const Design& d, const Matrix& gain);
// Spectral abscissa (CT) or radius (DT) of the comparison matrix.
double stability_indicator(const Design& d, const Matrix& gain);
bool indicator_stable(TimeDomain time, double indicator);

struct SynthOptions {
  std::vector<double> alpha_grid = default_alpha_grid();
  LmiOptions lmi;
  sdp::SolveOptions solver;

  static std::vector<double> default_alpha_grid();  // 13 log-spaced values 1e-3 ... 1e3
};

struct AlphaAttempt {
  double alpha = 0.0;  // 0 for DT
  sdp::Status status = sdp::Status::MaxIterations;
  double phase1_t = 0.0;
};

struct SynthesisResult {
  Matrix L, P, X, J;
  double alpha = 0.0;
  sdp::LmiProblem problem;
  Vector point;
  sdp::CheckReport margins;
  std::vector<sdp::Margin> structural;
  Matrix comparison;
  double stability_indicator = 0.0;
  double gain_identity_residual = 0.0;  // max |X^T L + J^T|
  std::vector<AlphaAttempt> attempts;

  [[nodiscard]] double lmi_eig_max() const;
};

class SynthesisFailure : public Error {
 public:
  SynthesisFailure(ErrorKind kind, const std::string& message, std::vector<AlphaAttempt> attempts)
      : Error(kind, message), attempts_(std::move(attempts)) {}
  [[nodiscard]] const std::vector<AlphaAttempt>& attempts() const { return attempts_; }

 private:
  std::vector<AlphaAttempt> attempts_;
};

// DT: one solve. CT: the first feasible alpha in ascending grid order.
// Throws SynthesisFailure (InfeasibleAllAlpha or SolverFailure).
SynthesisResult synthesize(const Design& d, const SynthOptions& opts = {});

// Sign and structure certificates for a gain and, when given, X.
//   CT: L >= 0, -LC Metzler, X diagonal positive.
//   DT: L >= 0, LC >= 0, -X Metzler, X^{-1} >= 0.
std::vector<sdp::Margin> structural_certificates(const Design& d, const Matrix& gain, const Matrix* x,
                                                 double tol = 1e-9);

struct VerifyReport {
  sdp::CheckReport lmi;
  std::vector<sdp::Margin> structural;
  double stability_indicator = 0.0;
  bool stable = false;
  double gain_identity_residual = 0.0;

  [[nodiscard]] bool passed() const;
};

// Re-certifies a point of the LMI built for `d` (alpha ignored for DT).
VerifyReport verify_solution(const Design& d, const sdp::LmiProblem& problem, const Vector& point,
                             double tol = 1e-8);

/// Certificate for an externally supplied gain: the LMI with J = -L^T X is
/// solved over (P, X) on the alpha grid, and the comparison matrix is checked.
struct GainCertificate {
  sdp::Status lmi_status = sdp::Status::Infeasible;
  double alpha = 0.0;
  sdp::CheckReport lmi;
  std::vector<AlphaAttempt> attempts;
  std::vector<sdp::Margin> structural;
  Matrix comparison;
  double stability_indicator = 0.0;
  bool stable = false;

  [[nodiscard]] bool lmi_certified() const { return lmi_status == sdp::Status::Feasible && lmi.passed(); }
};

GainCertificate certify_gain(const Design& d, const Matrix& gain, const SynthOptions& opts = {});

}  // namespace mmobs::synth
