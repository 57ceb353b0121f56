#include "mmobs/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "mmobs/error.hpp"

namespace mmobs::synth {

Matrix width_gain_matrix(const decomp::JssSplit& s) {
  const auto& jac = s.jacobian();
  const Matrix& h = s.linear();
  Matrix f(h.rows(), h.cols());
  for (std::size_t i = 0; i < h.rows(); ++i) {
    for (std::size_t j = 0; j < h.cols(); ++j) {
      f(i, j) = 2.0 * std::max(jac.hi(i, j) - h(i, j), 0.0) - jac.lo(i, j) + h(i, j);
    }
  }
  return f;
}

VarLayout::Vars VarLayout::decode(const Vector& v) const {
  if (v.size() != nvars()) throw Error(ErrorKind::DimensionMismatch, "point length does not match the LMI layout");
  Vars out{Matrix(n, n), Matrix(n, n), Matrix(l, n)};
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      out.P(i, j) = v[k];
      out.P(j, i) = v[k];
      ++k;
    }
  }
  if (time == TimeDomain::CT) {
    for (std::size_t i = 0; i < n; ++i) out.X(i, i) = v[k++];
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) out.X(i, j) = v[k++];
    }
  }
  if (fixed_gain) {
    out.J = -(fixed_gain->transpose() * out.X);
  } else {
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t j = 0; j < n; ++j) out.J(i, j) = v[k++];
    }
  }
  return out;
}

Vector VarLayout::encode(const Matrix& P, const Matrix& X, const Matrix& J) const {
  Vector v;
  v.reserve(nvars());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) v.push_back(P(i, j));
  }
  if (time == TimeDomain::CT) {
    for (std::size_t i = 0; i < n; ++i) v.push_back(X(i, i));
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) v.push_back(X(i, j));
    }
  }
  if (!fixed_gain) {
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t j = 0; j < n; ++j) v.push_back(J(i, j));
    }
  }
  return v;
}

namespace {

struct LinearParts {
  std::vector<std::pair<std::string, Matrix>> blocks;  // required <= 0 after adding delta I
  std::vector<std::pair<std::string, double>> ineqs;   // required <= 0
};

using LinearMap = std::function<LinearParts(const VarLayout::Vars&)>;

// All constraints are homogeneous in the variables, so the coefficient of v_i
// is the map evaluated at the i-th unit vector.
sdp::LmiProblem build(const VarLayout& layout, const LinearMap& map, double delta) {
  const std::size_t k = layout.nvars();
  sdp::LmiProblem p;
  p.nvars = k;
  const LinearParts shape = map(layout.decode(Vector(k, 0.0)));
  for (const auto& [label, m] : shape.blocks) {
    p.blocks.push_back({label, Matrix::identity(m.rows()) * delta, std::vector<Matrix>(k)});
  }
  for (const auto& [label, value] : shape.ineqs) p.ineqs.push_back({label, Vector(k, 0.0), 0.0});
  Vector e(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    e[i] = 1.0;
    const LinearParts parts = map(layout.decode(e));
    e[i] = 0.0;
    for (std::size_t b = 0; b < parts.blocks.size(); ++b) p.blocks[b].coeffs[i] = symmetrize(parts.blocks[b].second);
    for (std::size_t q = 0; q < parts.ineqs.size(); ++q) p.ineqs[q].coeffs[i] = parts.ineqs[q].second;
  }
  return p;
}

Matrix stack(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d) {
  Matrix m(a.rows() + c.rows(), a.cols() + b.cols());
  m.set_block(0, 0, a);
  m.set_block(0, a.cols(), b);
  m.set_block(a.rows(), 0, c);
  m.set_block(a.rows(), a.cols(), d);
  return m;
}

std::string idx(std::size_t i, std::size_t j) { return "[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]"; }

void check_shapes(const Matrix& a, const Matrix& c, const Matrix& fphi, const Matrix& fpsi,
                  const std::optional<Matrix>& gain) {
  const std::size_t n = a.rows();
  const std::size_t l = c.rows();
  if (!a.is_square() || c.cols() != n || fphi.rows() != n || fphi.cols() != n || fpsi.rows() != l ||
      fpsi.cols() != n || (gain && (gain->rows() != n || gain->cols() != l))) {
    throw Error(ErrorKind::DimensionMismatch, "LMI data shapes are inconsistent");
  }
}

void add_j_constraints(LinearParts& out, const VarLayout::Vars& v, const Matrix& c, bool metzler) {
  const std::size_t l = v.J.rows();
  const std::size_t n = v.J.cols();
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.ineqs.emplace_back("J" + idx(i, j) + " <= 0", v.J(i, j));
  }
  const Matrix jc = v.J.transpose() * c;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (metzler && i != j) out.ineqs.emplace_back("(J^T C)" + idx(i, j) + " >= 0", -jc(i, j));
      if (!metzler) out.ineqs.emplace_back("(J^T C)" + idx(i, j) + " <= 0", jc(i, j));
    }
  }
}

}  // namespace

sdp::LmiProblem assemble_ct_lmi(const Matrix& a, const Matrix& c, const Matrix& fphi, const Matrix& fpsi,
                                double alpha, double delta, const std::optional<Matrix>& fixed_gain) {
  check_shapes(a, c, fphi, fpsi, fixed_gain);
  if (!(alpha > 0.0) || !(delta > 0.0)) throw Error(ErrorKind::IllFormedProblem, "alpha and delta must be positive");
  const VarLayout layout{TimeDomain::CT, a.rows(), c.rows(), fixed_gain};
  const Matrix m = metzlerized(a) + fphi;
  const Matrix cm = c - fpsi;
  const Matrix mt = m.transpose();
  const Matrix cmt = cm.transpose();
  const bool structural_j = !fixed_gain;
  return build(
      layout,
      [&](const VarLayout::Vars& v) {
        LinearParts out;
        out.blocks.emplace_back("P >= delta I", -v.P);
        const Matrix omega = mt * v.X + v.X.transpose() * m + cmt * v.J + v.J.transpose() * cm;
        const Matrix lambda = v.P + alpha * (mt * v.X) + alpha * (cmt * v.J);
        const Matrix corner = -alpha * (v.X + v.X.transpose());
        out.blocks.emplace_back("main block <= -delta I", stack(omega, lambda, lambda.transpose(), corner));
        if (structural_j) add_j_constraints(out, v, c, true);
        return out;
      },
      delta);
}

sdp::LmiProblem assemble_dt_lmi(const Matrix& a, const Matrix& c, const Matrix& fphi, const Matrix& fpsi,
                                double delta, bool gamma_abs_c, const std::optional<Matrix>& fixed_gain) {
  check_shapes(a, c, fphi, fpsi, fixed_gain);
  if (!(delta > 0.0)) throw Error(ErrorKind::IllFormedProblem, "delta must be positive");
  const VarLayout layout{TimeDomain::DT, a.rows(), c.rows(), fixed_gain};
  const Matrix left = (abs_mat(a) + fphi).transpose();
  const Matrix right = ((gamma_abs_c ? abs_mat(c) : c) + fpsi).transpose();
  const bool structural_j = !fixed_gain;
  const std::size_t n = a.rows();
  return build(
      layout,
      [&](const VarLayout::Vars& v) {
        LinearParts out;
        out.blocks.emplace_back("P >= delta I", -v.P);
        const Matrix gamma = left * v.X - right * v.J;
        const Matrix corner = v.P - v.X - v.X.transpose();
        out.blocks.emplace_back("main block <= -delta I", stack(-v.P, gamma, gamma.transpose(), corner));
        if (structural_j) add_j_constraints(out, v, c, false);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            if (i != j) out.ineqs.emplace_back("X" + idx(i, j) + " <= 0", v.X(i, j));
          }
        }
        return out;
      },
      delta);
}

Matrix extract_gain(const Matrix& x, const Matrix& j, TimeDomain time, const Matrix& c) {
  Matrix l;
  try {
    l = -lu_solve(x.transpose(), j.transpose());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SingularMatrix) throw Error(ErrorKind::SingularX, e.what());
    throw;
  }
  const double tol = 1e-8 * std::max(1.0, l.max_abs());
  if (!is_nonneg(l, tol)) throw Error(ErrorKind::SignAssertionFailed, "extracted gain has a negative entry");
  if (time == TimeDomain::DT && !is_nonneg(l * c, tol)) {
    throw Error(ErrorKind::SignAssertionFailed, "LC has a negative entry");
  }
  return l;
}

Design make_design(TimeDomain time, const decomp::JssSplit& phi, const decomp::JssSplit& psi) {
  if (phi.dim() != psi.dim() || phi.rows() != phi.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "phi must be n -> n and psi must act on the same state");
  }
  return {time, phi.linear(), psi.linear(), width_gain_matrix(phi), width_gain_matrix(psi)};
}

Matrix comparison_matrix(const Design& d, const Matrix& gain) {
  if (gain.rows() != d.n() || gain.cols() != d.l()) throw Error(ErrorKind::DimensionMismatch, "gain must be n x l");
  const Matrix lc = gain * d.c;
  const Matrix lf = gain * d.fpsi;
  if (d.time == TimeDomain::CT) return metzlerized(d.a) - lc + d.fphi + lf;
  return abs_mat(d.a) + lc + d.fphi + lf;
}

double stability_indicator(const Design& d, const Matrix& gain) {
  const Matrix m = comparison_matrix(d, gain);
  return d.time == TimeDomain::CT ? spectral_abscissa(m) : spectral_radius(m);
}

bool indicator_stable(TimeDomain time, double indicator) {
  return time == TimeDomain::CT ? indicator < 0.0 : indicator < 1.0;
}

std::vector<double> SynthOptions::default_alpha_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 12; ++k) g.push_back(std::pow(10.0, -3.0 + 0.5 * k));
  return g;
}

double SynthesisResult::lmi_eig_max() const {
  double w = -std::numeric_limits<double>::infinity();
  for (const auto& m : margins.blocks) w = std::max(w, m.value);
  return w;
}

std::vector<sdp::Margin> structural_certificates(const Design& d, const Matrix& gain, const Matrix* x,
                                                 double tol) {
  std::vector<sdp::Margin> out;
  auto add = [&](const std::string& label, double worst) { out.push_back({label, worst, worst <= tol}); };
  auto most_negative = [](const Matrix& m, bool offdiag_only) {
    double w = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) {
        if (offdiag_only && i == j) continue;
        w = std::max(w, -m(i, j));
      }
    }
    return std::isinf(w) ? 0.0 : w;
  };
  const Matrix lc = gain * d.c;
  add("L >= 0", most_negative(gain, false));
  if (d.time == TimeDomain::CT) {
    add("-LC Metzler", most_negative(-lc, true));
    if (x) {
      double off = 0.0;
      double diag = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < x->rows(); ++i) {
        diag = std::max(diag, -(*x)(i, i));
        for (std::size_t j = 0; j < x->cols(); ++j) {
          if (i != j) off = std::max(off, std::abs((*x)(i, j)));
        }
      }
      add("X diagonal", off);
      add("X > 0", diag);
    }
  } else {
    add("LC >= 0", most_negative(lc, false));
    if (x) {
      add("-X Metzler", most_negative(-*x, true));
      double inv_worst = std::numeric_limits<double>::infinity();
      try {
        inv_worst = most_negative(inverse(*x), false);
      } catch (const Error&) {
      }
      add("X^-1 >= 0", inv_worst);
    }
  }
  return out;
}

namespace {

double identity_residual(const Matrix& x, const Matrix& l, const Matrix& j) {
  return (x.transpose() * l + j.transpose()).max_abs();
}

sdp::LmiProblem assemble(const Design& d, double alpha, const LmiOptions& o, const std::optional<Matrix>& gain) {
  if (d.time == TimeDomain::CT) return assemble_ct_lmi(d.a, d.c, d.fphi, d.fpsi, alpha, o.delta, gain);
  return assemble_dt_lmi(d.a, d.c, d.fphi, d.fpsi, o.delta, o.gamma_abs_c, gain);
}

std::vector<double> alphas_for(const Design& d, const SynthOptions& opts) {
  if (d.time == TimeDomain::DT) return {0.0};
  std::vector<double> g = opts.alpha_grid;
  std::sort(g.begin(), g.end());
  if (g.empty() || g.front() <= 0.0) throw Error(ErrorKind::IllFormedProblem, "alpha grid must be positive and non-empty");
  return g;
}

std::string describe(const std::vector<AlphaAttempt>& attempts) {
  std::string s;
  for (const auto& a : attempts) {
    if (!s.empty()) s += "; ";
    if (a.alpha > 0.0) s += "alpha=" + std::to_string(a.alpha) + " ";
    s += sdp::to_string(a.status);
    s += " (t=" + std::to_string(a.phase1_t) + ")";
  }
  return s;
}

}  // namespace

SynthesisResult synthesize(const Design& d, const SynthOptions& opts) {
  std::vector<AlphaAttempt> attempts;
  const VarLayout layout{d.time, d.n(), d.l(), std::nullopt};
  for (double alpha : alphas_for(d, opts)) {
    sdp::LmiProblem problem = assemble(d, alpha, opts.lmi, std::nullopt);
    sdp::SdpSolution sol = sdp::solve(problem, opts.solver);
    attempts.push_back({alpha, sol.status, sol.phase1_t});
    if (sol.status != sdp::Status::Feasible) continue;

    SynthesisResult r;
    const auto vars = layout.decode(sol.v);
    r.P = vars.P;
    r.X = vars.X;
    r.J = vars.J;
    r.L = extract_gain(r.X, r.J, d.time, d.c);
    r.alpha = alpha;
    r.problem = std::move(problem);
    r.point = sol.v;
    r.margins = sol.margins;
    r.structural = structural_certificates(d, r.L, &r.X);
    r.comparison = comparison_matrix(d, r.L);
    r.stability_indicator = stability_indicator(d, r.L);
    r.gain_identity_residual = identity_residual(r.X, r.L, r.J);
    r.attempts = attempts;
    return r;
  }
  const bool all_stalled = std::all_of(attempts.begin(), attempts.end(),
                                       [](const AlphaAttempt& a) { return a.status == sdp::Status::MaxIterations; });
  throw SynthesisFailure(all_stalled ? ErrorKind::SolverFailure : ErrorKind::InfeasibleAllAlpha,
                         "no feasible LMI solution: " + describe(attempts), attempts);
}

bool VerifyReport::passed() const {
  return lmi.passed() && stable && gain_identity_residual <= 1e-9 &&
         std::all_of(structural.begin(), structural.end(), [](const sdp::Margin& m) { return m.ok; });
}

VerifyReport verify_solution(const Design& d, const sdp::LmiProblem& problem, const Vector& point, double tol) {
  VerifyReport r;
  r.lmi = sdp::check(problem, point, tol);
  const VarLayout layout{d.time, d.n(), d.l(), std::nullopt};
  const auto vars = layout.decode(point);
  Matrix gain;
  try {
    gain = -lu_solve(vars.X.transpose(), vars.J.transpose());
  } catch (const Error&) {
    r.structural.push_back({"X nonsingular", 1.0, false});
    r.stability_indicator = std::numeric_limits<double>::infinity();
    r.gain_identity_residual = std::numeric_limits<double>::infinity();
    return r;
  }
  r.structural = structural_certificates(d, gain, &vars.X);
  r.stability_indicator = stability_indicator(d, gain);
  r.stable = indicator_stable(d.time, r.stability_indicator);
  r.gain_identity_residual = identity_residual(vars.X, gain, vars.J);
  return r;
}

GainCertificate certify_gain(const Design& d, const Matrix& gain, const SynthOptions& opts) {
  GainCertificate c;
  c.structural = structural_certificates(d, gain, nullptr);
  c.comparison = comparison_matrix(d, gain);
  c.stability_indicator = stability_indicator(d, gain);
  c.stable = indicator_stable(d.time, c.stability_indicator);
  for (double alpha : alphas_for(d, opts)) {
    const sdp::LmiProblem problem = assemble(d, alpha, opts.lmi, gain);
    const sdp::SdpSolution sol = sdp::solve(problem, opts.solver);
    c.attempts.push_back({alpha, sol.status, sol.phase1_t});
    c.lmi_status = sol.status;
    c.alpha = alpha;
    c.lmi = sol.margins;
    if (sol.status == sdp::Status::Feasible) break;
  }
  return c;
}

}  // namespace mmobs::synth
