#include "mmobs/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mmobs/error.hpp"
#include "mmobs/sdp.hpp"
#include "mmobs/sim.hpp"
#include "mmobs/synth.hpp"
#include "mmobs/system.hpp"

namespace mmobs::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void print_matrix(std::ostream& os, const std::string& name, const Matrix& m) {
  os << name << " (" << m.rows() << "x" << m.cols() << "):\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << "  ";
    for (std::size_t j = 0; j < m.cols(); ++j) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%13.6g", m(i, j));
      os << buf;
    }
    os << '\n';
  }
}

void print_bounds(std::ostream& os, const std::string& name, const IntervalMatrix& m) {
  os << name << ":\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << "  ";
    for (std::size_t j = 0; j < m.cols(); ++j) os << "[" << num(m.lo(i, j)) << ", " << num(m.hi(i, j)) << "] ";
    os << '\n';
  }
}

void print_signs(std::ostream& os, const std::string& name, const IntervalMatrix& rem) {
  os << name << ":\n";
  for (std::size_t i = 0; i < rem.rows(); ++i) {
    os << "  ";
    for (std::size_t j = 0; j < rem.cols(); ++j) {
      const double lo = rem.lo(i, j);
      const double hi = rem.hi(i, j);
      char c = '0';
      if (lo >= -decomp::kSignTol && hi > decomp::kSignTol) c = '+';
      if (hi <= decomp::kSignTol && lo < -decomp::kSignTol) c = '-';
      os << ' ' << c;
    }
    os << '\n';
  }
}

void print_margins(std::ostream& os, const std::string& title, const std::vector<sdp::Margin>& ms) {
  if (ms.empty()) return;
  os << title << ":\n";
  for (const auto& m : ms) os << "  " << (m.ok ? "ok  " : "FAIL") << "  " << m.label << "  " << num(m.value) << '\n';
}

void print_report(std::ostream& os, const sdp::CheckReport& r) {
  print_margins(os, "block margins (max eigenvalue, delta included)", r.blocks);
  print_margins(os, "inequality margins", r.ineqs);
}

decomp::Strategy strategy_from(const std::string& s) {
  if (s == "lower") return decomp::Strategy::lower();
  return decomp::Strategy::upper();
}

struct Common {
  std::string system;
  std::string strategy = "upper";
  std::vector<double> alpha_grid;
  double delta = 1e-6;
  bool gamma_abs_c = true;

  synth::SynthOptions synth_options() const {
    synth::SynthOptions o;
    if (!alpha_grid.empty()) o.alpha_grid = alpha_grid;
    o.lmi.delta = delta;
    o.lmi.gamma_abs_c = gamma_abs_c;
    return o;
  }
};

void add_common(CLI::App* cmd, Common& c, bool lmi_flags) {
  cmd->add_option("system", c.system, "System file or bundled name (henon_dt, ct_pendulum)")->required();
  cmd->add_option("--strategy", c.strategy, "Jacobian bound used as the linear part")
      ->check(CLI::IsMember({"upper", "lower"}));
  if (!lmi_flags) return;
  cmd->add_option("--alpha-grid", c.alpha_grid, "Comma-separated alpha values for the CT LMI")->delimiter(',');
  cmd->add_option("--delta", c.delta, "Strictness margin of the LMIs")->check(CLI::PositiveNumber);
  cmd->add_option("--gamma-abs-c", c.gamma_abs_c, "Use |C| in the DT Gamma block (true|false)");
}

struct Run {
  std::size_t steps = 100;
  double t_end = 10.0;
  double h_step = 1e-3;
  std::size_t log_every = 0;
  std::size_t mc = 100;
  std::uint64_t seed = 1;
  bool strict_domain = false;

  sim::Horizon horizon() const {
    sim::Horizon h;
    h.steps = steps;
    h.t_end = t_end;
    h.h_step = h_step;
    return h;
  }
  sim::SimOptions options(embed::TimeDomain time) const {
    sim::SimOptions o;
    o.strict_domain = strict_domain;
    o.log_every = log_every ? log_every : (time == embed::TimeDomain::CT ? 10 : 1);
    return o;
  }
};

void add_run(CLI::App* cmd, Run& r, std::size_t default_mc) {
  r.mc = default_mc;
  cmd->add_option("--steps", r.steps, "DT horizon in steps");
  cmd->add_option("--t-end", r.t_end, "CT horizon")->check(CLI::NonNegativeNumber);
  cmd->add_option("--h-step", r.h_step, "CT RK4 step")->check(CLI::PositiveNumber);
  cmd->add_option("--log-every", r.log_every, "Log every k-th step (default 1 for DT, 10 for CT)");
  cmd->add_option("--mc", r.mc, "Monte Carlo samples");
  cmd->add_option("--seed", r.seed, "Monte Carlo seed");
  cmd->add_flag("--strict-domain", r.strict_domain, "Abort when the framers leave the domain");
}

struct Loaded {
  SystemSpec spec;
  WorkingSystem work;
  Splits splits;
  synth::Design design;
};

Loaded load(const Common& c) {
  Loaded l;
  l.spec = resolve_system(c.system);
  l.work = prepare(l.spec);
  l.splits = split_system(l.work, strategy_from(c.strategy));
  l.design = synth::make_design(l.work.time, l.splits.phi, l.splits.psi);
  return l;
}

void header(std::ostream& os, const Loaded& l) {
  os << "system " << l.spec.name << " (" << (l.spec.time == embed::TimeDomain::CT ? "ct" : "dt") << ", n=" << l.spec.n()
     << ", l=" << l.spec.l << ")";
  if (l.work.transform) os << ", working coordinates z = T x";
  if (l.work.pre_gain) os << ", output injection K y";
  os << '\n';
}

int cmd_check(const Common& c, std::ostream& out) {
  const Loaded l = load(c);
  header(out, l);
  const auto& phi = l.splits.phi;
  const auto& psi = l.splits.psi;
  print_bounds(out, "Jacobian bounds of f", phi.jacobian());
  print_bounds(out, "Jacobian bounds of h", psi.jacobian());
  print_matrix(out, "H for f (A)", phi.linear());
  print_matrix(out, "H for h (C)", psi.linear());
  print_signs(out, "remainder signs of f", phi.rem_jac());
  print_signs(out, "remainder signs of h", psi.rem_jac());
  print_matrix(out, "Fbar_phi", l.design.fphi);
  print_matrix(out, "Fbar_psi", l.design.fpsi);
  if (l.work.pre_gain) print_matrix(out, "K (working coordinates)", *l.work.pre_gain);
  return kOk;
}

GainFile gain_file(const Loaded& l, const synth::SynthesisResult& r, const Common& c) {
  GainFile g;
  g.system = l.spec.name;
  g.strings["strategy"] = c.strategy;
  g.strings["gamma_abs_c"] = c.gamma_abs_c ? "true" : "false";
  g.scalars["alpha"] = r.alpha;
  g.scalars["delta"] = c.delta;
  g.scalars["stability_indicator"] = r.stability_indicator;
  g.scalars["lmi_eig_max"] = r.lmi_eig_max();
  g.matrices["L"] = r.L;
  g.matrices["P"] = r.P;
  g.matrices["X"] = r.X;
  g.matrices["J"] = r.J;
  return g;
}

int cmd_synth(const Common& c, const std::string& out_path, std::ostream& out, std::ostream& err) {
  const Loaded l = load(c);
  header(out, l);
  synth::SynthesisResult r;
  try {
    r = synth::synthesize(l.design, c.synth_options());
  } catch (const synth::SynthesisFailure& e) {
    err << e.what() << '\n';
    return e.kind() == ErrorKind::SolverFailure ? kNumericFailure : kNotCertified;
  }
  out << "status: feasible";
  if (l.design.time == embed::TimeDomain::CT) out << " at alpha = " << num(r.alpha);
  out << '\n';
  print_matrix(out, "L", r.L);
  print_matrix(out, "P", r.P);
  print_matrix(out, "X", r.X);
  print_matrix(out, "J", r.J);
  print_report(out, r.margins);
  print_margins(out, "structural certificates", r.structural);
  print_matrix(out, "comparison matrix", r.comparison);
  out << (l.design.time == embed::TimeDomain::CT ? "spectral abscissa: " : "spectral radius: ")
      << num(r.stability_indicator) << '\n';
  out << "gain identity residual: " << num(r.gain_identity_residual) << '\n';
  const std::string path = out_path.empty() ? l.spec.name + ".gain" : out_path;
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + path);
  write_gain(f, gain_file(l, r, c));
  out << "gain written to " << path << '\n';
  const auto v = synth::verify_solution(l.design, r.problem, r.point);
  return v.passed() ? kOk : kNotCertified;
}

std::string sibling(const std::string& path, const std::string& suffix) {
  const auto dot = path.rfind('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

void write_file(const std::string& path, const sim::TrajectoryLog& log, std::size_t n) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + path);
  write_csv(f, log, n);
}

struct SimOutcome {
  std::size_t violations = 0;
  bool richardson_ok = true;
};

SimOutcome run_simulation(const Loaded& l, const Matrix& gain, const Run& r, const std::string& csv_path,
                          bool richardson, std::ostream& out, std::ostream& err) {
  const embed::ObserverSystem obs = build_observer(l.work, l.splits, gain);
  const sim::Plant plant = build_plant(l.work);
  const sim::Horizon hz = r.horizon();
  const sim::SimOptions opts = r.options(l.work.time);
  SimOutcome res;

  if (r.mc > 0) {
    const auto mc = sim::monte_carlo_framer_check(plant, obs, l.work.x0, l.spec.x0, l.work.transform, r.mc, hz,
                                                  r.seed, opts);
    const auto m = sim::error_metrics(mc.worst_eps_trace);
    out << "monte carlo: " << mc.samples << " samples, " << mc.violations << " violations";
    if (mc.violations) out << " (max " << num(mc.max_violation) << ")";
    out << '\n';
    out << "worst sample " << mc.worst_sample << ": eps_inf " << num(m.eps_inf_initial) << " -> "
        << num(m.eps_inf_final) << " (ratio " << num(m.ratio) << ", non-increasing " << num(100 * m.monotone_fraction)
        << "% of steps)\n";
    if (mc.samples_with_domain_exit) {
      err << "warning: framers left the domain in " << mc.samples_with_domain_exit
          << " samples; Jacobian bounds do not hold outside it\n";
    }
    res.violations += mc.violations;
  }

  const Vector x0_orig = [&] {
    Vector mid(l.spec.n());
    for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (l.spec.x0.lo[i] + l.spec.x0.hi[i]);
    return mid;
  }();
  const Vector x0 = l.work.transform ? *l.work.transform * x0_orig : x0_orig;
  const sim::TrajectoryLog log = sim::run(plant, obs, x0, l.work.x0, hz, opts);
  const auto m = sim::error_metrics(log);
  out << "trajectory from the x0 box centre: " << log.violations.size() << " violations, eps_inf "
      << num(m.eps_inf_initial) << " -> " << num(m.eps_inf_final) << '\n';
  if (!log.domain_exits.empty()) {
    err << "warning: framers left the domain at " << log.domain_exits.size() << " steps (first at t="
        << num(log.domain_exits.front()) << ")\n";
  }
  res.violations += log.violations.size();

  if (!csv_path.empty()) {
    if (l.work.inverse_transform) {
      write_file(csv_path, to_original(log, *l.work.inverse_transform), l.spec.n());
      const std::string z_path = sibling(csv_path, "_z");
      write_file(z_path, log, l.spec.n());
      out << "csv written to " << csv_path << " and " << z_path << '\n';
    } else {
      write_file(csv_path, log, l.spec.n());
      out << "csv written to " << csv_path << '\n';
    }
  }

  if (richardson) {
    if (l.work.time != embed::TimeDomain::CT) {
      err << "note: --richardson only applies to CT systems\n";
    } else {
      const double d = sim::richardson_difference(plant, obs, x0, l.work.x0, hz.t_end, hz.h_step, opts);
      out << "richardson: max framer change at h/2 = " << num(d) << " (scaled by max(1,|value|))\n";
      res.richardson_ok = d < 1e-5;
      if (!res.richardson_ok) err << "warning: step size not converged to 1e-5\n";
    }
  }
  return res;
}

int cmd_simulate(const Common& c, const std::string& gain_spec, const Run& r, const std::string& csv,
                 bool richardson, std::ostream& out, std::ostream& err) {
  const Loaded l = load(c);
  header(out, l);
  const Matrix gain = resolve_gain(gain_spec, l.spec);
  print_matrix(out, "L", gain);
  const std::string path = csv.empty() ? l.spec.name + ".csv" : csv;
  const SimOutcome s = run_simulation(l, gain, r, path, richardson, out, err);
  return s.violations ? kViolation : kOk;
}

int cmd_verify(const Common& c, const std::string& gain_spec, const Run& r, std::ostream& out, std::ostream& err) {
  const Loaded l = load(c);
  header(out, l);
  const Matrix gain = resolve_gain(gain_spec, l.spec);
  print_matrix(out, "L", gain);
  const auto opts = c.synth_options();
  bool certified = false;

  // A gain file from synth carries its own LMI point.
  std::ifstream in(gain_spec);
  if (in) {
    const GainFile g = read_gain(in);
    if (g.matrices.count("P") && g.matrices.count("X") && g.matrices.count("J")) {
      const double alpha = g.scalars.count("alpha") ? g.scalars.at("alpha") : 1.0;
      const sdp::LmiProblem p =
          l.design.time == embed::TimeDomain::CT
              ? synth::assemble_ct_lmi(l.design.a, l.design.c, l.design.fphi, l.design.fpsi, alpha, opts.lmi.delta)
              : synth::assemble_dt_lmi(l.design.a, l.design.c, l.design.fphi, l.design.fpsi, opts.lmi.delta,
                                       opts.lmi.gamma_abs_c);
      const synth::VarLayout layout{l.design.time, l.design.n(), l.design.l(), std::nullopt};
      const Vector v = layout.encode(g.matrices.at("P"), g.matrices.at("X"), g.matrices.at("J"));
      const auto rep = synth::verify_solution(l.design, p, v);
      out << "stored LMI point:\n";
      print_report(out, rep.lmi);
      print_margins(out, "structural certificates", rep.structural);
      out << "gain identity residual: " << num(rep.gain_identity_residual) << '\n';
      out << "stored point: " << (rep.passed() ? "PASS" : "FAIL") << '\n';
      certified = rep.passed();
    }
  }

  const auto cert = synth::certify_gain(l.design, gain, opts);
  print_margins(out, "structural certificates for L", cert.structural);
  print_matrix(out, "comparison matrix", cert.comparison);
  out << (l.design.time == embed::TimeDomain::CT ? "spectral abscissa: " : "spectral radius: ")
      << num(cert.stability_indicator) << (cert.stable ? " (stable)" : " (NOT stable)") << '\n';
  out << "LMI with L fixed: " << sdp::to_string(cert.lmi_status);
  if (l.design.time == embed::TimeDomain::CT) out << " (last alpha tried " << num(cert.alpha) << ")";
  out << '\n';
  if (cert.lmi_status == sdp::Status::Feasible) print_report(out, cert.lmi);
  certified = certified || cert.lmi_certified();

  Run smoke = r;
  const SimOutcome s = run_simulation(l, gain, smoke, "", false, out, err);
  const bool structural_ok =
      std::all_of(cert.structural.begin(), cert.structural.end(), [](const sdp::Margin& m) { return m.ok; });
  const bool pass = certified && cert.stable && structural_ok && s.violations == 0;
  out << "certificate: " << (pass ? "PASS" : "FAIL") << '\n';
  if (s.violations) return kViolation;
  return pass ? kOk : kNotCertified;
}

int cmd_export(const Common& c, double alpha, const std::string& gain_spec, const std::string& path,
               std::ostream& out) {
  const Loaded l = load(c);
  std::optional<Matrix> gain;
  if (!gain_spec.empty()) gain = resolve_gain(gain_spec, l.spec);
  const sdp::LmiProblem p =
      l.design.time == embed::TimeDomain::CT
          ? synth::assemble_ct_lmi(l.design.a, l.design.c, l.design.fphi, l.design.fpsi, alpha, c.delta, gain)
          : synth::assemble_dt_lmi(l.design.a, l.design.c, l.design.fphi, l.design.fpsi, c.delta, c.gamma_abs_c,
                                   gain);
  if (path.empty() || path == "-") {
    sdp::write_lmi(out, p);
    return kOk;
  }
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + path);
  sdp::write_lmi(f, p);
  out << "LMI with " << p.nvars << " variables written to " << path << '\n';
  return kOk;
}

int cmd_check_lmi(const std::string& lmi_path, const std::string& point_path, double tol, bool solve,
                  std::ostream& out) {
  std::ifstream lf(lmi_path);
  if (!lf) throw Error(ErrorKind::IoError, "cannot open " + lmi_path);
  const sdp::LmiProblem p = sdp::read_lmi(lf);
  Vector v;
  if (solve) {
    const auto sol = sdp::solve(p);
    out << "solver status: " << sdp::to_string(sol.status) << " (t = " << num(sol.phase1_t) << ")\n";
    v = sol.v;
    if (!point_path.empty()) {
      std::ofstream pf(point_path);
      if (!pf) throw Error(ErrorKind::IoError, "cannot write " + point_path);
      sdp::write_point(pf, v);
    }
  } else {
    std::ifstream pf(point_path);
    if (!pf) throw Error(ErrorKind::IoError, "cannot open " + point_path);
    v = sdp::read_point(pf);
  }
  const auto rep = sdp::check(p, v, tol);
  print_report(out, rep);
  out << (rep.passed() ? "PASS" : "FAIL") << '\n';
  return rep.passed() ? kOk : kNotCertified;
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::SyntaxError:
    case ErrorKind::UnknownIdentifier:
    case ErrorKind::ParseError:
    case ErrorKind::ValidationError:
    case ErrorKind::IoError:
      return kUsage;
    case ErrorKind::InfeasibleAllAlpha:
      return kNotCertified;
    case ErrorKind::DomainExit:
      return kViolation;
    default:
      return kNumericFailure;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interval observer synthesis and simulation for mixed-monotone systems", "mmobs"};
  app.require_subcommand(1);

  Common common;
  Run run_opts;
  std::string gain_spec;
  std::string out_path;
  bool richardson = false;
  double alpha = 1.0;
  std::string lmi_path, point_path;
  double tol = 1e-8;
  bool solve = false;

  auto* check = app.add_subcommand("check", "Print Jacobian bounds, splits and width gains");
  add_common(check, common, false);

  auto* synth_cmd = app.add_subcommand("synth", "Solve the stability LMI and write a gain file");
  add_common(synth_cmd, common, true);
  synth_cmd->add_option("--out", out_path, "Gain file to write (default <system>.gain)");

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo framer check plus one logged trajectory");
  add_common(sim_cmd, common, false);
  sim_cmd->add_option("--gain", gain_spec, "Gain file, 'paper' (published reference gain) or 'zero'")->required();
  add_run(sim_cmd, run_opts, 100);
  sim_cmd->add_option("--out", out_path, "CSV path (default <system>.csv)");
  sim_cmd->add_flag("--richardson", richardson, "Rerun at h/2 and report the framer change");

  auto* verify = app.add_subcommand("verify", "Re-certify a gain: LMI margins, comparison spectrum, containment");
  add_common(verify, common, true);
  verify->add_option("--gain", gain_spec, "Gain file, 'paper' (published reference gain) or 'zero'")->required();
  add_run(verify, run_opts, 20);

  auto* export_cmd = app.add_subcommand("export-lmi", "Write the stability LMI in the interchange format");
  add_common(export_cmd, common, true);
  export_cmd->add_option("--alpha", alpha, "Alpha for the CT LMI")->check(CLI::PositiveNumber);
  export_cmd->add_option("--gain", gain_spec, "Fix L and keep only P and X as variables");
  export_cmd->add_option("--out", out_path, "Output path ('-' for stdout)");

  auto* check_lmi = app.add_subcommand("check-lmi", "Certify a point against an exported LMI");
  check_lmi->add_option("lmi", lmi_path, "LMI file")->required();
  check_lmi->add_option("point", point_path, "Point file (written instead when --solve is given)");
  check_lmi->add_option("--tol", tol, "Margin tolerance");
  check_lmi->add_flag("--solve", solve, "Solve with the built-in solver before checking");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*check) return cmd_check(common, out);
    if (*synth_cmd) return cmd_synth(common, out_path, out, err);
    if (*sim_cmd) return cmd_simulate(common, gain_spec, run_opts, out_path, richardson, out, err);
    if (*verify) return cmd_verify(common, gain_spec, run_opts, out, err);
    if (*export_cmd) return cmd_export(common, alpha, gain_spec, out_path, out);
    if (*check_lmi) {
      if (!solve && point_path.empty()) {
        err << "check-lmi needs a point file unless --solve is given\n";
        return kUsage;
      }
      return cmd_check_lmi(lmi_path, point_path, tol, solve, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  }
  return kUsage;
}

}  // namespace mmobs::cli
