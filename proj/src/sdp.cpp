#include "mmobs/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "mmobs/error.hpp"

namespace mmobs::sdp {

Matrix PsdBlock::value(const Vector& v) const {
  Matrix out = base;
  for (std::size_t i = 0; i < coeffs.size() && i < v.size(); ++i) {
    if (v[i] != 0.0) out += coeffs[i] * v[i];
  }
  return out;
}

double LinIneq::value(const Vector& v) const {
  double s = -rhs;
  for (std::size_t i = 0; i < coeffs.size(); ++i) s += coeffs[i] * v[i];
  return s;
}

namespace {

bool is_symmetric(const Matrix& m) {
  const double scale = std::max(1.0, m.max_abs());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale) return false;
    }
  }
  return true;
}

bool is_zero(const Matrix& m) {
  return std::all_of(m.data().begin(), m.data().end(), [](double x) { return x == 0.0; });
}

bool is_zero(const Vector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

void LmiProblem::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::IllFormedProblem, what); };
  for (const auto& b : blocks) {
    if (b.label.empty()) bad("unlabelled block");
    if (!b.base.is_square() || b.base.rows() == 0) bad(b.label + ": base must be a non-empty square matrix");
    if (b.coeffs.size() != nvars) bad(b.label + ": expected one coefficient matrix per variable");
    if (!b.base.all_finite() || !is_symmetric(b.base)) bad(b.label + ": base must be finite and symmetric");
    for (const auto& c : b.coeffs) {
      if (c.rows() != b.base.rows() || c.cols() != b.base.cols()) bad(b.label + ": coefficient size mismatch");
      if (!c.all_finite() || !is_symmetric(c)) bad(b.label + ": coefficients must be finite and symmetric");
    }
  }
  for (const auto& q : ineqs) {
    if (q.label.empty()) bad("unlabelled inequality");
    if (q.coeffs.size() != nvars) bad(q.label + ": coefficient count differs from nvars");
    if (!std::isfinite(q.rhs)) bad(q.label + ": non-finite right-hand side");
    for (double c : q.coeffs) {
      if (!std::isfinite(c)) bad(q.label + ": non-finite coefficient");
    }
  }
}

LmiProblem LmiProblem::scaled(double s) const {
  LmiProblem out = *this;
  for (auto& b : out.blocks) {
    b.base *= s;
    for (auto& c : b.coeffs) c *= s;
  }
  for (auto& q : out.ineqs) {
    for (double& c : q.coeffs) c *= s;
    q.rhs *= s;
  }
  return out;
}

const char* to_string(Status s) {
  switch (s) {
    case Status::Feasible: return "feasible";
    case Status::Infeasible: return "infeasible";
    case Status::MaxIterations: return "max-iterations";
  }
  return "?";
}

bool CheckReport::passed() const {
  return std::all_of(blocks.begin(), blocks.end(), [](const Margin& m) { return m.ok; }) &&
         std::all_of(ineqs.begin(), ineqs.end(), [](const Margin& m) { return m.ok; });
}

double CheckReport::worst() const {
  double w = -std::numeric_limits<double>::infinity();
  for (const auto& m : blocks) w = std::max(w, m.value);
  for (const auto& m : ineqs) w = std::max(w, m.value);
  return w;
}

const Margin* CheckReport::first_violation() const {
  for (const auto& m : blocks) {
    if (!m.ok) return &m;
  }
  for (const auto& m : ineqs) {
    if (!m.ok) return &m;
  }
  return nullptr;
}

CheckReport check(const LmiProblem& p, const Vector& v, double tol) {
  if (v.size() != p.nvars) throw Error(ErrorKind::DimensionMismatch, "point length differs from nvars");
  CheckReport r;
  r.tol = tol;
  for (const auto& b : p.blocks) {
    const double m = max_eigenvalue(b.value(v));
    r.blocks.push_back({b.label, m, m <= tol});
  }
  for (const auto& q : p.ineqs) {
    const double m = q.value(v);
    r.ineqs.push_back({q.label, m, m <= tol});
  }
  return r;
}

namespace {

// Phase-I barrier over z = (v, t):
//   t / mu - sum log det(t I - B_k(v)) - sum log(t - g_i(v)) - log(R^2 - |v|^2)
class PhaseOne {
 public:
  PhaseOne(const LmiProblem& p, double radius) : p_(p), n_(p.nvars), r2_(radius * radius) {
    for (std::size_t k = 0; k < p.blocks.size(); ++k) {
      if (!std::all_of(p.blocks[k].coeffs.begin(), p.blocks[k].coeffs.end(),
                       [](const Matrix& c) { return is_zero(c); })) {
        blocks_.push_back(k);
        nu_ += static_cast<double>(p.blocks[k].size());
      }
    }
    for (std::size_t i = 0; i < p.ineqs.size(); ++i) {
      if (!is_zero(p.ineqs[i].coeffs)) {
        ineqs_.push_back(i);
        nu_ += 1.0;
      }
    }
    nu_ += 1.0;
  }

  [[nodiscard]] std::size_t dim() const { return n_ + 1; }
  [[nodiscard]] double nu() const { return nu_; }
  [[nodiscard]] bool has_constraints() const { return !blocks_.empty() || !ineqs_.empty(); }

  // Barrier value, or +inf outside the domain.
  [[nodiscard]] double value(const Vector& z, double mu) const {
    const double t = z[n_];
    double f = t / mu;
    for (std::size_t k : blocks_) {
      const auto s = slack_matrix(k, z);
      const auto chol = cholesky(s);
      if (!chol) return std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < s.rows(); ++i) f -= 2.0 * std::log((*chol)(i, i));
    }
    for (std::size_t i : ineqs_) {
      const double s = t - p_.ineqs[i].value(z);
      if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
      f -= std::log(s);
    }
    const double r = ball_slack(z);
    if (!(r > 0.0)) return std::numeric_limits<double>::infinity();
    f -= std::log(r);
    return f;
  }

  // Gradient and Hessian at a strictly feasible z.
  void derivatives(const Vector& z, double mu, Vector& g, Matrix& h) const {
    const std::size_t N = dim();
    g.assign(N, 0.0);
    h = Matrix(N, N);
    g[n_] = 1.0 / mu;
    for (std::size_t k : blocks_) {
      const auto& blk = p_.blocks[k];
      const std::size_t m = blk.size();
      const Matrix w = inverse(slack_matrix(k, z));
      // G_a = W dS/dz_a with dS/dv_a = -A_a and dS/dt = I.
      std::vector<Matrix> gs(N);
      std::vector<bool> active(N, false);
      for (std::size_t a = 0; a < n_; ++a) {
        if (is_zero(blk.coeffs[a])) continue;
        gs[a] = -(w * blk.coeffs[a]);
        active[a] = true;
      }
      gs[n_] = w;
      active[n_] = true;
      for (std::size_t a = 0; a < N; ++a) {
        if (!active[a]) continue;
        double tr = 0.0;
        for (std::size_t i = 0; i < m; ++i) tr += gs[a](i, i);
        g[a] -= tr;
        for (std::size_t b = a; b < N; ++b) {
          if (!active[b]) continue;
          double s = 0.0;
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) s += gs[a](i, j) * gs[b](j, i);
          }
          h(a, b) += s;
          if (b != a) h(b, a) += s;
        }
      }
    }
    Vector ds(N);
    for (std::size_t i : ineqs_) {
      const auto& q = p_.ineqs[i];
      const double s = z[n_] - q.value(z);
      for (std::size_t a = 0; a < n_; ++a) ds[a] = -q.coeffs[a];
      ds[n_] = 1.0;
      for (std::size_t a = 0; a < N; ++a) {
        if (ds[a] == 0.0) continue;
        g[a] -= ds[a] / s;
        for (std::size_t b = 0; b < N; ++b) h(a, b) += ds[a] * ds[b] / (s * s);
      }
    }
    const double r = ball_slack(z);
    for (std::size_t a = 0; a < n_; ++a) {
      g[a] += 2.0 * z[a] / r;
      h(a, a) += 2.0 / r;
      for (std::size_t b = 0; b < n_; ++b) h(a, b) += 4.0 * z[a] * z[b] / (r * r);
    }
  }

 private:
  [[nodiscard]] Matrix slack_matrix(std::size_t k, const Vector& z) const {
    const auto& blk = p_.blocks[k];
    Matrix s = -blk.base;
    for (std::size_t a = 0; a < n_; ++a) {
      if (z[a] != 0.0) s -= blk.coeffs[a] * z[a];
    }
    for (std::size_t i = 0; i < s.rows(); ++i) s(i, i) += z[n_];
    return s;
  }

  [[nodiscard]] double ball_slack(const Vector& z) const {
    double s = r2_;
    for (std::size_t a = 0; a < n_; ++a) s -= z[a] * z[a];
    return s;
  }

  const LmiProblem& p_;
  std::size_t n_;
  double r2_;
  double nu_ = 0.0;
  std::vector<std::size_t> blocks_;
  std::vector<std::size_t> ineqs_;
};

}  // namespace

namespace {

SdpSolution solve_core(const LmiProblem& p, const SolveOptions& opts) {
  SdpSolution sol;
  sol.v.assign(p.nvars, 0.0);

  // Constraints without variables are decided up front.
  double constant_violation = -std::numeric_limits<double>::infinity();
  for (const auto& b : p.blocks) {
    if (std::all_of(b.coeffs.begin(), b.coeffs.end(), [](const Matrix& c) { return is_zero(c); })) {
      constant_violation = std::max(constant_violation, max_eigenvalue(b.base));
    }
  }
  for (const auto& q : p.ineqs) {
    if (is_zero(q.coeffs)) constant_violation = std::max(constant_violation, -q.rhs);
  }
  if (constant_violation > opts.tol) {
    sol.status = Status::Infeasible;
    sol.phase1_t = constant_violation;
    sol.margins = check(p, sol.v, opts.tol);
    return sol;
  }

  PhaseOne bar(p, opts.radius);
  if (!bar.has_constraints()) {
    sol.status = Status::Feasible;
    sol.phase1_t = std::max(constant_violation, -opts.tol);
    sol.margins = check(p, sol.v, opts.tol);
    return sol;
  }

  double eig0 = -std::numeric_limits<double>::infinity();
  double viol0 = 0.0;
  for (const auto& b : p.blocks) eig0 = std::max(eig0, max_eigenvalue(b.base));
  for (const auto& q : p.ineqs) viol0 = std::max(viol0, -q.rhs);
  const std::size_t N = bar.dim();
  Vector z(N, 0.0);
  z[p.nvars] = std::max(eig0, 0.0) + 1.0 + viol0;

  auto finish = [&](Status st) {
    sol.status = st;
    sol.v.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(p.nvars));
    sol.phase1_t = z[p.nvars];
    sol.margins = check(p, sol.v, opts.tol);
    return sol;
  };

  double lambda = 1e-8;
  Vector g;
  Matrix h;
  for (double mu = 1.0; mu >= 1e-14; mu /= 10.0) {
    for (;;) {
      if (sol.iterations >= opts.max_iter) return finish(Status::MaxIterations);
      bar.derivatives(z, mu, g, h);
      const double f0 = bar.value(z, mu);
      bool stepped = false;
      double decrement = 0.0;
      while (!stepped && lambda <= 1e12) {
        Matrix hd = h;
        for (std::size_t a = 0; a < N; ++a) hd(a, a) += lambda;
        Vector d;
        try {
          d = lu_solve(hd, g);
        } catch (const Error&) {
          lambda *= 10.0;
          continue;
        }
        for (double& x : d) x = -x;
        double gd = 0.0;
        for (std::size_t a = 0; a < N; ++a) gd += g[a] * d[a];
        decrement = -gd;
        if (decrement < 1e-12) {
          stepped = true;
          break;
        }
        for (double step = 1.0; step > 1e-10; step *= 0.5) {
          Vector trial = z;
          for (std::size_t a = 0; a < N; ++a) trial[a] += step * d[a];
          const double f1 = bar.value(trial, mu);
          if (f1 < f0 + 0.25 * step * gd) {
            z = std::move(trial);
            stepped = true;
            break;
          }
        }
        if (stepped) {
          lambda = std::max(1e-8, lambda / 10.0);
        } else {
          lambda *= 10.0;
        }
      }
      ++sol.iterations;
      if (z[p.nvars] < -opts.tol) return finish(Status::Feasible);
      if (!stepped || decrement < 1e-10) break;
    }
    // On the central path the phase-I optimum is at least t - mu * nu.
    if (z[p.nvars] - mu * bar.nu() >= opts.tol) return finish(Status::Infeasible);
  }
  return finish(z[p.nvars] >= opts.tol ? Status::Infeasible : Status::MaxIterations);
}

// Variables pinned to zero by a pair of single-variable rows a v_i <= 0 and
// -b v_i <= 0 (a, b > 0). Such pairs leave no strict interior, so they are
// fixed before the barrier sees them.
std::vector<bool> pinned_variables(const LmiProblem& p) {
  std::vector<bool> upper(p.nvars, false);
  std::vector<bool> lower(p.nvars, false);
  for (const auto& q : p.ineqs) {
    if (q.rhs != 0.0) continue;
    std::size_t nz = 0;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < q.coeffs.size(); ++i) {
      if (q.coeffs[i] != 0.0) {
        ++nz;
        idx = i;
      }
    }
    if (nz != 1) continue;
    (q.coeffs[idx] > 0.0 ? upper : lower)[idx] = true;
  }
  std::vector<bool> pinned(p.nvars);
  for (std::size_t i = 0; i < p.nvars; ++i) pinned[i] = upper[i] && lower[i];
  return pinned;
}

}  // namespace

SdpSolution solve(const LmiProblem& p, const SolveOptions& opts) {
  p.validate();
  const auto pinned = pinned_variables(p);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < p.nvars; ++i) {
    if (!pinned[i]) keep.push_back(i);
  }
  if (keep.size() == p.nvars) return solve_core(p, opts);

  LmiProblem reduced;
  reduced.nvars = keep.size();
  for (const auto& b : p.blocks) {
    PsdBlock rb{b.label, b.base, {}};
    for (std::size_t i : keep) rb.coeffs.push_back(b.coeffs[i]);
    reduced.blocks.push_back(std::move(rb));
  }
  for (const auto& q : p.ineqs) {
    LinIneq rq{q.label, {}, q.rhs};
    for (std::size_t i : keep) rq.coeffs.push_back(q.coeffs[i]);
    reduced.ineqs.push_back(std::move(rq));
  }
  SdpSolution red = solve_core(reduced, opts);
  SdpSolution sol;
  sol.status = red.status;
  sol.phase1_t = red.phase1_t;
  sol.iterations = red.iterations;
  sol.v.assign(p.nvars, 0.0);
  for (std::size_t k = 0; k < keep.size(); ++k) sol.v[keep[k]] = red.v[k];
  sol.margins = check(p, sol.v, opts.tol);
  return sol;
}

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_matrix(std::ostream& os, const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? " " : "") << fmt(m(i, j));
    os << '\n';
  }
}

struct Line {
  std::size_t number;
  std::string text;      // comment stripped
  std::string comment;   // text after '#', trimmed
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class LineReader {
 public:
  explicit LineReader(std::istream& is) {
    std::string raw;
    std::size_t n = 0;
    while (std::getline(is, raw)) {
      ++n;
      const auto hash = raw.find('#');
      Line l{n, trim(raw.substr(0, hash)), hash == std::string::npos ? "" : trim(raw.substr(hash + 1))};
      lines_.push_back(std::move(l));
    }
  }

  // Next line with content; collects comments seen on the way into `comments`.
  const Line* next(std::vector<std::string>* comments = nullptr) {
    while (pos_ < lines_.size()) {
      const Line& l = lines_[pos_++];
      if (!l.comment.empty() && comments) comments->push_back(l.comment);
      if (!l.text.empty()) return &l;
    }
    return nullptr;
  }

  [[nodiscard]] std::size_t last_line() const { return lines_.empty() ? 1 : lines_.back().number; }

 private:
  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

std::vector<double> numbers(const Line& l, std::size_t skip_words = 0) {
  std::vector<double> out;
  std::size_t i = 0;
  const std::string& s = l.text;
  std::size_t word = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size()) break;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (word++ < skip_words) continue;
    const std::string tok = s.substr(start, i - start);
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(x)) {
      throw FileParseError(l.number, start + 1, "expected a number, found '" + tok + "'");
    }
    out.push_back(x);
  }
  return out;
}

std::string first_word(const std::string& s) {
  const auto e = s.find_first_of(" \t");
  return s.substr(0, e);
}

std::string take_label(std::vector<std::string>& comments, const std::string& prefix, const std::string& fallback) {
  std::string label = fallback;
  for (const auto& c : comments) {
    if (c.rfind(prefix, 0) == 0) label = trim(c.substr(prefix.size()));
  }
  comments.clear();
  return label;
}

Matrix read_matrix(LineReader& r, std::size_t m, const std::string& what) {
  Matrix out(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    const Line* l = r.next();
    if (!l) throw FileParseError(r.last_line(), 1, "unexpected end of input inside " + what);
    const auto row = numbers(*l);
    if (row.size() != m) {
      throw FileParseError(l->number, 1,
                           what + ": expected " + std::to_string(m) + " values, found " + std::to_string(row.size()));
    }
    for (std::size_t j = 0; j < m; ++j) out(i, j) = row[j];
  }
  return out;
}

}  // namespace

void write_lmi(std::ostream& os, const LmiProblem& p) {
  os << "lmi nvars=" << p.nvars << '\n';
  for (const auto& b : p.blocks) {
    os << "# block: " << b.label << '\n';
    os << "block " << b.size() << '\n';
    write_matrix(os, b.base);
    for (std::size_t i = 0; i < b.coeffs.size(); ++i) {
      os << "var " << i << '\n';
      write_matrix(os, b.coeffs[i]);
    }
  }
  for (const auto& q : p.ineqs) {
    os << "# ineq: " << q.label << '\n';
    os << "ineq " << fmt(q.rhs);
    for (double c : q.coeffs) os << ' ' << fmt(c);
    os << '\n';
  }
}

LmiProblem read_lmi(std::istream& is) {
  LineReader r(is);
  std::vector<std::string> comments;
  const Line* l = r.next(&comments);
  if (!l || l->text.rfind("lmi nvars=", 0) != 0) {
    throw FileParseError(l ? l->number : 1, 1, "expected header 'lmi nvars=<k>'");
  }
  LmiProblem p;
  {
    const std::string num = l->text.substr(10);
    char* end = nullptr;
    const long k = std::strtol(num.c_str(), &end, 10);
    if (num.empty() || *end != '\0' || k < 0) throw FileParseError(l->number, 11, "invalid variable count");
    p.nvars = static_cast<std::size_t>(k);
  }
  comments.clear();
  l = r.next(&comments);
  while (l) {
    const std::string kw = first_word(l->text);
    if (kw == "block") {
      const auto sz = numbers(*l, 1);
      if (sz.size() != 1 || sz[0] < 1 || sz[0] != std::floor(sz[0])) {
        throw FileParseError(l->number, 7, "block needs a positive integer size");
      }
      PsdBlock b;
      b.label = take_label(comments, "block:", "block " + std::to_string(p.blocks.size()));
      const auto m = static_cast<std::size_t>(sz[0]);
      b.base = read_matrix(r, m, "block base");
      b.coeffs.assign(p.nvars, Matrix(m, m));
      l = r.next(&comments);
      while (l && first_word(l->text) == "var") {
        const auto idx = numbers(*l, 1);
        if (idx.size() != 1 || idx[0] < 0 || idx[0] != std::floor(idx[0]) ||
            static_cast<std::size_t>(idx[0]) >= p.nvars) {
          throw FileParseError(l->number, 5, "variable index out of range");
        }
        b.coeffs[static_cast<std::size_t>(idx[0])] = read_matrix(r, m, "coefficient matrix");
        l = r.next(&comments);
      }
      p.blocks.push_back(std::move(b));
    } else if (kw == "ineq") {
      const auto vals = numbers(*l, 1);
      if (vals.size() != p.nvars + 1) {
        throw FileParseError(l->number, 1,
                             "ineq needs rhs and " + std::to_string(p.nvars) + " coefficients");
      }
      LinIneq q;
      q.label = take_label(comments, "ineq:", "ineq " + std::to_string(p.ineqs.size()));
      q.rhs = vals[0];
      q.coeffs.assign(vals.begin() + 1, vals.end());
      p.ineqs.push_back(std::move(q));
      l = r.next(&comments);
    } else {
      throw FileParseError(l->number, 1, "unknown keyword '" + kw + "'");
    }
  }
  p.validate();
  return p;
}

void write_point(std::ostream& os, const Vector& v) {
  os << "point nvars=" << v.size() << '\n';
  for (double x : v) os << fmt(x) << '\n';
}

Vector read_point(std::istream& is) {
  LineReader r(is);
  const Line* l = r.next();
  std::size_t expected = 0;
  bool have_header = false;
  Vector v;
  if (l && l->text.rfind("point nvars=", 0) == 0) {
    expected = static_cast<std::size_t>(std::strtoul(l->text.c_str() + 12, nullptr, 10));
    have_header = true;
    l = r.next();
  }
  while (l) {
    const auto xs = numbers(*l);
    v.insert(v.end(), xs.begin(), xs.end());
    l = r.next();
  }
  if (have_header && v.size() != expected) {
    throw FileParseError(r.last_line(), 1,
                         "expected " + std::to_string(expected) + " values, found " + std::to_string(v.size()));
  }
  return v;
}

}  // namespace mmobs::sdp
