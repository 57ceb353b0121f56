#include "mmobs/system.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mmobs/error.hpp"

namespace mmobs {

namespace {

const char* const kHenonDt = R"(# Henon-type map with a quadratic term on the first state
system henon_dt
time dt
param r1 = 0.05
states x1 x2
outputs 1
f x1 = x2 + r1*(1 - x1^2)
f x2 = 0.3*x1
h 1 = x1
domain x1 in [-2, 2]
domain x2 in [-1, 1]
x0 x1 in [-2, 2]
x0 x2 in [-1, 1]
)";

const char* const kCtPendulum = R"(# Single-link flexible joint robot
system ct_pendulum
time ct
param a1 = 35.63
param b1 = 15
param a2 = 0.25
param a3 = 36
param a4 = 200
states x1 x2 x3
outputs 1
f x1 = x2
f x2 = b1*x3 - a1*sin(x1) - a2*x2
f x3 = -a2*a3*x1 + a1/b1*(a4*sin(x1) + cos(x1)*x2) - a3*x2 - a4*x3
h 1 = x1
domain x1 in [0, 22]
domain x2 in [-6, 12]
domain x3 in [-6, 4]
x0 x1 in [9, 19.5]
x0 x2 in [9, 11]
x0 x3 in [0.5, 1.5]
transform row 1 = 20 0.1 0.1
transform row 2 = 0 0.01 0.06
transform row 3 = 0 -10 -0.4
prek = 5 0 0
)";

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// One line of a system file with a read position; columns are 1-based.
class Cursor {
 public:
  Cursor(std::string text, std::size_t line) : text_(std::move(text)), line_(line) {}

  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] std::size_t column() const { return pos_ + 1; }
  [[nodiscard]] bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }

  [[noreturn]] void fail(const std::string& what) const { throw FileParseError(line_, column(), what); }

  std::string word() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected an identifier");
    return text_.substr(start, pos_ - start);
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void expect_word(const std::string& w) {
    skip_ws();
    const std::size_t save = pos_;
    if (word() != w) {
      pos_ = save;
      fail("expected '" + w + "'");
    }
  }

  double number() {
    skip_ws();
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || !std::isfinite(v)) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  std::size_t count() {
    skip_ws();
    const std::size_t col = column();
    const double v = number();
    if (v < 0 || v != std::floor(v)) throw FileParseError(line_, col, "expected a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  Interval interval() {
    expect('[');
    const double lo = number();
    expect(',');
    const double hi = number();
    expect(']');
    if (lo > hi) fail("interval has lower bound above upper bound");
    return {lo, hi};
  }

  // Remainder of the line and the column where it starts.
  std::pair<std::string, std::size_t> rest() {
    skip_ws();
    const std::size_t col = column();
    std::string r = text_.substr(pos_);
    pos_ = text_.size();
    while (!r.empty() && std::isspace(static_cast<unsigned char>(r.back()))) r.pop_back();
    return {r, col};
  }

  void done() {
    if (!at_end()) fail("unexpected trailing text");
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

struct PendingExpr {
  std::string text;
  std::size_t line = 0;
  std::size_t column = 0;
};

struct PendingInterval {
  Interval value{0.0, 0.0};
  std::size_t line = 0;
};

expr::Expr parse_at(const PendingExpr& p, const std::vector<std::string>& states,
                    const std::map<std::string, double, std::less<>>& params) {
  try {
    return expr::parse(p.text, states, params);
  } catch (const SyntaxError& e) {
    throw FileParseError(p.line, p.column + e.position(), e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::UnknownIdentifier) throw FileParseError(p.line, p.column, e.what());
    throw;
  }
}

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::ValidationError, what); }

}  // namespace

bool operator==(const SystemSpec& a, const SystemSpec& b) {
  if (a.name != b.name || a.time != b.time || a.params != b.params || a.states != b.states || a.l != b.l ||
      a.f_source != b.f_source || a.h_source != b.h_source || a.domain.lo != b.domain.lo ||
      a.domain.hi != b.domain.hi || a.x0.lo != b.x0.lo || a.x0.hi != b.x0.hi || a.transform != b.transform ||
      a.prek != b.prek || a.f.size() != b.f.size() || a.h.size() != b.h.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.f.size(); ++i) {
    if (!expr::structurally_equal(a.f[i], b.f[i])) return false;
  }
  for (std::size_t i = 0; i < a.h.size(); ++i) {
    if (!expr::structurally_equal(a.h[i], b.h[i])) return false;
  }
  return true;
}

SystemSpec parse_system(const std::string& text) {
  SystemSpec spec;
  bool have_name = false, have_time = false, have_states = false, have_outputs = false;
  std::map<std::string, double, std::less<>> params;
  std::map<std::string, PendingExpr> f_pending;
  std::map<std::size_t, PendingExpr> h_pending;
  std::map<std::string, PendingInterval> dom_pending, x0_pending;
  std::map<std::size_t, std::vector<double>> t_rows;
  std::vector<std::vector<double>> prek_cols;
  std::size_t last_line = 0;

  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    last_line = line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    Cursor c(raw, line_no);
    if (c.at_end()) continue;
    const std::size_t kw_col = c.column();
    const std::string kw = c.word();
    auto duplicate = [&](const std::string& what) { throw FileParseError(line_no, kw_col, "duplicate " + what); };

    if (kw == "system") {
      if (have_name) duplicate("system name");
      spec.name = c.word();
      c.done();
      have_name = true;
    } else if (kw == "time") {
      if (have_time) duplicate("time statement");
      const std::string t = c.word();
      if (t == "ct") {
        spec.time = embed::TimeDomain::CT;
      } else if (t == "dt") {
        spec.time = embed::TimeDomain::DT;
      } else {
        throw FileParseError(line_no, kw_col + 5, "time must be ct or dt");
      }
      c.done();
      have_time = true;
    } else if (kw == "param") {
      const std::string name = c.word();
      c.expect('=');
      const double v = c.number();
      c.done();
      if (params.count(name)) duplicate("parameter '" + name + "'");
      params.emplace(name, v);
      spec.params.emplace_back(name, v);
    } else if (kw == "states") {
      if (have_states) duplicate("states statement");
      while (!c.at_end()) {
        const std::string s = c.word();
        if (std::find(spec.states.begin(), spec.states.end(), s) != spec.states.end()) duplicate("state '" + s + "'");
        spec.states.push_back(s);
      }
      if (spec.states.empty()) c.fail("states needs at least one name");
      have_states = true;
    } else if (kw == "outputs") {
      if (have_outputs) duplicate("outputs statement");
      spec.l = c.count();
      c.done();
      if (spec.l == 0) throw FileParseError(line_no, kw_col, "outputs must be positive");
      have_outputs = true;
    } else if (kw == "f") {
      const std::string s = c.word();
      c.expect('=');
      auto [body, col] = c.rest();
      if (body.empty()) c.fail("missing expression");
      if (f_pending.count(s)) duplicate("f for '" + s + "'");
      f_pending[s] = {body, line_no, col};
    } else if (kw == "h") {
      const std::size_t k = c.count();
      c.expect('=');
      auto [body, col] = c.rest();
      if (body.empty()) c.fail("missing expression");
      if (h_pending.count(k)) duplicate("h " + std::to_string(k));
      h_pending[k] = {body, line_no, col};
    } else if (kw == "domain" || kw == "x0") {
      const std::string s = c.word();
      c.expect_word("in");
      const Interval iv = c.interval();
      c.done();
      auto& target = kw == "domain" ? dom_pending : x0_pending;
      if (target.count(s)) duplicate(kw + " for '" + s + "'");
      target[s] = {iv, line_no};
    } else if (kw == "transform") {
      c.expect_word("row");
      const std::size_t k = c.count();
      c.expect('=');
      std::vector<double> row;
      while (!c.at_end()) row.push_back(c.number());
      if (t_rows.count(k)) duplicate("transform row " + std::to_string(k));
      t_rows[k] = std::move(row);
    } else if (kw == "prek") {
      c.expect('=');
      std::vector<double> col;
      while (!c.at_end()) col.push_back(c.number());
      prek_cols.push_back(std::move(col));
    } else {
      throw FileParseError(line_no, kw_col, "unknown statement '" + kw + "'");
    }
  }

  if (!have_name) throw FileParseError(last_line + 1, 1, "missing 'system <name>'");
  if (!have_time) throw FileParseError(last_line + 1, 1, "missing 'time ct|dt'");
  if (!have_states) throw FileParseError(last_line + 1, 1, "missing 'states ...'");
  if (!have_outputs) throw FileParseError(last_line + 1, 1, "missing 'outputs <count>'");

  for (const auto& [name, value] : spec.params) {
    if (std::find(spec.states.begin(), spec.states.end(), name) != spec.states.end()) {
      invalid("parameter '" + name + "' shadows a state");
    }
  }

  const std::size_t n = spec.n();
  Vector dlo(n), dhi(n), xlo(n), xhi(n);
  for (const auto& s : spec.states) {
    if (!f_pending.count(s)) invalid("no f given for state '" + s + "'");
    if (!dom_pending.count(s)) invalid("no domain given for state '" + s + "'");
    if (!x0_pending.count(s)) invalid("no x0 given for state '" + s + "'");
  }
  for (const auto& [s, p] : f_pending) {
    if (std::find(spec.states.begin(), spec.states.end(), s) == spec.states.end()) {
      throw FileParseError(p.line, 3, "f for unknown state '" + s + "'");
    }
  }
  auto check_known = [&](const std::map<std::string, PendingInterval>& m, const char* what) {
    for (const auto& [s, p] : m) {
      if (std::find(spec.states.begin(), spec.states.end(), s) == spec.states.end()) {
        throw FileParseError(p.line, 1, std::string(what) + " for unknown state '" + s + "'");
      }
    }
  };
  check_known(dom_pending, "domain");
  check_known(x0_pending, "x0");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = spec.states[i];
    const PendingExpr& p = f_pending.at(s);
    spec.f_source.push_back(p.text);
    spec.f.push_back(parse_at(p, spec.states, params));
    dlo[i] = dom_pending.at(s).value.lo;
    dhi[i] = dom_pending.at(s).value.hi;
    xlo[i] = x0_pending.at(s).value.lo;
    xhi[i] = x0_pending.at(s).value.hi;
  }
  for (std::size_t k = 1; k <= spec.l; ++k) {
    if (!h_pending.count(k)) invalid("no h given for output " + std::to_string(k));
    const PendingExpr& p = h_pending.at(k);
    spec.h_source.push_back(p.text);
    spec.h.push_back(parse_at(p, spec.states, params));
  }
  if (h_pending.size() != spec.l) invalid("h index outside 1.." + std::to_string(spec.l));
  spec.domain = Box(dlo, dhi);
  spec.x0 = Box(xlo, xhi);
  if (!spec.domain.contains(spec.x0)) invalid("x0 box is not contained in the domain");

  if (!t_rows.empty()) {
    if (t_rows.size() != n) invalid("transform needs exactly " + std::to_string(n) + " rows");
    Matrix t(n, n);
    for (std::size_t k = 1; k <= n; ++k) {
      if (!t_rows.count(k)) invalid("transform row " + std::to_string(k) + " missing");
      if (t_rows.at(k).size() != n) invalid("transform row " + std::to_string(k) + " needs " + std::to_string(n) + " numbers");
      for (std::size_t j = 0; j < n; ++j) t(k - 1, j) = t_rows.at(k)[j];
    }
    Matrix inv;
    try {
      inv = inverse(t);
    } catch (const Error&) {
      invalid("transform is singular");
    }
    if (t.norm_inf() * inv.norm_inf() >= 1e12) invalid("transform is too ill-conditioned");
    spec.transform = t;
  }
  if (!prek_cols.empty()) {
    if (prek_cols.size() != spec.l) invalid("prek needs one line per output");
    Matrix k(n, spec.l);
    for (std::size_t c = 0; c < spec.l; ++c) {
      if (prek_cols[c].size() != n) invalid("prek lines need " + std::to_string(n) + " numbers");
      for (std::size_t i = 0; i < n; ++i) k(i, c) = prek_cols[c][i];
    }
    spec.prek = k;
  }
  return spec;
}

SystemSpec load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_system(ss.str());
}

std::string write_system(const SystemSpec& spec) {
  std::ostringstream os;
  os << "system " << spec.name << '\n';
  os << "time " << (spec.time == embed::TimeDomain::CT ? "ct" : "dt") << '\n';
  for (const auto& [name, v] : spec.params) os << "param " << name << " = " << fmt(v) << '\n';
  os << "states";
  for (const auto& s : spec.states) os << ' ' << s;
  os << '\n';
  os << "outputs " << spec.l << '\n';
  for (std::size_t i = 0; i < spec.n(); ++i) os << "f " << spec.states[i] << " = " << spec.f_source[i] << '\n';
  for (std::size_t k = 0; k < spec.l; ++k) os << "h " << k + 1 << " = " << spec.h_source[k] << '\n';
  for (std::size_t i = 0; i < spec.n(); ++i) {
    os << "domain " << spec.states[i] << " in [" << fmt(spec.domain.lo[i]) << ", " << fmt(spec.domain.hi[i]) << "]\n";
  }
  for (std::size_t i = 0; i < spec.n(); ++i) {
    os << "x0 " << spec.states[i] << " in [" << fmt(spec.x0.lo[i]) << ", " << fmt(spec.x0.hi[i]) << "]\n";
  }
  if (spec.transform) {
    for (std::size_t i = 0; i < spec.n(); ++i) {
      os << "transform row " << i + 1 << " =";
      for (std::size_t j = 0; j < spec.n(); ++j) os << ' ' << fmt((*spec.transform)(i, j));
      os << '\n';
    }
  }
  if (spec.prek) {
    for (std::size_t c = 0; c < spec.l; ++c) {
      os << "prek =";
      for (std::size_t i = 0; i < spec.n(); ++i) os << ' ' << fmt((*spec.prek)(i, c));
      os << '\n';
    }
  }
  return os.str();
}

std::vector<std::string> bundled_system_names() { return {"henon_dt", "ct_pendulum"}; }

std::optional<std::string> bundled_system_text(const std::string& name) {
  if (name == "henon_dt") return std::string(kHenonDt);
  if (name == "ct_pendulum") return std::string(kCtPendulum);
  return std::nullopt;
}

SystemSpec resolve_system(const std::string& path_or_name) {
  if (std::ifstream probe(path_or_name); probe.good()) return load_system(path_or_name);
  if (auto text = bundled_system_text(path_or_name)) return parse_system(*text);
  throw Error(ErrorKind::IoError, "no system file or bundled system named '" + path_or_name + "'");
}

WorkingSystem prepare(const SystemSpec& spec) {
  WorkingSystem w;
  w.time = spec.time;
  w.n = spec.n();
  w.l = spec.l;
  std::vector<expr::Expr> f_obs = spec.f;
  if (spec.prek) {
    for (std::size_t i = 0; i < w.n; ++i) {
      for (std::size_t k = 0; k < w.l; ++k) {
        const double c = (*spec.prek)(i, k);
        if (c != 0.0) f_obs[i] = f_obs[i] - expr::Expr::constant(c) * spec.h[k];
      }
    }
  }
  if (!spec.transform) {
    w.f_observer = std::move(f_obs);
    w.f_true = spec.f;
    w.h = spec.h;
    w.domain = spec.domain;
    w.x0 = spec.x0;
    w.pre_gain = spec.prek;
    return w;
  }
  const Matrix& t = *spec.transform;
  const Matrix tinv = inverse(t);
  std::vector<expr::Expr> back;  // x_i as a function of z
  for (std::size_t i = 0; i < w.n; ++i) back.push_back(expr::linear_combination(tinv.row_vector(i)));
  auto map_rows = [&](const std::vector<expr::Expr>& fs) {
    std::vector<expr::Expr> sub;
    for (const auto& e : fs) sub.push_back(expr::substitute(e, back));
    std::vector<expr::Expr> out;
    for (std::size_t i = 0; i < w.n; ++i) {
      expr::Expr row;
      for (std::size_t j = 0; j < w.n; ++j) {
        if (t(i, j) != 0.0) row = row + expr::Expr::constant(t(i, j)) * sub[j];
      }
      out.push_back(row);
    }
    return out;
  };
  w.f_observer = map_rows(f_obs);
  w.f_true = map_rows(spec.f);
  for (const auto& e : spec.h) w.h.push_back(expr::substitute(e, back));
  w.domain = interval_matvec_bounds(t, spec.domain);
  w.x0 = interval_matvec_bounds(t, spec.x0);
  w.transform = t;
  w.inverse_transform = tinv;
  if (spec.prek) w.pre_gain = t * *spec.prek;
  return w;
}

Splits split_system(const WorkingSystem& w, const decomp::Strategy& strategy) {
  return {decomp::jss_split(w.f_observer, w.domain, strategy), decomp::jss_split(w.h, w.domain, strategy)};
}

embed::ObserverSystem build_observer(const WorkingSystem& w, const Splits& s, const Matrix& gain) {
  return {w.time, s.phi, s.psi, gain, w.pre_gain};
}

sim::Plant build_plant(const WorkingSystem& w) { return {w.time, w.f_true, w.h}; }

void write_gain(std::ostream& os, const GainFile& g) {
  os << "system " << g.system << '\n';
  for (const auto& [k, v] : g.strings) os << k << ' ' << v << '\n';
  for (const auto& [k, v] : g.scalars) os << k << ' ' << fmt(v) << '\n';
  for (const auto& [k, m] : g.matrices) {
    os << k << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? " " : "") << fmt(m(i, j));
      os << '\n';
    }
  }
}

GainFile read_gain(std::istream& is) {
  GainFile g;
  std::string raw;
  std::size_t line_no = 0;
  auto next = [&](std::string& out) {
    while (std::getline(is, out)) {
      ++line_no;
      if (const auto hash = out.find('#'); hash != std::string::npos) out.erase(hash);
      if (out.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  while (next(raw)) {
    std::istringstream ls(raw);
    std::string key;
    ls >> key;
    std::vector<std::string> rest;
    for (std::string tok; ls >> tok;) rest.push_back(tok);
    if (key == "system") {
      if (rest.size() != 1) throw FileParseError(line_no, 1, "system needs one name");
      g.system = rest[0];
      continue;
    }
    auto to_num = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end != s.c_str() + s.size() || !std::isfinite(v)) {
        throw FileParseError(line_no, raw.find(s) + 1, "expected a number, found '" + s + "'");
      }
      return v;
    };
    if (rest.size() == 2) {
      const double r = to_num(rest[0]);
      const double c = to_num(rest[1]);
      if (r < 1 || c < 1 || r != std::floor(r) || c != std::floor(c)) {
        throw FileParseError(line_no, 1, "matrix dimensions must be positive integers");
      }
      Matrix m(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
      for (std::size_t i = 0; i < m.rows(); ++i) {
        std::string row;
        if (!next(row)) throw FileParseError(line_no + 1, 1, "unexpected end of file inside '" + key + "'");
        std::istringstream rs(row);
        std::vector<std::string> toks;
        for (std::string tok; rs >> tok;) toks.push_back(tok);
        if (toks.size() != m.cols()) throw FileParseError(line_no, 1, "row of '" + key + "' has the wrong length");
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = to_num(toks[j]);
      }
      g.matrices[key] = std::move(m);
    } else if (rest.size() == 1) {
      char* end = nullptr;
      const double v = std::strtod(rest[0].c_str(), &end);
      if (end == rest[0].c_str() + rest[0].size() && std::isfinite(v)) {
        g.scalars[key] = v;
      } else {
        g.strings[key] = rest[0];
      }
    } else {
      throw FileParseError(line_no, 1, "cannot read line for key '" + key + "'");
    }
  }
  if (!g.matrices.count("L")) throw FileParseError(line_no + 1, 1, "gain file has no 'L' matrix");
  return g;
}

std::optional<Matrix> builtin_gain(const std::string& system, const std::string& which) {
  if (which != "paper") return std::nullopt;
  if (system == "henon_dt") return Matrix{{0.0393}, {0.0346}};
  if (system == "ct_pendulum") return Matrix{{3.44e-6}, {0.0}, {0.04e-6}};
  return std::nullopt;
}

Matrix resolve_gain(const std::string& spec, const SystemSpec& system) {
  if (spec == "zero") return Matrix(system.n(), system.l);
  if (auto g = builtin_gain(system.name, spec)) return *g;
  std::ifstream in(spec);
  if (!in) throw Error(ErrorKind::IoError, "cannot open gain file " + spec);
  const GainFile g = read_gain(in);
  if (!g.system.empty() && g.system != system.name) {
    throw Error(ErrorKind::ValidationError, "gain file is for system '" + g.system + "', not '" + system.name + "'");
  }
  if (g.gain().rows() != system.n() || g.gain().cols() != system.l) {
    throw Error(ErrorKind::DimensionMismatch, "gain shape does not match the system");
  }
  return g.gain();
}

void write_csv(std::ostream& os, const sim::TrajectoryLog& log, std::size_t n) {
  const bool truth = !log.truth.empty();
  os << 't';
  for (const char* col : {"xbar_", "xlow_", "eps_"}) {
    for (std::size_t i = 1; i <= n; ++i) os << ',' << col << i;
  }
  os << ",eps_inf";
  if (truth) {
    for (std::size_t i = 1; i <= n; ++i) os << ",xtrue_" << i;
  }
  os << '\n';
  for (std::size_t k = 0; k < log.size(); ++k) {
    os << fmt(log.times[k]);
    for (double v : log.upper[k]) os << ',' << fmt(v);
    for (double v : log.lower[k]) os << ',' << fmt(v);
    for (double v : log.eps[k]) os << ',' << fmt(v);
    os << ',' << fmt(log.eps_inf[k]);
    if (truth) {
      for (double v : log.truth[k]) os << ',' << fmt(v);
    }
    os << '\n';
  }
}

sim::TrajectoryLog to_original(const sim::TrajectoryLog& log, const Matrix& inverse_transform) {
  sim::TrajectoryLog out;
  out.times = log.times;
  out.violations = log.violations;
  out.domain_exits = log.domain_exits;
  for (std::size_t k = 0; k < log.size(); ++k) {
    auto [lo, up] = interval_matvec_bounds(inverse_transform, log.lower[k], log.upper[k]);
    Vector e = sub(up, lo);
    out.eps_inf.push_back(*std::max_element(e.begin(), e.end()));
    out.upper.push_back(std::move(up));
    out.lower.push_back(std::move(lo));
    out.eps.push_back(std::move(e));
    if (!log.truth.empty()) out.truth.push_back(inverse_transform * log.truth[k]);
  }
  return out;
}

}  // namespace mmobs
