#include "mmobs/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <string>
#include <thread>

#include "mmobs/error.hpp"

namespace mmobs::sim {

Plant::Plant(TimeDomain time, const std::vector<expr::Expr>& f, const std::vector<expr::Expr>& h) : time_(time) {
  for (const auto& e : f) {
    if (expr::var_bound(e) > f.size()) throw Error(ErrorKind::DimensionMismatch, "plant f uses an unknown state");
    f_.emplace_back(e);
  }
  for (const auto& e : h) {
    if (expr::var_bound(e) > f.size()) throw Error(ErrorKind::DimensionMismatch, "plant h uses an unknown state");
    h_.emplace_back(e);
  }
}

void Plant::f(const double* x, double* out) const {
  for (std::size_t i = 0; i < f_.size(); ++i) out[i] = f_[i](x);
}

void Plant::h(const double* x, double* out) const {
  for (std::size_t i = 0; i < h_.size(); ++i) out[i] = h_[i](x);
}

Vector Plant::f(const Vector& x) const {
  Vector out(n());
  f(x.data(), out.data());
  return out;
}

Vector Plant::h(const Vector& x) const {
  Vector out(l());
  h(x.data(), out.data());
  return out;
}

double SimOptions::tolerance(TimeDomain time) const {
  if (violation_tol >= 0.0) return violation_tol;
  return time == TimeDomain::DT ? 1e-9 : 1e-6;
}

namespace {

class Recorder {
 public:
  Recorder(const embed::ObserverSystem& obs, const SimOptions& opts, TrajectoryLog& log)
      : obs_(obs), opts_(opts), log_(log), tol_(opts.tolerance(obs.time())) {}

  // Validates the state at time t and returns the current eps_inf.
  double inspect(double t, const double* x, const double* up, const double* lo) {
    const std::size_t n = obs_.n();
    double eps_inf = -std::numeric_limits<double>::infinity();
    bool inside = true;
    const Box& dom = obs_.domain();
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(up[i]) || !std::isfinite(lo[i]) || !std::isfinite(x[i])) {
        throw Error(ErrorKind::NonFiniteState, "state became non-finite at t=" + std::to_string(t));
      }
      const double scale = std::max({1.0, std::abs(up[i]), std::abs(lo[i])});
      if (up[i] - lo[i] < -1e-12 * scale) {
        throw Error(ErrorKind::OrderingViolation, "lower framer exceeds upper at t=" + std::to_string(t) +
                                                      ", component " + std::to_string(i + 1));
      }
      eps_inf = std::max(eps_inf, up[i] - lo[i]);
      const double miss = std::max(lo[i] - x[i], x[i] - up[i]);
      if (miss > tol_) log_.violations.push_back({t, i, miss});
      if (lo[i] < dom.lo[i] || up[i] > dom.hi[i]) inside = false;
    }
    if (!inside) {
      log_.domain_exits.push_back(t);
      if (opts_.strict_domain) {
        throw Error(ErrorKind::DomainExit, "framer box left the domain at t=" + std::to_string(t));
      }
    }
    return eps_inf;
  }

  void record(double t, const double* x, const double* up, const double* lo, double eps_inf) {
    const std::size_t n = obs_.n();
    log_.times.push_back(t);
    log_.upper.emplace_back(up, up + n);
    log_.lower.emplace_back(lo, lo + n);
    Vector e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = up[i] - lo[i];
    log_.eps.push_back(std::move(e));
    log_.eps_inf.push_back(eps_inf);
    if (opts_.record_truth) log_.truth.emplace_back(x, x + n);
  }

 private:
  const embed::ObserverSystem& obs_;
  const SimOptions& opts_;
  TrajectoryLog& log_;
  double tol_;
};

void check_inputs(const Plant& plant, const embed::ObserverSystem& obs, const Vector& x0, const Box& initial) {
  if (plant.n() != obs.n() || plant.l() != obs.l() || x0.size() != obs.n() || initial.dim() != obs.n()) {
    throw Error(ErrorKind::DimensionMismatch, "plant, observer and initial data disagree in size");
  }
  if (plant.time() != obs.time()) throw Error(ErrorKind::DimensionMismatch, "plant and observer time domains differ");
  if (!initial.contains(x0, 1e-12 * std::max(1.0, norm_inf(x0)))) {
    throw Error(ErrorKind::DomainError, "true initial state lies outside the initial box");
  }
}

}  // namespace

TrajectoryLog simulate_dt(const Plant& plant, const embed::ObserverSystem& obs, const Vector& x0_true,
                          const Box& initial, std::size_t steps, const SimOptions& opts) {
  check_inputs(plant, obs, x0_true, initial);
  if (obs.time() != TimeDomain::DT) throw Error(ErrorKind::DimensionMismatch, "simulate_dt needs a DT observer");
  const std::size_t n = obs.n();
  const std::size_t every = std::max<std::size_t>(1, opts.log_every);
  TrajectoryLog log;
  Recorder rec(obs, opts, log);
  Vector x = x0_true, up = initial.hi, lo = initial.lo;
  Vector xn(n), upn(n), lon(n), y(obs.l());
  rec.record(0.0, x.data(), up.data(), lo.data(), rec.inspect(0.0, x.data(), up.data(), lo.data()));
  for (std::size_t k = 1; k <= steps; ++k) {
    plant.h(x.data(), y.data());
    obs.rhs(up.data(), lo.data(), y.data(), upn.data(), lon.data());
    plant.f(x.data(), xn.data());
    std::swap(x, xn);
    std::swap(up, upn);
    std::swap(lo, lon);
    const double t = static_cast<double>(k);
    const double e = rec.inspect(t, x.data(), up.data(), lo.data());
    if (k % every == 0 || k == steps) rec.record(t, x.data(), up.data(), lo.data(), e);
  }
  return log;
}

TrajectoryLog integrate_ct(const Plant& plant, const embed::ObserverSystem& obs, const Vector& x0_true,
                           const Box& initial, double t_end, double h_step, const SimOptions& opts) {
  check_inputs(plant, obs, x0_true, initial);
  if (obs.time() != TimeDomain::CT) throw Error(ErrorKind::DimensionMismatch, "integrate_ct needs a CT observer");
  if (!(h_step > 0.0) || !(t_end >= 0.0)) throw Error(ErrorKind::DomainError, "need h_step > 0 and t_end >= 0");
  const std::size_t n = obs.n();
  const std::size_t m = 3 * n;
  const auto steps = static_cast<std::size_t>(std::llround(t_end / h_step));
  const std::size_t every = std::max<std::size_t>(1, opts.log_every);
  const double domain_width = obs.domain().max_width();

  std::vector<double> w(m), k1(m), k2(m), k3(m), k4(m), tmp(m), y(obs.l());
  std::copy(x0_true.begin(), x0_true.end(), w.begin());
  std::copy(initial.hi.begin(), initial.hi.end(), w.begin() + static_cast<std::ptrdiff_t>(n));
  std::copy(initial.lo.begin(), initial.lo.end(), w.begin() + static_cast<std::ptrdiff_t>(2 * n));

  auto deriv = [&](const double* s, double* out) {
    plant.f(s, out);
    plant.h(s, y.data());
    obs.rhs(s + n, s + 2 * n, y.data(), out + n, out + 2 * n);
  };

  TrajectoryLog log;
  Recorder rec(obs, opts, log);
  double eps = rec.inspect(0.0, w.data(), w.data() + n, w.data() + 2 * n);
  rec.record(0.0, w.data(), w.data() + n, w.data() + 2 * n, eps);
  for (std::size_t k = 1; k <= steps; ++k) {
    deriv(w.data(), k1.data());
    for (std::size_t i = 0; i < m; ++i) tmp[i] = w[i] + 0.5 * h_step * k1[i];
    deriv(tmp.data(), k2.data());
    for (std::size_t i = 0; i < m; ++i) tmp[i] = w[i] + 0.5 * h_step * k2[i];
    deriv(tmp.data(), k3.data());
    for (std::size_t i = 0; i < m; ++i) tmp[i] = w[i] + h_step * k3[i];
    deriv(tmp.data(), k4.data());
    double change = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = h_step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (i >= n) change = std::max(change, std::abs(d));
      w[i] += d;
    }
    const double t = static_cast<double>(k) * h_step;
    if (change > 10.0 * std::max(domain_width, eps)) {
      throw Error(ErrorKind::StepTooLarge, "framers moved by " + std::to_string(change) + " in one step at t=" +
                                               std::to_string(t) + "; reduce the step size");
    }
    eps = rec.inspect(t, w.data(), w.data() + n, w.data() + 2 * n);
    if (k % every == 0 || k == steps) rec.record(t, w.data(), w.data() + n, w.data() + 2 * n, eps);
  }
  return log;
}

TrajectoryLog run(const Plant& plant, const embed::ObserverSystem& obs, const Vector& x0_true, const Box& initial,
                  const Horizon& horizon, const SimOptions& opts) {
  if (obs.time() == TimeDomain::DT) return simulate_dt(plant, obs, x0_true, initial, horizon.steps, opts);
  return integrate_ct(plant, obs, x0_true, initial, horizon.t_end, horizon.h_step, opts);
}

std::vector<Vector> draw_samples(const Box& sample_box, const std::optional<Matrix>& transform, std::size_t n,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    Vector x(sample_box.dim());
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::uniform_real_distribution<double> u(sample_box.lo[i], sample_box.hi[i]);
      x[i] = u(rng);
    }
    out.push_back(transform ? *transform * x : x);
  }
  return out;
}

MonteCarloSummary monte_carlo_framer_check(const Plant& plant, const embed::ObserverSystem& obs, const Box& initial,
                                           const Box& sample_box, const std::optional<Matrix>& transform,
                                           std::size_t n_samples, const Horizon& horizon, std::uint64_t seed,
                                           const SimOptions& opts, unsigned threads) {
  if (n_samples == 0) throw Error(ErrorKind::DomainError, "need at least one Monte Carlo sample");
  const auto x0s = draw_samples(sample_box, transform, n_samples, seed);

  struct Outcome {
    std::size_t violations = 0;
    double max_violation = 0.0;
    bool exited = false;
    std::vector<double> times;
    std::vector<double> eps_inf;
    std::exception_ptr error;
  };
  std::vector<Outcome> outcomes(n_samples);
  SimOptions local = opts;
  local.record_truth = false;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t s = next++; s < n_samples; s = next++) {
      Outcome& o = outcomes[s];
      try {
        TrajectoryLog log = run(plant, obs, x0s[s], initial, horizon, local);
        o.violations = log.violations.size();
        for (const auto& v : log.violations) o.max_violation = std::max(o.max_violation, v.magnitude);
        o.exited = !log.domain_exits.empty();
        o.times = std::move(log.times);
        o.eps_inf = std::move(log.eps_inf);
      } catch (...) {
        o.error = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_samples));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  MonteCarloSummary sum;
  sum.samples = n_samples;
  double worst_final = -1.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Outcome& o = outcomes[s];
    if (o.error) std::rethrow_exception(o.error);
    sum.violations += o.violations;
    sum.max_violation = std::max(sum.max_violation, o.max_violation);
    if (o.exited) ++sum.samples_with_domain_exit;
    if (o.eps_inf.back() > worst_final) {
      worst_final = o.eps_inf.back();
      sum.worst_sample = s;
    }
  }
  sum.worst_eps_times = outcomes[sum.worst_sample].times;
  sum.worst_eps_trace = outcomes[sum.worst_sample].eps_inf;
  sum.worst_x0 = x0s[sum.worst_sample];
  return sum;
}

ErrorMetrics error_metrics(const std::vector<double>& eps_inf) {
  if (eps_inf.empty()) throw Error(ErrorKind::DomainError, "error_metrics needs a non-empty log");
  ErrorMetrics m;
  m.eps_inf_initial = eps_inf.front();
  m.eps_inf_final = eps_inf.back();
  if (m.eps_inf_initial > 0.0) {
    m.ratio = m.eps_inf_final / m.eps_inf_initial;
  } else {
    m.ratio = m.eps_inf_final == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  }
  if (eps_inf.size() > 1) {
    std::size_t mono = 0;
    for (std::size_t k = 0; k + 1 < eps_inf.size(); ++k) {
      if (eps_inf[k + 1] <= eps_inf[k]) ++mono;
    }
    m.monotone_fraction = static_cast<double>(mono) / static_cast<double>(eps_inf.size() - 1);
  }
  return m;
}

ErrorMetrics error_metrics(const TrajectoryLog& log) { return error_metrics(log.eps_inf); }

double richardson_difference(const Plant& plant, const embed::ObserverSystem& obs, const Vector& x0_true,
                             const Box& initial, double t_end, double h_step, const SimOptions& opts) {
  SimOptions coarse = opts;
  coarse.record_truth = false;
  coarse.log_every = std::max<std::size_t>(1, opts.log_every);
  SimOptions fine = coarse;
  fine.log_every = 2 * coarse.log_every;
  const TrajectoryLog a = integrate_ct(plant, obs, x0_true, initial, t_end, h_step, coarse);
  const TrajectoryLog b = integrate_ct(plant, obs, x0_true, initial, t_end, 0.5 * h_step, fine);
  const std::size_t count = std::min(a.size(), b.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    for (std::size_t i = 0; i < obs.n(); ++i) {
      const double du = std::abs(a.upper[k][i] - b.upper[k][i]) / std::max(1.0, std::abs(a.upper[k][i]));
      const double dl = std::abs(a.lower[k][i] - b.lower[k][i]) / std::max(1.0, std::abs(a.lower[k][i]));
      worst = std::max({worst, du, dl});
    }
  }
  return worst;
}

}  // namespace mmobs::sim
