#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mmobs/embed.hpp"
#include "mmobs/expr.hpp"
#include "mmobs/interval.hpp"
#include "mmobs/numerics.hpp"

namespace mmobs::sim {

using embed::TimeDomain;

/// True plant x+ = f(x) (DT) or x' = f(x) (CT) with output y = h(x).
class Plant {
 public:
  Plant(TimeDomain time, const std::vector<expr::Expr>& f, const std::vector<expr::Expr>& h);

  [[nodiscard]] TimeDomain time() const { return time_; }
  [[nodiscard]] std::size_t n() const { return f_.size(); }
  [[nodiscard]] std::size_t l() const { return h_.size(); }

  void f(const double* x, double* out) const;
  void h(const double* x, double* out) const;
  [[nodiscard]] Vector f(const Vector& x) const;
  [[nodiscard]] Vector h(const Vector& x) const;

 private:
  TimeDomain time_;
  std::vector<expr::CompiledExpr> f_;
  std::vector<expr::CompiledExpr> h_;
};

struct Violation {
  double time = 0.0;
  std::size_t index = 0;
  double magnitude = 0.0;
};

struct TrajectoryLog {
  std::vector<double> times;
  std::vector<Vector> upper;
  std::vector<Vector> lower;
  std::vector<Vector> truth;  // empty when not co-simulated
  std::vector<Vector> eps;
  std::vector<double> eps_inf;
  std::vector<Violation> violations;
  std::vector<double> domain_exits;

  [[nodiscard]] std::size_t size() const { return times.size(); }
};

struct SimOptions {
  std::size_t log_every = 1;
  bool strict_domain = false;
  // Containment tolerance; negative selects 1e-9 for DT and 1e-6 for CT.
  double violation_tol = -1.0;
  bool record_truth = true;

  [[nodiscard]] double tolerance(TimeDomain time) const;
};

// Framers start at the corners of `initial`. Throws NonFiniteState,
// OrderingViolation and, in strict mode, DomainExit.
TrajectoryLog simulate_dt(const Plant& plant, const embed::ObserverSystem& obs, const Vector& x0_true,
                          const Box& initial, std::size_t steps, const SimOptions& opts = {});

// Fixed-step RK4 on the joint (truth, upper, lower) system. Also throws
// StepTooLarge when one step moves the framers by more than ten times the
// larger of the domain width and the current framer width.
TrajectoryLog integrate_ct(const Plant& plant, const embed::ObserverSystem& obs, const Vector& x0_true,
                           const Box& initial, double t_end, double h_step, const SimOptions& opts = {});

struct Horizon {
  std::size_t steps = 0;  // DT
  double t_end = 0.0;     // CT
  double h_step = 1e-3;   // CT
};

TrajectoryLog run(const Plant& plant, const embed::ObserverSystem& obs, const Vector& x0_true, const Box& initial,
                  const Horizon& horizon, const SimOptions& opts = {});

struct MonteCarloSummary {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double max_violation = 0.0;
  std::size_t samples_with_domain_exit = 0;
  std::size_t worst_sample = 0;          // largest final eps_inf, lowest index on ties
  std::vector<double> worst_eps_times;
  std::vector<double> worst_eps_trace;
  Vector worst_x0;
};

// Initial states are drawn uniformly from `sample_box` and mapped through
// `transform` when given. Each sample drives its own observer.
MonteCarloSummary monte_carlo_framer_check(const Plant& plant, const embed::ObserverSystem& obs, const Box& initial,
                                           const Box& sample_box, const std::optional<Matrix>& transform,
                                           std::size_t n_samples, const Horizon& horizon, std::uint64_t seed,
                                           const SimOptions& opts = {}, unsigned threads = 0);

// The sample points monte_carlo_framer_check uses for a seed.
std::vector<Vector> draw_samples(const Box& sample_box, const std::optional<Matrix>& transform, std::size_t n,
                                 std::uint64_t seed);

struct ErrorMetrics {
  double eps_inf_initial = 0.0;
  double eps_inf_final = 0.0;
  double ratio = 0.0;
  double monotone_fraction = 1.0;
};

ErrorMetrics error_metrics(const std::vector<double>& eps_inf);
ErrorMetrics error_metrics(const TrajectoryLog& log);

// Largest framer difference between runs at h and h/2 over the shared log
// times, each entry scaled by max(1, |value|).
double richardson_difference(const Plant& plant, const embed::ObserverSystem& obs, const Vector& x0_true,
                             const Box& initial, double t_end, double h_step, const SimOptions& opts = {});

}  // namespace mmobs::sim
