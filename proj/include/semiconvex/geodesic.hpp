#pragma once

#include "semiconvex/metric_chart.hpp"
#include "semiconvex/region.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace semiconvex {

struct GeodesicState {
  Vec x;
  Vec v;
  double s = 0.0;
};

enum class ExitReason { Completed, LeftDomain, StepFailure };

const char* to_string(ExitReason r);

struct Trajectory {
  std::vector<GeodesicState> states;
  /// max |g(v,v)(s) - g(v,v)(0)| over the stored grid.
  double energy_drift = 0.0;
  double initial_energy = 0.0;
  ExitReason exit_reason = ExitReason::Completed;
  std::string diagnostic;

  const GeodesicState& front() const { return states.front(); }
  const GeodesicState& back() const { return states.back(); }
  bool completed() const { return exit_reason == ExitReason::Completed; }
};

struct IntegrationOptions {
  /// Local error bound per step, mixed absolute/relative: |err_i| <= tol (1 + |y_i|).
  double tol = 1e-9;
  /// Upper bound on the stored grid spacing.
  double max_step = std::numeric_limits<double>::infinity();
  /// Nonzero selects classic RK4 with this many equal steps.
  int fixed_steps = 0;
  int max_steps = 2'000'000;
  /// Called with every finished trajectory (for instrumentation).
  std::function<void(const Trajectory&)> observer;
};

/// Process-wide hook called with every finished trajectory after the per-call
/// observer; may run concurrently from worker threads. Pass nullptr to remove.
void set_global_trajectory_observer(std::function<void(const Trajectory&)> observer);

/// Integrates x'' + Gamma(x', x') = 0 with adaptive Dormand-Prince 5(4) and PI
/// step control. Leaving the chart domain ends the run with LeftDomain after
/// the crossing has been bracketed to 1e-10 in the affine parameter.
/// Throws OutOfDomain when x0 itself is outside the chart.
Trajectory integrate_geodesic(const MetricChart& chart, const Vec& x0, const Vec& v0, double s_max,
                              const IntegrationOptions& options = {});

class LeftDomainError : public Error {
 public:
  LeftDomainError(const std::string& what, GeodesicState last)
      : Error(ErrorCode::LeftDomain, what), last_(std::move(last)) {}
  const GeodesicState& last_state() const { return last_; }

 private:
  GeodesicState last_;
};

/// gamma(1) for the geodesic with gamma(0) = p, gamma'(0) = v. Same code path as
/// integrate_geodesic; throws LeftDomainError (or StepFailure) when the geodesic
/// does not reach parameter 1.
Vec exp_map(const MetricChart& chart, const Vec& p, const Vec& v, const IntegrationOptions& options = {});

inline IntegrationOptions tight_integration() {
  IntegrationOptions o;
  o.tol = 1e-12;
  return o;
}

struct BvpOptions {
  IntegrationOptions integration = tight_integration();
  double residual_tol = 1e-10;
  int max_iterations = 50;
  int max_halvings = 20;
  double fd_step = 1e-6;
  /// Grid resolution of the returned trajectory (steps on [0, 1]).
  int grid_steps = 64;
};

struct BvpResult {
  Trajectory trajectory;
  Vec velocity;
  double residual = 0.0;
  int iterations = 0;
  /// Every stored sample of the trajectory satisfies the region predicate.
  bool interior_ok = false;
};

/// Shooting with Newton on the initial velocity, forward-difference Jacobian
/// and backtracking. Throws NotFound (message carries the final residual).
BvpResult solve_bvp(const MetricChart& chart, const Vec& p, const Vec& q, const Region& region,
                    const Vec& v_guess, const BvpOptions& options = {});

double energy(const MetricChart& chart, const GeodesicState& state);

/// Columns: s, x1..xm, v1..vm, g_vv.
void write_trajectory_csv(std::ostream& os, const MetricChart& chart, const Trajectory& trajectory);

}  // namespace semiconvex
