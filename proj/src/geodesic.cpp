#include "semiconvex/geodesic.hpp"

#include <cmath>
#include <iomanip>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>

namespace semiconvex {

const char* to_string(ExitReason r) {
  switch (r) {
    case ExitReason::Completed: return "completed";
    case ExitReason::LeftDomain: return "left_domain";
    case ExitReason::StepFailure: return "step_failure";
  }
  return "?";
}

double energy(const MetricChart& chart, const GeodesicState& state) {
  return state.v.dot(chart.raw_metric(state.x) * state.v);
}

namespace {

using StateVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2 * kMaxDim, 1>;

constexpr double kBracketTol = 1e-10;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

class GeodesicRhs {
 public:
  explicit GeodesicRhs(const MetricChart& chart) : chart_(chart), m_(chart.dim()) {}

  // Returns false when the state is outside the chart or the metric degenerates.
  bool operator()(const StateVec& y, StateVec& dy) const {
    if (!y.allFinite()) return false;
    Vec x = y.head(m_);
    Vec v = y.tail(m_);
    if (!chart_.in_domain(x)) return false;
    try {
      const ChristoffelSymbols gamma = chart_.christoffel_at(x);
      dy.resize(2 * m_);
      dy.head(m_) = v;
      dy.tail(m_) = -gamma.contract(v, v);
    } catch (const Error&) {
      return false;
    }
    return dy.allFinite();
  }

 private:
  const MetricChart& chart_;
  int m_;
};

struct StepResult {
  bool feasible = false;
  StateVec y;
  StateVec k_last;  // FSAL derivative at the new point
  double err = 0.0;
};

StepResult dopri_step(const GeodesicRhs& f, const StateVec& y, const StateVec& k1, double h, double tol,
                      const MetricChart& chart) {
  StepResult r;
  StateVec k2, k3, k4, k5, k6, k7;
  if (!f(y + h * (a21 * k1), k2)) return r;
  if (!f(y + h * (a31 * k1 + a32 * k2), k3)) return r;
  if (!f(y + h * (a41 * k1 + a42 * k2 + a43 * k3), k4)) return r;
  if (!f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5)) return r;
  if (!f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6)) return r;
  StateVec ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  if (!chart.in_domain(ynew.head(chart.dim()))) return r;
  if (!f(ynew, k7)) return r;
  StateVec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double scale = tol * (1.0 + std::max(std::abs(y(i)), std::abs(ynew(i))));
    worst = std::max(worst, std::abs(err(i)) / scale);
  }
  r.feasible = true;
  r.y = std::move(ynew);
  r.k_last = std::move(k7);
  r.err = worst;
  return r;
}

bool rk4_step(const GeodesicRhs& f, const StateVec& y, double h, StateVec& out) {
  StateVec k1, k2, k3, k4;
  if (!f(y, k1)) return false;
  if (!f(y + 0.5 * h * k1, k2)) return false;
  if (!f(y + 0.5 * h * k2, k3)) return false;
  if (!f(y + h * k3, k4)) return false;
  out = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return out.allFinite();
}

GeodesicState to_state(const StateVec& y, int m, double s) { return {y.head(m), y.tail(m), s}; }

std::mutex g_observer_mutex;
std::shared_ptr<const std::function<void(const Trajectory&)>> g_observer;

void finalize(const MetricChart& chart, Trajectory& traj, const IntegrationOptions& options) {
  traj.initial_energy = energy(chart, traj.states.front());
  double drift = 0.0;
  for (const auto& st : traj.states) drift = std::max(drift, std::abs(energy(chart, st) - traj.initial_energy));
  traj.energy_drift = drift;
  if (options.observer) options.observer(traj);
  std::shared_ptr<const std::function<void(const Trajectory&)>> global;
  {
    std::lock_guard<std::mutex> lock(g_observer_mutex);
    global = g_observer;
  }
  if (global) (*global)(traj);
}

Trajectory integrate_fixed(const MetricChart& chart, const GeodesicRhs& f, StateVec y, double s_max,
                           const IntegrationOptions& options) {
  const int m = chart.dim();
  Trajectory traj;
  traj.states.push_back(to_state(y, m, 0.0));
  const double h = s_max / options.fixed_steps;
  for (int n = 0; n < options.fixed_steps; ++n) {
    StateVec next;
    if (!rk4_step(f, y, h, next) || !chart.in_domain(next.head(m))) {
      traj.exit_reason = ExitReason::LeftDomain;
      traj.diagnostic = "fixed-step integration left the chart domain";
      break;
    }
    y = next;
    traj.states.push_back(to_state(y, m, (n + 1) * h));
  }
  finalize(chart, traj, options);
  return traj;
}

}  // namespace

void set_global_trajectory_observer(std::function<void(const Trajectory&)> observer) {
  std::lock_guard<std::mutex> lock(g_observer_mutex);
  g_observer = observer ? std::make_shared<const std::function<void(const Trajectory&)>>(std::move(observer)) : nullptr;
}

Trajectory integrate_geodesic(const MetricChart& chart, const Vec& x0, const Vec& v0, double s_max,
                              const IntegrationOptions& options) {
  const int m = chart.dim();
  if (x0.size() != m || v0.size() != m) throw Error(ErrorCode::InvalidArgument, "state dimension mismatch");
  if (!(s_max > 0.0) || !(options.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "need s_max > 0 and tol > 0");
  if (!chart.in_domain(x0)) {
    std::ostringstream os;
    os << "initial point (" << x0.transpose() << ") outside chart '" << chart.name() << "'";
    throw Error(ErrorCode::OutOfDomain, os.str());
  }

  GeodesicRhs f(chart);
  StateVec y(2 * m);
  y.head(m) = x0;
  y.tail(m) = v0;
  if (options.fixed_steps > 0) return integrate_fixed(chart, f, y, s_max, options);

  Trajectory traj;
  traj.states.push_back(to_state(y, m, 0.0));
  StateVec k1;
  if (!f(y, k1)) {
    traj.exit_reason = ExitReason::StepFailure;
    traj.diagnostic = "geodesic right-hand side not evaluable at the initial point";
    finalize(chart, traj, options);
    return traj;
  }

  constexpr double safety = 0.9, beta = 0.04, expo1 = 0.2 - 0.75 * beta;
  const double speed = std::max(v0.norm(), 1e-300);
  double h = std::min({s_max, options.max_step, 0.05 * (1.0 + x0.norm()) / speed});
  double err_old = 1e-4;
  bool last_rejected = false;
  double s = 0.0;
  int steps = 0;

  while (s < s_max) {
    if (++steps > options.max_steps) {
      traj.exit_reason = ExitReason::StepFailure;
      traj.diagnostic = "maximum number of steps exceeded";
      break;
    }
    // Absorbs round-off remainders instead of taking a sliver step at the end.
    const bool final_step = h >= (s_max - s) - 1e-12 * s_max;
    if (final_step) h = s_max - s;
    if (h <= 1e-14 * (1.0 + std::abs(s))) {
      traj.exit_reason = ExitReason::StepFailure;
      traj.diagnostic = "step size underflow at s = " + std::to_string(s);
      break;
    }

    StepResult step = dopri_step(f, y, k1, h, options.tol, chart);

    if (!step.feasible) {
      // Bracket the exit: largest feasible step within kBracketTol.
      double lo = 0.0, hi = h;
      StepResult best;
      bool inaccurate = false;
      while (hi - lo > kBracketTol) {
        const double mid = 0.5 * (lo + hi);
        StepResult trial = dopri_step(f, y, k1, mid, options.tol, chart);
        if (trial.feasible && trial.err > 1.0) {
          inaccurate = true;
          break;
        }
        if (trial.feasible) {
          lo = mid;
          best = std::move(trial);
        } else {
          hi = mid;
        }
      }
      if (inaccurate) {
        // The crossing is further than an accurate step reaches; retry smaller.
        h *= 0.25;
        last_rejected = true;
        continue;
      }
      if (best.feasible) {
        s += lo;
        y = best.y;
        traj.states.push_back(to_state(y, m, s));
      }
      traj.exit_reason = ExitReason::LeftDomain;
      traj.diagnostic = "left chart domain near s = " + std::to_string(s + 0.5 * (hi - lo));
      break;
    }

    if (step.err <= 1.0) {
      s = final_step ? s_max : s + h;
      y = step.y;
      k1 = step.k_last;
      traj.states.push_back(to_state(y, m, s));
      const double err = std::max(step.err, 1e-10);
      double fac = safety * std::pow(err, -expo1) * std::pow(err_old, beta);
      fac = std::clamp(fac, 0.2, 10.0);
      double h_new = h * fac;
      if (last_rejected) h_new = std::min(h_new, h);
      err_old = std::max(step.err, 1e-4);
      last_rejected = false;
      h = std::min(h_new, options.max_step);
    } else {
      h *= std::max(0.2, safety * std::pow(step.err, -0.2));
      last_rejected = true;
    }
  }

  finalize(chart, traj, options);
  return traj;
}

Vec exp_map(const MetricChart& chart, const Vec& p, const Vec& v, const IntegrationOptions& options) {
  Trajectory traj = integrate_geodesic(chart, p, v, 1.0, options);
  if (traj.exit_reason == ExitReason::LeftDomain) {
    throw LeftDomainError("exp_map: " + traj.diagnostic, traj.back());
  }
  if (traj.exit_reason == ExitReason::StepFailure) throw Error(ErrorCode::StepFailure, traj.diagnostic);
  return traj.back().x;
}

BvpResult solve_bvp(const MetricChart& chart, const Vec& p, const Vec& q, const Region& region, const Vec& v_guess,
                    const BvpOptions& options) {
  const int m = chart.dim();
  if (!v_guess.allFinite()) throw Error(ErrorCode::InvalidArgument, "solve_bvp: non-finite velocity guess");

  auto shoot = [&](const Vec& v, Vec& residual) -> bool {
    Trajectory t = integrate_geodesic(chart, p, v, 1.0, options.integration);
    if (!t.completed()) return false;
    residual = t.back().x - q;
    return residual.allFinite();
  };

  Vec v = v_guess;
  Vec res;
  if (!shoot(v, res)) throw Error(ErrorCode::NotFound, "solve_bvp: initial guess does not reach parameter 1");
  double norm = res.norm();
  int iter = 0;
  for (; iter < options.max_iterations && norm > options.residual_tol; ++iter) {
    Mat jac(m, m);
    for (int j = 0; j < m; ++j) {
      double h = options.fd_step * std::max(1.0, v.cwiseAbs().maxCoeff());
      Vec vp = v;
      vp(j) += h;
      Vec rp;
      if (!shoot(vp, rp)) {
        vp(j) = v(j) - h;
        h = -h;
        if (!shoot(vp, rp)) throw Error(ErrorCode::NotFound, "solve_bvp: Jacobian probe left the domain");
      }
      jac.col(j) = (rp - res) / h;
    }
    Eigen::FullPivLU<Mat> lu(jac);
    if (!lu.isInvertible()) throw Error(ErrorCode::NotFound, "solve_bvp: singular shooting Jacobian");
    const Vec delta = -lu.solve(res);

    double lambda = 1.0;
    bool improved = false;
    for (int k = 0; k <= options.max_halvings; ++k, lambda *= 0.5) {
      Vec trial_v = v + lambda * delta;
      Vec trial_res;
      if (shoot(trial_v, trial_res) && trial_res.norm() < norm) {
        v = trial_v;
        res = trial_res;
        norm = res.norm();
        improved = true;
        break;
      }
    }
    if (!improved) {
      std::ostringstream os;
      os << "solve_bvp: damping exhausted after " << iter << " iterations, residual " << norm;
      throw Error(ErrorCode::NotFound, os.str());
    }
  }
  if (norm > options.residual_tol) {
    std::ostringstream os;
    os << "solve_bvp: no convergence in " << options.max_iterations << " iterations, residual " << norm;
    throw Error(ErrorCode::NotFound, os.str());
  }

  IntegrationOptions grid = options.integration;
  grid.max_step = std::min(grid.max_step, 1.0 / std::max(1, options.grid_steps));
  BvpResult out;
  out.trajectory = integrate_geodesic(chart, p, v, 1.0, grid);
  out.velocity = v;
  out.residual = norm;
  out.iterations = iter;
  out.interior_ok = true;
  for (const auto& st : out.trajectory.states) {
    if (!region.contains(st.x)) {
      out.interior_ok = false;
      break;
    }
  }
  return out;
}

void write_trajectory_csv(std::ostream& os, const MetricChart& chart, const Trajectory& trajectory) {
  const int m = chart.dim();
  os << "s";
  for (int i = 0; i < m; ++i) os << ",x" << (i + 1);
  for (int i = 0; i < m; ++i) os << ",v" << (i + 1);
  os << ",g_vv\n";
  os << std::setprecision(17);
  for (const auto& st : trajectory.states) {
    os << st.s;
    for (int i = 0; i < m; ++i) os << "," << st.x(i);
    for (int i = 0; i < m; ++i) os << "," << st.v(i);
    os << "," << energy(chart, st) << "\n";
  }
}

}  // namespace semiconvex
