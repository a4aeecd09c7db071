#include "semiconvex/geodesic.hpp"
#include "semiconvex/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace semiconvex;

namespace {

Vec polar_to_cartesian(const Vec& p) { return make_vec({p(0) * std::cos(p(1)), p(0) * std::sin(p(1))}); }

// Pushforward of a Cartesian velocity to polar coordinates at polar point p.
Vec polar_velocity(const Vec& p, const Vec& vc) {
  const Vec c = polar_to_cartesian(p);
  const double r = p(0);
  return make_vec({(c(0) * vc(0) + c(1) * vc(1)) / r, (c(0) * vc(1) - c(1) * vc(0)) / (r * r)});
}

double drift_budget(double tol, double g0) { return 10.0 * tol * (1.0 + std::abs(g0)); }

}  // namespace

TEST(Integrate, MinkowskiStraightLine) {
  const auto chart = metrics::minkowski(4);
  const Vec v0 = make_vec({1.0, 0.5, 0.0, 0.0});
  const auto traj = integrate_geodesic(chart, Vec::Zero(4), v0, 2.0);
  ASSERT_TRUE(traj.completed());
  for (const auto& st : traj.states) EXPECT_LE((st.x - st.s * v0).norm(), 1e-14);
  EXPECT_DOUBLE_EQ(traj.back().s, 2.0);
  EXPECT_LE(traj.energy_drift, 1e-15);
}

TEST(Integrate, PolarChartMatchesCartesianLine) {
  const auto chart = metrics::euclidean_polar();
  const Vec x0 = make_vec({1.0, 0.0});
  const Vec v0 = polar_velocity(x0, make_vec({0.0, 1.0}));
  const auto traj = integrate_geodesic(chart, x0, v0, 1.0);
  ASSERT_TRUE(traj.completed());
  for (const auto& st : traj.states) {
    const Vec c = polar_to_cartesian(st.x);
    EXPECT_LE((c - make_vec({1.0, st.s})).norm(), 1e-8);
  }
  EXPECT_LE((polar_to_cartesian(traj.back().x) - make_vec({1.0, 1.0})).norm(), 1e-8);
}

TEST(Integrate, PhotonSphereOrbit) {
  const double M = 1.0, r = 3.0 * M;
  const auto chart = metrics::schwarzschild(M);
  // Null circular orbit: f (v^t)^2 = r^2 (v^phi)^2 with f = 1/3.
  const double vt = 1.0;
  const double vphi = std::sqrt(1.0 - 2.0 * M / r) * vt / r;
  const Vec x0 = make_vec({0.0, r, std::numbers::pi / 2, 0.0});
  const Vec v0 = make_vec({vt, 0.0, 0.0, vphi});
  const double s_rev = 2.0 * std::numbers::pi / vphi;
  IntegrationOptions opts;
  opts.max_step = s_rev / 256;
  const auto traj = integrate_geodesic(chart, x0, v0, s_rev, opts);
  ASSERT_TRUE(traj.completed()) << traj.diagnostic;
  double worst = 0.0;
  for (const auto& st : traj.states) worst = std::max(worst, std::abs(st.x(1) - r));
  EXPECT_LE(worst, 1e-6);
  EXPECT_NEAR(traj.back().x(3), 2.0 * std::numbers::pi, 1e-5);
}

TEST(Integrate, GridStrictlyIncreasing) {
  const auto chart = metrics::schwarzschild(1.0);
  const auto traj = integrate_geodesic(chart, make_vec({0, 6, 1.2, 0}), make_vec({1, 0.1, 0.02, 0.05}), 5.0);
  for (std::size_t i = 1; i < traj.states.size(); ++i) EXPECT_GT(traj.states[i].s, traj.states[i - 1].s);
}

TEST(Integrate, EnergyConservationProperty) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto schw = metrics::schwarzschild(1.0);
  const auto polar = metrics::euclidean_polar();
  const double tol = 1e-9;
  IntegrationOptions opts;
  opts.tol = tol;
  for (int k = 0; k < 40; ++k) {
    const Vec x = make_vec({0.0, 5.0 + 2 * u(rng), 1.5 + 0.5 * u(rng), u(rng)});
    const Vec v = make_vec({1.2 + 0.3 * u(rng), 0.2 * u(rng), 0.05 * u(rng), 0.05 * u(rng)});
    const auto t = integrate_geodesic(schw, x, v, 2.0, opts);
    ASSERT_TRUE(t.completed());
    EXPECT_LE(t.energy_drift, drift_budget(tol, t.initial_energy));
    const Vec y = make_vec({1.5 + 0.5 * u(rng), u(rng)});
    const auto tp = integrate_geodesic(polar, y, make_vec({0.3 * u(rng), 0.3 * u(rng)}), 1.0, opts);
    if (tp.completed()) {
      EXPECT_LE(tp.energy_drift, drift_budget(tol, tp.initial_energy));
    }
  }
}

TEST(Integrate, AffineReparametrization) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto chart = metrics::schwarzschild(1.0);
  for (int k = 0; k < 20; ++k) {
    const Vec x = make_vec({0.0, 6.0 + u(rng), 1.5 + 0.3 * u(rng), u(rng)});
    const Vec v = make_vec({1.0 + 0.2 * u(rng), 0.1 * u(rng), 0.03 * u(rng), 0.03 * u(rng)});
    const auto a = integrate_geodesic(chart, x, v, 2.0);
    const auto b = integrate_geodesic(chart, x, 2.0 * v, 1.0);
    EXPECT_LE((a.back().x - b.back().x).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Integrate, LeavesDomainAndBracketsExit) {
  // Straight radial line in the polar chart hits r = 0.
  const auto chart = metrics::euclidean_polar();
  const auto traj = integrate_geodesic(chart, make_vec({1.0, 0.3}), make_vec({-1.0, 0.0}), 3.0);
  EXPECT_EQ(traj.exit_reason, ExitReason::LeftDomain);
  // det g = r^2 falls under the degeneracy cutoff at r = 1e-6.
  EXPECT_NEAR(traj.back().s, 1.0 - 1e-6, 1e-9);
  EXPECT_FALSE(traj.diagnostic.empty());
}

TEST(Integrate, OutOfDomainStartThrows) {
  EXPECT_THROW(integrate_geodesic(metrics::schwarzschild(1.0), make_vec({0, 1, 1, 0}), make_vec({1, 0, 0, 0}), 1.0),
               Error);
}

TEST(Integrate, FixedStepFallbackAgrees) {
  const auto chart = metrics::euclidean_polar();
  const Vec x0 = make_vec({1.0, 0.0});
  const Vec v0 = polar_velocity(x0, make_vec({0.3, 1.0}));
  IntegrationOptions fixed;
  fixed.fixed_steps = 400;
  const auto a = integrate_geodesic(chart, x0, v0, 1.0, fixed);
  ASSERT_TRUE(a.completed());
  EXPECT_EQ(a.states.size(), 401u);
  EXPECT_LE((polar_to_cartesian(a.back().x) - make_vec({1.3, 1.0})).norm(), 1e-9);
}

TEST(Integrate, ObserverSeesEveryTrajectory) {
  int calls = 0;
  IntegrationOptions opts;
  opts.observer = [&](const Trajectory&) { ++calls; };
  integrate_geodesic(metrics::minkowski(2), Vec::Zero(2), make_vec({1, 0}), 1.0, opts);
  exp_map(metrics::minkowski(2), Vec::Zero(2), make_vec({1, 0}), opts);
  EXPECT_EQ(calls, 2);
}

TEST(ExpMap, ZeroVectorIsIdentity) {
  const Vec p = make_vec({0.0, 5.0, 1.0, 0.3});
  EXPECT_LE((exp_map(metrics::schwarzschild(1.0), p, Vec::Zero(4)) - p).norm(), 1e-15);
}

TEST(ExpMap, MinkowskiNull) {
  const Vec q = exp_map(metrics::minkowski(4), Vec::Zero(4), make_vec({1, 1, 0, 0}));
  EXPECT_LE((q - make_vec({1, 1, 0, 0})).norm(), 1e-14);
}

TEST(ExpMap, PolarCartesianOracle) {
  const auto chart = metrics::euclidean_polar();
  const Vec p = make_vec({1.0, 0.0});
  const Vec q = exp_map(chart, p, polar_velocity(p, make_vec({1.0, 0.0})));
  EXPECT_LE((polar_to_cartesian(q) - make_vec({2.0, 0.0})).norm(), 1e-8);
}

TEST(ExpMap, SameCodePathAsIntegrate) {
  const auto chart = metrics::schwarzschild(1.0);
  const Vec p = make_vec({0.0, 5.0, 1.0, 0.3});
  const Vec v = make_vec({1.0, 0.2, 0.1, 0.05});
  EXPECT_EQ(exp_map(chart, p, v), integrate_geodesic(chart, p, v, 1.0).back().x);
}

TEST(ExpMap, LeftDomainCarriesLastState) {
  const auto chart = metrics::euclidean_polar();
  try {
    exp_map(chart, make_vec({1.0, 0.0}), make_vec({-2.0, 0.0}));
    FAIL();
  } catch (const LeftDomainError& e) {
    EXPECT_EQ(e.code(), ErrorCode::LeftDomain);
    EXPECT_NEAR(e.last_state().s, 0.5 - 0.5e-6, 1e-9);
  }
}

TEST(Bvp, DiskChord) {
  const auto chart = metrics::euclidean(2);
  const Region disk = Region::whole(2).with_constraint(expression_field("1 - x^2 - y^2", {"x", "y"}));
  const Vec p = make_vec({-0.5, 0.0}), q = make_vec({0.5, 0.0});
  const auto res = solve_bvp(chart, p, q, disk, make_vec({0.3, 0.4}));
  EXPECT_TRUE(res.interior_ok);
  EXPECT_LE(res.residual, 1e-10);
  EXPECT_LE((res.velocity - (q - p)).norm(), 1e-9);
}

TEST(Bvp, AnnulusChordInteriorFlag) {
  const auto chart = metrics::euclidean(2);
  const Region annulus = Region::whole(2)
                             .with_constraint(expression_field("x^2 + y^2 - 1", {"x", "y"}))
                             .with_constraint(expression_field("4 - x^2 - y^2", {"x", "y"}));
  // Chord along x = 1.05: closest point to the origin is (1.05, 0), still outside the hole.
  auto min_radius = [](const Vec& p, const Vec& q) {
    const Vec d = q - p;
    const double t = std::clamp(-p.dot(d) / d.squaredNorm(), 0.0, 1.0);
    return (p + t * d).norm();
  };
  const Vec p1 = make_vec({1.05, 0.1}), q1 = make_vec({1.05, -0.1});
  ASSERT_NEAR(min_radius(p1, q1), 1.05, 1e-15);
  EXPECT_TRUE(solve_bvp(chart, p1, q1, annulus, q1 - p1).interior_ok);
  // Wider angular separation at the same radius dips through the hole.
  const Vec p2 = 1.05 * make_vec({std::cos(0.5), std::sin(0.5)});
  const Vec q2 = 1.05 * make_vec({std::cos(0.5), -std::sin(0.5)});
  ASSERT_LT(min_radius(p2, q2), 1.0);
  const auto res = solve_bvp(chart, p2, q2, annulus, q2 - p2 + make_vec({0.1, 0.0}));
  EXPECT_FALSE(res.interior_ok);
  EXPECT_LE(res.residual, 1e-10);
}

TEST(Bvp, MinkowskiTimelike) {
  const auto chart = metrics::minkowski(4);
  const Vec q = make_vec({2, 1, 0, 0});
  const auto res = solve_bvp(chart, Vec::Zero(4), q, Region::whole(4), make_vec({1, 0, 0.2, 0}));
  EXPECT_LE(res.residual, 1e-10);
  EXPECT_LE((res.velocity - q).norm(), 1e-9);
  EXPECT_EQ(chart.causal_class(Vec::Zero(4), res.velocity), CausalClass::Timelike);
}

TEST(Bvp, RecoversInitialVelocity) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto chart = metrics::schwarzschild(1.0);
  for (int k = 0; k < 10; ++k) {
    const Vec p = make_vec({0.0, 6.0 + u(rng), 1.5 + 0.2 * u(rng), u(rng)});
    const Vec v = make_vec({0.3 * u(rng), 0.3 * u(rng), 0.05 * u(rng), 0.05 * u(rng)});
    const Vec q = exp_map(chart, p, v, tight_integration());
    const auto res = solve_bvp(chart, p, q, chart.domain(), q - p);
    EXPECT_LE((res.velocity - v).norm(), 1e-6 * v.norm());
  }
}

TEST(Bvp, NotFoundWhenUnreachable) {
  // The polar chart has no geodesic through the excluded origin.
  const auto chart = metrics::euclidean_polar();
  try {
    solve_bvp(chart, make_vec({1.0, 0.0}), make_vec({1.0, std::numbers::pi}), chart.domain(),
              make_vec({-3.0, 0.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotFound);
  }
}

TEST(Csv, HeaderAndRows) {
  const auto chart = metrics::minkowski(2);
  IntegrationOptions opts;
  opts.fixed_steps = 4;
  const auto traj = integrate_geodesic(chart, Vec::Zero(2), make_vec({1, 0}), 1.0, opts);
  std::ostringstream os;
  write_trajectory_csv(os, chart, traj);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "s,x1,x2,v1,v2,g_vv");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 5);
}
