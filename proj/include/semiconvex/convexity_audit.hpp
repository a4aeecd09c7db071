#pragma once

#include "semiconvex/geodesic.hpp"
#include "semiconvex/hypersurface.hpp"
#include "semiconvex/region.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace semiconvex {

enum class Notion { Infinitesimal, Local, Geometric };
enum class Sign { Nonneg, Nonpos, BothZero, Indefinite };

const char* to_string(Notion n);
const char* to_string(Sign s);
Sign sign_from_string(const std::string& s);

/// True when every sample value is compatible with `sign` (BothZero is
/// compatible with both semidefinite signs).
bool semidefinite(Sign s);
bool compatible(Sign verdict, Sign expected);

struct Witness {
  Vec x;
  Vec v;
  double value = 0.0;
  /// Affine parameter where the value was observed (probes only).
  double s = 0.0;
};

/// Classifies extreme values: below -tol counts negative, above +tol positive.
Sign classify_sign(double min_value, double max_value, double tol);

struct ConvexityVerdict {
  Notion notion = Notion::Infinitesimal;
  CausalFilter variant = CausalFilter::All;
  Sign sign = Sign::BothZero;
  double margin_min = 0.0;
  double margin_max = 0.0;
  double audit_tol = 0.0;
  /// Sample closest to breaking the verdict (the opposite-sign extreme when indefinite).
  std::optional<Witness> witness;
  std::optional<Witness> witness_min;
  std::optional<Witness> witness_max;
  int points_used = 0;
  int samples_used = 0;
  int degenerate_points = 0;
  std::uint64_t seed = 0;
  /// No vectors passed the causal filter anywhere: the verdict is vacuous.
  bool empty_cone = false;
  std::vector<std::string> diagnostics;

  // Geometric check bookkeeping.
  std::string outcome;
  int pairs_requested = 0;
  int pairs_solved = 0;
  int pairs_contained = 0;
  int pairs_not_contained = 0;
  int bvp_failures = 0;
  std::vector<Witness> touch_witnesses;
};

struct AuditOptions {
  int n_points = 48;
  int n_vectors = 16;
  CausalFilter variant = CausalFilter::All;
  std::uint64_t seed = 1;
  int workers = 0;
  /// Multiplies audit_tol = 1e-9 (1 + |v|^2).
  double tol_scale = 1.0;
  /// Adds the extreme eigenvectors of H_phi restricted to ker dphi (variant all only).
  bool eigen_strengthening = true;
};

/// Points with |phi| <= 1e-12 found by bracketing phi along random segments
/// between region points and refining with the Illinois secant method.
/// Throws NoSurfacePoints when nothing is found.
std::vector<Vec> surface_points(const MetricChart& chart, const LevelSetHypersurface& surface, const Region& region,
                                int count, std::uint64_t seed, int workers = 0);

ConvexityVerdict infinitesimal_audit(const MetricChart& chart, const LevelSetHypersurface& surface,
                                     const Region& region, const AuditOptions& options = {});

enum class ProbeConclusion { ConvexSideNonpos, ConvexSideNonneg, StaysOnH, Violation, Inconclusive };

const char* to_string(ProbeConclusion c);

struct ProbeRecord {
  Vec v;
  double phi_max = 0.0;
  double phi_min = 0.0;
  double s_at_max = 0.0;
  double s_at_min = 0.0;
  Sign sign = Sign::BothZero;
  bool truncated = false;
  double energy_drift = 0.0;
};

struct ProbeReport {
  Vec p0;
  CausalFilter variant = CausalFilter::All;
  std::uint64_t seed = 0;
  double radius = 0.0;
  int halvings = 0;
  /// Largest stored grid spacing in the affine parameter.
  double grid_step = 0.0;
  double probe_tol = 0.0;
  std::vector<ProbeRecord> records;
  ProbeConclusion conclusion = ProbeConclusion::Inconclusive;
  std::optional<Witness> violation;
  bool truncated = false;
  std::vector<std::string> diagnostics;
};

struct ProbeOptions {
  /// 0 selects 0.1 min(1, distance from p0 to the chart box boundary).
  double radius = 0.0;
  int n_dirs = 16;
  CausalFilter variant = CausalFilter::All;
  std::uint64_t seed = 1;
  double probe_tol = 1e-7;
  int max_halvings = 4;
  int grid_steps = 64;
  double integration_tol = 1e-9;
  /// Probed in addition to the sampled directions (projected onto ker dphi).
  std::vector<Vec> extra_directions;
  int workers = 0;
};

/// Follows tangent geodesics through p0 over s in [-radius, radius] and
/// records the extremes of phi along them. Throws NotRegular.
ProbeReport local_convexity_probe(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& p0,
                                  const ProbeOptions& options = {});

struct QuasiconvResult {
  /// Smallest c >= 0 with rho'' <= c (rho + |rho'|) + fit_tol on the grid.
  double c = 0.0;
  bool finite_c = true;
  double max_abs_rho = 0.0;
  double fit_tol = 0.0;
  int side = 1;
  std::vector<double> s, rho, rho_dot, rho_ddot;
};

/// rho = side * phi along the trajectory, rho' = dphi(v), rho'' = H_phi(v, v).
/// side = +1 checks the trajectory against {phi >= 0}, -1 against {phi <= 0}.
/// Throws SideViolation when rho < -side_tol somewhere on the grid.
QuasiconvResult quasiconv_witness(const MetricChart& chart, const LevelSetHypersurface& surface,
                                  const Trajectory& trajectory, int side = 1, double side_tol = 1e-7);

struct GeometricOptions {
  int n_pairs = 200;
  std::uint64_t seed = 1;
  double touch_tol = 1e-7;
  /// Continuation refinements between contained and escaping pairs.
  int refinements = 8;
  BvpOptions bvp;
  int workers = 0;
};

/// Omega = region ∩ {phi > 0}. Samples pairs in Omega, connects them by the
/// shooting solver and looks for connecting geodesics that stay in the closure
/// of Omega while touching phi = 0 at an interior parameter.
ConvexityVerdict geometric_convexity_check(const MetricChart& chart, const LevelSetHypersurface& surface,
                                           const Region& region, const GeometricOptions& options = {});

struct ConsistencyEvent {
  std::string direction;  // "forward" or "converse"
  Vec point;
  std::string detail;
};

struct ConsistencyReport {
  ConvexityVerdict audit;
  std::vector<ProbeReport> probes;
  std::vector<ConvexityVerdict> neighborhood_audits;
  std::vector<ConsistencyEvent> events;
};

/// Infinitesimal audit against local probes at sampled surface points: a
/// semidefinite verdict must be matched by every probe, and every probe
/// violation must show up as an indefinite audit on a box around its base point.
ConsistencyReport theorem_consistency(const MetricChart& chart, const LevelSetHypersurface& surface,
                                      const Region& region, int n_probe_points, const AuditOptions& audit,
                                      const ProbeOptions& probe);

}  // namespace semiconvex
