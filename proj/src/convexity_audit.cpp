#include "semiconvex/convexity_audit.hpp"

#include "semiconvex/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

namespace semiconvex {

const char* to_string(Notion n) {
  switch (n) {
    case Notion::Infinitesimal: return "infinitesimal";
    case Notion::Local: return "local";
    case Notion::Geometric: return "geometric";
  }
  return "?";
}

const char* to_string(Sign s) {
  switch (s) {
    case Sign::Nonneg: return "nonneg";
    case Sign::Nonpos: return "nonpos";
    case Sign::BothZero: return "both_zero";
    case Sign::Indefinite: return "indefinite";
  }
  return "?";
}

Sign sign_from_string(const std::string& s) {
  if (s == "nonneg") return Sign::Nonneg;
  if (s == "nonpos") return Sign::Nonpos;
  if (s == "both_zero") return Sign::BothZero;
  if (s == "indefinite") return Sign::Indefinite;
  throw Error(ErrorCode::InvalidArgument, "unknown sign '" + s + "'");
}

bool semidefinite(Sign s) { return s != Sign::Indefinite; }

bool compatible(Sign verdict, Sign expected) {
  if (verdict == expected) return true;
  // A vanishing form is semidefinite of either sign.
  return verdict == Sign::BothZero && (expected == Sign::Nonneg || expected == Sign::Nonpos);
}

const char* to_string(ProbeConclusion c) {
  switch (c) {
    case ProbeConclusion::ConvexSideNonpos: return "convex_side_nonpos";
    case ProbeConclusion::ConvexSideNonneg: return "convex_side_nonneg";
    case ProbeConclusion::StaysOnH: return "stays_on_H";
    case ProbeConclusion::Violation: return "violation";
    case ProbeConclusion::Inconclusive: return "inconclusive";
  }
  return "?";
}

Sign classify_sign(double min_value, double max_value, double tol) {
  const bool neg = min_value < -tol;
  const bool pos = max_value > tol;
  if (neg && pos) return Sign::Indefinite;
  if (neg) return Sign::Nonpos;
  if (pos) return Sign::Nonneg;
  return Sign::BothZero;
}

namespace {

constexpr std::uint64_t kTangentStream = 0x7461'6e67'656e'7473ULL;
constexpr std::uint64_t kProbeStream = 0x7072'6f62'6573'0000ULL;

double safe_phi(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& x) {
  if (!chart.in_domain(x)) return std::numeric_limits<double>::quiet_NaN();
  return surface.value(x);
}

std::optional<Vec> find_surface_point(const MetricChart& chart, const LevelSetHypersurface& surface,
                                      const Region& region, std::mt19937_64& rng) {
  constexpr int kScan = 16;
  for (int attempt = 0; attempt < 200; ++attempt) {
    const Vec a = region.sample(rng);
    const Vec b = region.sample(rng);
    auto at = [&](double t) -> Vec { return a + t * (b - a); };
    std::array<double, kScan> f{};
    for (int k = 0; k < kScan; ++k) f[k] = safe_phi(chart, surface, at(k / double(kScan - 1)));
    int bracket = -1;
    for (int k = 0; k + 1 < kScan; ++k)
      if (std::isfinite(f[k]) && std::isfinite(f[k + 1]) && f[k] * f[k + 1] <= 0.0) {
        bracket = k;
        break;
      }
    if (bracket < 0) continue;

    // Illinois variant of regula falsi on the parameter t.
    double t0 = bracket / double(kScan - 1), t1 = (bracket + 1) / double(kScan - 1);
    double f0 = f[bracket], f1 = f[bracket + 1];
    double t = f0 == 0.0 ? t0 : t1;
    double ft = f0 == 0.0 ? f0 : f1;
    for (int it = 0; it < 60 && std::abs(ft) > 1e-12 && f0 != f1; ++it) {
      t = t1 - f1 * (t1 - t0) / (f1 - f0);
      ft = safe_phi(chart, surface, at(t));
      if (!std::isfinite(ft)) break;
      if (ft * f1 < 0.0) {
        t0 = t1;
        f0 = f1;
      } else {
        f0 *= 0.5;
      }
      t1 = t;
      f1 = ft;
    }
    const Vec x = at(t);
    if (!std::isfinite(ft) || !region.contains(x) || !chart.in_domain(x)) continue;
    if (!surface.on_surface(x)) continue;
    if (!(surface.differential(x).norm() > surface.grad_tol())) continue;
    return x;
  }
  return std::nullopt;
}

struct PointAudit {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  Witness at_min, at_max;
  int samples = 0;
  bool degenerate = false;
  std::string diagnostic;
};

void consider(PointAudit& pa, const Vec& x, const Vec& v, double value) {
  ++pa.samples;
  if (value < pa.min) {
    pa.min = value;
    pa.at_min = {x, v, value, 0.0};
  }
  if (value > pa.max) {
    pa.max = value;
    pa.at_max = {x, v, value, 0.0};
  }
}

PointAudit audit_point(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& x,
                       const AuditOptions& options, std::uint64_t seed) {
  PointAudit pa;
  const GradientInfo info = grad_phi(chart, surface, x);
  pa.degenerate = info.degenerate;
  const Mat hm = hessian_matrix(chart, surface, x);
  const auto set = tangent_sample(chart, surface, x, options.variant, options.n_vectors, seed);
  pa.diagnostic = set.diagnostic;
  for (const auto& s : set.samples) consider(pa, x, s.v, s.v.dot(hm * s.v));
  if (options.variant == CausalFilter::All && options.eigen_strengthening) {
    const Mat basis = tangent_basis(info.differential);
    if (basis.cols() > 0) {
      const Mat restricted = basis.transpose() * hm * basis;
      Eigen::SelfAdjointEigenSolver<Mat> es(restricted);
      for (Eigen::Index k : {Eigen::Index(0), es.eigenvalues().size() - 1}) {
        Vec v = basis * es.eigenvectors().col(k);
        v /= v.norm();
        consider(pa, x, v, v.dot(hm * v));
      }
    }
  }
  return pa;
}

}  // namespace

std::vector<Vec> surface_points(const MetricChart& chart, const LevelSetHypersurface& surface, const Region& region,
                                int count, std::uint64_t seed, int workers) {
  std::vector<std::optional<Vec>> found(static_cast<std::size_t>(std::max(count, 0)));
  parallel_for(count, workers, [&](int i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    found[static_cast<std::size_t>(i)] = find_surface_point(chart, surface, region, rng);
  });
  std::vector<Vec> out;
  for (auto& f : found)
    if (f) out.push_back(std::move(*f));
  if (out.empty())
    throw Error(ErrorCode::NoSurfacePoints, "no point of phi = 0 found in " + region.describe());
  return out;
}

ConvexityVerdict infinitesimal_audit(const MetricChart& chart, const LevelSetHypersurface& surface,
                                     const Region& region, const AuditOptions& options) {
  ConvexityVerdict verdict;
  verdict.notion = Notion::Infinitesimal;
  verdict.variant = options.variant;
  verdict.seed = options.seed;
  verdict.audit_tol = 2e-9 * options.tol_scale;  // 1e-9 (1 + |v|^2) for unit v

  const std::vector<Vec> points = surface_points(chart, surface, region, options.n_points, options.seed, options.workers);
  if (static_cast<int>(points.size()) < options.n_points)
    verdict.diagnostics.push_back("found " + std::to_string(points.size()) + " of " +
                                  std::to_string(options.n_points) + " surface points");

  std::vector<PointAudit> per_point(points.size());
  parallel_for(static_cast<int>(points.size()), options.workers, [&](int i) {
    per_point[static_cast<std::size_t>(i)] =
        audit_point(chart, surface, points[static_cast<std::size_t>(i)], options,
                    derive_seed(options.seed ^ kTangentStream, static_cast<std::uint64_t>(i)));
  });

  PointAudit total;
  int empty_points = 0;
  std::string first_empty;
  for (const auto& pa : per_point) {
    verdict.samples_used += pa.samples;
    verdict.degenerate_points += pa.degenerate ? 1 : 0;
    if (pa.samples == 0) {
      ++empty_points;
      if (first_empty.empty()) first_empty = pa.diagnostic;
      continue;
    }
    if (pa.min < total.min) {
      total.min = pa.min;
      total.at_min = pa.at_min;
    }
    if (pa.max > total.max) {
      total.max = pa.max;
      total.at_max = pa.at_max;
    }
  }
  verdict.points_used = static_cast<int>(points.size());
  if (verdict.samples_used == 0) {
    verdict.empty_cone = true;
    verdict.sign = Sign::BothZero;
    verdict.diagnostics.push_back("EmptyCone: " + first_empty);
    return verdict;
  }
  if (empty_points > 0)
    verdict.diagnostics.push_back(std::to_string(empty_points) + " points had no " + to_string(options.variant) +
                                  "-variant tangent vectors");
  if (verdict.degenerate_points > 0)
    verdict.diagnostics.push_back(std::to_string(verdict.degenerate_points) +
                                  " degenerate points audited through H_phi directly");

  verdict.margin_min = total.min;
  verdict.margin_max = total.max;
  verdict.witness_min = total.at_min;
  verdict.witness_max = total.at_max;
  verdict.sign = classify_sign(total.min, total.max, verdict.audit_tol);
  switch (verdict.sign) {
    case Sign::Nonpos: verdict.witness = total.at_max; break;
    case Sign::Nonneg: verdict.witness = total.at_min; break;
    case Sign::BothZero:
      verdict.witness = std::abs(total.min) > std::abs(total.max) ? total.at_min : total.at_max;
      break;
    case Sign::Indefinite:
      verdict.witness = std::abs(total.min) < std::abs(total.max) ? total.at_min : total.at_max;
      break;
  }
  return verdict;
}

namespace {

ProbeRecord probe_direction(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& p0,
                            const Vec& v, double radius, const ProbeOptions& options, double& grid_step) {
  ProbeRecord rec;
  rec.v = v;
  rec.phi_max = -std::numeric_limits<double>::infinity();
  rec.phi_min = std::numeric_limits<double>::infinity();
  IntegrationOptions io;
  io.tol = options.integration_tol;
  io.max_step = radius / options.grid_steps;
  grid_step = 0.0;
  for (double dir : {1.0, -1.0}) {
    const Trajectory t = integrate_geodesic(chart, p0, dir * v, radius, io);
    rec.truncated = rec.truncated || !t.completed();
    rec.energy_drift = std::max(rec.energy_drift, t.energy_drift);
    for (std::size_t k = 0; k < t.states.size(); ++k) {
      const auto& st = t.states[k];
      if (k > 0) grid_step = std::max(grid_step, st.s - t.states[k - 1].s);
      const double f = surface.value(st.x);
      if (f > rec.phi_max) {
        rec.phi_max = f;
        rec.s_at_max = dir * st.s;
      }
      if (f < rec.phi_min) {
        rec.phi_min = f;
        rec.s_at_min = dir * st.s;
      }
    }
  }
  rec.sign = classify_sign(rec.phi_min, rec.phi_max, options.probe_tol);
  return rec;
}

}  // namespace

ProbeReport local_convexity_probe(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& p0,
                                  const ProbeOptions& options) {
  ProbeReport report;
  report.p0 = p0;
  report.variant = options.variant;
  report.seed = options.seed;
  report.probe_tol = options.probe_tol;

  const GradientInfo info = grad_phi(chart, surface, p0);
  const auto set = tangent_sample(chart, surface, p0, options.variant, options.n_dirs, options.seed ^ kProbeStream);
  if (!set.diagnostic.empty()) report.diagnostics.push_back(set.diagnostic);
  std::vector<Vec> dirs;
  for (const auto& s : set.samples) dirs.push_back(s.v);
  for (Vec v : options.extra_directions) {
    v -= (info.differential.dot(v) / info.differential.squaredNorm()) * info.differential;
    if (v.norm() > 0.0) dirs.push_back(v / v.norm());
  }
  if (dirs.empty()) {
    report.conclusion = ProbeConclusion::Inconclusive;
    report.diagnostics.push_back("no tangent directions to probe");
    return report;
  }

  double radius = options.radius > 0.0 ? options.radius
                                       : 0.1 * std::min(1.0, chart.domain().distance_to_box_boundary(p0));
  std::vector<ProbeRecord> records(dirs.size());
  std::vector<double> steps(dirs.size());
  for (int h = 0;; ++h) {
    parallel_for(static_cast<int>(dirs.size()), options.workers, [&](int i) {
      const auto k = static_cast<std::size_t>(i);
      records[k] = probe_direction(chart, surface, p0, dirs[k], radius, options, steps[k]);
    });
    const bool any_truncated =
        std::any_of(records.begin(), records.end(), [](const ProbeRecord& r) { return r.truncated; });
    if (!any_truncated || h >= options.max_halvings) {
      report.halvings = h;
      report.truncated = any_truncated;
      break;
    }
    radius *= 0.5;
  }
  report.radius = radius;
  report.grid_step = *std::max_element(steps.begin(), steps.end());
  if (report.truncated) report.diagnostics.push_back("LeftDomain: some probe geodesics were truncated");

  bool all_nonpos = true, all_nonneg = true;
  for (const auto& r : records) {
    all_nonpos = all_nonpos && r.phi_max <= options.probe_tol;
    all_nonneg = all_nonneg && r.phi_min >= -options.probe_tol;
  }
  if (all_nonpos && all_nonneg) report.conclusion = ProbeConclusion::StaysOnH;
  else if (all_nonpos) report.conclusion = ProbeConclusion::ConvexSideNonpos;
  else if (all_nonneg) report.conclusion = ProbeConclusion::ConvexSideNonneg;
  else {
    report.conclusion = ProbeConclusion::Violation;
    // Prefer a single geodesic that crosses H; otherwise the strongest minority excursion.
    const ProbeRecord* best = nullptr;
    double best_score = -1.0;
    for (const auto& r : records) {
      if (r.sign != Sign::Indefinite) continue;
      const double score = std::min(r.phi_max, -r.phi_min);
      if (score > best_score) {
        best_score = score;
        best = &r;
      }
    }
    if (best) {
      const bool max_minor = best->phi_max < -best->phi_min;
      report.violation = Witness{p0, best->v, max_minor ? best->phi_max : best->phi_min,
                                 max_minor ? best->s_at_max : best->s_at_min};
    } else {
      int n_pos = 0, n_neg = 0;
      for (const auto& r : records) {
        n_pos += r.phi_max > options.probe_tol;
        n_neg += r.phi_min < -options.probe_tol;
      }
      const bool pos_minor = n_pos <= n_neg;
      for (const auto& r : records) {
        const double val = pos_minor ? r.phi_max : -r.phi_min;
        if (val > best_score) {
          best_score = val;
          report.violation =
              Witness{p0, r.v, pos_minor ? r.phi_max : r.phi_min, pos_minor ? r.s_at_max : r.s_at_min};
        }
      }
    }
  }
  report.records = std::move(records);
  return report;
}

QuasiconvResult quasiconv_witness(const MetricChart& chart, const LevelSetHypersurface& surface,
                                  const Trajectory& trajectory, int side, double side_tol) {
  if (side != 1 && side != -1) throw Error(ErrorCode::InvalidArgument, "side must be +1 or -1");
  if (trajectory.states.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  constexpr double kCEps = 1e-12;
  constexpr double kMaxC = 1e6;
  QuasiconvResult out;
  out.side = side;
  out.fit_tol = 1e-9 * (1.0 + trajectory.front().v.squaredNorm());
  for (const auto& st : trajectory.states) {
    const double rho = side * surface.value(st.x);
    if (rho < -side_tol) {
      std::ostringstream os;
      os << "trajectory leaves {" << (side > 0 ? "phi >= 0" : "phi <= 0") << "} at s = " << st.s
         << " (side * phi = " << rho << ")";
      throw Error(ErrorCode::SideViolation, os.str());
    }
    const double rho_dot = side * surface.differential(st.x).dot(st.v);
    const double rho_ddot = side * hessian_phi(chart, surface, st.x, st.v, st.v);
    out.s.push_back(st.s);
    out.rho.push_back(rho);
    out.rho_dot.push_back(rho_dot);
    out.rho_ddot.push_back(rho_ddot);
    out.max_abs_rho = std::max(out.max_abs_rho, std::abs(rho));
    if (rho_ddot > out.fit_tol) {
      const double need = (rho_ddot - out.fit_tol) / (std::max(rho, 0.0) + std::abs(rho_dot) + kCEps);
      out.c = std::max(out.c, need);
    }
  }
  if (out.c > kMaxC) out.finite_c = false;
  return out;
}

namespace {

enum class PairStatus { Failed, Contained, NotContained, Touch };

struct PairResult {
  PairStatus status = PairStatus::Failed;
  Vec p, q, velocity;
  double min_phi = 0.0;
  std::optional<Witness> touch;
};

// Minimum of phi along gamma on [a, b] by golden-section search.
std::pair<double, double> golden_min(const std::function<double(double)>& f, double a, double b) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

PairResult analyze_pair(const MetricChart& chart, const LevelSetHypersurface& surface, const Region& omega,
                        const Vec& p, const Vec& q, const Vec& guess, const GeometricOptions& options) {
  PairResult out;
  out.p = p;
  out.q = q;
  BvpResult bvp;
  try {
    bvp = solve_bvp(chart, p, q, omega, guess, options.bvp);
  } catch (const Error&) {
    return out;
  }
  out.velocity = bvp.velocity;
  const auto& states = bvp.trajectory.states;
  std::vector<double> f(states.size());
  bool left_box = !bvp.trajectory.completed();
  for (std::size_t k = 0; k < states.size(); ++k) {
    f[k] = surface.value(states[k].x);
    left_box = left_box || !omega.in_box(states[k].x);
  }
  out.min_phi = *std::min_element(f.begin(), f.end());
  if (left_box || out.min_phi < -options.touch_tol) {
    out.status = PairStatus::NotContained;
    return out;
  }
  out.status = PairStatus::Contained;
  IntegrationOptions io = options.bvp.integration;
  auto phi_at = [&](double s) {
    if (s <= 0.0) return surface.value(p);
    try {
      return surface.value(integrate_geodesic(chart, p, bvp.velocity, s, io).back().x);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  for (std::size_t k = 1; k + 1 < states.size(); ++k) {
    if (!(f[k] <= f[k - 1] && f[k] <= f[k + 1])) continue;
    if (f[k] > 10.0 * options.touch_tol) continue;
    const auto [s_min, f_min] = golden_min(phi_at, states[k - 1].s, states[k + 1].s);
    out.min_phi = std::min(out.min_phi, f_min);
    if (f_min < -options.touch_tol) {
      out.status = PairStatus::NotContained;
      return out;
    }
    if (f_min <= options.touch_tol) {
      const Trajectory t = integrate_geodesic(chart, p, bvp.velocity, s_min, io);
      out.status = PairStatus::Touch;
      out.touch = Witness{t.back().x, t.back().v, f_min, s_min};
      return out;
    }
  }
  return out;
}

bool segment_inside(const Region& omega, const Vec& a, const Vec& b) {
  for (int k = 0; k <= 64; ++k)
    if (!omega.contains(a + (k / 64.0) * (b - a))) return false;
  return true;
}

// Moves the far endpoint of an escaping pair towards that of a contained pair
// until the connecting geodesic just grazes phi = 0.
std::optional<Witness> refine_touch(const MetricChart& chart, const LevelSetHypersurface& surface,
                                    const Region& omega, const PairResult& escaping, std::mt19937_64& rng,
                                    const GeometricOptions& options) {
  for (int candidate = 0; candidate < 32; ++candidate) {
    Vec q_in;
    try {
      q_in = omega.sample(rng, 1000);
    } catch (const Error&) {
      return std::nullopt;
    }
    if (!segment_inside(omega, escaping.q, q_in)) continue;
    PairResult inside = analyze_pair(chart, surface, omega, escaping.p, q_in, q_in - escaping.p, options);
    if (inside.status == PairStatus::Touch) return inside.touch;
    if (inside.status != PairStatus::Contained) continue;

    double lo = 0.0, hi = 1.0;  // lo escapes, hi is contained
    Vec v_lo = escaping.velocity, v_hi = inside.velocity;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Vec q = escaping.q + mid * (q_in - escaping.q);
      PairResult r = analyze_pair(chart, surface, omega, escaping.p, q, 0.5 * (v_lo + v_hi), options);
      if (r.status == PairStatus::Touch) return r.touch;
      if (r.status == PairStatus::Failed) break;
      if (r.status == PairStatus::NotContained) {
        lo = mid;
        v_lo = r.velocity;
      } else {
        hi = mid;
        v_hi = r.velocity;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

ConvexityVerdict geometric_convexity_check(const MetricChart& chart, const LevelSetHypersurface& surface,
                                           const Region& region, const GeometricOptions& options) {
  ConvexityVerdict verdict;
  verdict.notion = Notion::Geometric;
  verdict.seed = options.seed;
  verdict.audit_tol = options.touch_tol;
  verdict.pairs_requested = options.n_pairs;
  const Region omega = region.with_constraint(surface.field_ptr());

  std::vector<PairResult> pairs(static_cast<std::size_t>(options.n_pairs));
  parallel_for(options.n_pairs, options.workers, [&](int i) {
    std::mt19937_64 rng(derive_seed(options.seed, static_cast<std::uint64_t>(i)));
    const Vec p = omega.sample(rng);
    const Vec q = omega.sample(rng);
    pairs[static_cast<std::size_t>(i)] = analyze_pair(chart, surface, omega, p, q, q - p, options);
  });

  verdict.margin_min = std::numeric_limits<double>::infinity();
  verdict.margin_max = -std::numeric_limits<double>::infinity();
  std::vector<const PairResult*> escaping;
  for (const auto& r : pairs) {
    switch (r.status) {
      case PairStatus::Failed: ++verdict.bvp_failures; continue;
      case PairStatus::Contained: ++verdict.pairs_contained; break;
      case PairStatus::NotContained:
        ++verdict.pairs_not_contained;
        if (r.min_phi < 0.0) escaping.push_back(&r);
        break;
      case PairStatus::Touch: verdict.touch_witnesses.push_back(*r.touch); break;
    }
    ++verdict.pairs_solved;
    verdict.margin_min = std::min(verdict.margin_min, r.min_phi);
    verdict.margin_max = std::max(verdict.margin_max, r.min_phi);
  }

  if (verdict.touch_witnesses.empty() && verdict.pairs_contained > 0) {
    const int n = std::min<int>(options.refinements, static_cast<int>(escaping.size()));
    std::vector<std::optional<Witness>> refined(static_cast<std::size_t>(n));
    parallel_for(n, options.workers, [&](int i) {
      std::mt19937_64 rng(derive_seed(options.seed ^ 0x5EEDULL, static_cast<std::uint64_t>(i)));
      refined[static_cast<std::size_t>(i)] = refine_touch(chart, surface, omega, *escaping[i], rng, options);
    });
    for (auto& w : refined)
      if (w) verdict.touch_witnesses.push_back(*w);
  }

  if (verdict.pairs_solved == 0) {
    verdict.margin_min = verdict.margin_max = 0.0;
  }
  if (2 * verdict.bvp_failures > options.n_pairs) {
    verdict.outcome = "inconclusive";
    verdict.sign = Sign::BothZero;
    verdict.diagnostics.push_back("BVPFailureRate: " + std::to_string(verdict.bvp_failures) + " of " +
                                  std::to_string(options.n_pairs) + " pairs unsolved");
  } else if (!verdict.touch_witnesses.empty()) {
    verdict.outcome = "violation";
    verdict.sign = Sign::Indefinite;
    verdict.witness = verdict.touch_witnesses.front();
  } else {
    verdict.outcome = "pass";
    verdict.sign = Sign::Nonpos;
  }
  if (verdict.pairs_not_contained > 0)
    verdict.diagnostics.push_back(std::to_string(verdict.pairs_not_contained) +
                                  " connecting geodesics left the closure of Omega (not counterexamples)");
  return verdict;
}

ConsistencyReport theorem_consistency(const MetricChart& chart, const LevelSetHypersurface& surface,
                                      const Region& region, int n_probe_points, const AuditOptions& audit,
                                      const ProbeOptions& probe) {
  ConsistencyReport report;
  report.audit = infinitesimal_audit(chart, surface, region, audit);
  const std::vector<Vec> points =
      surface_points(chart, surface, region, n_probe_points, audit.seed ^ kProbeStream, audit.workers);
  const Sign sign = report.audit.sign;
  for (std::size_t i = 0; i < points.size(); ++i) {
    ProbeOptions po = probe;
    po.variant = audit.variant;
    po.seed = derive_seed(probe.seed, i);
    ProbeReport pr = local_convexity_probe(chart, surface, points[i], po);

    if (semidefinite(sign) && !report.audit.empty_cone && pr.conclusion != ProbeConclusion::Inconclusive) {
      bool ok = pr.conclusion == ProbeConclusion::StaysOnH;
      if (sign == Sign::Nonpos) ok = ok || pr.conclusion == ProbeConclusion::ConvexSideNonpos;
      if (sign == Sign::Nonneg) ok = ok || pr.conclusion == ProbeConclusion::ConvexSideNonneg;
      if (!ok)
        report.events.push_back({"forward", points[i],
                                 std::string("audit ") + to_string(sign) + " but probe reported " +
                                     to_string(pr.conclusion)});
    }
    if (pr.conclusion == ProbeConclusion::Violation) {
      std::vector<Interval> box(static_cast<std::size_t>(chart.dim()));
      const double half = 2.0 * pr.radius;
      for (int k = 0; k < chart.dim(); ++k) box[k] = {points[i](k) - half, points[i](k) + half};
      const Region near = region.intersect(Region(box)).intersect(chart.domain());
      AuditOptions ao = audit;
      ao.seed = derive_seed(audit.seed ^ 0xC0FFEEULL, i);
      try {
        ConvexityVerdict local = infinitesimal_audit(chart, surface, near, ao);
        if (local.sign != Sign::Indefinite)
          report.events.push_back({"converse", points[i],
                                   std::string("probe violation but neighborhood audit ") + to_string(local.sign)});
        report.neighborhood_audits.push_back(std::move(local));
      } catch (const Error& e) {
        report.events.push_back({"converse", points[i], std::string("neighborhood audit failed: ") + e.what()});
      }
    }
    report.probes.push_back(std::move(pr));
  }
  return report;
}

}  // namespace semiconvex
