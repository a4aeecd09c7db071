// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "semiconvex/catalog.hpp"
#include "semiconvex/causal_connect.hpp"
#include "semiconvex/convexity_audit.hpp"
#include "semiconvex/parallel.hpp"
#include "semiconvex/report.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace semiconvex;

namespace {

struct SurfaceCase {
  const CatalogEntry* entry;
  std::string surface;
  std::map<std::string, double> params;
  CausalFilter variant = CausalFilter::All;
  std::string expected_sign;
  bool empty_cone = false;

  LevelSetHypersurface hypersurface() const { return entry->surface(surface, params); }
  Region region() const { return entry->region(); }
  std::string label() const {
    std::string s = entry->id + ":" + surface;
    for (const auto& [k, v] : params) s += " " + k + "=" + std::to_string(v);
    return s + " [" + to_string(variant) + "]";
  }
};

std::vector<SurfaceCase> audit_cases() {
  std::vector<SurfaceCase> out;
  for (const auto& e : builtin_catalog()) {
    for (const auto& x : e.expected) {
      if (x.op != "infinitesimal_audit") continue;
      SurfaceCase c{&e, x.config.value("surface", std::string("main")), e.params,
                    causal_filter_from_string(x.config.value("variant", std::string("all"))),
                    x.expect.value("sign", std::string()), x.expect.value("empty_cone", false)};
      const json params = x.config.value("params", json::object());
      for (const auto& [k, v] : params.items()) c.params[k] = v.get<double>();
      out.push_back(std::move(c));
    }
  }
  return out;
}

// One case per distinct (entry, surface, params).
std::vector<SurfaceCase> distinct_surfaces(const std::vector<SurfaceCase>& cases) {
  std::vector<SurfaceCase> out;
  std::set<std::string> seen;
  for (const auto& c : cases) {
    SurfaceCase d = c;
    d.variant = CausalFilter::All;
    if (seen.insert(d.label()).second) out.push_back(d);
  }
  return out;
}

bool flat_case(const SurfaceCase& c) { return c.entry->id == "euclid-plane" || c.entry->id == "minkowski-hyperplanes"; }

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Triple {
  const SurfaceCase* c;
  Vec x, v;
};

std::vector<Triple> sample_triples(const std::vector<SurfaceCase>& surfaces, int points, int vectors,
                                   std::uint64_t seed) {
  std::vector<Triple> out;
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    const auto& c = surfaces[i];
    const auto chart = c.entry->chart();
    const auto h = c.hypersurface();
    const auto pts = surface_points(chart, h, c.region(), points, derive_seed(seed, i));
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const auto set = tangent_sample(chart, h, pts[k], CausalFilter::All, vectors, derive_seed(seed + 1, i * 1000 + k));
      for (const auto& s : set.samples) out.push_back({&c, s.x, s.v / s.v.norm()});
    }
  }
  return out;
}

Outcome bridge(const std::vector<Triple>& triples) {
  const double h = 1e-3;
  int checked = 0, bad = 0;
  double worst = 0.0;
  for (const auto& t : triples) {
    const auto chart = t.c->entry->chart();
    const auto surface = t.c->hypersurface();
    const auto fwd = integrate_geodesic(chart, t.x, t.v, h, tight_integration());
    const auto bwd = integrate_geodesic(chart, t.x, -t.v, h, tight_integration());
    if (!fwd.completed() || !bwd.completed()) continue;
    const double fd = (surface.value(fwd.back().x) - 2 * surface.value(t.x) + surface.value(bwd.back().x)) / (h * h);
    const double hv = hessian_phi(chart, surface, t.x, t.v, t.v);
    const double ratio = std::abs(fd - hv) / (1e-5 * (1 + std::abs(hv)));
    worst = std::max(worst, ratio);
    bad += ratio > 1.0;
    ++checked;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d triples, %d over tolerance, worst error/tol = %.3g", checked, bad, worst);
  return {checked >= 500 && bad == 0, buf};
}

Outcome hessian_vs_sff(const std::vector<Triple>& triples) {
  int checked = 0, bad = 0;
  double worst = 0.0;
  for (const auto& t : triples) {
    const auto chart = t.c->entry->chart();
    const auto surface = t.c->hypersurface();
    const auto g = grad_phi(chart, surface, t.x);
    if (g.degenerate) continue;
    const double err = std::abs(hessian_phi(chart, surface, t.x, t.v, t.v) +
                                std::sqrt(std::abs(g.norm2)) * second_fundamental_form(chart, surface, t.x, t.v));
    worst = std::max(worst, err);
    bad += err > 1e-8;
    ++checked;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d non-degenerate samples, %d over 1e-8, worst = %.3g", checked, bad, worst);
  return {checked >= 500 && bad == 0, buf};
}

bool side_matches(const std::string& sign, ProbeConclusion c) {
  if (c == ProbeConclusion::StaysOnH) return true;
  if (sign == "nonpos") return c == ProbeConclusion::ConvexSideNonpos;
  if (sign == "nonneg") return c == ProbeConclusion::ConvexSideNonneg;
  return false;
}

Outcome tangent_containment(const std::vector<SurfaceCase>& cases, const std::vector<SurfaceCase>& surfaces) {
  // Flat totally geodesic cases: tangent geodesics never leave H.
  int flat_geodesics = 0;
  double flat_worst = 0.0;
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    const auto& c = surfaces[i];
    if (!flat_case(c)) continue;
    const auto chart = c.entry->chart();
    const auto h = c.hypersurface();
    for (const auto& x : surface_points(chart, h, c.region(), 8, derive_seed(31, i))) {
      for (const auto& s : tangent_sample(chart, h, x, CausalFilter::All, 5, derive_seed(32, i)).samples) {
        const auto traj = integrate_geodesic(chart, x, s.v / s.v.norm(), 1.0);
        for (const auto& st : traj.states) flat_worst = std::max(flat_worst, std::abs(h.value(st.x)));
        ++flat_geodesics;
      }
    }
  }
  // Curved semidefinite cases: probes land on the side predicted by the verdict.
  int probes = 0, mismatched = 0;
  std::string first_bad;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    if (flat_case(c) || c.empty_cone || (c.expected_sign != "nonpos" && c.expected_sign != "nonneg")) continue;
    const auto chart = c.entry->chart();
    const auto h = c.hypersurface();
    ProbeOptions po;
    po.variant = c.variant;
    po.n_dirs = 8;
    po.probe_tol = 1e-7;
    for (const auto& x : surface_points(chart, h, c.region(), 6, derive_seed(33, i))) {
      po.seed = derive_seed(34, static_cast<std::uint64_t>(probes));
      const auto rep = local_convexity_probe(chart, h, x, po);
      probes += static_cast<int>(rep.records.size());
      if (!side_matches(c.expected_sign, rep.conclusion)) {
        ++mismatched;
        if (first_bad.empty()) first_bad = c.label() + " -> " + to_string(rep.conclusion);
      }
    }
  }
  char buf[320];
  std::snprintf(buf, sizeof buf, "flat: %d geodesics, max|phi| = %.3g; curved: %d probe geodesics, %d wrong side%s%s",
                flat_geodesics, flat_worst, probes, mismatched, first_bad.empty() ? "" : ", first: ",
                first_bad.c_str());
  return {flat_geodesics > 0 && flat_worst <= 1e-10 && probes >= 200 && mismatched == 0, buf};
}

Outcome consistency(const std::vector<SurfaceCase>& cases) {
  int events = 0, probes = 0;
  std::string first;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    AuditOptions ao;
    ao.variant = c.variant;
    ao.seed = derive_seed(41, i);
    ProbeOptions po;
    po.variant = c.variant;
    po.n_dirs = 8;
    po.seed = derive_seed(42, i);
    const auto rep = theorem_consistency(c.entry->chart(), c.hypersurface(), c.region(), 6, ao, po);
    events += static_cast<int>(rep.events.size());
    probes += static_cast<int>(rep.probes.size());
    if (!rep.events.empty() && first.empty()) first = c.label() + ": " + rep.events.front().detail;
  }
  char buf[400];
  std::snprintf(buf, sizeof buf, "%zu cases, %d probes, %d discrepancy events%s%s", cases.size(), probes, events,
                first.empty() ? "" : ", first: ", first.c_str());
  return {events == 0, buf};
}

Outcome counterexamples() {
  const auto x3 = load_catalog_entry("graph-x3");
  const auto chart = x3.chart();
  const auto hx = x3.surface();
  const auto audit_x3 = infinitesimal_audit(chart, hx, x3.region());
  ProbeOptions po;
  po.n_dirs = 0;
  po.extra_directions = {make_vec({1, 0, 0})};
  const auto probe = local_convexity_probe(chart, hx, Vec::Zero(3), po);
  bool sign_change = false;
  for (const auto& r : probe.records) sign_change = sign_change || (r.phi_max > 0 && r.phi_min < 0);
  const double s = probe.violation ? std::abs(probe.violation->s) : 0.0;

  const auto q = load_catalog_entry("graph-quartic");
  const auto hq = q.surface();
  const auto audit_q = infinitesimal_audit(q.chart(), hq, q.region());
  int violations = 0, probes = 0;
  ProbeOptions pq;
  for (const auto& x : surface_points(q.chart(), hq, q.region(), 16, 51)) {
    pq.seed = derive_seed(52, static_cast<std::uint64_t>(probes));
    const auto rep = local_convexity_probe(q.chart(), hq, x, pq);
    violations += rep.conclusion == ProbeConclusion::Violation;
    ++probes;
  }
  const auto origin = local_convexity_probe(q.chart(), hq, Vec::Zero(3), pq);
  violations += origin.conclusion == ProbeConclusion::Violation;
  ++probes;

  char buf[320];
  std::snprintf(buf, sizeof buf, "graph-x3: %s, probe %s at |s| = %.3g; graph-quartic: %s, %d probes, %d violations",
                to_string(audit_x3.sign), to_string(probe.conclusion), s, to_string(audit_q.sign), probes, violations);
  const bool pass = audit_x3.sign == Sign::Indefinite && probe.conclusion == ProbeConclusion::Violation &&
                    sign_change && s >= 1e-4 && audit_q.sign == Sign::Nonneg && violations == 0;
  return {pass, buf};
}

Outcome null_from_time_or_space() {
  struct Case {
    CatalogEntry entry;
    std::string surface;
    std::map<std::string, double> params;
  };
  std::vector<Case> cases = {{load_catalog_entry("minkowski-hyperplanes"), "timelike", {}}};
  for (double r0 : {3.25, 3.5, 4.0, 5.0, 6.0})
    cases.push_back({load_catalog_entry("schwarzschild-shell"), "main", {{"r0", r0}}});
  int implications = 0, violations = 0;
  std::string detail;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const auto chart = c.entry.chart();
    const auto h = c.entry.surface(c.surface, c.params);
    const Region region = c.entry.region();
    auto verdict = [&](CausalFilter f) {
      AuditOptions o;
      o.variant = f;
      o.seed = derive_seed(61, i);
      return infinitesimal_audit(chart, h, region, o).sign;
    };
    const Sign time = verdict(CausalFilter::Time), space = verdict(CausalFilter::Space), null = verdict(CausalFilter::Null);
    // Either sign convention: phi and -phi describe the same hypersurface.
    for (Sign s : {Sign::Nonpos, Sign::Nonneg}) {
      if (!compatible(time, s) && !compatible(space, s)) continue;
      ++implications;
      if (!compatible(null, s)) ++violations;
    }
    detail += std::string(i ? "; " : "") + (c.params.empty() ? "x=0" : "r0=" + std::to_string(c.params.at("r0")).substr(0, 4)) +
              " " + to_string(time) + "/" + to_string(null) + "/" + to_string(space);
  }
  return {implications > 0 && violations == 0,
          std::to_string(implications) + " implications, " + std::to_string(violations) +
              " violations (time/null/space: " + detail + ")"};
}

Outcome geometric() {
  const auto disk = load_catalog_entry("euclid-disk-2d");
  GeometricOptions o;
  o.n_pairs = 200;
  const auto vd = geometric_convexity_check(disk.chart(), disk.surface(), disk.region(), o);
  const auto ann = load_catalog_entry("euclid-annulus-2d");
  o.n_pairs = 60;
  const auto va = geometric_convexity_check(ann.chart(), ann.surface(), ann.region(), o);
  int near_inner = 0;
  for (const auto& w : va.touch_witnesses) near_inner += std::abs(w.x.norm() - 1.0) <= 1e-3;
  char buf[200];
  std::snprintf(buf, sizeof buf, "disk: %s with %d/%d pairs contained; annulus: %s, %d witnesses near |x| = 1",
                vd.outcome.c_str(), vd.pairs_contained, vd.pairs_solved, va.outcome.c_str(), near_inner);
  return {vd.outcome == "pass" && vd.pairs_solved >= 200 && near_inner >= 1, buf};
}

Outcome photon_sphere() {
  const auto e = load_catalog_entry("schwarzschild-shell");
  const auto chart = e.chart();
  const Region region = e.region();
  // Signed margin: the extreme on the side of the verdict, zero when both vanish.
  auto margin = [&](double r0) {
    AuditOptions o;
    o.variant = CausalFilter::Null;
    const auto v = infinitesimal_audit(chart, e.surface("main", {{"r0", r0}}), region, o);
    if (v.sign == Sign::Nonpos) return v.margin_min;
    if (v.sign == Sign::Nonneg) return v.margin_max;
    return 0.0;
  };
  double lo = 2.9, hi = 3.1;
  const double mlo = margin(lo), mhi = margin(hi);
  if (!(mlo < 0 && mhi > 0)) return {false, "no sign change on [2.9, 3.1]"};
  int steps = 0;
  double mid = 0.5 * (lo + hi);
  while (hi - lo > 1e-3) {
    mid = 0.5 * (lo + hi);
    const double m = margin(mid);
    ++steps;
    if (m == 0.0) break;
    (m < 0 ? lo : hi) = mid;
    mid = 0.5 * (lo + hi);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "null margin %.3g at 2.9, %.3g at 3.1; crossing at r0 = %.5f after %d bisections", mlo,
                mhi, mid, steps);
  return {std::abs(mid - 3.0) <= 0.05, buf};
}

Outcome flat_time_separation() {
  const auto e = load_catalog_entry("minkowski-4d");
  const auto chart = e.chart();
  const Region omega = e.region();
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-1, 1);
  int ok = 0;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Vec p = make_vec({u(rng), u(rng), u(rng), u(rng)});
    Vec dx = make_vec({u(rng), u(rng), u(rng)});
    const double dt = dx.norm() * (1.0 + 0.5 * (1 + u(rng))) + 0.05;
    Vec q = p;
    q(0) += dt;
    q.tail(3) += dx;
    const auto r = max_causal_geodesic(chart, omega, p, q);
    const double tau = std::sqrt(dt * dt - dx.squaredNorm());
    const double rel = std::abs(r.length - tau) / tau;
    worst = std::max(worst, rel);
    ok += r.status == SearchStatus::MaximizerFound && r.interior_ok && rel <= 1e-6;
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "%d/50 pairs within 1e-6, worst relative error %.3g", ok, worst);
  return {ok == 50, buf};
}

Outcome determinism() {
  int same = 0, total = 0;
  std::string first;
  for (const auto& e : builtin_catalog()) {
    RunConfig a;
    a.entry = e.id;
    a.seed = 2024;
    a.workers = 1;
    RunConfig b = a;
    b.workers = 0;
    auto da = strip_timing(run_audit(a).document);
    auto db = strip_timing(run_audit(b).document);
    da["config"].erase("workers");
    db["config"].erase("workers");
    ++total;
    if (da.dump() == db.dump()) {
      ++same;
    } else if (first.empty()) {
      first = e.id;
    }
  }
  return {same == total, std::to_string(same) + "/" + std::to_string(total) + " reports identical modulo timing" +
                             (first.empty() ? "" : ", first difference: " + first)};
}

struct EnergyLog {
  std::mutex mu;
  long count = 0;
  long violations = 0;
  double worst = 0.0;
};

void print(int id, const char* name, const Outcome& o, int& failures) {
  std::printf("%s %2d %-42s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
  failures += !o.pass;
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  EnergyLog energy_log;
  set_global_trajectory_observer([&](const Trajectory& t) {
    const double ratio = t.energy_drift / (10 * 1e-9 * (1 + std::abs(t.initial_energy)));
    std::lock_guard<std::mutex> lock(energy_log.mu);
    ++energy_log.count;
    energy_log.violations += ratio > 1.0;
    energy_log.worst = std::max(energy_log.worst, ratio);
  });

  int failures = 0;
  const auto cases = audit_cases();
  const auto surfaces = distinct_surfaces(cases);
  const auto triples = sample_triples(surfaces, 8, 5, 7);
  print(1, "geodesic second derivative equals H_phi", bridge(triples), failures);
  print(2, "H_phi(v,v) = -|grad phi| Pi(v,v)", hessian_vs_sff(triples), failures);
  print(3, "tangent geodesics stay on the predicted side", tangent_containment(cases, surfaces), failures);
  print(4, "infinitesimal audit agrees with local probes", consistency(cases), failures);
  print(5, "counterexample detection", counterexamples(), failures);
  print(6, "time or space convexity implies null", null_from_time_or_space(), failures);
  print(7, "geometric convexity of disk and annulus", geometric(), failures);
  print(8, "photon sphere transition", photon_sphere(), failures);
  print(9, "flat time separation", flat_time_separation(), failures);
  print(10, "reports deterministic modulo timing", determinism(), failures);

  set_global_trajectory_observer(nullptr);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%ld trajectories, %ld over 10 tol (1 + |g(v,v)|), worst ratio %.3g", energy_log.count,
                energy_log.violations, energy_log.worst);
  print(11, "energy conservation along every geodesic", {energy_log.count > 0 && energy_log.violations == 0, buf},
        failures);

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d/11 criteria passed in %.1f s\n", 11 - failures, secs);
  return failures == 0 ? 0 : 1;
}
