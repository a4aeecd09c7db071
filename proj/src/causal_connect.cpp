#include "semiconvex/causal_connect.hpp"

#include "semiconvex/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace semiconvex {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string format_vec(const Vec& x) {
  std::ostringstream os;
  os.precision(10);
  os << "(";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << ")";
  return os.str();
}

// Integral over [x0, x2] of the quadratic through three samples.
double simpson_pair(double h0, double h1, double f0, double f1, double f2) {
  return (h0 + h1) / 6.0 *
         ((2.0 - h1 / h0) * f0 + (h0 + h1) * (h0 + h1) / (h0 * h1) * f1 + (2.0 - h0 / h1) * f2);
}

// Integral over [x1, x2] of the same quadratic.
double simpson_tail(double h0, double h1, double f0, double f1, double f2) {
  return f2 * h1 * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1)) + f1 * h1 * (h1 + 3.0 * h0) / (6.0 * h0) -
         f0 * h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
}

bool all_inside(const Region& omega, const Trajectory& t) {
  return std::all_of(t.states.begin(), t.states.end(), [&](const GeodesicState& st) { return omega.contains(st.x); });
}

// Future causal check at the initial point; the quadrature repeats it along the grid.
bool future_causal(const MetricChart& chart, const Vec& x, const Vec& v, double tol) {
  const double n2 = v.squaredNorm();
  if (n2 == 0.0) return true;
  return chart.inner(x, v, v) <= tol * n2 && chart.future_pointing(x, v);
}

double checked_length(const MetricChart& chart, const Trajectory& t, double tol) {
  try {
    return lorentzian_length(chart, t, tol);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotCausal) throw;
    return kNegInf;
  }
}

struct DirectSolution {
  bool converged = false;
  bool causal = false;
  bool interior = false;
  double length = 0.0;
  int iterations = 0;
  BvpResult bvp;
};

struct Start {
  Vec direction;
  double scale = 0.0;
};

std::vector<Start> cone_starts(const MetricChart& chart, const Vec& p, const Vec& q, const CausalSearchOptions& o) {
  const int m = chart.dim();
  const Mat frame = causal_frame(chart, p);
  const int count = o.cone_directions > 0 ? o.cone_directions : default_cone_directions(m - 1);
  const Vec delta = q - p;
  std::vector<Start> starts;
  for (const Vec& a : cone_section_points(m - 1, count, o.seed)) {
    Vec coeff = Vec::Zero(m);
    coeff(0) = 1.0;
    coeff.tail(m - 1) = a;
    const Vec w = frame * coeff;
    starts.push_back({w, delta.dot(w) / w.squaredNorm()});
  }
  return starts;
}

DirectSolution solve_direct(const MetricChart& chart, const Region& omega, const Vec& p, const Vec& q,
                            const Vec& guess, const CausalSearchOptions& o) {
  DirectSolution sol;
  try {
    sol.bvp = solve_bvp(chart, p, q, omega, guess, o.bvp);
  } catch (const Error&) {
    return sol;
  }
  sol.converged = true;
  sol.iterations = sol.bvp.iterations;
  if (!future_causal(chart, p, sol.bvp.velocity, o.causal_tol)) return sol;
  const double len = checked_length(chart, sol.bvp.trajectory, o.causal_tol);
  if (len == kNegInf) return sol;
  sol.causal = true;
  sol.length = len;
  sol.interior = sol.bvp.interior_ok;
  return sol;
}

struct BrokenCandidate {
  bool valid = false;
  CausalWitness witness;
};

BrokenCandidate try_vertex(const MetricChart& chart, const Region& omega, const Vec& p, const Vec& q,
                           const Start& start, double fraction, const CausalSearchOptions& o) {
  BrokenCandidate c;
  if (start.scale <= 0.0 || fraction <= 0.0) return c;
  IntegrationOptions io = o.bvp.integration;
  io.max_step = fraction / o.bvp.grid_steps;
  Trajectory first;
  try {
    first = integrate_geodesic(chart, p, start.scale * start.direction, fraction, io);
  } catch (const Error&) {
    return c;
  }
  if (!first.completed() || !all_inside(omega, first)) return c;
  const Vec m = first.back().x;
  const double l1 = checked_length(chart, first, o.causal_tol);
  if (l1 == kNegInf) return c;
  BvpResult second;
  try {
    second = solve_bvp(chart, m, q, omega, q - m, o.bvp);
  } catch (const Error&) {
    return c;
  }
  if (!second.interior_ok || !future_causal(chart, m, second.velocity, o.causal_tol)) return c;
  const double l2 = checked_length(chart, second.trajectory, o.causal_tol);
  if (l2 == kNegInf) return c;
  c.valid = true;
  c.witness.segments = {std::move(first), std::move(second.trajectory)};
  c.witness.length = l1 + l2;
  return c;
}

std::vector<BrokenCandidate> broken_scan(const MetricChart& chart, const Region& omega, const Vec& p, const Vec& q,
                                         const std::vector<Start>& starts, const CausalSearchOptions& o) {
  const int nf = static_cast<int>(o.vertex_fractions.size());
  std::vector<BrokenCandidate> out(starts.size() * static_cast<std::size_t>(nf));
  parallel_for(static_cast<int>(out.size()), o.workers, [&](int k) {
    out[static_cast<std::size_t>(k)] = try_vertex(chart, omega, p, q, starts[static_cast<std::size_t>(k / nf)],
                                                  o.vertex_fractions[static_cast<std::size_t>(k % nf)], o);
  });
  return out;
}

// Golden-section search on the vertex fraction around the best scanned candidate.
BrokenCandidate refine_vertex(const MetricChart& chart, const Region& omega, const Vec& p, const Vec& q,
                              const Start& start, double lo, double hi, BrokenCandidate best,
                              const CausalSearchOptions& o) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  auto eval = [&](double f) {
    BrokenCandidate c = try_vertex(chart, omega, p, q, start, f, o);
    if (c.valid && c.witness.length > best.witness.length) best = c;
    return c.valid ? c.witness.length : kNegInf;
  };
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = eval(x1), f2 = eval(x2);
  for (int it = 0; it < o.golden_iterations && b - a > 1e-10; ++it) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = eval(x2);
    }
  }
  return best;
}

void check_endpoints(const Region& omega, const Vec& p, const Vec& q) {
  if (!omega.contains(p)) throw Error(ErrorCode::InvalidArgument, "p = " + format_vec(p) + " is not in the region");
  if (!omega.contains(q)) throw Error(ErrorCode::InvalidArgument, "q = " + format_vec(q) + " is not in the region");
}

bool same_point(const Vec& p, const Vec& q) { return (q - p).norm() <= 1e-14 * (1.0 + p.norm()); }

Trajectory constant_curve(const Vec& p) {
  Trajectory t;
  t.states = {{p, Vec::Zero(p.size()), 0.0}, {p, Vec::Zero(p.size()), 1.0}};
  return t;
}

}  // namespace

double lorentzian_length(const MetricChart& chart, const Trajectory& curve, double causal_tol) {
  const auto& st = curve.states;
  std::vector<double> s, f;
  s.reserve(st.size());
  f.reserve(st.size());
  int spacelike = -1, past = -1;
  double worst = 0.0;
  for (std::size_t i = 0; i < st.size(); ++i) {
    const Vec& v = st[i].v;
    const double n2 = v.squaredNorm();
    const double q = n2 == 0.0 ? 0.0 : chart.inner(st[i].x, v, v);
    if (n2 > 0.0) {
      const double excess = q / n2 - causal_tol;
      if (excess > worst) {
        worst = excess;
        spacelike = static_cast<int>(i);
      } else if (excess <= 0.0 && past < 0 && !chart.future_pointing(st[i].x, v)) {
        past = static_cast<int>(i);
      }
    }
    if (!s.empty() && st[i].s <= s.back()) continue;
    s.push_back(st[i].s);
    f.push_back(std::sqrt(std::max(0.0, -q)));
  }
  const int worst_index = spacelike >= 0 ? spacelike : past;
  const bool worst_past = spacelike < 0;
  if (worst_index >= 0) {
    const auto& w = st[static_cast<std::size_t>(worst_index)];
    std::ostringstream os;
    os.precision(10);
    os << (worst_past ? "past pointing" : "spacelike") << " velocity at s = " << w.s << ", x = " << format_vec(w.x)
       << ", g(v,v) = " << chart.inner(w.x, w.v, w.v);
    throw Error(ErrorCode::NotCausal, os.str());
  }
  const std::size_t n = s.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * (s[1] - s[0]) * (f[0] + f[1]);
  double total = 0.0;
  std::size_t i = 0;
  for (; i + 2 < n; i += 2) total += simpson_pair(s[i + 1] - s[i], s[i + 2] - s[i + 1], f[i], f[i + 1], f[i + 2]);
  if (i + 1 < n) total += simpson_tail(s[i] - s[i - 1], s[i + 1] - s[i], f[i - 1], f[i], f[i + 1]);
  return total;
}

double lorentzian_length(const MetricChart& chart, const std::vector<Trajectory>& segments, double causal_tol) {
  double total = 0.0;
  for (const auto& seg : segments) total += lorentzian_length(chart, seg, causal_tol);
  return total;
}

Mat causal_frame(const MetricChart& chart, const Vec& x) {
  if (!chart.lorentzian() || !chart.time_orientation())
    throw Error(ErrorCode::InvalidArgument, "chart '" + chart.name() + "' is not a time oriented Lorentzian chart");
  const int m = chart.dim();
  const Mat g = chart.metric_at(x);
  const Vec& t = *chart.time_orientation();
  const double tt = t.dot(g * t);
  if (!(tt < 0.0)) throw Error(ErrorCode::InvalidArgument, "time orientation is not timelike at " + format_vec(x));
  Mat frame = Mat::Zero(m, m);
  frame.col(0) = t / std::sqrt(-tt);
  int filled = 1;
  for (int k = 0; k < m && filled < m; ++k) {
    Vec e = Vec::Unit(m, k);
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < filled; ++j) {
        const Vec ej = frame.col(j);
        const double sign = j == 0 ? -1.0 : 1.0;
        e -= sign * e.dot(g * ej) * ej;
      }
    }
    const double n2 = e.dot(g * e);
    if (n2 <= 1e-10 * e.squaredNorm()) continue;
    frame.col(filled++) = e / std::sqrt(n2);
  }
  if (filled < m) throw Error(ErrorCode::DegenerateMetric, "could not complete a frame at " + format_vec(x));
  return frame;
}

int default_cone_directions(int section_dim) { return section_dim <= 2 ? 24 : 128; }

std::vector<Vec> cone_section_points(int k, int count, std::uint64_t seed) {
  std::vector<Vec> pts;
  pts.push_back(Vec::Zero(k));
  if (k == 0 || count <= 1) return pts;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = count - 1;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double phase = 2.0 * std::numbers::pi * unit(rng);
  for (int i = 0; i < n; ++i) {
    Vec a(k);
    const double u = (i + 0.5) / n;
    if (k == 1) {
      a(0) = n == 1 ? 1.0 : -1.0 + 2.0 * i / (n - 1);
    } else if (k == 2) {
      const double r = std::sqrt(u), th = phase + golden * i;
      a << r * std::cos(th), r * std::sin(th);
    } else if (k == 3) {
      const double z = 1.0 - 2.0 * u, rho = std::sqrt(std::max(0.0, 1.0 - z * z)), th = phase + golden * i;
      const double r = std::cbrt((i % 8 + 0.5) / 8.0);
      a << r * rho * std::cos(th), r * rho * std::sin(th), r * z;
    } else {
      std::normal_distribution<double> normal;
      for (int j = 0; j < k; ++j) a(j) = normal(rng);
      a *= std::pow(unit(rng), 1.0 / k) / a.norm();
    }
    pts.push_back(a);
  }
  return pts;
}

const char* to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::MaximizerFound: return "maximizer_found";
    case SearchStatus::NoCausalCurve: return "no_causal_curve";
    case SearchStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

CausalRelationResult causal_relation(const MetricChart& chart, const Region& omega, const Vec& p, const Vec& q,
                                     const CausalSearchOptions& options) {
  check_endpoints(omega, p, q);
  CausalRelationResult res;
  if (same_point(p, q)) {
    res.related = true;
    res.witness = CausalWitness{{constant_curve(p)}, 0.0};
    return res;
  }
  const auto direct = solve_direct(chart, omega, p, q, q - p, options);
  if (direct.causal && direct.interior) {
    res.related = true;
    res.witness = CausalWitness{{direct.bvp.trajectory}, direct.length};
    return res;
  }
  res.diagnostics.push_back(direct.converged ? (direct.causal ? "direct geodesic leaves the region"
                                                              : "direct geodesic is not future causal")
                                             : "direct shooting did not converge");
  const auto starts = cone_starts(chart, p, q, options);
  for (const auto& c : broken_scan(chart, omega, p, q, starts, options)) {
    if (!c.valid) continue;
    res.related = true;
    res.witness = c.witness;
    return res;
  }
  res.best_effort = true;
  res.diagnostics.push_back("no broken witness among " + std::to_string(starts.size()) + " cone directions");
  return res;
}

CausalSearchResult max_causal_geodesic(const MetricChart& chart, const Region& omega, const Vec& p, const Vec& q,
                                       const CausalSearchOptions& options) {
  check_endpoints(omega, p, q);
  CausalSearchResult res;
  auto& log = res.search_log;
  if (same_point(p, q)) {
    res.status = SearchStatus::MaximizerFound;
    res.geodesic = constant_curve(p);
    res.interior_ok = true;
    log.notes.push_back("p = q: constant curve");
    return res;
  }

  const auto starts = cone_starts(chart, p, q, options);
  std::vector<Vec> guesses = {q - p};
  for (const auto& s : starts)
    if (s.scale > 0.0) guesses.push_back(s.scale * s.direction);
  std::vector<DirectSolution> sols(guesses.size());
  parallel_for(static_cast<int>(guesses.size()), options.workers, [&](int i) {
    sols[static_cast<std::size_t>(i)] = solve_direct(chart, omega, p, q, guesses[static_cast<std::size_t>(i)], options);
  });

  int best = -1;
  double running = 0.0;
  for (std::size_t i = 0; i < sols.size(); ++i) {
    const auto& s = sols[i];
    ++log.starts;
    log.converged += s.converged;
    log.causal_solutions += s.causal;
    log.interior_solutions += s.causal && s.interior;
    log.newton_iterations += s.iterations;
    if (s.causal) {
      const auto& b = sols[static_cast<std::size_t>(std::max(best, 0))];
      const bool better = best < 0 || (s.interior && !b.interior) ||
                          (s.interior == b.interior && s.length > b.length + 1e-12 * (1.0 + b.length));
      if (better) best = static_cast<int>(i);
      if (s.interior) running = std::max(running, s.length);
    }
    log.best_lengths.push_back(running);
  }

  if (best >= 0 && sols[static_cast<std::size_t>(best)].interior) {
    const auto& s = sols[static_cast<std::size_t>(best)];
    res.status = SearchStatus::MaximizerFound;
    res.geodesic = s.bvp.trajectory;
    res.length = s.length;
    res.interior_ok = true;
    return res;
  }

  // No direct geodesic inside the region: broken curves give a lower bound.
  const auto broken = broken_scan(chart, omega, p, q, starts, options);
  const int nf = static_cast<int>(options.vertex_fractions.size());
  int bk = -1;
  for (std::size_t k = 0; k < broken.size(); ++k)
    if (broken[k].valid && (bk < 0 || broken[k].witness.length > broken[static_cast<std::size_t>(bk)].witness.length))
      bk = static_cast<int>(k);
  if (bk >= 0) {
    const int dir = bk / nf, fi = bk % nf;
    const auto& fr = options.vertex_fractions;
    const double lo = fi > 0 ? fr[static_cast<std::size_t>(fi - 1)] : 0.5 * fr.front();
    const double hi = fi + 1 < nf ? fr[static_cast<std::size_t>(fi + 1)] : std::min(1.0, 0.5 * (1.0 + fr.back()));
    res.broken_witness = refine_vertex(chart, omega, p, q, starts[static_cast<std::size_t>(dir)], lo, hi,
                                       broken[static_cast<std::size_t>(bk)], options)
                             .witness;
  }

  if (best >= 0) {
    const auto& s = sols[static_cast<std::size_t>(best)];
    res.status = SearchStatus::Inconclusive;
    res.geodesic = s.bvp.trajectory;
    res.length = s.length;
    res.interior_ok = false;
    log.notes.push_back("every future causal geodesic found leaves the region");
  } else if (res.broken_witness) {
    res.status = SearchStatus::Inconclusive;
    res.length = res.broken_witness->length;
    log.notes.push_back("only broken causal curves found; length is a lower bound");
  } else if (log.converged > 0) {
    res.status = SearchStatus::NoCausalCurve;
    log.notes.push_back("converged geodesics are not future causal and no broken curve was found");
  } else {
    res.status = SearchStatus::Inconclusive;
    log.notes.push_back("no shooting start converged");
  }
  return res;
}

}  // namespace semiconvex
