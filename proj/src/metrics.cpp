#include "semiconvex/metrics.hpp"

#include <cmath>
#include <numbers>

namespace semiconvex::metrics {

namespace {

std::vector<std::string> cartesian_names(int dim, bool with_time) {
  static const char* spatial[] = {"x", "y", "z"};
  std::vector<std::string> names;
  if (with_time) names.emplace_back("t");
  const int n_space = with_time ? dim - 1 : dim;
  for (int i = 0; i < n_space; ++i) names.emplace_back(n_space <= 3 ? spatial[i] : "x" + std::to_string(i + 1));
  return names;
}

Vec unit_time(int dim) {
  Vec t = Vec::Zero(dim);
  t(0) = 1.0;
  return t;
}

// Static spherically symmetric metric -f dt^2 + dr^2/f + r^2 dOmega^2.
template <class Lapse>
MetricFieldPtr spherical_metric(std::string description, Lapse lapse) {
  auto f = [lapse]<class T>(std::span<const T> x, SymBuffer<T>& g) {
    using std::sin;
    g.fill(T(0.0));
    const T& r = x[1];
    const T fr = lapse(r);
    const T s = sin(x[2]);
    g(0, 0) = -fr;
    g(1, 1) = 1.0 / fr;
    g(2, 2) = r * r;
    g(3, 3) = r * r * s * s;
  };
  return make_metric_field(4, std::move(description), f);
}

}  // namespace

MetricChart euclidean(int dim) {
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorCode::InvalidArgument, "euclidean: bad dimension");
  auto f = []<class T>(std::span<const T> x, SymBuffer<T>& g) {
    g.fill(T(0.0));
    for (int i = 0; i < g.dim(); ++i) g(i, i) = T(1.0);
    (void)x;
  };
  return MetricChart("euclidean-" + std::to_string(dim), cartesian_names(dim, false),
                     make_metric_field(dim, "delta_ij", f), Region::whole(dim), 0);
}

MetricChart euclidean_polar() {
  auto f = []<class T>(std::span<const T> x, SymBuffer<T>& g) {
    g.fill(T(0.0));
    g(0, 0) = T(1.0);
    g(1, 1) = x[0] * x[0];
  };
  std::vector<Interval> box(2);
  box[0].lo = 0.0;
  return MetricChart("euclidean-polar", {"r", "theta"}, make_metric_field(2, "dr^2 + r^2 dtheta^2", f),
                     Region(box), 0);
}

MetricChart minkowski(int dim) {
  if (dim < 2 || dim > kMaxDim) throw Error(ErrorCode::InvalidArgument, "minkowski: bad dimension");
  auto f = []<class T>(std::span<const T> x, SymBuffer<T>& g) {
    g.fill(T(0.0));
    g(0, 0) = T(-1.0);
    for (int i = 1; i < g.dim(); ++i) g(i, i) = T(1.0);
    (void)x;
  };
  return MetricChart("minkowski-" + std::to_string(dim), cartesian_names(dim, true),
                     make_metric_field(dim, "diag(-1, 1, ...)", f), Region::whole(dim), 1)
      .with_time_orientation(unit_time(dim));
}

MetricChart schwarzschild(double mass) {
  if (!(mass > 0.0)) throw Error(ErrorCode::InvalidArgument, "schwarzschild: mass must be positive");
  auto lapse = [mass]<class T>(const T& r) { return 1.0 - 2.0 * mass / r; };
  std::vector<Interval> box(4);
  box[1].lo = 2.0 * mass;
  box[2] = {0.0, std::numbers::pi};
  return MetricChart("schwarzschild", {"t", "r", "theta", "phi"},
                     spherical_metric("schwarzschild M=" + std::to_string(mass), lapse), Region(box), 1)
      .with_time_orientation(unit_time(4));
}

MetricChart reissner_nordstrom(double mass, double charge) {
  if (!(mass > 0.0) || std::abs(charge) >= mass)
    throw Error(ErrorCode::InvalidArgument, "reissner-nordstrom: need M > 0 and |Q| < M");
  const double q2 = charge * charge;
  auto lapse = [mass, q2]<class T>(const T& r) { return 1.0 - 2.0 * mass / r + q2 / (r * r); };
  std::vector<Interval> box(4);
  box[1].lo = mass + std::sqrt(mass * mass - q2);
  box[2] = {0.0, std::numbers::pi};
  return MetricChart("reissner-nordstrom", {"t", "r", "theta", "phi"},
                     spherical_metric("reissner-nordstrom M=" + std::to_string(mass) +
                                          " Q=" + std::to_string(charge),
                                      lapse),
                     Region(box), 1)
      .with_time_orientation(unit_time(4));
}

}  // namespace semiconvex::metrics
