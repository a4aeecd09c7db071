#pragma once

#include "semiconvex/metric_chart.hpp"

namespace semiconvex::metrics {

/// Cartesian Euclidean space, coordinates x, y, z (x1..xn beyond three).
MetricChart euclidean(int dim);

/// Euclidean plane in polar coordinates (r, theta), r > 0.
MetricChart euclidean_polar();

/// Minkowski space, signature (-,+,...,+), coordinates t, x, y, z.
MetricChart minkowski(int dim);

/// Schwarzschild exterior in Schwarzschild coordinates (t, r, theta, phi), r > 2M.
MetricChart schwarzschild(double mass);

/// Reissner-Nordstrom exterior (t, r, theta, phi), r beyond the outer horizon.
MetricChart reissner_nordstrom(double mass, double charge);

}  // namespace semiconvex::metrics
