#pragma once

#include "semiconvex/field.hpp"
#include "semiconvex/types.hpp"

#include <limits>
#include <random>
#include <string>
#include <vector>

namespace semiconvex {

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// Open subset of a chart: an axis-aligned open box intersected with strict
/// inequalities c_k(x) > 0.
class Region {
 public:
  Region() = default;
  explicit Region(std::vector<Interval> box, std::vector<ScalarFieldPtr> constraints = {});

  static Region whole(int dim);

  int dim() const { return static_cast<int>(box_.size()); }
  const std::vector<Interval>& box() const { return box_; }
  const std::vector<ScalarFieldPtr>& constraints() const { return constraints_; }

  bool in_box(const Vec& x) const;
  bool contains(const Vec& x) const;

  Region intersect(const Region& other) const;
  Region with_constraint(ScalarFieldPtr constraint) const;
  Region with_box(std::vector<Interval> box) const;

  bool bounded() const;

  /// Rejection sample from the box; the box must be bounded.
  Vec sample(std::mt19937_64& rng, int max_tries = 100000) const;

  /// Euclidean distance from x to the nearest finite face of the box.
  double distance_to_box_boundary(const Vec& x) const;

  std::string describe() const;

 private:
  std::vector<Interval> box_;
  std::vector<ScalarFieldPtr> constraints_;
};

}  // namespace semiconvex
