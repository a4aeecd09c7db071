#include "semiconvex/region.hpp"

#include <cmath>
#include <sstream>

namespace semiconvex {

Region::Region(std::vector<Interval> box, std::vector<ScalarFieldPtr> constraints)
    : box_(std::move(box)), constraints_(std::move(constraints)) {
  for (const auto& c : constraints_) {
    if (!c || c->dim() != dim())
      throw Error(ErrorCode::InvalidArgument, "region constraint dimension does not match box");
  }
}

Region Region::whole(int dim) { return Region(std::vector<Interval>(static_cast<std::size_t>(dim))); }

bool Region::in_box(const Vec& x) const {
  if (x.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (!std::isfinite(x(i))) return false;
    if (!(x(i) > box_[i].lo && x(i) < box_[i].hi)) return false;
  }
  return true;
}

bool Region::contains(const Vec& x) const {
  if (!in_box(x)) return false;
  std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
  for (const auto& c : constraints_) {
    if (!(c->eval(xs) > 0.0)) return false;
  }
  return true;
}

Region Region::intersect(const Region& other) const {
  if (other.dim() != dim()) throw Error(ErrorCode::InvalidArgument, "region dimension mismatch");
  std::vector<Interval> box = box_;
  for (int i = 0; i < dim(); ++i) {
    box[i].lo = std::max(box[i].lo, other.box_[i].lo);
    box[i].hi = std::min(box[i].hi, other.box_[i].hi);
  }
  std::vector<ScalarFieldPtr> cs = constraints_;
  cs.insert(cs.end(), other.constraints_.begin(), other.constraints_.end());
  return Region(std::move(box), std::move(cs));
}

Region Region::with_constraint(ScalarFieldPtr constraint) const {
  std::vector<ScalarFieldPtr> cs = constraints_;
  cs.push_back(std::move(constraint));
  return Region(box_, std::move(cs));
}

Region Region::with_box(std::vector<Interval> box) const { return Region(std::move(box), constraints_); }

bool Region::bounded() const {
  for (const auto& iv : box_) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) return false;
  }
  return true;
}

Vec Region::sample(std::mt19937_64& rng, int max_tries) const {
  if (!bounded()) throw Error(ErrorCode::InvalidArgument, "cannot sample an unbounded region box");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec x(dim());
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    for (int i = 0; i < dim(); ++i) x(i) = box_[i].lo + (box_[i].hi - box_[i].lo) * unit(rng);
    if (contains(x)) return x;
  }
  throw Error(ErrorCode::NotFound, "region sampling found no point satisfying " + describe());
}

double Region::distance_to_box_boundary(const Vec& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim(); ++i) {
    d = std::min(d, std::abs(x(i) - box_[i].lo));
    d = std::min(d, std::abs(box_[i].hi - x(i)));
  }
  return d;
}

std::string Region::describe() const {
  std::ostringstream os;
  os << "box{";
  for (int i = 0; i < dim(); ++i) os << (i ? ", " : "") << "(" << box_[i].lo << ", " << box_[i].hi << ")";
  os << "}";
  for (const auto& c : constraints_) os << " & " << c->describe() << " > 0";
  return os.str();
}

}  // namespace semiconvex
