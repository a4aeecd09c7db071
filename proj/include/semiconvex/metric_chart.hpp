#pragma once

#include "semiconvex/field.hpp"
#include "semiconvex/region.hpp"
#include "semiconvex/types.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace semiconvex {

enum class DerivativeMode { DualNumber, CentralDifference };

enum class CausalClass { Timelike, Null, Spacelike, ZeroVector };

const char* to_string(CausalClass c);
const char* to_string(DerivativeMode m);

/// Gamma^l_ij at one point, stored densely.
class ChristoffelSymbols {
 public:
  explicit ChristoffelSymbols(int dim) : dim_(dim) { data_.fill(0.0); }

  int dim() const { return dim_; }
  double& operator()(int l, int i, int j) { return data_[(l * kMaxDim + i) * kMaxDim + j]; }
  double operator()(int l, int i, int j) const { return data_[(l * kMaxDim + i) * kMaxDim + j]; }

  /// Returns w^l = Gamma^l_ij u^i v^j.
  Vec contract(const Vec& u, const Vec& v) const;

  double max_asymmetry() const;

 private:
  int dim_;
  std::array<double, kMaxDim * kMaxDim * kMaxDim> data_{};
};

inline constexpr double kDefaultNullTol = 1e-9;
inline constexpr double kDegeneracyRel = 1e-12;

/// Single coordinate chart carrying a semi-Riemannian metric.
///
/// Immutable value type; the component field is shared. All queries are pure.
class MetricChart {
 public:
  MetricChart(std::string name, std::vector<std::string> coordinates, MetricFieldPtr components,
              Region domain, int negative_eigenvalues);

  const std::string& name() const { return name_; }
  int dim() const { return static_cast<int>(coordinates_.size()); }
  const std::vector<std::string>& coordinates() const { return coordinates_; }
  const Region& domain() const { return domain_; }
  const MetricField& components() const { return *components_; }
  int negative_eigenvalues() const { return negatives_; }
  bool lorentzian() const { return negatives_ == 1; }
  DerivativeMode derivative_mode() const { return mode_; }
  double null_tol() const { return null_tol_; }
  const std::optional<Vec>& time_orientation() const { return time_orientation_; }

  MetricChart with_derivative_mode(DerivativeMode mode) const;
  MetricChart with_null_tol(double tol) const;
  /// Declares a constant coordinate vector field T; v is future pointing when g(T, v) < 0.
  MetricChart with_time_orientation(Vec future_vector) const;

  bool in_domain(const Vec& x) const { return domain_.contains(x); }

  /// Throws OutOfDomain or DegenerateMetric.
  Mat metric_at(const Vec& x) const;
  /// Domain-checked inverse metric.
  Mat inverse_metric_at(const Vec& x) const;
  /// Partial derivatives d_k g_ij for k = 0..m-1, no domain check on stencil points.
  std::array<Mat, kMaxDim> metric_derivatives(const Vec& x) const;
  ChristoffelSymbols christoffel_at(const Vec& x) const;
  CausalClass causal_class(const Vec& x, const Vec& v) const;

  double inner(const Vec& x, const Vec& u, const Vec& v) const { return u.dot(metric_at(x) * v); }
  /// Requires a declared time orientation; zero vectors are not future pointing.
  bool future_pointing(const Vec& x, const Vec& v) const;
  int count_negative_eigenvalues(const Vec& x) const;

  /// Metric components without domain or degeneracy checks.
  Mat raw_metric(const Vec& x) const;

 private:
  void check_domain(const Vec& x) const;

  std::string name_;
  std::vector<std::string> coordinates_;
  MetricFieldPtr components_;
  Region domain_;
  int negatives_;
  DerivativeMode mode_ = DerivativeMode::DualNumber;
  double null_tol_ = kDefaultNullTol;
  std::optional<Vec> time_orientation_;
};

/// Classification rule shared by every caller: q = g(v,v) against n = |v|^2_aux.
CausalClass classify(double q, double aux_norm2, double null_tol);

}  // namespace semiconvex
