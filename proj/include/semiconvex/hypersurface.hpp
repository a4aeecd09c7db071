#pragma once

#include "semiconvex/field.hpp"
#include "semiconvex/metric_chart.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace semiconvex {

/// Causal filter applied to tangent vectors; All keeps every class.
enum class CausalFilter { All, Time, Null, Space };

const char* to_string(CausalFilter f);
/// Accepts all/time/null/space; throws InvalidArgument otherwise.
CausalFilter causal_filter_from_string(const std::string& s);
bool filter_accepts(CausalFilter f, CausalClass c);

enum class SecondDerivativeMode { DualNumber, CentralDifference };

/// H = phi^{-1}(0) for a scalar field phi on a chart.
///
/// The convex side is {phi <= 0} when H_phi <= 0 on TH and {phi >= 0} when
/// H_phi >= 0; replacing phi by lambda * phi with lambda > 0 keeps that side.
class LevelSetHypersurface {
 public:
  explicit LevelSetHypersurface(ScalarFieldPtr phi);

  LevelSetHypersurface with_grad_tol(double tol) const;
  LevelSetHypersurface with_derivative_mode(SecondDerivativeMode mode) const;

  int dim() const { return phi_->dim(); }
  const ScalarField& field() const { return *phi_; }
  const ScalarFieldPtr& field_ptr() const { return phi_; }
  double grad_tol() const { return grad_tol_; }
  SecondDerivativeMode derivative_mode() const { return mode_; }
  std::string describe() const { return phi_->describe(); }
  static const char* orientation_note();

  double value(const Vec& x) const;
  /// Coordinate differential d_i phi.
  Vec differential(const Vec& x) const;
  /// Coordinate second derivatives d_i d_j phi.
  Mat second_derivatives(const Vec& x) const;

  /// |phi| <= 1e-9 (1 + |dphi|).
  bool on_surface(const Vec& x) const;
  double surface_band(const Vec& x) const;

 private:
  ScalarFieldPtr phi_;
  double grad_tol_ = 1e-8;
  SecondDerivativeMode mode_ = SecondDerivativeMode::DualNumber;
};

struct GradientInfo {
  Vec differential;
  /// g^{-1} dphi.
  Vec gradient;
  /// g(grad phi, grad phi).
  double norm2 = 0.0;
  /// |g(grad phi, grad phi)| <= 1e-9 |grad phi|^2 in the coordinate norm.
  bool degenerate = false;
};

/// Throws OutOfDomain, DegenerateMetric, NotRegular.
GradientInfo grad_phi(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& x);

/// Matrix of H_phi at x: d_i d_j phi - d_l phi Gamma^l_ij.
Mat hessian_matrix(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& x);

double hessian_phi(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& x, const Vec& u,
                   const Vec& v);

/// Pi(v, v) = -g(nabla_v n, v) for n = grad phi / |grad phi|, computed from the
/// covariant derivative of the unit normal rather than from H_phi.
/// Throws DegeneratePoint, NotTangent, OffSurface, NotRegular.
double second_fundamental_form(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& x,
                               const Vec& v);

/// Orthonormal (coordinate inner product) basis of ker dphi, m x (m-1).
Mat tangent_basis(const Vec& differential);

inline constexpr double kTangencyTol = 1e-10;

struct TangentSample {
  Vec x;
  Vec v;
  CausalClass causal = CausalClass::Spacelike;
};

struct TangentSampleSet {
  std::vector<TangentSample> samples;
  /// Non-empty when fewer than the requested count could be produced.
  std::string diagnostic;
  /// Eigenvalues of g restricted to ker dphi in the coordinate-orthonormal basis.
  Vec restricted_metric_eigenvalues;
};

/// Unit tangent vectors at x drawn from an isotropic Gaussian on ker dphi and
/// filtered by causal class. Null samples are placed on the cone by solving
/// g(a + t w, a + t w) = 0 along a direction w of opposite causal type.
TangentSampleSet tangent_sample(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& x,
                                CausalFilter filter, int count, std::uint64_t seed);

/// Columns x1..xm, v1..vm, causal, H_vv, Pi_vv ("degenerate" at degenerate points).
void write_samples_csv(std::ostream& os, const MetricChart& chart, const LevelSetHypersurface& surface,
                       const std::vector<TangentSample>& samples);

}  // namespace semiconvex
