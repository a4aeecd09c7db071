#pragma once

#include "semiconvex/geodesic.hpp"
#include "semiconvex/region.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace semiconvex {

/// L = integral of sqrt(max(0, -g(v, v))) by composite Simpson on the stored
/// (possibly non-uniform) grid. Every grid velocity must satisfy
/// g(v, v) <= causal_tol |v|^2 and be future pointing or zero; otherwise
/// NotCausal names the worst grid point.
double lorentzian_length(const MetricChart& chart, const Trajectory& curve, double causal_tol = 1e-9);

/// Sum over consecutive segments.
double lorentzian_length(const MetricChart& chart, const std::vector<Trajectory>& segments, double causal_tol = 1e-9);

/// g-orthonormal frame at x: column 0 is the future unit timelike vector built
/// from the declared time orientation, the rest are spacelike.
Mat causal_frame(const MetricChart& chart, const Vec& x);

/// Points of the compact cone section {e0 + sum a_i e_i : |a| <= 1}, returned as
/// the coefficient vectors a. The first entry is always a = 0.
std::vector<Vec> cone_section_points(int section_dim, int count, std::uint64_t seed);

/// 24 for one- and two-dimensional sections, 128 above.
int default_cone_directions(int section_dim);

struct CausalSearchOptions {
  /// 0 selects default_cone_directions(dim - 1).
  int cone_directions = 0;
  std::uint64_t seed = 1;
  /// Vertex positions per direction for broken witnesses, as fractions of the shooting scale.
  std::vector<double> vertex_fractions = {0.2, 0.35, 0.5, 0.65, 0.8};
  int golden_iterations = 40;
  double causal_tol = 1e-9;
  BvpOptions bvp;
  int workers = 0;
};

struct CausalWitness {
  std::vector<Trajectory> segments;
  double length = 0.0;
  bool broken() const { return segments.size() > 1; }
};

struct CausalRelationResult {
  bool related = false;
  /// False answers come from search exhaustion and may be wrong.
  bool best_effort = false;
  std::optional<CausalWitness> witness;
  std::vector<std::string> diagnostics;
};

/// Looks for a future pointing piecewise causal geodesic from p to q inside
/// omega: first a direct shooting solution, then two segments broken at a
/// vertex reached by a geodesic from the future cone at p.
CausalRelationResult causal_relation(const MetricChart& chart, const Region& omega, const Vec& p, const Vec& q,
                                     const CausalSearchOptions& options = {});

enum class SearchStatus { MaximizerFound, NoCausalCurve, Inconclusive };

const char* to_string(SearchStatus s);

struct CausalSearchLog {
  int starts = 0;
  int converged = 0;
  int causal_solutions = 0;
  int interior_solutions = 0;
  int newton_iterations = 0;
  /// Running best length after each start, in start order.
  std::vector<double> best_lengths;
  std::vector<std::string> notes;
};

struct CausalSearchResult {
  SearchStatus status = SearchStatus::Inconclusive;
  std::optional<Trajectory> geodesic;
  double length = 0.0;
  bool interior_ok = false;
  /// Best broken curve when no direct geodesic qualified; its length is a lower bound only.
  std::optional<CausalWitness> broken_witness;
  CausalSearchLog search_log;
};

/// Multi-start shooting from the cone section at p. Among converged future
/// causal solutions, those inside omega are preferred and the longest wins.
CausalSearchResult max_causal_geodesic(const MetricChart& chart, const Region& omega, const Vec& p, const Vec& q,
                                       const CausalSearchOptions& options = {});

}  // namespace semiconvex
