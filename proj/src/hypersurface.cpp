#include "semiconvex/hypersurface.hpp"

#include "semiconvex/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

namespace semiconvex {

const char* to_string(CausalFilter f) {
  switch (f) {
    case CausalFilter::All: return "all";
    case CausalFilter::Time: return "time";
    case CausalFilter::Null: return "null";
    case CausalFilter::Space: return "space";
  }
  return "?";
}

CausalFilter causal_filter_from_string(const std::string& s) {
  if (s == "all") return CausalFilter::All;
  if (s == "time") return CausalFilter::Time;
  if (s == "null") return CausalFilter::Null;
  if (s == "space") return CausalFilter::Space;
  throw Error(ErrorCode::InvalidArgument, "unknown causal variant '" + s + "' (expected all, time, null, space)");
}

bool filter_accepts(CausalFilter f, CausalClass c) {
  switch (f) {
    case CausalFilter::All: return c != CausalClass::ZeroVector;
    case CausalFilter::Time: return c == CausalClass::Timelike;
    case CausalFilter::Null: return c == CausalClass::Null;
    case CausalFilter::Space: return c == CausalClass::Spacelike;
  }
  return false;
}

LevelSetHypersurface::LevelSetHypersurface(ScalarFieldPtr phi) : phi_(std::move(phi)) {
  if (!phi_) throw Error(ErrorCode::InvalidArgument, "hypersurface needs a defining function");
}

LevelSetHypersurface LevelSetHypersurface::with_grad_tol(double tol) const {
  LevelSetHypersurface h = *this;
  h.grad_tol_ = tol;
  return h;
}

LevelSetHypersurface LevelSetHypersurface::with_derivative_mode(SecondDerivativeMode mode) const {
  LevelSetHypersurface h = *this;
  h.mode_ = mode;
  return h;
}

const char* LevelSetHypersurface::orientation_note() {
  return "convex side is {phi <= 0} when H_phi <= 0 on TH and {phi >= 0} when H_phi >= 0";
}

namespace {

template <class T>
std::span<const T> as_span(const std::array<T, kMaxDim>& a, int m) {
  return std::span<const T>(a.data(), static_cast<std::size_t>(m));
}

std::span<const double> as_span(const Vec& x) {
  return std::span<const double>(x.data(), static_cast<std::size_t>(x.size()));
}

// Gauss-Jordan inverse with partial pivoting on the real parts.
template <class T>
void invert_in_place(std::array<std::array<T, kMaxDim>, kMaxDim>& a, int m) {
  std::array<std::array<T, kMaxDim>, kMaxDim> inv{};
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) inv[i][j] = T(i == j ? 1.0 : 0.0);
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(value_of(a[r][col])) > std::abs(value_of(a[piv][col]))) piv = r;
    if (value_of(a[piv][col]) == 0.0) throw Error(ErrorCode::DegenerateMetric, "singular metric in normal derivative");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const T p = a[col][col];
    for (int j = 0; j < m; ++j) {
      a[col][j] = a[col][j] / p;
      inv[col][j] = inv[col][j] / p;
    }
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      const T f = a[r][col];
      for (int j = 0; j < m; ++j) {
        a[r][j] = a[r][j] - f * a[col][j];
        inv[r][j] = inv[r][j] - f * inv[col][j];
      }
    }
  }
  a = inv;
}

// Unit normal grad phi / sqrt|g(grad phi, grad phi)| at x, plain doubles.
Vec unit_normal(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& x) {
  const Vec dphi = surface.differential(x);
  const Vec grad = chart.raw_metric(x).inverse() * dphi;
  return grad / std::sqrt(std::abs(dphi.dot(grad)));
}

// Directional derivative of the unit normal along v, by forward-mode AD.
Vec normal_derivative_dual(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& x,
                           const Vec& v) {
  const int m = chart.dim();
  std::array<Dual1, kMaxDim> xs;
  for (int i = 0; i < m; ++i) xs[i] = Dual1(x(i), v(i));

  SymBuffer<Dual1> gbuf(m);
  chart.components().eval(as_span(xs, m), gbuf);
  std::array<std::array<Dual1, kMaxDim>, kMaxDim> ginv{};
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) ginv[i][j] = gbuf(i, j);
  invert_in_place(ginv, m);

  // d_k phi along x + eps v: the outer dual carries d/dx^k, the inner one d/deps.
  std::array<Dual1, kMaxDim> dphi;
  std::array<Dual2, kMaxDim> xs2;
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < m; ++i) xs2[i] = Dual2(Dual1(x(i), v(i)), Dual1(i == k ? 1.0 : 0.0, 0.0));
    dphi[k] = surface.field().eval(as_span(xs2, m)).d;
  }

  std::array<Dual1, kMaxDim> grad;
  Dual1 norm2(0.0);
  for (int l = 0; l < m; ++l) {
    Dual1 acc(0.0);
    for (int k = 0; k < m; ++k) acc += ginv[l][k] * dphi[k];
    grad[l] = acc;
    norm2 += dphi[l] * acc;
  }
  const Dual1 len = sqrt(abs(norm2));
  Vec dn(m);
  for (int l = 0; l < m; ++l) dn(l) = (grad[l] / len).d;
  return dn;
}

Vec normal_derivative_central(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& x,
                              const Vec& v) {
  const double h = 1e-5 * (1.0 + x.cwiseAbs().maxCoeff()) / std::max(v.cwiseAbs().maxCoeff(), 1e-300);
  return (unit_normal(chart, surface, x + h * v) - unit_normal(chart, surface, x - h * v)) / (2.0 * h);
}

}  // namespace

double LevelSetHypersurface::value(const Vec& x) const { return phi_->eval(as_span(x)); }

Vec LevelSetHypersurface::differential(const Vec& x) const {
  const int m = dim();
  Vec d(m);
  if (mode_ == SecondDerivativeMode::DualNumber) {
    std::array<Dual1, kMaxDim> xs;
    for (int k = 0; k < m; ++k) {
      for (int i = 0; i < m; ++i) xs[i] = Dual1(x(i), i == k ? 1.0 : 0.0);
      d(k) = phi_->eval(as_span(xs, m)).d;
    }
  } else {
    for (int k = 0; k < m; ++k) {
      const double h = 1e-6 * (1.0 + std::abs(x(k)));
      Vec xp = x, xm = x;
      xp(k) += h;
      xm(k) -= h;
      d(k) = (value(xp) - value(xm)) / (2.0 * h);
    }
  }
  return d;
}

Mat LevelSetHypersurface::second_derivatives(const Vec& x) const {
  const int m = dim();
  Mat d2(m, m);
  if (mode_ == SecondDerivativeMode::DualNumber) {
    std::array<Dual2, kMaxDim> xs;
    for (int a = 0; a < m; ++a)
      for (int b = a; b < m; ++b) {
        for (int i = 0; i < m; ++i) xs[i] = Dual2(Dual1(x(i), i == a ? 1.0 : 0.0), Dual1(i == b ? 1.0 : 0.0, 0.0));
        const double val = phi_->eval(as_span(xs, m)).d.d;
        d2(a, b) = val;
        d2(b, a) = val;
      }
  } else {
    const double f0 = value(x);
    for (int a = 0; a < m; ++a) {
      const double ha = 1e-4 * (1.0 + std::abs(x(a)));
      Vec xp = x, xm = x;
      xp(a) += ha;
      xm(a) -= ha;
      d2(a, a) = (value(xp) - 2.0 * f0 + value(xm)) / (ha * ha);
      for (int b = a + 1; b < m; ++b) {
        const double hb = 1e-4 * (1.0 + std::abs(x(b)));
        Vec pp = x, pm = x, mp = x, mm = x;
        pp(a) += ha, pp(b) += hb;
        pm(a) += ha, pm(b) -= hb;
        mp(a) -= ha, mp(b) += hb;
        mm(a) -= ha, mm(b) -= hb;
        const double val = (value(pp) - value(pm) - value(mp) + value(mm)) / (4.0 * ha * hb);
        d2(a, b) = val;
        d2(b, a) = val;
      }
    }
  }
  return d2;
}

double LevelSetHypersurface::surface_band(const Vec& x) const { return 1e-9 * (1.0 + differential(x).norm()); }

bool LevelSetHypersurface::on_surface(const Vec& x) const { return std::abs(value(x)) <= surface_band(x); }

GradientInfo grad_phi(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& x) {
  const Mat g = chart.metric_at(x);
  GradientInfo info;
  info.differential = surface.differential(x);
  if (!(info.differential.norm() > surface.grad_tol())) {
    std::ostringstream os;
    os << "|dphi| = " << info.differential.norm() << " at (" << x.transpose() << ")";
    throw Error(ErrorCode::NotRegular, os.str());
  }
  info.gradient = g.inverse() * info.differential;
  info.norm2 = info.differential.dot(info.gradient);
  info.degenerate = std::abs(info.norm2) <= 1e-9 * info.gradient.squaredNorm();
  return info;
}

Mat hessian_matrix(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& x) {
  const int m = chart.dim();
  const ChristoffelSymbols gamma = chart.christoffel_at(x);
  const Vec dphi = surface.differential(x);
  Mat h = surface.second_derivatives(x);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int l = 0; l < m; ++l) acc += dphi(l) * gamma(l, i, j);
      h(i, j) -= acc;
    }
  return h;
}

double hessian_phi(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& x, const Vec& u,
                   const Vec& v) {
  return u.dot(hessian_matrix(chart, surface, x) * v);
}

double second_fundamental_form(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& x,
                               const Vec& v) {
  if (!surface.on_surface(x)) {
    std::ostringstream os;
    os << "phi = " << surface.value(x) << " at (" << x.transpose() << ") is outside the surface band";
    throw Error(ErrorCode::OffSurface, os.str());
  }
  const GradientInfo info = grad_phi(chart, surface, x);
  if (info.degenerate)
    throw Error(ErrorCode::DegeneratePoint, "g(grad phi, grad phi) vanishes: second fundamental form undefined");
  if (std::abs(info.differential.dot(v)) > kTangencyTol * v.norm() * std::max(1.0, info.differential.norm()))
    throw Error(ErrorCode::NotTangent, "vector is not tangent to the level set");

  const Vec dn = surface.derivative_mode() == SecondDerivativeMode::DualNumber
                     ? normal_derivative_dual(chart, surface, x, v)
                     : normal_derivative_central(chart, surface, x, v);
  const Vec n = info.gradient / std::sqrt(std::abs(info.norm2));
  const Vec cov = dn + chart.christoffel_at(x).contract(v, n);
  return -v.dot(chart.metric_at(x) * cov);
}

Mat tangent_basis(const Vec& differential) {
  const int m = static_cast<int>(differential.size());
  const Mat column = differential;
  Eigen::HouseholderQR<Mat> qr(column);
  const Mat q = qr.householderQ() * Mat::Identity(m, m);
  return q.rightCols(m - 1);
}

namespace {

Vec gaussian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec a(n);
  for (int i = 0; i < n; ++i) a(i) = nd(rng);
  return a;
}

// Random unit combination of the given eigenvector columns.
Vec random_in_span(std::mt19937_64& rng, const Mat& vecs, const std::vector<int>& cols) {
  const Vec c = gaussian(rng, static_cast<int>(cols.size()));
  Vec a = Vec::Zero(vecs.rows());
  for (std::size_t k = 0; k < cols.size(); ++k) a += c(static_cast<Eigen::Index>(k)) * vecs.col(cols[k]);
  const double n = a.norm();
  return n > 0.0 ? Vec(a / n) : a;
}

}  // namespace

TangentSampleSet tangent_sample(const MetricChart& chart, const LevelSetHypersurface& surface, const Vec& x,
                                CausalFilter filter, int count, std::uint64_t seed) {
  const GradientInfo info = grad_phi(chart, surface, x);
  const Mat basis = tangent_basis(info.differential);
  const Mat g = chart.metric_at(x);
  const Mat gt = basis.transpose() * g * basis;
  Eigen::SelfAdjointEigenSolver<Mat> es(gt);
  const Vec& lambda = es.eigenvalues();
  const Mat& vecs = es.eigenvectors();
  const double eps = chart.null_tol();

  std::vector<int> neg, pos, zero;
  for (int i = 0; i < static_cast<int>(lambda.size()); ++i) {
    if (lambda(i) < -eps) neg.push_back(i);
    else if (lambda(i) > eps) pos.push_back(i);
    else zero.push_back(i);
  }

  TangentSampleSet out;
  out.restricted_metric_eigenvalues = lambda;
  const int k = static_cast<int>(basis.cols());
  if (k == 0) {
    out.diagnostic = "tangent space is zero-dimensional";
    return out;
  }
  auto q_of = [&](const Vec& a) { return a.dot(gt * a); };

  const bool cone_empty = (filter == CausalFilter::Time && neg.empty()) ||
                          (filter == CausalFilter::Space && pos.empty()) ||
                          (filter == CausalFilter::Null && zero.empty() && (neg.empty() || pos.empty()));
  if (cone_empty) {
    out.diagnostic = std::string("no ") + to_string(filter) + "-variant tangent vectors: restricted metric has " +
                     std::to_string(neg.size()) + " negative, " + std::to_string(zero.size()) + " null, " +
                     std::to_string(pos.size()) + " positive directions";
    return out;
  }

  int missed = 0;
  for (int n = 0; n < count; ++n) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(n)));
    Vec a;
    bool found = false;
    for (int attempt = 0; attempt < 64 && !found; ++attempt) {
      a = gaussian(rng, k);
      a /= a.norm();
      if (filter == CausalFilter::Null) {
        if (!neg.empty() && !pos.empty()) {
          const double q = q_of(a);
          const Vec w = random_in_span(rng, vecs, q < 0.0 ? pos : neg);
          const double b = a.dot(gt * w), qw = q_of(w);
          const double disc = b * b - q * qw;
          if (disc < 0.0) continue;
          // Stable roots of qw t^2 + 2 b t + q = 0; one is picked at random.
          const double big = -(b + std::copysign(std::sqrt(disc), b));
          const bool first = std::uniform_int_distribution<int>(0, 1)(rng) == 0;
          const double t = big == 0.0 ? 0.0 : (first ? big / qw : q / big);
          if (!std::isfinite(t)) continue;
          a = a + t * w;
        } else {
          a = random_in_span(rng, vecs, zero);
        }
      } else if (filter == CausalFilter::Time || filter == CausalFilter::Space) {
        const auto target = filter == CausalFilter::Time ? CausalClass::Timelike : CausalClass::Spacelike;
        if (classify(q_of(a), 1.0, eps) != target && attempt >= 32) {
          // Constructive fallback: a dominant direction of the wanted sign plus a bounded admixture.
          const auto& core_cols = filter == CausalFilter::Time ? neg : pos;
          std::vector<int> rest;
          for (int i = 0; i < k; ++i)
            if (std::find(core_cols.begin(), core_cols.end(), i) == core_cols.end()) rest.push_back(i);
          const Vec core = random_in_span(rng, vecs, core_cols);
          a = core;
          if (!rest.empty()) {
            const Vec other = random_in_span(rng, vecs, rest);
            const double qc = q_of(core), qo = q_of(other);
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            const double tmax = qc * qo < 0.0 ? 0.9 * std::sqrt(-qc / qo) : 1.0;
            a = core + u * tmax * other;
          }
        }
      }
      const double an = a.norm();
      if (!(an > 0.0)) continue;
      a /= an;
      Vec v = basis * a;
      v -= (info.differential.dot(v) / info.differential.squaredNorm()) * info.differential;
      v /= v.norm();
      const CausalClass c = chart.causal_class(x, v);
      if (filter_accepts(filter, c)) {
        out.samples.push_back({x, v, c});
        found = true;
      }
    }
    if (!found) ++missed;
  }
  if (missed > 0)
    out.diagnostic = std::to_string(missed) + " of " + std::to_string(count) + " " + to_string(filter) +
                     "-variant samples could not be produced";
  return out;
}

void write_samples_csv(std::ostream& os, const MetricChart& chart, const LevelSetHypersurface& surface,
                       const std::vector<TangentSample>& samples) {
  const int m = chart.dim();
  for (int i = 0; i < m; ++i) os << (i ? "," : "") << "x" << (i + 1);
  for (int i = 0; i < m; ++i) os << ",v" << (i + 1);
  os << ",causal,H_vv,Pi_vv\n";
  os << std::setprecision(17);
  for (const auto& s : samples) {
    for (int i = 0; i < m; ++i) os << (i ? "," : "") << s.x(i);
    for (int i = 0; i < m; ++i) os << "," << s.v(i);
    os << "," << to_string(s.causal) << "," << hessian_phi(chart, surface, s.x, s.v, s.v) << ",";
    try {
      os << second_fundamental_form(chart, surface, s.x, s.v);
    } catch (const Error& e) {
      os << (e.code() == ErrorCode::DegeneratePoint ? "degenerate" : "n/a");
    }
    os << "\n";
  }
}

}  // namespace semiconvex
