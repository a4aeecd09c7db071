#include "semiconvex/metric_chart.hpp"

#include <cmath>
#include <sstream>

namespace semiconvex {

const char* to_string(CausalClass c) {
  switch (c) {
    case CausalClass::Timelike: return "timelike";
    case CausalClass::Null: return "null";
    case CausalClass::Spacelike: return "spacelike";
    case CausalClass::ZeroVector: return "zero_vector";
  }
  return "?";
}

const char* to_string(DerivativeMode m) {
  return m == DerivativeMode::DualNumber ? "dual_number" : "central_difference";
}

Vec ChristoffelSymbols::contract(const Vec& u, const Vec& v) const {
  Vec w = Vec::Zero(dim_);
  for (int l = 0; l < dim_; ++l) {
    double acc = 0.0;
    for (int i = 0; i < dim_; ++i) {
      if (u(i) == 0.0) continue;
      for (int j = 0; j < dim_; ++j) acc += (*this)(l, i, j) * u(i) * v(j);
    }
    w(l) = acc;
  }
  return w;
}

double ChristoffelSymbols::max_asymmetry() const {
  double worst = 0.0;
  for (int l = 0; l < dim_; ++l)
    for (int i = 0; i < dim_; ++i)
      for (int j = i + 1; j < dim_; ++j) worst = std::max(worst, std::abs((*this)(l, i, j) - (*this)(l, j, i)));
  return worst;
}

CausalClass classify(double q, double aux_norm2, double null_tol) {
  if (aux_norm2 == 0.0) return CausalClass::ZeroVector;
  if (std::abs(q) <= null_tol * aux_norm2) return CausalClass::Null;
  return q < 0.0 ? CausalClass::Timelike : CausalClass::Spacelike;
}

MetricChart::MetricChart(std::string name, std::vector<std::string> coordinates, MetricFieldPtr components,
                         Region domain, int negative_eigenvalues)
    : name_(std::move(name)),
      coordinates_(std::move(coordinates)),
      components_(std::move(components)),
      domain_(std::move(domain)),
      negatives_(negative_eigenvalues) {
  if (!components_) throw Error(ErrorCode::InvalidArgument, "chart needs a metric component field");
  if (dim() < 1 || dim() > kMaxDim) throw Error(ErrorCode::InvalidArgument, "unsupported chart dimension");
  if (components_->dim() != dim() || domain_.dim() != dim())
    throw Error(ErrorCode::InvalidArgument, "chart '" + name_ + "': component/domain dimension mismatch");
  if (negatives_ < 0 || negatives_ > dim()) throw Error(ErrorCode::InvalidArgument, "bad signature count");
}

MetricChart MetricChart::with_derivative_mode(DerivativeMode mode) const {
  MetricChart c = *this;
  c.mode_ = mode;
  return c;
}

MetricChart MetricChart::with_null_tol(double tol) const {
  MetricChart c = *this;
  c.null_tol_ = tol;
  return c;
}

MetricChart MetricChart::with_time_orientation(Vec future_vector) const {
  if (future_vector.size() != dim()) throw Error(ErrorCode::InvalidArgument, "time orientation dimension");
  MetricChart c = *this;
  c.time_orientation_ = std::move(future_vector);
  return c;
}

void MetricChart::check_domain(const Vec& x) const {
  if (!domain_.contains(x)) {
    std::ostringstream os;
    os << "point (" << x.transpose() << ") outside domain of chart '" << name_ << "'";
    throw Error(ErrorCode::OutOfDomain, os.str());
  }
}

Mat MetricChart::raw_metric(const Vec& x) const {
  SymBuffer<double> buf(dim());
  components_->eval(std::span<const double>(x.data(), static_cast<std::size_t>(dim())), buf);
  Mat g(dim(), dim());
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j) g(i, j) = buf(i, j);
  return g;
}

Mat MetricChart::metric_at(const Vec& x) const {
  check_domain(x);
  Mat g = raw_metric(x);
  const double scale = g.cwiseAbs().maxCoeff();
  const double det = g.determinant();
  if (!std::isfinite(det) || std::abs(det) <= kDegeneracyRel * std::pow(scale, dim())) {
    std::ostringstream os;
    os << "det g = " << det << " at (" << x.transpose() << ")";
    throw Error(ErrorCode::DegenerateMetric, os.str());
  }
  return g;
}

Mat MetricChart::inverse_metric_at(const Vec& x) const { return metric_at(x).inverse(); }

std::array<Mat, kMaxDim> MetricChart::metric_derivatives(const Vec& x) const {
  const int m = dim();
  std::array<Mat, kMaxDim> dg;
  if (mode_ == DerivativeMode::DualNumber) {
    std::array<Dual1, kMaxDim> xs;
    SymBuffer<Dual1> buf(m);
    for (int k = 0; k < m; ++k) {
      for (int i = 0; i < m; ++i) xs[i] = Dual1(x(i), i == k ? 1.0 : 0.0);
      components_->eval(std::span<const Dual1>(xs.data(), static_cast<std::size_t>(m)), buf);
      dg[k].resize(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) dg[k](i, j) = buf(i, j).d;
    }
  } else {
    for (int k = 0; k < m; ++k) {
      const double h = 1e-5 * (1.0 + std::abs(x(k)));
      Vec xp = x, xm = x;
      xp(k) += h;
      xm(k) -= h;
      dg[k] = (raw_metric(xp) - raw_metric(xm)) / (2.0 * h);
    }
  }
  return dg;
}

ChristoffelSymbols MetricChart::christoffel_at(const Vec& x) const {
  const int m = dim();
  const Mat ginv = inverse_metric_at(x);
  const auto dg = metric_derivatives(x);
  // Lowered symbols Gamma_{k,ij} = (d_i g_kj + d_j g_ki - d_k g_ij) / 2.
  std::array<double, kMaxDim * kMaxDim * kMaxDim> lowered{};
  auto low = [&](int k, int i, int j) -> double& { return lowered[(k * kMaxDim + i) * kMaxDim + j]; };
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        low(k, i, j) = 0.5 * (dg[i](k, j) + dg[j](k, i) - dg[k](i, j));
        low(k, j, i) = low(k, i, j);
      }
  ChristoffelSymbols gamma(m);
  for (int l = 0; l < m; ++l)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        double acc = 0.0;
        for (int k = 0; k < m; ++k) acc += ginv(l, k) * low(k, i, j);
        gamma(l, i, j) = acc;
        gamma(l, j, i) = acc;
      }
  return gamma;
}

CausalClass MetricChart::causal_class(const Vec& x, const Vec& v) const {
  const Mat g = metric_at(x);
  return classify(v.dot(g * v), v.squaredNorm(), null_tol_);
}

bool MetricChart::future_pointing(const Vec& x, const Vec& v) const {
  if (!time_orientation_) throw Error(ErrorCode::InvalidArgument, "chart '" + name_ + "' has no time orientation");
  return inner(x, *time_orientation_, v) < 0.0;
}

int MetricChart::count_negative_eigenvalues(const Vec& x) const {
  Eigen::SelfAdjointEigenSolver<Mat> es(metric_at(x), Eigen::EigenvaluesOnly);
  int n = 0;
  for (int i = 0; i < dim(); ++i) n += es.eigenvalues()(i) < 0.0 ? 1 : 0;
  return n;
}

}  // namespace semiconvex
