#pragma once

#include "semiconvex/dual.hpp"
#include "semiconvex/expression.hpp"
#include "semiconvex/types.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace semiconvex {

/// Scalar function of the chart coordinates, evaluable at every scalar type
/// the differentiation machinery needs.
class ScalarField {
 public:
  virtual ~ScalarField() = default;

  virtual int dim() const = 0;
  virtual std::string describe() const = 0;

  virtual double eval(std::span<const double> x) const = 0;
  virtual Dual1 eval(std::span<const Dual1> x) const = 0;
  virtual Dual2 eval(std::span<const Dual2> x) const = 0;
};

using ScalarFieldPtr = std::shared_ptr<const ScalarField>;

/// Symmetric matrix-valued field g_ij(x). Implementations fill the full matrix.
class MetricField {
 public:
  virtual ~MetricField() = default;

  virtual int dim() const = 0;
  virtual std::string describe() const = 0;

  virtual void eval(std::span<const double> x, SymBuffer<double>& g) const = 0;
  virtual void eval(std::span<const Dual1> x, SymBuffer<Dual1>& g) const = 0;
};

using MetricFieldPtr = std::shared_ptr<const MetricField>;

/// Wraps a functor with a templated call operator `T operator()(std::span<const T>)`.
template <class F>
class ScalarFieldAdapter final : public ScalarField {
 public:
  ScalarFieldAdapter(int dim, std::string description, F f)
      : dim_(dim), description_(std::move(description)), f_(std::move(f)) {}

  int dim() const override { return dim_; }
  std::string describe() const override { return description_; }
  double eval(std::span<const double> x) const override { return f_(x); }
  Dual1 eval(std::span<const Dual1> x) const override { return f_(x); }
  Dual2 eval(std::span<const Dual2> x) const override { return f_(x); }

 private:
  int dim_;
  std::string description_;
  F f_;
};

template <class F>
ScalarFieldPtr make_scalar_field(int dim, std::string description, F f) {
  return std::make_shared<ScalarFieldAdapter<F>>(dim, std::move(description), std::move(f));
}

/// Wraps a functor with `void operator()(std::span<const T>, SymBuffer<T>&)`.
template <class F>
class MetricFieldAdapter final : public MetricField {
 public:
  MetricFieldAdapter(int dim, std::string description, F f)
      : dim_(dim), description_(std::move(description)), f_(std::move(f)) {}

  int dim() const override { return dim_; }
  std::string describe() const override { return description_; }
  void eval(std::span<const double> x, SymBuffer<double>& g) const override { f_(x, g); }
  void eval(std::span<const Dual1> x, SymBuffer<Dual1>& g) const override { f_(x, g); }

 private:
  int dim_;
  std::string description_;
  F f_;
};

template <class F>
MetricFieldPtr make_metric_field(int dim, std::string description, F f) {
  return std::make_shared<MetricFieldAdapter<F>>(dim, std::move(description), std::move(f));
}

/// Scalar field parsed from an expression string over named coordinates.
ScalarFieldPtr expression_field(const std::string& text, const std::vector<std::string>& coords,
                                const std::map<std::string, double>& params = {});

/// Metric whose upper-triangular components are expression strings; entries
/// left empty are zero. `components[i][j]` for j >= i is read.
MetricFieldPtr expression_metric(const std::vector<std::vector<std::string>>& components,
                                 const std::vector<std::string>& coords,
                                 const std::map<std::string, double>& params = {});

}  // namespace semiconvex
