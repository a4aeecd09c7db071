#include "semiconvex/field.hpp"

namespace semiconvex {

ScalarFieldPtr expression_field(const std::string& text, const std::vector<std::string>& coords,
                                const std::map<std::string, double>& params) {
  Expression expr = Expression::parse(text, coords, params);
  auto f = [expr](auto x) { return expr.evaluate(x); };
  return make_scalar_field(static_cast<int>(coords.size()), text, f);
}

MetricFieldPtr expression_metric(const std::vector<std::vector<std::string>>& components,
                                 const std::vector<std::string>& coords,
                                 const std::map<std::string, double>& params) {
  const int dim = static_cast<int>(coords.size());
  if (dim < 1 || dim > kMaxDim)
    throw Error(ErrorCode::InvalidArgument, "metric dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  if (static_cast<int>(components.size()) != dim)
    throw Error(ErrorCode::InvalidArgument, "metric needs " + std::to_string(dim) + " component rows");

  struct Entry {
    int i;
    int j;
    Expression expr;
  };
  std::vector<Entry> entries;
  std::string description = "expression metric [";
  for (int i = 0; i < dim; ++i) {
    if (static_cast<int>(components[i].size()) != dim)
      throw Error(ErrorCode::InvalidArgument, "metric component row " + std::to_string(i) + " has wrong length");
    for (int j = i; j < dim; ++j) {
      const std::string& text = components[i][j];
      description += (i == 0 && j == 0 ? "" : ", ") + (text.empty() ? std::string("0") : text);
      if (text.empty() || text == "0") continue;
      entries.push_back({i, j, Expression::parse(text, coords, params)});
    }
  }
  description += "]";

  auto f = [entries]<class T>(std::span<const T> x, SymBuffer<T>& g) {
    g.fill(T(0.0));
    for (const Entry& e : entries) g.set(e.i, e.j, e.expr.evaluate(x));
  };
  return make_metric_field(dim, description, f);
}

}  // namespace semiconvex
