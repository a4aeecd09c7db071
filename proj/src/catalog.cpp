#include "semiconvex/catalog.hpp"

#include "semiconvex/metrics.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>

namespace semiconvex {

namespace detail {
extern const char* const kBuiltinCatalogJson;
}

namespace {

std::map<std::string, double> read_params(const json& j) {
  std::map<std::string, double> out;
  if (j.is_null()) return out;
  for (const auto& [k, v] : j.items()) out[k] = v.get<double>();
  return out;
}

Vec read_vec(const json& j) {
  Vec v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

std::vector<Interval> read_box(const json& j, int dim) {
  std::vector<Interval> box(static_cast<std::size_t>(dim));
  if (j.is_null()) return box;
  if (static_cast<int>(j.size()) != dim) throw Error(ErrorCode::ParseError, "box has wrong dimension");
  for (int i = 0; i < dim; ++i) {
    const auto& b = j[static_cast<std::size_t>(i)];
    if (b.is_null()) continue;
    if (!b[0].is_null()) box[static_cast<std::size_t>(i)].lo = b[0].get<double>();
    if (!b[1].is_null()) box[static_cast<std::size_t>(i)].hi = b[1].get<double>();
  }
  return box;
}

MetricChart expression_chart(const json& spec) {
  const auto coords = spec.at("coordinates").get<std::vector<std::string>>();
  const auto components = spec.at("components").get<std::vector<std::vector<std::string>>>();
  const auto params = read_params(spec.value("params", json()));
  const int dim = static_cast<int>(coords.size());
  Region domain = spec.contains("domain") ? build_region(spec["domain"], coords, params) : Region::whole(dim);
  MetricChart chart(spec.value("name", std::string("expression")), coords, expression_metric(components, coords, params),
                    domain, spec.value("negative_eigenvalues", 0));
  if (spec.contains("time_orientation")) chart = chart.with_time_orientation(read_vec(spec["time_orientation"]));
  return chart;
}

}  // namespace

MetricChart build_chart(const json& spec) {
  try {
    const std::string metric = spec.at("metric").get<std::string>();
    if (metric == "euclidean") return metrics::euclidean(spec.value("dim", 3));
    if (metric == "euclidean_polar") return metrics::euclidean_polar();
    if (metric == "minkowski") return metrics::minkowski(spec.value("dim", 4));
    if (metric == "schwarzschild") return metrics::schwarzschild(spec.value("M", 1.0));
    if (metric == "reissner_nordstrom") return metrics::reissner_nordstrom(spec.value("M", 1.0), spec.value("Q", 0.0));
    if (metric == "expression") return expression_chart(spec);
    throw Error(ErrorCode::ParseError, "unknown metric '" + metric + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("chart spec: ") + e.what());
  }
}

Region build_region(const json& spec, const std::vector<std::string>& coords,
                    const std::map<std::string, double>& params) {
  try {
    const int dim = static_cast<int>(coords.size());
    std::vector<ScalarFieldPtr> constraints;
    for (const auto& c : spec.value("constraints", json::array()))
      constraints.push_back(expression_field(c.get<std::string>(), coords, params));
    return Region(read_box(spec.value("box", json()), dim), std::move(constraints));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("region spec: ") + e.what());
  }
}

MetricChart CatalogEntry::chart() const { return build_chart(chart_spec); }

Region CatalogEntry::region(const json& override_spec) const {
  const auto c = chart();
  return build_region(override_spec.is_null() ? region_spec : override_spec, c.coordinates(), params);
}

LevelSetHypersurface CatalogEntry::surface(const std::string& name,
                                           const std::map<std::string, double>& overrides) const {
  const auto it = surfaces.find(name);
  if (it == surfaces.end()) throw Error(ErrorCode::InvalidArgument, "entry '" + id + "' has no surface '" + name + "'");
  auto p = params;
  for (const auto& [k, v] : overrides) p[k] = v;
  return LevelSetHypersurface(expression_field(it->second, chart().coordinates(), p));
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string entry_digest(const CatalogEntry& entry) {
  std::string all;
  for (const auto& e : entry.expected) all += e.digest;
  return fnv1a_hex(all);
}

CatalogEntry parse_catalog_entry(const json& j) {
  try {
    CatalogEntry e;
    e.id = j.at("id").get<std::string>();
    e.family = j.value("family", std::string());
    e.chart_spec = j.at("chart");
    e.region_spec = j.value("region", json::object());
    const json surfaces = j.value("surfaces", json::object());
    for (const auto& [k, v] : surfaces.items()) e.surfaces[k] = v.get<std::string>();
    e.params = read_params(j.value("params", json()));
    e.notes = j.value("notes", std::string());
    if (e.family.empty()) e.family = e.chart_spec.at("metric").get<std::string>();
    for (const auto& x : j.value("expected", json::array())) {
      Expectation ex;
      ex.op = x.at("op").get<std::string>();
      ex.config = x.value("config", json::object());
      ex.expect = x.value("expect", json::object());
      ex.basis = x.value("basis", std::string());
      ex.oracle = x.value("oracle", std::string());
      if (ex.basis.empty()) throw Error(ErrorCode::ParseError, "entry '" + e.id + "': expectation without basis");
      if (ex.basis == "analytic_oracle" && ex.oracle.empty())
        throw Error(ErrorCode::ParseError, "entry '" + e.id + "': analytic_oracle expectation must name its oracle");
      ex.digest = fnv1a_hex(json{{"op", ex.op}, {"config", ex.config}, {"expect", ex.expect}}.dump());
      e.expected.push_back(std::move(ex));
    }
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("catalog entry: ") + ex.what());
  }
}

namespace {

std::vector<CatalogEntry> parse_catalog(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, origin + ": " + e.what());
  }
  std::vector<CatalogEntry> out;
  for (const auto& j : doc.value("entries", json::array())) out.push_back(parse_catalog_entry(j));
  return out;
}

}  // namespace

const std::vector<CatalogEntry>& builtin_catalog() {
  static const std::vector<CatalogEntry> entries = parse_catalog(detail::kBuiltinCatalogJson, "builtin catalog");
  return entries;
}

CatalogEntry load_catalog_entry(const std::string& id) {
  for (const auto& e : builtin_catalog())
    if (e.id == id) return e;
  throw Error(ErrorCode::UnknownId, "no catalog entry '" + id + "'");
}

std::vector<CatalogEntry> load_catalog_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_catalog(text, path);
}

}  // namespace semiconvex
