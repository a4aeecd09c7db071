#pragma once

#include "semiconvex/hypersurface.hpp"
#include "semiconvex/metric_chart.hpp"
#include "semiconvex/region.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace semiconvex {

using json = nlohmann::json;

/// One expected outcome of an operation on an entry.
struct Expectation {
  std::string op;
  json config = json::object();
  json expect = json::object();
  /// How the expected value is known: closed_form, analytic_oracle or reference.
  std::string basis;
  std::string oracle;
  /// FNV-1a 64 of the canonical (op, config, expect) text.
  std::string digest;
};

struct CatalogEntry {
  std::string id;
  std::string family;
  json chart_spec;
  json region_spec;
  std::map<std::string, std::string> surfaces;
  std::map<std::string, double> params;
  std::vector<Expectation> expected;
  std::string notes;

  MetricChart chart() const;
  /// Region spec of the entry, or `override_spec` when it is not null.
  Region region(const json& override_spec = nullptr) const;
  /// Surface by name ("main" by default) with parameter overrides.
  LevelSetHypersurface surface(const std::string& name = "main",
                               const std::map<std::string, double>& overrides = {}) const;
  bool has_surface(const std::string& name) const { return surfaces.count(name) > 0; }
};

/// Chart from a spec such as {"metric": "schwarzschild", "M": 1}. The
/// "expression" metric takes coordinates, upper-triangular components,
/// negative_eigenvalues, optional params, domain box and time_orientation.
MetricChart build_chart(const json& spec);

/// {"box": [[lo, hi] or null, ...], "constraints": ["c(x)", ...]} with c(x) > 0 inside.
Region build_region(const json& spec, const std::vector<std::string>& coords,
                    const std::map<std::string, double>& params = {});

CatalogEntry parse_catalog_entry(const json& j);

/// Entries shipped with the library, in file order.
const std::vector<CatalogEntry>& builtin_catalog();

/// Throws UnknownId.
CatalogEntry load_catalog_entry(const std::string& id);

/// Entries from a user file in the same format. Throws ParseError.
std::vector<CatalogEntry> load_catalog_file(const std::string& path);

std::string fnv1a_hex(const std::string& text);
/// Digest over all expectation digests of the entry.
std::string entry_digest(const CatalogEntry& entry);

}  // namespace semiconvex
