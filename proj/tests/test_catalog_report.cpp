#include "semiconvex/catalog.hpp"
#include "semiconvex/convexity_audit.hpp"
#include "semiconvex/report.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace semiconvex;

namespace {

RunConfig config_for(const std::string& id) {
  RunConfig c;
  c.entry = id;
  return c;
}

}  // namespace

TEST(Catalog, MinimumEntriesPresent) {
  for (const char* id : {"euclid-sphere-r3", "euclid-plane", "euclid-annulus-2d", "euclid-disk-2d", "graph-x3",
                         "graph-quartic", "polar-euclid", "minkowski-4d", "minkowski-hyperplanes",
                         "minkowski-hyperboloid", "schwarzschild-shell", "reissner-nordstrom-shell"}) {
    const auto e = load_catalog_entry(id);
    EXPECT_EQ(e.id, id);
    EXPECT_FALSE(e.expected.empty()) << id;
    for (const auto& x : e.expected) {
      EXPECT_FALSE(x.basis.empty());
      EXPECT_FALSE(x.oracle.empty());
      EXPECT_EQ(x.digest.size(), 16u);
    }
  }
}

TEST(Catalog, SphereEntry) {
  const auto e = load_catalog_entry("euclid-sphere-r3");
  EXPECT_EQ(e.chart().dim(), 3);
  EXPECT_DOUBLE_EQ(e.surface().value(make_vec({0, 0, 0})), 1.0);
  EXPECT_EQ(e.expected.front().expect["sign"], "nonpos");
}

TEST(Catalog, ShellParameterOverride) {
  const auto e = load_catalog_entry("schwarzschild-shell");
  EXPECT_DOUBLE_EQ(e.surface().value(make_vec({0, 4, 1, 0})), 0.0);
  EXPECT_DOUBLE_EQ(e.surface("main", {{"r0", 3.0}}).value(make_vec({0, 4, 1, 0})), 1.0);
}

TEST(Catalog, UnknownId) {
  try {
    load_catalog_entry("kerr");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownId);
  }
}

TEST(Catalog, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(Catalog, ExpectationsNeedBasis) {
  json j = {{"id", "x"}, {"chart", {{"metric", "euclidean"}, {"dim", 2}}},
            {"expected", {{{"op", "infinitesimal_audit"}, {"expect", {{"sign", "nonpos"}}}}}}};
  EXPECT_THROW(parse_catalog_entry(j), Error);
  j["expected"][0]["basis"] = "analytic_oracle";
  EXPECT_THROW(parse_catalog_entry(j), Error);
  j["expected"][0]["oracle"] = "closed form";
  EXPECT_NO_THROW(parse_catalog_entry(j));
}

TEST(Catalog, ExpressionMetricUserEntry) {
  // Euclidean plane in polar coordinates written out by hand.
  const auto path = std::filesystem::temp_directory_path() / "semiconvex_user_catalog.json";
  {
    std::ofstream os(path);
    os << R"({"entries": [{
      "id": "user-polar", "family": "custom",
      "chart": {"metric": "expression", "coordinates": ["r", "th"], "components": [["1", ""], ["", "r^2"]],
                "domain": {"box": [[0, null], null]}},
      "surfaces": {"main": "r - a"}, "params": {"a": 1.0},
      "region": {"box": [[0.5, 1.5], [-1, 1]]},
      "expected": [{"op": "infinitesimal_audit", "config": {}, "expect": {"sign": "nonneg"},
                    "basis": "closed_form", "oracle": "H_phi(v, v) = r (v^th)^2"}]}]})";
  }
  const auto entries = load_catalog_file(path.string());
  ASSERT_EQ(entries.size(), 1u);
  const auto chart = entries[0].chart();
  EXPECT_DOUBLE_EQ(chart.metric_at(make_vec({2, 0}))(1, 1), 4.0);
  EXPECT_NEAR(chart.christoffel_at(make_vec({2, 0}))(0, 1, 1), -2.0, 1e-12);

  RunConfig c;
  c.entry = "user-polar";
  c.catalog_file = path.string();
  const auto rep = run_audit(c);
  EXPECT_EQ(rep.exit_status, 0) << rep.document.dump(2);
  EXPECT_NE(list_catalog("custom", path.string()).find("user-polar"), std::string::npos);
  std::filesystem::remove(path);
}

TEST(Catalog, ListFilter) {
  const auto all = list_catalog();
  EXPECT_NE(all.find("euclid-sphere-r3"), std::string::npos);
  const auto polar = list_catalog("polar");
  EXPECT_NE(polar.find("polar-euclid"), std::string::npos);
  EXPECT_EQ(polar.find("euclid-sphere-r3"), std::string::npos);
  const auto none = list_catalog("no-such-family");
  EXPECT_EQ(std::count(none.begin(), none.end(), '\n'), 1);
  EXPECT_EQ(list_catalog(), all);
}

TEST(Report, EveryBuiltinEntryMeetsItsExpectations) {
  for (const auto& e : builtin_catalog()) {
    const auto rep = run_audit(config_for(e.id));
    EXPECT_EQ(rep.exit_status, 0) << e.id << "\n" << rep.document["discrepancies"].dump(2);
    EXPECT_EQ(rep.document["schema"], 1);
    EXPECT_TRUE(rep.document.contains("timing"));
    EXPECT_EQ(rep.document["config"]["entry"], e.id);
  }
}

TEST(Report, InjectedMismatchNamesWitness) {
  RunConfig c = config_for("graph-x3");
  c.ops = {"infinitesimal_audit"};
  c.expect_override = {{"sign", "nonpos"}};
  const auto rep = run_audit(c);
  EXPECT_EQ(rep.exit_status, 1);
  ASSERT_EQ(rep.document["discrepancies"].size(), 1u);
  const auto& d = rep.document["discrepancies"][0];
  EXPECT_EQ(d["field"], "sign");
  EXPECT_EQ(d["computed"], "indefinite");
  // The named witness has a positive Hessian value, contradicting nonpos.
  EXPECT_GT(d["witness"]["value"].get<double>(), 0.0);
}

TEST(Report, ShellSweepShowsTransition) {
  RunConfig c = config_for("schwarzschild-shell");
  c.ops = {"infinitesimal_audit"};
  c.variant = CausalFilter::Null;
  c.sweep = {{"param", "r0"}, {"values", {2.5, 3.0, 3.5}}};
  const auto rep = run_audit(c);
  const auto& tr = rep.document["sweep"]["transitions"];
  ASSERT_EQ(tr.size(), 2u);
  EXPECT_EQ(tr[0]["signs"], json({"nonpos", "both_zero"}));
  EXPECT_EQ(tr[1]["signs"], json({"both_zero", "nonneg"}));
}

TEST(Report, ConfigErrors) {
  EXPECT_EQ(run_audit(config_for("nope")).exit_status, 3);
  RunConfig c = config_for("graph-x3");
  c.ops = {"frobnicate"};
  EXPECT_EQ(run_audit(c).exit_status, 3);
  EXPECT_THROW(RunConfig::from_json({{"tol_scale", -1}}), Error);
  c.ops = {};
  c.out = "/nonexistent-dir/report.json";
  EXPECT_EQ(run_and_write(c).exit_status, 3);
}

TEST(Report, InconclusiveExit) {
  RunConfig c;
  c.inline_entry = {
      {"id", "obstacle"},
      {"chart", {{"metric", "minkowski"}, {"dim", 2}}},
      {"region", {{"box", {{-1, 4}, {-3, 3}}}, {"constraints", {"(t - 1.5)^2 + x^2 - 0.64"}}}},
      {"expected",
       {{{"op", "max_causal_geodesic"}, {"config", {{"p", {0, 0}}, {"q", {3, 0}}}}, {"expect", json::object()},
         {"basis", "closed_form"}, {"oracle", "the chord crosses the removed ball"}}}}};
  c.expect_override = {{"interior_ok", false}};
  const auto rep = run_audit(c);
  EXPECT_EQ(rep.exit_status, 2) << rep.document.dump(2);
  EXPECT_EQ(rep.document["results"][0]["computed"]["status"], "inconclusive");
}

TEST(Report, ConfigRoundTrip) {
  RunConfig c = config_for("graph-x3");
  c.ops = {"local_probe"};
  c.seed = 99;
  c.tol_scale = 2.0;
  c.variant = CausalFilter::Space;
  const auto back = RunConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
}

TEST(Report, DeterministicModuloTiming) {
  RunConfig a = config_for("schwarzschild-shell");
  a.seed = 17;
  a.workers = 1;
  RunConfig b = a;
  b.workers = 4;
  auto da = strip_timing(run_audit(a).document);
  auto db = strip_timing(run_audit(b).document);
  da["config"].erase("workers");
  db["config"].erase("workers");
  EXPECT_EQ(da.dump(), db.dump());
  EXPECT_EQ(strip_timing(run_audit(a).document).dump(), strip_timing(run_audit(a).document).dump());
}

TEST(Report, CsvDumps) {
  const auto dir = std::filesystem::temp_directory_path() / "semiconvex_csv_test";
  std::filesystem::remove_all(dir);
  RunConfig c = config_for("euclid-plane");
  c.csv_dir = dir.string();
  const auto rep = run_audit(c);
  EXPECT_EQ(rep.exit_status, 0);
  int files = 0;
  for (const auto& f : std::filesystem::directory_iterator(dir)) {
    ++files;
    std::ifstream in(f.path());
    std::string header;
    std::getline(in, header);
    EXPECT_TRUE(header.rfind("x1", 0) == 0 || header.rfind("s,", 0) == 0) << header;
  }
  EXPECT_EQ(files, 2);
  std::filesystem::remove_all(dir);
}
