#include "semiconvex/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace semiconvex;

namespace {

int load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open config '" << path << "'\n";
    return 3;
  }
  try {
    cfg = RunConfig::from_json(json::parse(in));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

void summarize(const json& doc) {
  std::cerr << "status: " << doc.value("status", std::string("?")) << "\n";
  if (doc.contains("error")) std::cerr << "error: " << doc["error"].get<std::string>() << "\n";
  for (const auto& r : doc.value("results", json::array())) {
    std::cerr << "  " << r["op"].get<std::string>() << " [" << r["status"].get<std::string>() << "]";
    const auto& c = r.value("computed", json::object());
    for (const char* key : {"sign", "conclusion", "outcome", "status", "related", "events", "max_abs_rho", "length"})
      if (c.contains(key)) std::cerr << " " << key << "=" << c[key].dump();
    std::cerr << "\n";
  }
  for (const auto& d : doc.value("discrepancies", json::array()))
    std::cerr << "  discrepancy: " << d["op"].get<std::string>() << "." << d["field"].get<std::string>()
              << " expected " << d["expected"].dump() << ", computed " << d["computed"].dump() << "\n";
  if (doc.contains("sweep") && doc["sweep"].contains("transitions"))
    for (const auto& t : doc["sweep"]["transitions"])
      std::cerr << "  transition between " << t["from"].dump() << " and " << t["to"].dump() << ": "
                << t["signs"].dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convexity audits of level-set hypersurfaces in semi-Riemannian charts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());

  auto* list = app.add_subcommand("list", "List catalog entries with expectation digests");
  std::string family, list_catalog_file;
  list->add_option("--family", family, "Only entries of this metric family");
  list->add_option("--catalog", list_catalog_file, "Additional catalog file");

  auto* run = app.add_subcommand("run", "Run operations on a catalog entry and write a JSON report");
  RunConfig cfg;
  std::string config_path, variant, expect_text, sweep_text;
  run->add_option("--config", config_path, "JSON run config; flags given here override it");
  run->add_option("--entry", cfg.entry, "Catalog entry id");
  run->add_option("--catalog", cfg.catalog_file, "Additional catalog file");
  run->add_option("--op", cfg.ops, "Operation(s); default runs every expectation of the entry");
  run->add_option("--seed", cfg.seed, "Sampling seed");
  run->add_option("--out", cfg.out, "Report path (stdout when omitted)");
  run->add_option("--tol-scale", cfg.tol_scale, "Multiplier on audit and probe tolerances")->check(CLI::PositiveNumber);
  run->add_option("--variant", variant, "Causal variant override")->check(CLI::IsMember({"all", "time", "null", "space"}));
  run->add_option("--workers", cfg.workers, "Worker threads (0 = hardware concurrency)");
  run->add_option("--csv-dir", cfg.csv_dir, "Directory for CSV sample and trajectory dumps");
  run->add_option("--expect", expect_text, "JSON object replacing the expectations of the selected operations");
  run->add_option("--sweep", sweep_text, "JSON sweep spec, e.g. {\"param\":\"r0\",\"values\":[2.5,3,3.5]}");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  if (list->parsed()) {
    try {
      std::cout << list_catalog(family, list_catalog_file);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 3;
    }
    return 0;
  }

  if (!config_path.empty()) {
    RunConfig file_cfg;
    if (const int rc = load_config_file(config_path, file_cfg)) return rc;
    if (run->count("--entry")) file_cfg.entry = cfg.entry;
    if (run->count("--catalog")) file_cfg.catalog_file = cfg.catalog_file;
    if (run->count("--op")) file_cfg.ops = cfg.ops;
    if (run->count("--seed")) file_cfg.seed = cfg.seed;
    if (run->count("--out")) file_cfg.out = cfg.out;
    if (run->count("--tol-scale")) file_cfg.tol_scale = cfg.tol_scale;
    if (run->count("--workers")) file_cfg.workers = cfg.workers;
    if (run->count("--csv-dir")) file_cfg.csv_dir = cfg.csv_dir;
    cfg = file_cfg;
  }
  try {
    if (!variant.empty()) cfg.variant = causal_filter_from_string(variant);
    if (!expect_text.empty()) cfg.expect_override = json::parse(expect_text);
    if (!sweep_text.empty()) cfg.sweep = json::parse(sweep_text);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }

  const RunReport rep = run_and_write(cfg);
  if (cfg.out.empty()) std::cout << rep.document.dump(2) << "\n";
  summarize(rep.document);
  return rep.exit_status;
}
