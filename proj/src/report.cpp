#include "semiconvex/report.hpp"

#include "semiconvex/causal_connect.hpp"
#include "semiconvex/convexity_audit.hpp"
#include "semiconvex/parallel.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace semiconvex {

const char* version() { return SEMICONVEX_VERSION; }

namespace {

using Clock = std::chrono::steady_clock;

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec json_vec(const json& j) {
  Vec v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

json witness_json(const std::optional<Witness>& w) {
  if (!w) return nullptr;
  return {{"x", vec_json(w->x)}, {"v", vec_json(w->v)}, {"value", w->value}, {"s", w->s}};
}

std::map<std::string, double> merged_params(const json& config) {
  std::map<std::string, double> p;
  const json params = config.value("params", json::object());
  for (const auto& [k, v] : params.items()) p[k] = v.get<double>();
  return p;
}

struct Task {
  std::string op;
  json config;
  json expect;
  std::string digest;
  std::string label;
};

struct Outcome {
  json computed = json::object();
  json witness;
  bool inconclusive = false;
  std::vector<std::string> diagnostics;
};

struct Context {
  const CatalogEntry& entry;
  const RunConfig& run;
  MetricChart chart;
};

std::string csv_path(const Context& ctx, const std::string& label, const std::string& kind) {
  if (ctx.run.csv_dir.empty()) return {};
  std::filesystem::create_directories(ctx.run.csv_dir);
  return (std::filesystem::path(ctx.run.csv_dir) / (ctx.entry.id + "_" + label + "_" + kind + ".csv")).string();
}

void dump_trajectory(const Context& ctx, const std::string& label, const Trajectory& t, json& computed) {
  const auto path = csv_path(ctx, label, "trajectory");
  if (path.empty()) return;
  std::ofstream os(path);
  write_trajectory_csv(os, ctx.chart, t);
  if (!os) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  computed["csv"] = std::filesystem::path(path).filename().string();
}

CausalFilter task_variant(const Context& ctx, const json& config) {
  if (ctx.run.variant) return *ctx.run.variant;
  return causal_filter_from_string(config.value("variant", std::string("all")));
}

std::uint64_t task_seed(const Context& ctx, const json& config) { return config.value("seed", ctx.run.seed); }

Outcome run_infinitesimal(const Context& ctx, const Task& t) {
  const auto surface = ctx.entry.surface(t.config.value("surface", std::string("main")), merged_params(t.config));
  AuditOptions o;
  o.n_points = t.config.value("n_points", o.n_points);
  o.n_vectors = t.config.value("n_vectors", o.n_vectors);
  o.variant = task_variant(ctx, t.config);
  o.seed = task_seed(ctx, t.config);
  o.tol_scale = ctx.run.tol_scale;
  o.workers = ctx.run.workers;
  const Region region = ctx.entry.region(t.config.value("region", json()));
  const auto v = infinitesimal_audit(ctx.chart, surface, region, o);
  Outcome out;
  out.computed = {{"notion", to_string(v.notion)},
                  {"variant", to_string(v.variant)},
                  {"sign", to_string(v.sign)},
                  {"margin_min", v.margin_min},
                  {"margin_max", v.margin_max},
                  {"audit_tol", v.audit_tol},
                  {"points_used", v.points_used},
                  {"samples_used", v.samples_used},
                  {"degenerate_points", v.degenerate_points},
                  {"empty_cone", v.empty_cone},
                  {"seed", v.seed},
                  {"witness_min", witness_json(v.witness_min)},
                  {"witness_max", witness_json(v.witness_max)}};
  out.witness = witness_json(v.witness);
  out.diagnostics = v.diagnostics;
  const auto path = csv_path(ctx, t.label, "samples");
  if (!path.empty()) {
    std::vector<TangentSample> samples;
    for (const auto& x : surface_points(ctx.chart, surface, region, std::min(o.n_points, 8), o.seed, o.workers)) {
      const auto set = tangent_sample(ctx.chart, surface, x, o.variant, o.n_vectors, derive_seed(o.seed, samples.size()));
      samples.insert(samples.end(), set.samples.begin(), set.samples.end());
    }
    std::ofstream os(path);
    write_samples_csv(os, ctx.chart, surface, samples);
    out.computed["csv"] = std::filesystem::path(path).filename().string();
  }
  return out;
}

Outcome run_probe(const Context& ctx, const Task& t) {
  const auto surface = ctx.entry.surface(t.config.value("surface", std::string("main")), merged_params(t.config));
  ProbeOptions o;
  o.radius = t.config.value("radius", o.radius);
  o.n_dirs = t.config.value("n_dirs", o.n_dirs);
  o.variant = task_variant(ctx, t.config);
  o.seed = task_seed(ctx, t.config);
  o.probe_tol = t.config.value("probe_tol", o.probe_tol) * ctx.run.tol_scale;
  o.workers = ctx.run.workers;
  for (const auto& d : t.config.value("directions", json::array())) o.extra_directions.push_back(json_vec(d));
  const auto rep = local_convexity_probe(ctx.chart, surface, json_vec(t.config.at("point")), o);
  Outcome out;
  double drift = 0.0;
  for (const auto& r : rep.records) drift = std::max(drift, r.energy_drift);
  out.computed = {{"conclusion", to_string(rep.conclusion)},
                  {"radius", rep.radius},
                  {"halvings", rep.halvings},
                  {"grid_step", rep.grid_step},
                  {"probe_tol", rep.probe_tol},
                  {"directions", rep.records.size()},
                  {"truncated", rep.truncated},
                  {"max_energy_drift", drift}};
  out.witness = witness_json(rep.violation);
  out.diagnostics = rep.diagnostics;
  out.inconclusive = rep.conclusion == ProbeConclusion::Inconclusive;
  return out;
}

Outcome run_geometric(const Context& ctx, const Task& t) {
  const auto surface = ctx.entry.surface(t.config.value("surface", std::string("main")), merged_params(t.config));
  GeometricOptions o;
  o.n_pairs = t.config.value("pairs", o.n_pairs);
  o.seed = task_seed(ctx, t.config);
  o.touch_tol = t.config.value("touch_tol", o.touch_tol) * ctx.run.tol_scale;
  o.workers = ctx.run.workers;
  const auto v =
      geometric_convexity_check(ctx.chart, surface, ctx.entry.region(t.config.value("region", json())), o);
  Outcome out;
  json touches = json::array();
  for (const auto& w : v.touch_witnesses) touches.push_back(witness_json(w));
  out.computed = {{"outcome", v.outcome},
                  {"sign", to_string(v.sign)},
                  {"pairs_requested", v.pairs_requested},
                  {"pairs_solved", v.pairs_solved},
                  {"pairs_contained", v.pairs_contained},
                  {"pairs_not_contained", v.pairs_not_contained},
                  {"bvp_failures", v.bvp_failures},
                  {"touch_witnesses", touches}};
  if (!v.touch_witnesses.empty()) out.witness = witness_json(v.touch_witnesses.front());
  out.diagnostics = v.diagnostics;
  out.inconclusive = v.outcome == "inconclusive";
  return out;
}

Outcome run_quasiconv(const Context& ctx, const Task& t) {
  const auto surface = ctx.entry.surface(t.config.value("surface", std::string("main")), merged_params(t.config));
  IntegrationOptions io;
  io.max_step = t.config.value("max_step", 0.01);
  const auto traj = integrate_geodesic(ctx.chart, json_vec(t.config.at("x0")), json_vec(t.config.at("v0")),
                                       t.config.value("s_max", 1.0), io);
  const auto w = quasiconv_witness(ctx.chart, surface, traj, t.config.value("side", 1));
  Outcome out;
  out.computed = {{"c", w.finite_c ? json(w.c) : json(nullptr)},
                  {"finite_c", w.finite_c},
                  {"max_abs_rho", w.max_abs_rho},
                  {"fit_tol", w.fit_tol},
                  {"side", w.side},
                  {"grid_points", w.s.size()},
                  {"exit_reason", to_string(traj.exit_reason)},
                  {"energy_drift", traj.energy_drift}};
  if (!w.finite_c) out.diagnostics.push_back("NoFiniteC: c exceeds 1e6");
  dump_trajectory(ctx, t.label, traj, out.computed);
  return out;
}

CausalSearchOptions causal_options(const Context& ctx, const json& config) {
  CausalSearchOptions o;
  o.cone_directions = config.value("cone_directions", 0);
  o.seed = task_seed(ctx, config);
  o.workers = ctx.run.workers;
  return o;
}

Outcome run_max_causal(const Context& ctx, const Task& t) {
  const auto r = max_causal_geodesic(ctx.chart, ctx.entry.region(t.config.value("region", json())),
                                     json_vec(t.config.at("p")), json_vec(t.config.at("q")),
                                     causal_options(ctx, t.config));
  Outcome out;
  const auto& log = r.search_log;
  out.computed = {{"status", to_string(r.status)},
                  {"length", r.length},
                  {"interior_ok", r.interior_ok},
                  {"broken_lower_bound", r.broken_witness ? json(r.broken_witness->length) : json(nullptr)},
                  {"search_log",
                   {{"starts", log.starts},
                    {"converged", log.converged},
                    {"causal_solutions", log.causal_solutions},
                    {"interior_solutions", log.interior_solutions},
                    {"newton_iterations", log.newton_iterations},
                    {"best_length", log.best_lengths.empty() ? 0.0 : log.best_lengths.back()},
                    {"notes", log.notes}}}};
  if (r.geodesic) {
    out.computed["energy_drift"] = r.geodesic->energy_drift;
    out.computed["initial_velocity"] = vec_json(r.geodesic->front().v);
    dump_trajectory(ctx, t.label, *r.geodesic, out.computed);
  }
  out.inconclusive = r.status == SearchStatus::Inconclusive;
  return out;
}

Outcome run_causal_relation(const Context& ctx, const Task& t) {
  const auto r = causal_relation(ctx.chart, ctx.entry.region(t.config.value("region", json())),
                                 json_vec(t.config.at("p")), json_vec(t.config.at("q")), causal_options(ctx, t.config));
  Outcome out;
  out.computed = {{"related", r.related}, {"best_effort", r.best_effort}};
  if (r.witness) {
    out.computed["witness_segments"] = r.witness->segments.size();
    out.computed["witness_length"] = r.witness->length;
  }
  out.diagnostics = r.diagnostics;
  return out;
}

Outcome run_consistency(const Context& ctx, const Task& t) {
  const auto surface = ctx.entry.surface(t.config.value("surface", std::string("main")), merged_params(t.config));
  AuditOptions ao;
  ao.variant = task_variant(ctx, t.config);
  ao.seed = task_seed(ctx, t.config);
  ao.tol_scale = ctx.run.tol_scale;
  ao.workers = ctx.run.workers;
  ProbeOptions po;
  po.variant = ao.variant;
  po.seed = ao.seed;
  po.n_dirs = t.config.value("n_dirs", 8);
  po.workers = ctx.run.workers;
  const auto rep = theorem_consistency(ctx.chart, surface, ctx.entry.region(t.config.value("region", json())),
                                       t.config.value("points", 6), ao, po);
  Outcome out;
  json probes = json::array();
  for (const auto& p : rep.probes) probes.push_back(to_string(p.conclusion));
  json events = json::array();
  for (const auto& e : rep.events)
    events.push_back({{"direction", e.direction}, {"point", vec_json(e.point)}, {"detail", e.detail}});
  out.computed = {{"audit_sign", to_string(rep.audit.sign)},
                  {"probe_conclusions", probes},
                  {"neighborhood_audits", rep.neighborhood_audits.size()},
                  {"events", rep.events.size()},
                  {"event_list", events}};
  return out;
}

Outcome dispatch(const Context& ctx, const Task& t) {
  if (t.op == "infinitesimal_audit") return run_infinitesimal(ctx, t);
  if (t.op == "local_probe") return run_probe(ctx, t);
  if (t.op == "geometric_check") return run_geometric(ctx, t);
  if (t.op == "quasiconv") return run_quasiconv(ctx, t);
  if (t.op == "max_causal_geodesic") return run_max_causal(ctx, t);
  if (t.op == "causal_relation") return run_causal_relation(ctx, t);
  if (t.op == "theorem_consistency") return run_consistency(ctx, t);
  throw Error(ErrorCode::InvalidArgument, "unknown operation '" + t.op + "'");
}

bool is_known_op(const std::string& op) {
  for (const char* k : {"infinitesimal_audit", "local_probe", "geometric_check", "quasiconv", "max_causal_geodesic",
                        "causal_relation", "theorem_consistency"})
    if (op == k) return true;
  return false;
}

struct Mismatch {
  std::string field;
  json expected;
  json computed;
};

// Compares the expect object against computed values. Keys ending in _le, _ge
// and min_abs_s are bounds; "length" uses "length_tol"; the rest must match exactly.
std::vector<Mismatch> compare(const Task& t, const Outcome& o) {
  std::vector<Mismatch> bad;
  const json& c = o.computed;
  for (const auto& [key, want] : t.expect.items()) {
    if (key == "length_tol") continue;
    if (key == "max_abs_rho_le") {
      if (!(c.at("max_abs_rho").get<double>() <= want.get<double>())) bad.push_back({key, want, c["max_abs_rho"]});
    } else if (key == "min_abs_s") {
      const double s = o.witness.is_null() ? 0.0 : std::abs(o.witness["s"].get<double>());
      if (!(s >= want.get<double>())) bad.push_back({key, want, s});
    } else if (key == "length") {
      const double tol = t.expect.value("length_tol", 1e-6);
      if (!(std::abs(c.at("length").get<double>() - want.get<double>()) <= tol * std::max(1.0, std::abs(want.get<double>()))))
        bad.push_back({key, want, c["length"]});
    } else if (key == "all_degenerate") {
      const bool all = c.at("degenerate_points") == c.at("points_used");
      if (all != want.get<bool>()) bad.push_back({key, want, all});
    } else if (key == "witness_radius") {
      for (const auto& w : c.at("touch_witnesses")) {
        const double r = json_vec(w["x"]).norm();
        if (std::abs(r - want.get<double>()) > 1e-3) {
          bad.push_back({key, want, r});
          break;
        }
      }
    } else if (!c.contains(key) || c[key] != want) {
      bad.push_back({key, want, c.contains(key) ? c[key] : json(nullptr)});
    }
  }
  return bad;
}

// For a sign mismatch, the sample that contradicts the expected sign.
json breaking_witness(const Mismatch& m, const Outcome& o) {
  if (m.field == "sign" && m.expected.is_string()) {
    const std::string want = m.expected.get<std::string>();
    if (want == "nonpos" && o.computed.contains("witness_max")) return o.computed["witness_max"];
    if (want == "nonneg" && o.computed.contains("witness_min")) return o.computed["witness_min"];
  }
  return o.witness;
}

CatalogEntry resolve_entry(const RunConfig& cfg) {
  if (!cfg.inline_entry.is_null()) return parse_catalog_entry(cfg.inline_entry);
  if (cfg.entry.empty()) throw Error(ErrorCode::InvalidArgument, "no entry given");
  if (!cfg.catalog_file.empty())
    for (auto& e : load_catalog_file(cfg.catalog_file))
      if (e.id == cfg.entry) return e;
  return load_catalog_entry(cfg.entry);
}

std::vector<Task> select_tasks(const CatalogEntry& entry, const RunConfig& cfg) {
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < entry.expected.size(); ++i) {
    const auto& e = entry.expected[i];
    if (!cfg.ops.empty() && std::find(cfg.ops.begin(), cfg.ops.end(), e.op) == cfg.ops.end()) continue;
    tasks.push_back({e.op, e.config, e.expect, e.digest, std::to_string(i) + "_" + e.op});
  }
  for (const auto& op : cfg.ops) {
    if (!is_known_op(op)) throw Error(ErrorCode::InvalidArgument, "unknown operation '" + op + "'");
    const bool covered = std::any_of(tasks.begin(), tasks.end(), [&](const Task& t) { return t.op == op; });
    if (!covered) tasks.push_back({op, json::object(), json::object(), "", "extra_" + op});
  }
  if (!cfg.expect_override.is_null())
    for (auto& t : tasks) {
      t.expect = cfg.expect_override;
      t.digest = fnv1a_hex(json{{"op", t.op}, {"config", t.config}, {"expect", t.expect}}.dump());
    }
  return tasks;
}

json run_sweep(const Context& ctx, const json& sweep, json& timing) {
  const std::string param = sweep.at("param").get<std::string>();
  json base = sweep;
  const std::string op = base.value("op", std::string("infinitesimal_audit"));
  base.erase("param");
  base.erase("values");
  base.erase("op");
  json rows = json::array();
  std::string prev_sign;
  json transitions = json::array();
  double prev_value = 0.0;
  for (const auto& val : sweep.at("values")) {
    Task t{op, base, json::object(), "", "sweep_" + param + "_" + val.dump()};
    t.config["params"][param] = val;
    const auto start = Clock::now();
    const Outcome o = dispatch(ctx, t);
    timing.push_back(std::chrono::duration<double>(Clock::now() - start).count());
    const std::string sign = o.computed.value("sign", std::string());
    if (!prev_sign.empty() && sign != prev_sign)
      transitions.push_back({{"from", prev_value}, {"to", val}, {"signs", {prev_sign, sign}}});
    prev_sign = sign;
    prev_value = val.get<double>();
    rows.push_back({{param, val}, {"computed", o.computed}});
  }
  return {{"op", op}, {"param", param}, {"rows", rows}, {"transitions", transitions}};
}

}  // namespace

json RunConfig::to_json() const {
  json j = {{"entry", entry},
            {"catalog_file", catalog_file},
            {"inline_entry", inline_entry},
            {"ops", ops},
            {"seed", seed},
            {"tol_scale", tol_scale},
            {"variant", variant ? json(to_string(*variant)) : json(nullptr)},
            {"workers", workers},
            {"expect", expect_override},
            {"sweep", sweep},
            {"out", out},
            {"csv_dir", csv_dir}};
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  try {
    RunConfig c;
    c.entry = j.value("entry", std::string());
    c.catalog_file = j.value("catalog_file", std::string());
    c.inline_entry = j.value("inline_entry", json());
    c.ops = j.value("ops", std::vector<std::string>());
    c.seed = j.value("seed", std::uint64_t{1});
    c.tol_scale = j.value("tol_scale", 1.0);
    if (j.contains("variant") && !j["variant"].is_null()) c.variant = causal_filter_from_string(j["variant"]);
    c.workers = j.value("workers", 0);
    c.expect_override = j.value("expect", json());
    c.sweep = j.value("sweep", json());
    c.out = j.value("out", std::string());
    c.csv_dir = j.value("csv_dir", std::string());
    if (!(c.tol_scale > 0.0)) throw Error(ErrorCode::ParseError, "tol_scale must be positive");
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("run config: ") + e.what());
  }
}

RunReport run_audit(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  RunReport rep;
  json& doc = rep.document;
  doc["schema"] = kReportSchema;
  doc["tool"] = {{"name", "semiconvex"}, {"version", version()}};
  doc["config"] = cfg.to_json();
  json timing = {{"tasks", json::array()}};

  std::optional<CatalogEntry> entry;
  std::vector<Task> tasks;
  try {
    entry = resolve_entry(cfg);
    tasks = select_tasks(*entry, cfg);
    doc["entry"] = {{"id", entry->id}, {"family", entry->family}, {"chart", entry->chart_spec},
                    {"region", entry->region_spec}, {"surfaces", entry->surfaces}, {"params", entry->params},
                    {"notes", entry->notes}};
  } catch (const Error& e) {
    doc["status"] = "config_error";
    doc["error"] = e.what();
    rep.exit_status = 3;
    return rep;
  }

  const Context ctx{*entry, cfg, entry->chart()};
  json results = json::array();
  json discrepancies = json::array();
  bool inconclusive = false;
  for (const auto& t : tasks) {
    json row = {{"op", t.op}, {"config", t.config}, {"expected", t.expect.empty() ? json(nullptr) : t.expect},
                {"digest", t.digest}};
    const auto start = Clock::now();
    try {
      const Outcome o = dispatch(ctx, t);
      row["computed"] = o.computed;
      row["witness"] = o.witness;
      row["diagnostics"] = o.diagnostics;
      if (t.expect.empty()) {
        row["status"] = "unchecked";
      } else {
        const auto bad = compare(t, o);
        if (!bad.empty()) {
          row["status"] = "discrepancy";
          for (const auto& m : bad)
            discrepancies.push_back({{"op", t.op}, {"digest", t.digest}, {"field", m.field}, {"expected", m.expected},
                                     {"computed", m.computed}, {"witness", breaking_witness(m, o)}});
        } else {
          row["status"] = o.inconclusive ? "inconclusive" : "ok";
        }
      }
      inconclusive = inconclusive || row["status"] == "inconclusive";
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::ParseError) {
        doc["status"] = "config_error";
        doc["error"] = e.what();
        rep.exit_status = 3;
        return rep;
      }
      row["status"] = "inconclusive";
      row["diagnostics"] = {e.what()};
      inconclusive = true;
    }
    timing["tasks"].push_back(std::chrono::duration<double>(Clock::now() - start).count());
    results.push_back(row);
  }
  doc["results"] = results;
  if (!cfg.sweep.is_null()) {
    timing["sweep"] = json::array();
    try {
      doc["sweep"] = run_sweep(ctx, cfg.sweep, timing["sweep"]);
    } catch (const json::exception& e) {
      doc["status"] = "config_error";
      doc["error"] = std::string("sweep: ") + e.what();
      rep.exit_status = 3;
      return rep;
    } catch (const Error& e) {
      doc["sweep"] = {{"error", e.what()}};
      inconclusive = true;
    }
  }
  doc["discrepancies"] = discrepancies;
  rep.exit_status = !discrepancies.empty() ? 1 : inconclusive ? 2 : 0;
  doc["status"] = rep.exit_status == 0 ? "ok" : rep.exit_status == 1 ? "discrepancy" : "inconclusive";
  timing["total_seconds"] = std::chrono::duration<double>(Clock::now() - t0).count();
  doc["timing"] = timing;
  return rep;
}

RunReport run_and_write(const RunConfig& cfg) {
  RunReport rep = run_audit(cfg);
  if (!cfg.out.empty()) {
    std::ofstream os(cfg.out);
    os << rep.document.dump(2) << "\n";
    if (!os) {
      rep.document["status"] = "config_error";
      rep.document["error"] = "cannot write '" + cfg.out + "'";
      rep.exit_status = 3;
    }
  }
  return rep;
}

json strip_timing(json report) {
  if (report.is_object()) {
    report.erase("timing");
    for (auto& [k, v] : report.items()) v = strip_timing(v);
  } else if (report.is_array()) {
    for (auto& v : report) v = strip_timing(v);
  }
  return report;
}

std::string list_catalog(const std::string& family, const std::string& catalog_file) {
  std::vector<CatalogEntry> entries = builtin_catalog();
  if (!catalog_file.empty())
    for (auto& e : load_catalog_file(catalog_file)) entries.push_back(std::move(e));
  std::ostringstream os;
  os << std::left << std::setw(28) << "id" << std::setw(20) << "family" << std::setw(8) << "checks" << "digest\n";
  for (const auto& e : entries) {
    if (!family.empty() && e.family != family) continue;
    os << std::setw(28) << e.id << std::setw(20) << e.family << std::setw(8) << e.expected.size() << entry_digest(e)
       << "\n";
  }
  return os.str();
}

}  // namespace semiconvex
