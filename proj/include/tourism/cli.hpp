#pragma once

// Batch command-line front end. Every command reads an optional JSON config
// file, lets flags override it, and writes plot-ready CSV/JSON files whose
// headers identify the effective configuration.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tourism/dataio.hpp"
#include "tourism/error.hpp"
#include "tourism/flow.hpp"
#include "tourism/gsa.hpp"
#include "tourism/io_util.hpp"
#include "tourism/moea.hpp"
#include "tourism/scenario.hpp"
#include "tourism/sd_core.hpp"

namespace tourism::cli {

using nlohmann::json;

inline constexpr std::string_view kVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kConfig = 2, kData = 3, kNumeric = 4 };

// ---------------------------------------------------------------------------
// Configuration

/// Locates the first line of `text` that mentions `"key"`, for messages
/// about values that parsed but failed validation.
inline std::optional<std::size_t> line_of_key(std::string_view text,
                                              std::string_view key) {
  const std::string needle = "\"" + std::string(key) + "\"";
  const auto pos = text.find(needle);
  if (pos == std::string_view::npos) return std::nullopt;
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

struct ConfigSource {
  std::string path;
  std::string text;
  json doc = json::object();
};

inline ConfigSource parse_config_text(std::string text, std::string path) {
  ConfigSource src;
  src.path = std::move(path);
  src.text = std::move(text);
  try {
    src.doc = json::parse(src.text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, src.text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < upto; ++i) {
      if (src.text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(src.path + ":" + std::to_string(line) + ":" +
                      std::to_string(col) + ": malformed JSON");
  }
  if (!src.doc.is_object()) {
    throw ConfigError(src.path + ":1: top level must be a JSON object");
  }
  return src;
}

inline ConfigSource load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

/// Typed access to the JSON document with path- and line-anchored errors.
class Reader {
 public:
  Reader(const ConfigSource& src) : src_(&src) {}

  [[noreturn]] void fail(std::string_view key, const std::string& what) const {
    std::string where = src_->path.empty() ? "config" : src_->path;
    if (const auto line = line_of_key(src_->text, key)) {
      where += ":" + std::to_string(*line);
    }
    throw ConfigError(where + ": '" + std::string(key) + "' " + what);
  }

  double number(const json& obj, std::string_view key, double fallback) const {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) return fallback;
    if (!it->is_number()) fail(key, "must be a number");
    return it->get<double>();
  }

  std::uint64_t count(const json& obj, std::string_view key,
                      std::uint64_t fallback) const {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) return fallback;
    if (!it->is_number_unsigned()) fail(key, "must be a non-negative integer");
    return it->get<std::uint64_t>();
  }

  std::string text(const json& obj, std::string_view key,
                   const std::string& fallback) const {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) return fallback;
    if (!it->is_string()) fail(key, "must be a string");
    return it->get<std::string>();
  }

  const json& section(const json& obj, std::string_view key) const {
    static const json empty = json::object();
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) return empty;
    if (!it->is_object()) fail(key, "must be an object");
    return *it;
  }

 private:
  const ConfigSource* src_;
};

struct Overrides {
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

/// The resolved model inputs shared by every command.
struct Setup {
  std::string source_label;  // preset name or dataset path
  std::optional<data::RegionPreset> preset;
  sd::ExogenousSeries exog;
  sd::ModelCoefficients coefficients;
  sd::PolicyBounds bounds = sd::PolicyBounds::juneau();
  sd::PolicyVector policy;
  sd::SimState init;
  double infra_efficiency = 0.0;
  double marketing_efficiency = 0.0;
  double community_efficiency = 0.0;
};

struct RunContext {
  ConfigSource config;
  json effective;  // config after flag overrides; hashed into metadata
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = ".";
  std::string command;

  std::string config_hash() const {
    return io::hex64(io::fnv1a64(effective.dump()));
  }

  std::uint64_t required_seed() const {
    if (!seed) throw ConfigError("a seed is required for '" + command + "'");
    return *seed;
  }

  std::string source_name() const {
    if (effective.contains("preset")) return effective["preset"].get<std::string>();
    return "dataset";
  }

  io::Metadata metadata() const {
    return {{"tool", "tourism"},
            {"version", std::string(kVersion)},
            {"command", command},
            {"config_hash", config_hash()},
            {"seed", seed ? std::to_string(*seed) : std::string("none")},
            {"preset", source_name()}};
  }
};

inline RunContext make_context(std::string command, ConfigSource cfg,
                               const Overrides& ov) {
  RunContext ctx;
  ctx.command = std::move(command);
  ctx.config = std::move(cfg);
  ctx.effective = ctx.config.doc;
  auto& e = ctx.effective;
  if (ov.preset) {
    e.erase("dataset");
    e["preset"] = *ov.preset;
  }
  if (ov.seed) e["seed"] = *ov.seed;
  Reader r(ctx.config);
  if (e.contains("seed")) {
    if (!e["seed"].is_number_unsigned()) r.fail("seed", "must be a non-negative integer");
    ctx.seed = e["seed"].get<std::uint64_t>();
  }
  // The output location is not part of the run's identity.
  if (e.contains("out")) {
    if (!e["out"].is_string()) r.fail("out", "must be a string");
    ctx.out_dir = e["out"].get<std::string>();
    e.erase("out");
  }
  if (ov.out) ctx.out_dir = *ov.out;
  return ctx;
}

inline void read_fields(const Reader& r, const json& obj, std::string_view where,
                        sd::PolicyVector& policy) {
  for (const auto& [k, v] : obj.items()) {
    double* f = sd::find_field(policy, sd::kPolicyFields, k);
    if (!f) r.fail(k, "is not a policy variable in '" + std::string(where) + "'");
    if (!v.is_number()) r.fail(k, "must be a number");
    *f = v.get<double>();
  }
}

inline Setup resolve_setup(const RunContext& ctx) {
  const auto& e = ctx.effective;
  Reader r(ctx.config);
  const bool has_preset = e.contains("preset");
  const bool has_dataset = e.contains("dataset");
  if (has_preset == has_dataset) {
    throw ConfigError("exactly one of 'preset' and 'dataset' must be given");
  }
  Setup s;
  const auto data_seed = r.count(e, "data_seed", 1);
  std::optional<double> init_env;
  if (e.contains("initial_environment")) {
    init_env = r.number(e, "initial_environment", 0.0);
  }

  if (has_preset) {
    const auto name = r.text(e, "preset", "");
    s.preset = data::preset_by_name(name);
    s.source_label = name;
    s.exog = data::synth_dataset(*s.preset, data_seed);
    s.coefficients = s.preset->coefficients;
    s.bounds = s.preset->bounds;
    s.policy = s.preset->nominal_policy;
    s.infra_efficiency = s.preset->infra_efficiency;
    s.marketing_efficiency = s.preset->marketing_efficiency;
    s.community_efficiency = s.preset->community_efficiency;
    if (!init_env) init_env = data::draw_initial_environment(*s.preset, data_seed);
  } else {
    const auto path = r.text(e, "dataset", "");
    data::ColumnMap map;
    for (const auto& [k, v] : r.section(e, "columns").items()) {
      if (!v.is_string()) r.fail(k, "column mapping must be a string");
      map[k] = v.get<std::string>();
    }
    auto table = data::load_table(path, map);
    s.exog = data::interpolate_missing(table);
    s.source_label = path;
    s.policy = data::juneau_preset().nominal_policy;
    if (!init_env) init_env = data::juneau_preset().initial_environment.mean;
  }

  for (const auto& [k, v] : r.section(e, "coefficients").items()) {
    double* f = sd::find_field(s.coefficients, sd::kCoefficientFields, k);
    if (!f) r.fail(k, "is not a model coefficient");
    if (!v.is_number()) r.fail(k, "must be a number");
    *f = v.get<double>();
  }
  try {
    s.coefficients.validate();
  } catch (const DomainError& ex) {
    throw ConfigError(std::string("coefficients: ") + ex.what());
  }

  read_fields(r, r.section(e, "policy"), "policy", s.policy);

  for (const auto& [k, v] : r.section(e, "bounds").items()) {
    std::size_t idx = sd::kPolicySize;
    for (std::size_t i = 0; i < sd::kPolicySize; ++i) {
      if (sd::kPolicyNames[i] == k) idx = i;
    }
    if (idx == sd::kPolicySize) r.fail(k, "is not a policy variable");
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      r.fail(k, "bounds must be [low, high]");
    }
    s.bounds.bounds[idx] = {v[0].get<double>(), v[1].get<double>()};
    if (!(s.bounds.bounds[idx].lo <= s.bounds.bounds[idx].hi)) {
      r.fail(k, "bounds need low <= high");
    }
  }

  const auto& fb = r.section(e, "feedback");
  s.infra_efficiency = r.number(fb, "infra_efficiency", s.infra_efficiency);
  s.marketing_efficiency = r.number(fb, "marketing_efficiency", s.marketing_efficiency);
  s.community_efficiency = r.number(fb, "community_efficiency", s.community_efficiency);

  try {
    sd::validate_policy(s.policy);
    s.init = sd::initial_state(s.exog, *init_env);
  } catch (const DomainError& ex) {
    throw ConfigError(ex.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Output helpers

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir_.string() + "'");
  }

  std::ofstream open(const std::string& name) {
    const auto p = dir_ / name;
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write '" + p.string() + "'");
    written_.push_back(p.string());
    return f;
  }

  void write_json(const std::string& name, const json& j) {
    auto f = open(name);
    f << j.dump(2) << '\n';
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> written_;
};

inline std::string num(double v) { return io::format_number(v); }

/// Run metadata plus the preset's stated data assumptions.
inline io::Metadata setup_metadata(const RunContext& ctx, const Setup& s) {
  auto meta = ctx.metadata();
  if (s.preset) {
    for (const auto& a : s.preset->assumptions) meta.emplace_back("assumption", a);
  }
  return meta;
}

inline json to_json(const io::Metadata& meta) {
  json m = json::object();
  json assumptions = json::array();
  for (const auto& [k, v] : meta) {
    if (k == "assumption") {
      assumptions.push_back(v);
    } else {
      m[k] = v;
    }
  }
  if (!assumptions.empty()) m["assumptions"] = assumptions;
  return m;
}

inline json objectives_json(const sd::Objectives& f) {
  return {{"f1", f[0]}, {"f2", f[1]}, {"f3", f[2]}};
}

// ---------------------------------------------------------------------------
// Commands

inline void cmd_simulate(const RunContext& ctx, OutputDir& out) {
  const auto s = resolve_setup(ctx);
  const auto res = sd::simulate(s.policy, s.exog, s.coefficients, s.init);
  const auto& tr = res.trajectory;

  const auto meta = setup_metadata(ctx, s);
  auto f = out.open("trajectory.csv");
  io::write_metadata(f, meta);
  f << "year,visitors,environment,satisfaction,net_revenue_cum,"
       "effective_price,potential_visitors,tourism_revenue,gov_revenue_total,"
       "env_spending,gov_spending_total,net_revenue\n";
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const auto& st = tr.states[i];
    f << tr.years[i] << ',' << num(st.visitors) << ',' << num(st.environment)
      << ',' << num(st.satisfaction) << ',' << num(st.net_revenue_cum);
    if (i == 0) {
      f << ",,,,,,,\n";
      continue;
    }
    const auto& d = tr.annual[i - 1];
    f << ',' << num(d.effective_price) << ',' << num(d.potential_visitors) << ','
      << num(d.tourism_revenue) << ',' << num(d.gov_revenue_total) << ','
      << num(d.env_spending) << ',' << num(d.gov_spending_total) << ','
      << num(d.net_revenue) << '\n';
  }

  json j = objectives_json(res.objectives);
  j["meta"] = to_json(meta);
  json pol = json::object();
  const auto g = s.policy.to_array();
  for (std::size_t i = 0; i < sd::kPolicySize; ++i) {
    pol[std::string(sd::kPolicyNames[i])] = g[i];
  }
  j["policy"] = pol;
  out.write_json("objectives.json", j);
}

inline moea::EAConfig read_ea_config(const RunContext& ctx) {
  Reader r(ctx.config);
  const auto& sec = r.section(ctx.effective, "optimize");
  moea::EAConfig c;
  c.population_size = r.count(sec, "population", c.population_size);
  c.generations = r.count(sec, "generations", c.generations);
  c.crossover_probability = r.number(sec, "crossover_probability", c.crossover_probability);
  c.eta_c = r.number(sec, "eta_c", c.eta_c);
  c.eta_m = r.number(sec, "eta_m", c.eta_m);
  c.mutation_probability = r.number(sec, "mutation_probability", c.mutation_probability);
  c.plateau_window = r.count(sec, "plateau_window", c.plateau_window);
  c.plateau_tolerance = r.number(sec, "plateau_tolerance", c.plateau_tolerance);
  c.seed = ctx.required_seed();
  c.validate();
  return c;
}

inline void cmd_optimize(const RunContext& ctx, OutputDir& out) {
  const auto s = resolve_setup(ctx);
  const auto cfg = read_ea_config(ctx);
  Reader r(ctx.config);
  sd::Objectives ref{0.0, 0.0, 0.0};
  const auto& sec = r.section(ctx.effective, "optimize");
  if (sec.contains("reference")) {
    const auto& v = sec["reference"];
    if (!v.is_array() || v.size() != 3) r.fail("reference", "must be [f1, f2, f3]");
    for (std::size_t i = 0; i < 3; ++i) {
      if (!v[i].is_number()) r.fail("reference", "must hold numbers");
      ref[i] = v[i].get<double>();
    }
  }
  const auto problem = moea::policy_problem(s.bounds, s.exog, s.coefficients, s.init, ref);
  const auto res = moea::evolve(problem, cfg);

  auto front = res.front.individuals;
  std::sort(front.begin(), front.end(), [](const auto& a, const auto& b) {
    return a.objectives > b.objectives;
  });
  for (std::size_t i = 0; i < front.size(); ++i) {
    for (std::size_t j = 0; j < front.size(); ++j) {
      if (moea::dominates<3>(front[i].objectives, front[j].objectives)) {
        throw NumericError("front contains a dominated solution");
      }
    }
  }

  const auto meta = setup_metadata(ctx, s);
  auto f = out.open("front.csv");
  io::write_metadata(f, meta);
  for (auto n : sd::kPolicyNames) f << n << ',';
  f << "f1,f2,f3\n";
  for (const auto& ind : front) {
    for (double g : ind.genome) f << num(g) << ',';
    f << num(ind.objectives[0]) << ',' << num(ind.objectives[1]) << ','
      << num(ind.objectives[2]) << '\n';
  }

  auto h = out.open("hypervolume.csv");
  io::write_metadata(h, meta);
  h << "generation,hypervolume\n";
  for (std::size_t g = 0; g < res.hypervolume_log.size(); ++g) {
    h << g << ',' << num(res.hypervolume_log[g]) << '\n';
  }

  json bubble;
  bubble["meta"] = to_json(meta);
  bubble["encoding"] = {{"x", "f1 cumulative net revenue"},
                        {"y", "f2 final environment index"},
                        {"color", "f3 final satisfaction"}};
  bubble["generations_run"] = res.generations_run;
  bubble["stopped_on_plateau"] = res.stopped_on_plateau;
  json pts = json::array();
  for (const auto& ind : front) {
    pts.push_back({{"x", ind.objectives[0]},
                   {"y", ind.objectives[1]},
                   {"color", ind.objectives[2]}});
  }
  bubble["points"] = pts;
  out.write_json("bubble.json", bubble);
}

inline gsa::ParameterSpace read_space(const RunContext& ctx, const Setup& s,
                                      const json& sec) {
  Reader r(ctx.config);
  if (!sec.contains("parameters")) {
    const double band = r.number(sec, "band", 0.2);
    data::RegionPreset base = s.preset ? *s.preset : data::juneau_preset();
    base.coefficients = s.coefficients;
    base.nominal_policy = s.policy;
    base.bounds = s.bounds;
    return gsa::default_space(base, band);
  }
  const auto& list = sec["parameters"];
  if (!list.is_array()) r.fail("parameters", "must be a list");
  gsa::ParameterSpace space;
  for (const auto& p : list) {
    if (!p.is_object() || !p.contains("name")) r.fail("parameters", "entries need a name");
    gsa::Parameter param;
    param.name = r.text(p, "name", "");
    param.bounds = {r.number(p, "low", 0.0), r.number(p, "high", 0.0)};
    space.parameters.push_back(param);
  }
  space.validate();
  return space;
}

inline void cmd_sensitivity(const RunContext& ctx, OutputDir& out) {
  const auto s = resolve_setup(ctx);
  Reader r(ctx.config);
  const auto& sec = r.section(ctx.effective, "sensitivity");
  const auto method = gsa::parse_method(r.text(sec, "method", "morris"));
  const auto selector = r.text(sec, "output", "all");
  gsa::parse_outputs(selector);
  const auto space = read_space(ctx, s, sec);

  gsa::AnalysisConfig cfg;
  cfg.seed = ctx.required_seed();
  cfg.morris_trajectories = r.count(sec, "trajectories", cfg.morris_trajectories);
  cfg.morris_levels = r.count(sec, "levels", cfg.morris_levels);
  cfg.sobol_n = r.count(sec, "n", cfg.sobol_n);
  const auto sampler = r.text(sec, "sampler", "sobol");
  if (sampler == "sobol") {
    cfg.sampler = gsa::Sampler::sobol;
  } else if (sampler == "random") {
    cfg.sampler = gsa::Sampler::random;
  } else {
    r.fail("sampler", "must be 'sobol' or 'random'");
  }
  cfg.bootstrap.resamples = r.count(sec, "bootstrap", cfg.bootstrap.resamples);
  cfg.bootstrap.seed = cfg.seed ^ 0x5bd1e995ULL;

  const gsa::ModelSetup model{s.exog, s.coefficients, s.policy, s.init};
  const auto rep = gsa::analyze_model(space, selector, method, model, cfg);

  auto meta = setup_metadata(ctx, s);
  meta.emplace_back("method", method == gsa::Method::morris ? "morris" : "sobol");
  if (method == gsa::Method::sobol) {
    meta.emplace_back("sampler", std::string(gsa::sampler_name(cfg.sampler)));
    meta.emplace_back("n", std::to_string(cfg.sobol_n));
    meta.emplace_back("bootstrap", std::to_string(cfg.bootstrap.resamples));
  } else {
    meta.emplace_back("trajectories", std::to_string(cfg.morris_trajectories));
    meta.emplace_back("levels", std::to_string(cfg.morris_levels));
  }
  meta.emplace_back("evaluations", std::to_string(rep.evaluations));

  if (method == gsa::Method::morris) {
    auto f = out.open("morris.csv");
    io::write_metadata(f, meta);
    f << "output,rank,parameter,mu_star,mu,sigma\n";
    for (std::size_t m : rep.outputs) {
      const auto order = rep.ranking(m);
      for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& e = rep.morris[m].entries[order[k]];
        f << gsa::kOutputNames[m] << ',' << k + 1 << ',' << e.name << ','
          << num(e.mu_star) << ',' << num(e.mu) << ',' << num(e.sigma) << '\n';
      }
    }
  } else {
    auto f = out.open("sobol.csv");
    io::write_metadata(f, meta);
    f << "output,rank,parameter,S_i,S_i_low,S_i_high,S_Ti,S_Ti_low,S_Ti_high\n";
    for (std::size_t m : rep.outputs) {
      const auto order = rep.ranking(m);
      for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& e = rep.sobol[m].entries[order[k]];
        f << gsa::kOutputNames[m] << ',' << k + 1 << ',' << e.name << ','
          << num(e.first) << ',' << num(e.first_low) << ',' << num(e.first_high)
          << ',' << num(e.total) << ',' << num(e.total_low) << ','
          << num(e.total_high) << '\n';
      }
    }
  }

  json mj;
  mj["meta"] = to_json(meta);
  mj["rows"] = rep.parameters;
  mj["columns"] = {"f1", "f2", "f3"};
  mj["measure"] = method == gsa::Method::morris ? "mu_star / column max" : "S_Ti";
  json mat = json::array();
  for (const auto& row : rep.matrix) mat.push_back({row[0], row[1], row[2]});
  mj["matrix"] = mat;
  out.write_json("matrix.json", mj);
}

inline std::vector<scenario::AllocationPolicy> read_scenarios(const RunContext& ctx,
                                                              const Setup& s) {
  Reader r(ctx.config);
  const auto& sec = r.section(ctx.effective, "scenario");
  if (!sec.contains("scenarios")) {
    if (!s.preset) throw ConfigError("'scenario.scenarios' is required with a dataset");
    return scenario::scenarios_for(s.preset->name);
  }
  const auto& list = sec["scenarios"];
  if (!list.is_array()) r.fail("scenarios", "must be a list");
  if (list.empty()) r.fail("scenarios", "must not be empty");
  std::vector<scenario::AllocationPolicy> out;
  for (const auto& e : list) {
    if (!e.is_object()) r.fail("scenarios", "entries must be objects");
    scenario::AllocationPolicy p;
    p.name = r.text(e, "name", "scenario " + std::to_string(out.size() + 1));
    p.env = r.number(e, "env", 0.0);
    p.infra = r.number(e, "infra", 0.0);
    p.community = r.number(e, "community", 0.0);
    p.marketing = r.number(e, "marketing", 0.0);
    p.validate();
    out.push_back(p);
  }
  return out;
}

inline void cmd_scenario(const RunContext& ctx, OutputDir& out) {
  const auto s = resolve_setup(ctx);
  const auto list = read_scenarios(ctx, s);
  scenario::BaseConfig base{s.exog, s.coefficients, s.policy, s.init,
                            {s.infra_efficiency, s.marketing_efficiency,
                             s.community_efficiency}};
  const auto cmp = scenario::compare_scenarios(list, base);

  const auto meta = setup_metadata(ctx, s);
  auto f = out.open("scenarios.csv");
  io::write_metadata(f, meta);
  f << "scenario,year,variable,value\n";
  for (const auto& run : cmp.runs) {
    const auto name = io::csv_escape(run.name);
    const auto& tr = run.trajectory;
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
      const auto& st = tr.states[i];
      const int y = tr.years[i];
      f << name << ',' << y << ",visitors," << num(st.visitors) << '\n';
      f << name << ',' << y << ",environment," << num(st.environment) << '\n';
      f << name << ',' << y << ",satisfaction," << num(st.satisfaction) << '\n';
      f << name << ',' << y << ",net_revenue_cum," << num(st.net_revenue_cum) << '\n';
      if (i > 0) {
        const auto& yr = run.years[i - 1];
        f << name << ',' << y << ",net_revenue," << num(tr.annual[i - 1].net_revenue) << '\n';
        f << name << ',' << y << ",capacity_limit," << num(yr.capacity_limit) << '\n';
        f << name << ',' << y << ",reinvested," << num(yr.amounts.total()) << '\n';
      }
    }
  }

  json j;
  j["meta"] = to_json(meta);
  j["years"] = cmp.years;
  json rows = json::array();
  for (const auto& run : cmp.runs) {
    json row = objectives_json(run.objectives);
    row["name"] = run.name;
    row["normalization_scale"] = run.scale;
    row["normalized"] = run.scale != 1.0;
    row["shares"] = {{"env", run.applied.env},
                     {"infra", run.applied.infra},
                     {"community", run.applied.community},
                     {"marketing", run.applied.marketing}};
    rows.push_back(row);
  }
  j["scenarios"] = rows;
  out.write_json("scenarios.json", j);
}

inline flow::FlowPreset read_flow(const RunContext& ctx) {
  Reader r(ctx.config);
  auto fp = flow::iceland_flow_preset();
  const auto& sec = r.section(ctx.effective, "redistribute");
  if (sec.contains("sites")) {
    const auto& list = sec["sites"];
    if (!list.is_array() || list.empty()) r.fail("sites", "must be a non-empty list");
    fp.sites.clear();
    for (const auto& e : list) {
      if (!e.is_object()) r.fail("sites", "entries must be objects");
      flow::SiteState st;
      st.name = r.text(e, "name", "site " + std::to_string(fp.sites.size() + 1));
      st.environment = r.number(e, "environment", 0.5);
      st.satisfaction = r.number(e, "satisfaction", 0.5);
      st.visitors = r.number(e, "visitors", 0.0);
      st.capacity = r.number(e, "capacity", 0.0);
      st.population = r.number(e, "population", 0.0);
      fp.sites.push_back(st);
    }
  }
  const auto& pj = r.section(sec, "params");
  auto& p = fp.params;
  p.phi = r.number(pj, "phi", p.phi);
  p.dev_boost = r.number(pj, "dev_boost", p.dev_boost);
  p.alpha0 = r.number(pj, "alpha0", p.alpha0);
  p.alpha1 = r.number(pj, "alpha1", p.alpha1);
  p.alpha2 = r.number(pj, "alpha2", p.alpha2);
  p.alpha3 = r.number(pj, "alpha3", p.alpha3);
  p.alpha4 = r.number(pj, "alpha4", p.alpha4);
  p.env_effectiveness = r.number(pj, "env_effectiveness", p.env_effectiveness);
  p.beta_crowd = r.number(pj, "beta_crowd", p.beta_crowd);
  p.beta_co2 = r.number(pj, "beta_co2", p.beta_co2);
  p.recovery = r.number(pj, "recovery", p.recovery);
  p.rho_comm = r.number(pj, "rho_comm", p.rho_comm);
  p.rho_over = r.number(pj, "rho_over", p.rho_over);
  p.rho_e = r.number(pj, "rho_e", p.rho_e);
  p.co2_per_visitor = r.number(pj, "co2_per_visitor", p.co2_per_visitor);

  if (sec.contains("schedule")) {
    const auto& sj = sec["schedule"];
    if (!sj.is_object() || !sj.contains("years") || !sj.contains("controls")) {
      r.fail("schedule", "needs 'years' and 'controls'");
    }
    flow::Schedule sched;
    for (const auto& y : sj["years"]) {
      if (!y.is_number_integer()) r.fail("years", "must be integers");
      sched.years.push_back(y.get<int>());
    }
    for (const auto& row : sj["controls"]) {
      if (!row.is_array()) r.fail("controls", "must be a list per year");
      std::vector<flow::SiteControls> controls;
      for (const auto& c : row) {
        if (!c.is_object()) r.fail("controls", "entries must be objects");
        controls.push_back({r.number(c, "marketing", 0.0), r.number(c, "price", 0.0),
                            r.number(c, "env_fund", 0.0),
                            r.number(c, "community_fund", 0.0)});
      }
      sched.controls.push_back(std::move(controls));
    }
    fp.schedule = std::move(sched);
  } else if (sec.contains("sites")) {
    throw ConfigError("custom sites need a 'redistribute.schedule'");
  }
  if (fp.schedule.years.empty()) throw ConfigError("flow schedule is empty");
  return fp;
}

inline void cmd_redistribute(const RunContext& ctx, OutputDir& out) {
  const auto fp = read_flow(ctx);
  const auto res = flow::redistribute(fp.sites, fp.params, fp.schedule);

  auto f = out.open("flow.csv");
  io::write_metadata(f, ctx.metadata());
  f << "site,year,V,E,S,share,weight\n";
  for (std::size_t i = 0; i < res.sites.size(); ++i) {
    const auto name = io::csv_escape(res.sites[i]);
    for (const auto& y : res.years) {
      f << name << ',' << y.year << ',' << num(y.visitors[i]) << ','
        << num(y.environment[i]) << ',' << num(y.satisfaction[i]) << ','
        << num(y.shares[i]) << ',' << num(y.weights[i]) << '\n';
    }
  }

  json j;
  j["meta"] = to_json(ctx.metadata());
  j["year"] = res.years.back().year;
  json d = json::array();
  for (std::size_t i = 0; i < res.sites.size(); ++i) {
    d.push_back({{"site", res.sites[i]},
                 {"visitors", res.years.back().visitors[i]},
                 {"share", res.final_distribution[i]}});
  }
  j["distribution"] = d;
  out.write_json("flow_final.json", j);
}

inline void cmd_synth(const RunContext& ctx, OutputDir& out) {
  const auto s = resolve_setup(ctx);
  if (!s.preset) throw ConfigError("'synth' needs a preset");
  auto meta = setup_metadata(ctx, s);
  meta.emplace_back("initial_environment", num(s.init.environment));
  for (const auto& w : data::validate_ranges(s.exog, s.preset->envelope)) {
    meta.emplace_back("warning", w);
  }
  auto f = out.open("dataset.csv");
  data::write_series_csv(f, s.exog, meta);
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(int argc, char** argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Sustainable tourism policy modelling toolkit", "tourism"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string config_path;
  Overrides ov;
  std::string preset, out_dir;
  std::uint64_t seed = 0;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "Run the dynamics for one policy vector"},
      {"optimize", "Search Pareto-optimal policies with NSGA-II"},
      {"sensitivity", "Morris or Sobol sensitivity analysis"},
      {"scenario", "Compare surplus allocation scenarios"},
      {"redistribute", "Multi-attraction visitor flow model"},
      {"synth", "Write a synthetic dataset for a preset"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* sc = app.add_subcommand(name, help);
    sc->add_option("--config", config_path, "JSON configuration file");
    sc->add_option("--out", out_dir, "Output directory");
    sc->add_option("--seed", seed, "Random seed");
    sc->add_option("--preset", preset, "Region preset")
        ->check(CLI::IsMember({"juneau", "iceland"}));
    subs.push_back(sc);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  CLI::App* chosen = nullptr;
  for (auto* sc : subs) {
    if (sc->parsed()) chosen = sc;
  }
  if (chosen->count("--preset")) ov.preset = preset;
  if (chosen->count("--seed")) ov.seed = seed;
  if (chosen->count("--out")) ov.out = out_dir;

  try {
    ConfigSource cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    const auto ctx = make_context(chosen->get_name(), std::move(cfg), ov);
    OutputDir dir(ctx.out_dir);
    const auto& name = ctx.command;
    if (name == "simulate") cmd_simulate(ctx, dir);
    else if (name == "optimize") cmd_optimize(ctx, dir);
    else if (name == "sensitivity") cmd_sensitivity(ctx, dir);
    else if (name == "scenario") cmd_scenario(ctx, dir);
    else if (name == "redistribute") cmd_redistribute(ctx, dir);
    else cmd_synth(ctx, dir);
    for (const auto& p : dir.written()) out << "wrote " << p << '\n';
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kConfig;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  }
}

}  // namespace tourism::cli
