#include "workbench.hpp"

#include <fftw3.h>
#include <gsl/gsl_version.h>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <Eigen/Core>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "febench/errors.hpp"

namespace febench::workbench {

namespace fs = std::filesystem;

namespace {

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::number: return "number";
    case Kind::integer: return "integer";
    case Kind::boolean: return "boolean";
    case Kind::string: return "string";
    case Kind::number_list: return "list of numbers";
  }
  return "?";
}

bool matches(Kind k, const json& v) {
  switch (k) {
    case Kind::number: return v.is_number() && std::isfinite(v.get<double>());
    case Kind::integer: return v.is_number_integer();
    case Kind::boolean: return v.is_boolean();
    case Kind::string: return v.is_string();
    case Kind::number_list:
      if (!v.is_array() || v.empty()) return false;
      for (const auto& x : v)
        if (!x.is_number()) return false;
      return true;
  }
  return false;
}

const json& at(const json& v, const std::string& k) {
  auto it = v.find(k);
  if (it == v.end()) throw ValidationError("params." + k + ": not declared by this scenario");
  return *it;
}

std::string sha256_hex(const std::string& s) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  if (EVP_Digest(s.data(), s.size(), md, &n, EVP_sha256(), nullptr) != 1) throw NumericError("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < n; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot write " + p.string());
  f << text;
  if (!f) throw IoError("write failed for " + p.string());
}

}  // namespace

double Params::num(const std::string& k) const { return at(v_, k).get<double>(); }
long Params::integer(const std::string& k) const { return at(v_, k).get<long>(); }
bool Params::flag(const std::string& k) const { return at(v_, k).get<bool>(); }
std::string Params::str(const std::string& k) const { return at(v_, k).get<std::string>(); }
std::vector<double> Params::list(const std::string& k) const { return at(v_, k).get<std::vector<double>>(); }

const Scenario* find_scenario(const std::string& name) {
  for (const auto& s : registry())
    if (s.name == name) return &s;
  return nullptr;
}

std::vector<const Scenario*> list_scenarios(const std::string& filter) {
  std::vector<const Scenario*> out;
  for (const auto& s : registry())
    if (filter.empty() || s.name.find(filter) != std::string::npos || s.module.find(filter) != std::string::npos ||
        s.anchor.find(filter) != std::string::npos)
      out.push_back(&s);
  return out;
}

EnvLookup process_env() {
  return [](const std::string& k) -> std::optional<std::string> {
    const char* v = std::getenv(k.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

ScenarioConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ValidationError("config: top level must be an object");
  ScenarioConfig c;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const auto& k = it.key();
    const auto& v = it.value();
    if (k == "scenario") {
      if (!v.is_string()) throw ValidationError("scenario: expected a string");
      c.scenario = v.get<std::string>();
    } else if (k == "params") {
      if (!v.is_object()) throw ValidationError("params: expected an object");
      c.params = v;
    } else if (k == "out_dir") {
      if (!v.is_string()) throw ValidationError("out_dir: expected a string");
      c.out_dir = v.get<std::string>();
    } else if (k == "seed") {
      if (!(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0)))
        throw ValidationError("seed: expected a non-negative integer");
      c.seed = v.get<std::uint64_t>();
    } else {
      throw ValidationError(k + ": unknown key (allowed: scenario, params, out_dir, seed)");
    }
  }
  if (c.scenario.empty()) throw ValidationError("scenario: required");
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config " + path);
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

void apply_env(ScenarioConfig& cfg, const EnvLookup& env) {
  if (auto v = env("FEBENCH_SCENARIO")) cfg.scenario = *v;
  if (auto v = env("FEBENCH_OUT")) cfg.out_dir = *v;
  if (auto v = env("FEBENCH_SEED")) {
    std::uint64_t s = 0;
    const auto r = std::from_chars(v->data(), v->data() + v->size(), s);
    if (r.ec != std::errc() || r.ptr != v->data() + v->size()) throw ValidationError("FEBENCH_SEED: not an integer");
    cfg.seed = s;
  }
  const auto* sc = find_scenario(cfg.scenario);
  if (!sc) return;  // reported by resolve_params
  for (const auto& ps : sc->params) {
    auto v = env("FEBENCH_PARAM_" + ps.key);
    if (!v) continue;
    // numbers, booleans and lists parse as JSON, anything else is taken as a string
    json parsed = json::parse(*v, nullptr, false);
    cfg.params[ps.key] = parsed.is_discarded() ? json(*v) : parsed;
  }
}

json resolve_params(const ScenarioConfig& cfg) {
  const auto* sc = find_scenario(cfg.scenario);
  if (!sc) throw ValidationError("scenario: unknown scenario \"" + cfg.scenario + "\" (see `febench list`)");
  for (auto it = cfg.params.begin(); it != cfg.params.end(); ++it) {
    bool known = false;
    for (const auto& ps : sc->params) known = known || ps.key == it.key();
    if (!known) throw ValidationError("params." + it.key() + ": unknown key for scenario " + sc->name);
  }
  json out = json::object();
  for (const auto& ps : sc->params) {
    auto it = cfg.params.find(ps.key);
    if (it == cfg.params.end()) {
      if (ps.required()) throw ValidationError("params." + ps.key + ": required by scenario " + sc->name);
      out[ps.key] = ps.default_value;
    } else {
      if (!matches(ps.kind, *it))
        throw ValidationError("params." + ps.key + ": expected " + kind_name(ps.kind) + ", got " + it->dump());
      out[ps.key] = *it;
    }
  }
  return out;
}

Outputs evaluate(const ScenarioConfig& cfg) {
  const auto* sc = find_scenario(cfg.scenario);
  Params p(resolve_params(cfg), cfg.seed);
  Outputs o;
  sc->run(p, o);
  return o;
}

json RunManifest::to_json() const {
  return {{"config_hash", config_hash}, {"versions", versions}, {"wall_time_s", wall_time_s}, {"outputs", files}};
}

RunManifest run_scenario(const ScenarioConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const json resolved = {{"scenario", cfg.scenario}, {"params", resolve_params(cfg)}, {"seed", cfg.seed}};
  const auto o = evaluate(cfg);

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec || !fs::is_directory(cfg.out_dir)) throw IoError("cannot create output directory " + cfg.out_dir);
  RunManifest m;
  const fs::path dir(cfg.out_dir);
  json doc = resolved;
  doc["results"] = o.results;
  const std::string summary = cfg.scenario + ".json";
  write_file(dir / summary, doc.dump(2) + "\n");
  m.files.push_back(summary);
  for (const auto& t : o.tables) {
    const std::string name = cfg.scenario + "_" + t.name + ".csv";
    write_file(dir / name, to_csv(t));
    m.files.push_back(name);
  }
  m.config_hash = sha256_hex(resolved.dump());
  m.versions = {{"febench", "0.1.0"},
                {"gsl", GSL_VERSION},
                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION)},
                {"fftw", std::string(fftw_version)},
                {"openssl", std::string(OPENSSL_VERSION_TEXT)},
                {"compiler", std::string(__VERSION__)}};
  m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_file(dir / "manifest.json", m.to_json().dump(2) + "\n");
  return m;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  const double ax = std::abs(x);
  const auto f = (ax < 1e-3 || ax > 1e6) ? std::chars_format::scientific : std::chars_format::fixed;
  char buf[400];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, f);
  return std::string(buf, r.ptr);
}

std::string to_csv(const Table& t) {
  std::string s;
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
  s += "\n";
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) throw NumericError("table " + t.name + ": row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + format_number(row[i]);
    s += "\n";
  }
  return s;
}

int cli_main(int argc, char** argv, const EnvLookup& env) {
  CLI::App app{"febench: floating-electron qubit workbench"};
  app.require_subcommand(1);

  std::string filter;
  auto* list = app.add_subcommand("list", "list registered scenarios");
  list->add_option("filter", filter, "substring of name, module or anchor");
  bool show_params = false;
  list->add_flag("--params", show_params, "also list each scenario's parameters");

  std::string config_path, scenario, out_dir;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* c) {
    c->add_option("--config", config_path, "JSON config file");
    c->add_option("--scenario", scenario, "scenario name (instead of or overriding the config)");
  };
  auto* validate = app.add_subcommand("validate", "check a config and print it with defaults filled in");
  add_common(validate);
  auto* run = app.add_subcommand("run", "run a scenario and write CSV/JSON outputs");
  add_common(run);
  auto* out_opt = run->add_option("--out", out_dir, "output directory");
  auto* seed_opt = run->add_option("--seed", seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (list->parsed()) {
      for (const auto* s : list_scenarios(filter)) {
        std::cout << s->name << "\t" << (s->criterion ? "#" + std::to_string(s->criterion) : "-") << "\t" << s->module
                  << "\t" << s->anchor << "\n";
        if (show_params)
          for (const auto& p : s->params)
            std::cout << "    " << p.key << " (" << kind_name(p.kind) << ") "
                      << (p.required() ? "required" : "default " + p.default_value.dump()) << ": " << p.doc << "\n";
      }
      return 0;
    }
    ScenarioConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    // --scenario beats FEBENCH_SCENARIO, and must be known before FEBENCH_PARAM_* is read
    apply_env(cfg, [&](const std::string& k) -> std::optional<std::string> {
      if (k == "FEBENCH_SCENARIO" && !scenario.empty()) return scenario;
      return env(k);
    });
    if (cfg.scenario.empty()) throw ValidationError("scenario: give --config or --scenario");
    if (run->parsed()) {
      if (*out_opt) cfg.out_dir = out_dir;
      if (*seed_opt) cfg.seed = seed;
    }
    if (validate->parsed()) {
      const json doc = {{"scenario", cfg.scenario}, {"params", resolve_params(cfg)}, {"seed", cfg.seed},
                        {"out_dir", cfg.out_dir}};
      std::cout << doc.dump(2) << "\n";
      return 0;
    }
    const auto m = run_scenario(cfg);
    std::cout << m.to_json().dump(2) << "\n";
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace febench::workbench
