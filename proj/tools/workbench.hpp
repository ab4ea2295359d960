#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace febench::workbench {

using json = nlohmann::json;

enum class Kind { number, integer, boolean, string, number_list };

struct ParamSpec {
  std::string key;  // physical quantities carry their unit, e.g. f_mf_hz
  Kind kind = Kind::number;
  json default_value;  // null when required
  std::string doc;
  bool required() const { return default_value.is_null(); }
};

// Resolved parameters of one run, every declared key present.
class Params {
 public:
  Params(json values, std::uint64_t seed) : v_(std::move(values)), seed_(seed) {}
  double num(const std::string& k) const;
  long integer(const std::string& k) const;
  bool flag(const std::string& k) const;
  std::string str(const std::string& k) const;
  std::vector<double> list(const std::string& k) const;
  std::uint64_t seed() const { return seed_; }
  const json& values() const { return v_; }

 private:
  json v_;
  std::uint64_t seed_;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Outputs {
  json results = json::object();
  std::vector<Table> tables;
};

struct Scenario {
  std::string name;
  std::string module;
  std::string anchor;  // the figure or relation it reproduces
  int criterion = 0;   // acceptance criterion, 0 for none
  std::vector<ParamSpec> params;
  std::function<void(const Params&, Outputs&)> run;
};

const std::vector<Scenario>& registry();
const Scenario* find_scenario(const std::string& name);
// substring match on name, module or anchor; empty filter lists everything
std::vector<const Scenario*> list_scenarios(const std::string& filter = "");

struct ScenarioConfig {
  std::string scenario;
  json params = json::object();
  std::string out_dir = "out";
  std::uint64_t seed = 1;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

// Top-level keys: scenario (required), params, out_dir, seed. Anything else is rejected.
ScenarioConfig parse_config(const json& doc);
ScenarioConfig load_config(const std::string& path);
// FEBENCH_SCENARIO, FEBENCH_OUT, FEBENCH_SEED, FEBENCH_PARAM_<key>
void apply_env(ScenarioConfig& cfg, const EnvLookup& env);
// declared defaults merged with the config; unknown, missing or mistyped keys throw with their path
json resolve_params(const ScenarioConfig& cfg);

Outputs evaluate(const ScenarioConfig& cfg);

struct RunManifest {
  std::string config_hash;  // sha256 of the resolved config
  json versions;
  double wall_time_s = 0.0;
  std::vector<std::string> files;
  json to_json() const;
};

// writes <out>/<scenario>.json, one CSV per table, and manifest.json
RunManifest run_scenario(const ScenarioConfig& cfg);

// exponent form for |x| < 1e-3 or > 1e6, shortest round-trip digits
std::string format_number(double x);
std::string to_csv(const Table& t);

// exit codes: 0 ok, 2 validation (bad flags included), 3 numeric, 4 I/O
int cli_main(int argc, char** argv, const EnvLookup& env);

}  // namespace febench::workbench
