#include <fstream>
#include <sstream>

#include "cem/scenario.hpp"

namespace cem {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size())
      throw ConfigError(key + ": trailing characters after number '" + value +
                        "' (unit suffixes are not accepted; values are SI)");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError(key + ": cannot parse number '" + value + "'");
  }
}

}  // namespace

ScenarioConfig load_config(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");

    if (key == "scenario") {
      cfg.scenario = value;
    } else if (key == "T") {
      cfg.total_time = parse_number(key, value);
      if (*cfg.total_time <= 0.0) throw ConfigError("T must be positive");
    } else if (key == "dt") {
      if (value == "auto") {
        cfg.dt.reset();
      } else {
        cfg.dt = parse_number(key, value);
        if (*cfg.dt <= 0.0) throw ConfigError("dt must be positive");
      }
    } else if (key == "dt_safety") {
      cfg.dt_safety = parse_number(key, value);
      if (!(cfg.dt_safety > 0.0 && cfg.dt_safety <= 1.0))
        throw ConfigError("dt_safety must be in (0, 1]");
    } else if (key == "gamma") {
      cfg.gamma = parse_number(key, value);
      if (!(cfg.gamma >= 0.5 && cfg.gamma <= 1.0))
        throw ConfigError("gamma must be in [0.5, 1]");
    } else if (key == "cadence") {
      cfg.cadence = static_cast<int>(parse_number(key, value));
      if (cfg.cadence < 1) throw ConfigError("cadence must be >= 1");
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(parse_number(key, value));
      if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "metrics_window") {
      cfg.metrics_window = parse_number(key, value);
    } else if (key.rfind("param.", 0) == 0) {
      const std::string name = key.substr(6);
      if (name.empty()) throw ConfigError("empty parameter name");
      // numeric when possible, string otherwise (e.g. param.grid = coarse)
      try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos == value.size()) {
          cfg.params[name] = v;
          continue;
        }
      } catch (const std::exception&) {
      }
      cfg.string_params[name] = value;
    } else if (key.rfind("material.", 0) == 0) {
      const std::string rest = key.substr(9);
      const size_t dot = rest.find('.');
      if (dot == std::string::npos)
        throw ConfigError(key + ": expected material.<name>.<property>");
      const std::string mat = rest.substr(0, dot);
      const std::string prop = rest.substr(dot + 1);
      static const std::set<std::string> props{"E", "nu", "rho", "Gc", "ft", "alpha"};
      if (!props.count(prop)) throw ConfigError(key + ": unknown material property");
      cfg.material_overrides[mat][prop] = parse_number(key, value);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  if (cfg.scenario.empty()) throw ConfigError("missing required key 'scenario'");
  return cfg;
}

ScenarioConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return load_config(os.str());
}

std::string serialize_config(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "scenario = " << cfg.scenario << "\n";
  if (cfg.total_time) os << "T = " << *cfg.total_time << "\n";
  if (cfg.dt)
    os << "dt = " << *cfg.dt << "\n";
  else
    os << "dt = auto\n";
  os << "dt_safety = " << cfg.dt_safety << "\n";
  os << "gamma = " << cfg.gamma << "\n";
  os << "cadence = " << cfg.cadence << "\n";
  os << "threads = " << cfg.threads << "\n";
  if (!cfg.out_dir.empty()) os << "out = " << cfg.out_dir << "\n";
  if (cfg.metrics_window) os << "metrics_window = " << *cfg.metrics_window << "\n";
  for (const auto& [k, v] : cfg.params) os << "param." << k << " = " << v << "\n";
  for (const auto& [k, v] : cfg.string_params) os << "param." << k << " = " << v << "\n";
  for (const auto& [m, props] : cfg.material_overrides)
    for (const auto& [p, v] : props) os << "material." << m << "." << p << " = " << v << "\n";
  return os.str();
}

}  // namespace cem
