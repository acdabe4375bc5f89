#include "movedg/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace movedg {

namespace {

double parse_number(const std::string& key, const std::string& value) {
  // power-of-two literals like 2^-16 are exact in binary64
  if (value.rfind("2^", 0) == 0) {
    size_t used = 0;
    const int k = std::stoi(value.substr(2), &used);
    if (used + 2 != value.size()) throw ConfigError(key + ": malformed power-of-two literal");
    return std::ldexp(1.0, k);
  }
  size_t used = 0;
  const double v = std::stod(value, &used);
  if (used != value.size()) throw ConfigError(key + ": malformed number '" + value + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  size_t used = 0;
  const int v = std::stoi(value, &used);
  if (used != value.size()) throw ConfigError(key + ": malformed integer '" + value + "'");
  return v;
}

std::string trimmed(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  const auto b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "scenario") scenario = value;
  else if (key == "variant") variant = value;
  else if (key == "n") n = parse_int(key, value);
  else if (key == "p") p = parse_int(key, value);
  else if (key == "epsilon") epsilon = parse_number(key, value);
  else if (key == "dt") dt = parse_number(key, value);
  else if (key == "steps") steps = parse_int(key, value);
  else if (key == "substeps") substeps = parse_int(key, value);
  else if (key == "theta") theta = parse_number(key, value);
  else if (key == "alpha") alpha = value == "auto" ? 0.0 : parse_number(key, value);
  else if (key == "gamma0") gamma0 = parse_number(key, value);
  else if (key == "cadence") cadence = parse_int(key, value);
  else if (key == "outdir") outdir = value;
  else if (key == "seed") seed = static_cast<std::uint64_t>(std::stoull(value));
  else if (key == "initial_projection") initial_projection = value;
  else if (key == "diagonal") diagonal = value;
  else throw ConfigError("unknown key '" + key + "'");
}

void RunConfig::validate() const {
  if (scenario != "boundary_layer" && scenario != "smooth")
    throw ConfigError("scenario: expected boundary_layer or smooth");
  if (scenario == "boundary_layer" && variant != "literal" && variant != "stream_function")
    throw ConfigError("variant: expected literal or stream_function");
  if (scenario == "smooth" && variant != "none" && variant != "full" && variant != "literal")
    throw ConfigError("variant: expected none, full or literal for the smooth scenario");
  if (n < 2) throw ConfigError("n: must be >= 2");
  if (p < 1 || p > 4) throw ConfigError("p: must be in [1,4]");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon: must be positive");
  if (!(dt > 0.0)) throw ConfigError("dt: must be positive");
  if (steps < 0) throw ConfigError("steps: must be >= 0");
  if (substeps < 1) throw ConfigError("substeps: must be >= 1");
  if (theta != 1.0 && theta != -1.0) throw ConfigError("theta: must be -1 or 1");
  if (alpha < 0.0) throw ConfigError("alpha: must be positive or auto");
  if (gamma0 < 0.0) throw ConfigError("gamma0: must be >= 0");
  if (cadence < 1) throw ConfigError("cadence: must be >= 1");
  if (initial_projection != "weighted" && initial_projection != "plain")
    throw ConfigError("initial_projection: expected weighted or plain");
  if (diagonal != "fixed" && diagonal != "alternating")
    throw ConfigError("diagonal: expected fixed or alternating");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trimmed(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    try {
      cfg.set(trimmed(line.substr(0, eq)), trimmed(line.substr(eq + 1)));
    } catch (const std::exception& err) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + err.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string describe(const RunConfig& cfg) {
  const std::string alpha = cfg.alpha == 0.0 ? "auto" : std::to_string(cfg.alpha);
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "scenario=%s variant=%s n=%d p=%d epsilon=%.17g dt=%.17g steps=%d substeps=%d "
                "theta=%g alpha=%s gamma0=%.17g cadence=%d seed=%llu initial_projection=%s "
                "diagonal=%s",
                cfg.scenario.c_str(), cfg.variant.c_str(), cfg.n, cfg.p, cfg.epsilon, cfg.dt,
                cfg.steps, cfg.substeps, cfg.theta, alpha.c_str(), cfg.gamma0, cfg.cadence,
                static_cast<unsigned long long>(cfg.seed), cfg.initial_projection.c_str(),
                cfg.diagonal.c_str());
  return buf;
}

}  // namespace movedg
