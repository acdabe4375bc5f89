#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace movedg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Run parameters; defaults reproduce the boundary-layer experiment
/// (n=9, eps=0.01, dt=2^-16, 12 steps, flow substeps 2, symmetric penalty
/// with automatic alpha, no reaction shift).
struct RunConfig {
  std::string scenario = "boundary_layer";  // boundary_layer | smooth
  std::string variant = "literal";          // literal | stream_function | none | full
  int n = 9;
  int p = 1;
  double epsilon = 0.01;
  double dt = 0.0000152587890625;  // 2^-16
  int steps = 12;
  int substeps = 2;
  double theta = 1.0;
  double alpha = 0.0;  // 0 = auto (max(10, 2 C_T))
  double gamma0 = 0.0;
  int cadence = 1;
  std::string outdir = "out";
  std::uint64_t seed = 7052394u;
  std::string initial_projection = "weighted";  // weighted | plain
  std::string diagonal = "fixed";               // fixed | alternating

  void set(const std::string& key, const std::string& value);  // throws ConfigError
  void validate() const;                                       // throws ConfigError
};

/// key=value per line, '#' comments, unknown keys rejected with the line
/// number. "2^k" literals are honoured exactly for dt.
RunConfig parse_config(const std::string& text);

RunConfig parse_config_file(const std::string& path);

std::string describe(const RunConfig& cfg);

}  // namespace movedg
