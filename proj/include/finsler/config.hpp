#pragma once

#include <optional>

#include "finsler/audit.hpp"

namespace finsler {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FlowRunSpec {
  std::string family = "conformal";  // conformal | conformal-log | randers-scale
  FlowConfig config;
  std::vector<double> theta0 = {1.0};
};

/// Everything one CLI run needs; parsed and validated before any
/// computation (unknown keys rejected with their location).
struct RunConfig {
  FinslerMetricSpec spec;
  int ydirs_per_point = 4;
  uint64_t seed = 12345;
  FDConfig fd;
  AuditOptions audit;
  std::vector<std::string> audit_cases;  // empty = every case
  double einstein_tol = 1e-4;
  std::optional<FlowRunSpec> flow;
  std::string echo;  // canonical JSON echo for report headers
};

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin);
RunConfig parse_config_file(const std::string& path);

}  // namespace finsler
