#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rou/delay_kernel.hpp"
#include "rou/spectral_models.hpp"

namespace rou {

/// Run parameters shared by the CLI subcommands. Every field can be
/// overridden on the command line; the JSON provides defaults.
struct RunParams {
  double dt = 0.005;
  double T = 20.0;
  int paths = 1000;
  std::uint64_t seed = 0;
  double burn_in = 0.0;       // 0 = auto
  bool stationary_init = false;
};

struct Scenario {
  std::string name;
  DelayKernel kernel;
  ModeSystem system;
  RunParams run;
  // Dirichlet eigenfunctions when the model is dirichlet_1d (else empty).
  std::vector<DirichletMode> eigenfunctions;
};

/// Thrown by load_scenario with every validation problem found, one per
/// line, not just the first.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Parses and validates a scenario file. Unknown keys are rejected to
/// catch typos; dt must divide r.
Scenario load_scenario(const std::string& path);

/// Same, from an in-memory JSON string (used by tests).
Scenario parse_scenario(const std::string& json_text, std::string name);

}  // namespace rou
