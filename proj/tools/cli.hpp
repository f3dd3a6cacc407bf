#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdkit/floquet_chart.hpp"
#include "mdkit/integrator.hpp"
#include "mdkit/types.hpp"

namespace mdkit::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kHypothesisViolation = 3,
  kNonConvergence = 4,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IntegratorSection {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int steps_per_period = 4000;
  std::optional<bool> fixed_step;  ///< unset: command default (chart/transition fixed, others adaptive)
};

struct PredictSection {
  double residual_tol = 1e-10;
};

struct BifurcationSection {
  floquet::Axis x0{-1.5, 1.5, 7};
  floquet::Axis y0{-1.5, 1.5, 7};
  int quad_points = 2048;
};

struct ShootSection {
  double tol = 1e-10;
  int max_iter = 25;
  std::optional<State> initial;  ///< unset: averaging prediction
  int reclose_periods = 5;
  int samples = 200;
};

struct ConvergeSection {
  std::vector<double> eps_list{1e-2, 5e-3, 2.5e-3};
};

struct ChartSection {
  floquet::Axis delta{0.0, 3.0, 101};
  floquet::Axis epsilon{0.0, 1.0, 21};
  double margin = floquet::kDefaultMargin;
};

struct TransitionSection {
  floquet::Axis epsilon{0.0, 0.2, 5};
  bool bisect = false;
  double bisect_tol = 1e-10;
};

struct TrajectorySection {
  double m0 = 0.0;
  double n0 = 0.0;
  double t_end = 50.0;
  int samples = 501;
};

struct SlowflowSection {
  double omega_1 = 1.0;
  floquet::Axis sweep{-1.0, 1.0, 41};
  std::optional<TrajectorySection> trajectory;
};

/// Fully-resolved configuration document.
struct RunConfig {
  ModelParams model{1.0, 1.0, 0.01, 1.0};
  ForcingSeries forcing{{1.0}, {}};
  IntegratorSection integrator;
  PredictSection predict;
  BifurcationSection bifurcation;
  ShootSection shoot;
  ConvergeSection converge;
  ChartSection chart;
  TransitionSection transition;
  SlowflowSection slowflow;
};

/// Parses a config document, filling defaults. Unknown keys and wrong types throw ConfigError.
[[nodiscard]] RunConfig parse_config(const nlohmann::json& doc);

/// Inverse of parse_config: every field present (optional fields as null).
[[nodiscard]] nlohmann::json to_json(const RunConfig& cfg);

/// Integrator options for a command (fixed-step resolution applied).
[[nodiscard]] IntegratorOptions integrator_for(const RunConfig& cfg, const std::string& command);

/// %.17g, "nan"/"inf" for non-finite values.
[[nodiscard]] std::string format_double(double v);

/// Entry point shared by the executable and the tests. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mdkit::cli
