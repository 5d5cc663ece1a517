#ifndef SAIS_EXPERIMENT_HPP
#define SAIS_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sais/adapters.hpp"
#include "sais/estimator.hpp"
#include "sais/sa_engine.hpp"

namespace sais {

struct TargetSpec {
  std::string kind = "normal";  ///< "normal" or "normal-mixture"
  std::vector<double> weights{1.0};
  std::vector<double> means{0.0};
  double sd = 1.0;
};

struct ProposalSpec {
  std::string family = "normal-mean";  ///< "normal-mean", "cauchy-scale" or "mixture"
  std::vector<double> component_means;  ///< mixture only
  double component_sd = 1.0;
};

/// Parameters are in the family's own coordinates: the normal mean, sigma^2
/// for the Cauchy family, and the D-1 free weights for mixtures.
struct ExperimentConfig {
  std::string experiment = "normal-mean";
  TargetSpec target;
  ProposalSpec proposal;
  std::vector<double> theta0{1.0};
  std::string adapter = "exp-family";
  CurvatureMode curvature = CurvatureMode::box_floor;
  std::size_t iterations = 500;
  std::size_t batch = 1;
  GainSchedule gain;
  std::optional<std::vector<double>> box_lo;
  std::optional<std::vector<double>> box_hi;
  std::vector<std::vector<double>> fixed_arms;
  std::size_t replications = 1000;
  std::uint64_t seed = 20090301;
  std::string out = ".";
  std::string format = "csv";
  bool diagnostics = false;
};

std::vector<std::string> preset_names();
/// Built-in configuration for "normal-mean", "cauchy-scale" or "mixture-weights".
ExperimentConfig preset(std::string_view name);

/// Parses JSON. When "experiment" names a preset, missing fields take the preset's values.
ExperimentConfig parse_config(std::string_view json_text);
std::string serialize_config(const ExperimentConfig& config);
/// FNV-1a digest of the experiment-defining fields (output location excluded).
std::string config_digest(const ExperimentConfig& config);

struct ExperimentSetup {
  std::shared_ptr<const TargetDensity> target;
  ProposalPtr proposal;
  std::vector<ArmSpec> arms;  ///< "adaptive" first, then "fixed-1", "fixed-2", ...
};

ExperimentSetup build_setup(const ExperimentConfig& config);

struct RunResult {
  MSEReport report;
  std::vector<AdaptationTrace> traces;  ///< replication 0 of each arm
};

RunResult run(const ExperimentConfig& config, unsigned threads = 1);
/// Writes <out>/<experiment>_<arm>_trace.{csv,json} and <out>/<experiment>_mse.{csv,json}.
std::vector<std::string> write_outputs(const ExperimentConfig& config, const RunResult& result);

std::string trace_csv(const AdaptationTrace& trace, bool diagnostics);
std::string trace_json(const AdaptationTrace& trace, std::string_view arm, bool diagnostics);
std::string mse_csv(const std::vector<MSEReport>& reports);
std::string mse_json(const std::vector<MSEReport>& reports);

/// Fills the kl column of every trace row.
void attach_kl(AdaptationTrace& trace, const TargetDensity& target, const ProposalFamily& proposal);

/// The three presets at R replications, in preset order.
std::vector<MSEReport> table1(std::uint64_t master_seed, std::size_t replications = 1000, unsigned threads = 1);
std::string format_table1(const std::vector<MSEReport>& reports, std::uint64_t master_seed);

struct GridSpec {
  double lo = -5.0;
  double hi = 6.0;
  double step = 0.01;

  std::size_t count() const;
};

struct DensityCurve {
  Vector x;
  Vector target;
  std::vector<std::size_t> iterations;
  std::vector<Vector> thetas;
  Eigen::MatrixXd proposal;  ///< grid points x requested iterations

  std::string to_csv() const;
};

DensityCurve density_curve(const ExperimentConfig& config, std::vector<std::size_t> iterations, const GridSpec& grid,
                           std::uint64_t seed);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Numerical verification suite behind the `check` subcommand.
std::vector<CheckResult> run_checks(std::uint64_t seed);

}  // namespace sais

#endif  // SAIS_EXPERIMENT_HPP
