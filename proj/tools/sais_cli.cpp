// Command-line entry points: run, table1, density-curve, check.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sais/errors.hpp"
#include "sais/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SAIS_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw sais::Error(sais::Errc::config_parse, std::string("SAIS_SEED is not an integer: ") + env);
    }
  }
  return sais::ExperimentConfig{}.seed;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sais::Error(sais::Errc::io_failure, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw sais::Error(sais::Errc::io_failure, "cannot write " + path);
}

int exit_code(sais::Errc code) {
  switch (code) {
    case sais::Errc::config_parse:
    case sais::Errc::invalid_argument:
    case sais::Errc::invalid_mixture_weights:
    case sais::Errc::nonpositive_scale:
    case sais::Errc::unnormalized_target: return kExitConfig;
    case sais::Errc::too_many_divergences:
    case sais::Errc::iteration_diverged:
    case sais::Errc::nonfinite_weight:
    case sais::Errc::nonfinite_parameter: return kExitDivergence;
    case sais::Errc::io_failure: return kExitIo;
    default: return kExitCheckFailed;
  }
}

struct Overrides {
  std::string config_path;
  std::string experiment;
  std::optional<std::size_t> replications;
  std::optional<std::size_t> iterations;
  std::optional<std::size_t> batch;
  std::optional<double> gain_c;
  std::optional<double> gain_t0;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  bool diagnostics = false;
  unsigned threads = 1;
};

sais::ExperimentConfig resolve(const Overrides& o) {
  sais::ExperimentConfig c;
  if (!o.config_path.empty()) {
    c = sais::parse_config(slurp(o.config_path));
  } else {
    c = sais::preset(o.experiment.empty() ? "normal-mean" : o.experiment);
    c.seed = default_seed();
  }
  if (o.replications) c.replications = *o.replications;
  if (o.iterations) c.iterations = *o.iterations;
  if (o.batch) c.batch = *o.batch;
  if (o.gain_c) c.gain.c = *o.gain_c;
  if (o.gain_t0) c.gain.t0 = *o.gain_t0;
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.format) c.format = *o.format;
  if (o.diagnostics) c.diagnostics = true;
  // Re-validate the merged result.
  return sais::parse_config(sais::serialize_config(c));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic-approximation adaptive importance sampling"};
  app.require_subcommand(1);

  Overrides run_opts;
  auto* run = app.add_subcommand("run", "Run one experiment: adaptive and fixed arms, traces and MSE report");
  run->add_option("--config", run_opts.config_path, "JSON config file");
  run->add_option("--experiment", run_opts.experiment, "Preset: normal-mean, cauchy-scale, mixture-weights");
  run->add_option("--replications", run_opts.replications, "Replications per arm");
  run->add_option("--iterations", run_opts.iterations, "Iterations T");
  run->add_option("--batch", run_opts.batch, "Draws per iteration N");
  run->add_option("--gain-c", run_opts.gain_c, "Gain scale c in c/(t+t0+1)");
  run->add_option("--gain-t0", run_opts.gain_t0, "Gain offset t0");
  run->add_option("--seed", run_opts.seed, "Master seed (default: $SAIS_SEED)");
  run->add_option("--out", run_opts.out, "Output directory");
  run->add_option("--format", run_opts.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  run->add_flag("--diagnostics", run_opts.diagnostics, "Append ess and kl columns to traces");
  run->add_option("--threads", run_opts.threads, "Worker threads for replications");

  std::optional<std::uint64_t> table_seed;
  std::size_t table_reps = 1000;
  std::string table_format = "text";
  std::string table_out;
  unsigned table_threads = 1;
  auto* tab = app.add_subcommand("table1", "Mean squared errors for all three presets");
  tab->add_option("--seed", table_seed, "Master seed (default: $SAIS_SEED)");
  tab->add_option("--replications", table_reps, "Replications per arm");
  tab->add_option("--format", table_format, "text, csv or json")->check(CLI::IsMember({"text", "csv", "json"}));
  tab->add_option("--out", table_out, "Output file (default: stdout)");
  tab->add_option("--threads", table_threads, "Worker threads for replications");

  Overrides curve_opts;
  std::vector<std::size_t> curve_iterations{0, 100};
  std::vector<double> curve_grid{-5.0, 6.0, 0.01};
  std::string curve_out;
  auto* curve = app.add_subcommand("density-curve", "Target and proposal densities on a grid at chosen iterations");
  curve->add_option("--config", curve_opts.config_path, "JSON config file");
  curve->add_option("--experiment", curve_opts.experiment, "Preset (default mixture-weights)");
  curve->add_option("--seed", curve_opts.seed, "Master seed (default: $SAIS_SEED)");
  curve->add_option("--at", curve_iterations, "Iterations to report")->delimiter(',');
  curve->add_option("--grid", curve_grid, "lo,hi,step")->delimiter(',')->expected(3);
  curve->add_option("--out", curve_out, "Output CSV (default: stdout)");

  std::optional<std::uint64_t> check_seed;
  auto* check = app.add_subcommand("check", "Run the numerical verification suite");
  check->add_option("--seed", check_seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      const sais::ExperimentConfig config = resolve(run_opts);
      const sais::RunResult result = sais::run(config, run_opts.threads);
      for (const auto& path : sais::write_outputs(config, result)) std::cerr << "wrote " << path << "\n";
      std::cout << sais::mse_csv({result.report});
      return kExitOk;
    }
    if (*tab) {
      const std::uint64_t seed = table_seed ? *table_seed : default_seed();
      const auto reports = sais::table1(seed, table_reps, table_threads);
      std::string text;
      if (table_format == "csv") {
        text = sais::mse_csv(reports);
      } else if (table_format == "json") {
        text = sais::mse_json(reports);
      } else {
        text = sais::format_table1(reports, seed);
      }
      emit(table_out, text);
      return kExitOk;
    }
    if (*curve) {
      if (curve_opts.experiment.empty() && curve_opts.config_path.empty()) curve_opts.experiment = "mixture-weights";
      const sais::ExperimentConfig config = resolve(curve_opts);
      const sais::GridSpec grid{curve_grid.at(0), curve_grid.at(1), curve_grid.at(2)};
      emit(curve_out, sais::density_curve(config, curve_iterations, grid, config.seed).to_csv());
      return kExitOk;
    }
    if (*check) {
      bool all = true;
      for (const auto& r : sais::run_checks(check_seed ? *check_seed : default_seed())) {
        std::cout << (r.passed ? "PASS  " : "FAIL  ") << r.name << "  [" << r.detail << "]\n";
        all = all && r.passed;
      }
      return all ? kExitOk : kExitCheckFailed;
    }
  } catch (const sais::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}
