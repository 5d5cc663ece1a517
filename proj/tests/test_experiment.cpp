#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sais/errors.hpp"
#include "sais/experiment.hpp"
#include "sais/random.hpp"
#include "test_helpers.hpp"

using namespace sais;
using namespace sais::testing;

namespace {

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("presets") {
  CHECK(preset_names() == std::vector<std::string>{"normal-mean", "cauchy-scale", "mixture-weights"});
  const ExperimentConfig n = preset("normal-mean");
  CHECK(n.theta0 == std::vector<double>{1.0});
  CHECK(n.iterations == 500);
  CHECK(n.batch == 1);
  CHECK(n.fixed_arms.size() == 2);
  const ExperimentConfig c = preset("cauchy-scale");
  CHECK(c.proposal.family == "cauchy-scale");
  CHECK(c.iterations * c.batch == 500);
  const ExperimentConfig m = preset("mixture-weights");
  CHECK(m.target.weights.size() == 2);
  CHECK(m.target.weights[0] == doctest::Approx(1.0 / 3.0));
  CHECK(m.adapter == "mixture-rb");
  CHECK_THROWS_AS(preset("nope"), Error);

  for (const auto& name : preset_names()) {
    const ExperimentSetup setup = build_setup(preset(name));
    REQUIRE(setup.arms.size() == 3);
    CHECK(setup.arms[0].name == "adaptive");
    CHECK(setup.arms[0].adapter.has_value());
    CHECK(setup.arms[1].name == "fixed-1");
    CHECK_FALSE(setup.arms[2].adapter.has_value());
  }
}

TEST_CASE("config round trip") {
  for (const auto& name : preset_names()) {
    const std::string once = serialize_config(preset(name));
    const std::string twice = serialize_config(parse_config(once));
    CHECK(once == twice);
    CHECK(config_digest(parse_config(once)) == config_digest(preset(name)));
  }
  ExperimentConfig moved = preset("normal-mean");
  moved.out = "/elsewhere";
  CHECK(config_digest(moved) == config_digest(preset("normal-mean")));
  moved.seed += 1;
  CHECK(config_digest(moved) != config_digest(preset("normal-mean")));

  const ExperimentConfig partial = parse_config(R"({"experiment":"cauchy-scale","iterations":10})");
  CHECK(partial.iterations == 10);
  CHECK(partial.proposal.family == "cauchy-scale");
}

TEST_CASE("config parse errors") {
  for (const char* bad : {"{", R"({"unknown_key":1})", R"({"iterations":-3})", R"({"theta0":"x"})",
                          R"({"experiment":"normal-mean","gain":{"c":0}})", R"({"proposal":{"family":"gamma"}})"}) {
    try {
      (void)build_setup(parse_config(bad));
      FAIL("accepted " << std::string(bad));
    } catch (const Error& e) {
      CHECK(e.code() == Errc::config_parse);
    }
  }
}

TEST_CASE("derived seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t arm = 0; arm < 3; ++arm)
    for (std::uint64_t r = 0; r < 1000; ++r) seen.insert(derive_seed(20090301, arm, r));
  CHECK(seen.size() == 3000);
  CHECK(derive_seed(1, 0, 0) == derive_seed(1, 0, 0));
  CHECK(derive_seed(1, 0, 0) != derive_seed(2, 0, 0));
}

TEST_CASE("run with a single iteration") {
  for (const auto& name : preset_names()) {
    ExperimentConfig cfg = preset(name);
    cfg.replications = 2;
    cfg.iterations = 1;
    const RunResult result = run(cfg);
    REQUIRE(result.traces.size() == 3);
    CHECK(result.report.replications == 2);
    for (const auto& trace : result.traces) {
      const std::string csv = trace_csv(trace, false);
      CHECK(line_count(csv) == 3);  // header, t = 0, t = 1
      CHECK(first_line(csv) == "t,theta_1,v,mean_w,gamma");
    }
    CHECK(first_line(mse_csv({result.report})) == "example,arm,mse,se,replications");
    CHECK(line_count(mse_csv({result.report})) == 4);
  }
}

TEST_CASE("diagnostics columns") {
  ExperimentConfig cfg = preset("normal-mean");
  cfg.replications = 2;
  cfg.iterations = 3;
  cfg.diagnostics = true;
  const RunResult result = run(cfg);
  const std::string csv = trace_csv(result.traces.front(), true);
  CHECK(first_line(csv) == "t,theta_1,v,mean_w,gamma,ess,kl");
  // Row 0 sits at theta0 = 1, where the divergence from N(0,1) is 1/2.
  std::istringstream rows(csv);
  std::string header, row0;
  std::getline(rows, header);
  std::getline(rows, row0);
  const double kl = std::stod(row0.substr(row0.rfind(',') + 1));
  CHECK(kl == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("write_outputs") {
  const auto dir = std::filesystem::temp_directory_path() / "sais_test_outputs";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg = preset("mixture-weights");
  cfg.replications = 2;
  cfg.iterations = 2;
  cfg.out = dir.string();
  cfg.format = "json";
  const auto files = write_outputs(cfg, run(cfg));
  CHECK(files.size() == 4);
  for (const auto& f : files) CHECK(std::filesystem::exists(f));
  CHECK(std::filesystem::exists(dir / "mixture-weights_adaptive_trace.json"));
  CHECK_FALSE(std::filesystem::exists(dir / "mixture-weights_adaptive_trace.csv"));
  CHECK(std::filesystem::exists(dir / "mixture-weights_mse.json"));
  CHECK(slurp(dir / "mixture-weights_mse.json").find("\"adaptive\"") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("table1 is deterministic") {
  const auto a = table1(5, 20);
  const auto b = table1(5, 20, 3);
  REQUIRE(a.size() == 3);
  for (std::size_t e = 0; e < 3; ++e)
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(a[e].arms[k].mse == b[e].arms[k].mse);
      CHECK(a[e].arms[k].final_v == b[e].arms[k].final_v);
    }
  CHECK(format_table1(a, 5) == format_table1(b, 5));
  CHECK(format_table1(a, 5) != format_table1(table1(6, 20), 6));
}

TEST_CASE("density_curve") {
  const ExperimentConfig cfg = preset("mixture-weights");
  const GridSpec grid;
  CHECK(grid.count() == 1101);
  const DensityCurve curve = density_curve(cfg, {0, 100}, grid, 20090301);
  REQUIRE(curve.x.size() == 1101);
  CHECK(curve.x[0] == -5.0);
  CHECK(curve.x[1100] == doctest::Approx(6.0));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < curve.x.size(); ++i) {
    worst = std::max(worst, std::abs(curve.proposal(i, 0) - example3_mixture(curve.x[i], 0.5)));
    CHECK(curve.target[i] == doctest::Approx(example3_mixture(curve.x[i], 1.0 / 3.0)));
  }
  CHECK(worst < 1e-12);
  const std::string csv = curve.to_csv();
  CHECK(first_line(csv) == "x,target,f_t0,f_t100");
  CHECK(line_count(csv) == 1102);

  int closer = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const DensityCurve c = density_curve(cfg, {0, 100}, grid, s);
    const double l0 = (c.proposal.col(0) - c.target).cwiseAbs().sum();
    const double l1 = (c.proposal.col(1) - c.target).cwiseAbs().sum();
    if (l1 < l0) ++closer;
  }
  CHECK(closer >= 90);
}

TEST_CASE("run_checks") {
  for (const auto& r : run_checks(3)) {
    INFO(r.name, ": ", r.detail);
    CHECK(r.passed);
  }
}
