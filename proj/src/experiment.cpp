#include "sais/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "sais/diagnostics.hpp"
#include "sais/errors.hpp"

namespace sais {

using nlohmann::json;

namespace {

// Full precision so traces and reports can be re-read exactly.
std::string num(double v) { return fmt::format("{:.17g}", v); }

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json config_to_json(const ExperimentConfig& c, bool include_output) {
  json j;
  j["experiment"] = c.experiment;
  j["target"] = {{"kind", c.target.kind}, {"weights", c.target.weights}, {"means", c.target.means}, {"sd", c.target.sd}};
  j["proposal"] = {{"family", c.proposal.family},
                   {"component_means", c.proposal.component_means},
                   {"component_sd", c.proposal.component_sd}};
  j["theta0"] = c.theta0;
  j["adapter"] = c.adapter;
  j["curvature"] = to_string(c.curvature);
  j["iterations"] = c.iterations;
  j["batch"] = c.batch;
  j["gain"] = {{"c", c.gain.c}, {"t0", c.gain.t0}};
  if (c.box_lo && c.box_hi) {
    j["box"] = {{"lo", *c.box_lo}, {"hi", *c.box_hi}};
  } else {
    j["box"] = nullptr;
  }
  j["fixed_arms"] = c.fixed_arms;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  if (include_output) {
    j["out"] = c.out;
    j["format"] = c.format;
    j["diagnostics"] = c.diagnostics;
  }
  return j;
}

template <typename T>
void read(const json& j, const char* key, T& into) {
  if (!j.contains(key)) return;
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (!j.at(key).is_number_unsigned()) throw Error(Errc::config_parse, std::string(key) + " must be a non-negative integer");
  }
  into = j.at(key).get<T>();
}

void validate_config(const ExperimentConfig& c) {
  auto fail = [](const std::string& what) { throw Error(Errc::config_parse, what); };
  if (c.iterations == 0) fail("iterations must be >= 1");
  if (c.batch == 0) fail("batch must be >= 1");
  if (c.replications < 2) fail("replications must be >= 2");
  if (!(c.gain.c > 0.0) || !(c.gain.t0 >= 0.0)) fail("gain needs c > 0 and t0 >= 0");
  if (c.format != "csv" && c.format != "json") fail("format must be csv or json");
  if (c.theta0.empty()) fail("theta0 is empty");
  if (c.box_lo.has_value() != c.box_hi.has_value()) fail("box needs both lo and hi");
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_failure, "cannot open " + path.string());
  out << content;
  if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());
}

}  // namespace

// ---------------------------------------------------------------------------
// Presets and configuration

std::vector<std::string> preset_names() { return {"normal-mean", "cauchy-scale", "mixture-weights"}; }

ExperimentConfig preset(std::string_view name) {
  ExperimentConfig c;
  c.experiment = std::string(name);
  if (name == "normal-mean") {
    c.proposal.family = "normal-mean";
    c.theta0 = {1.0};
    c.adapter = "exp-family";
    c.iterations = 500;
    c.batch = 1;
    c.fixed_arms = {{1.0}, {0.1}};
  } else if (name == "cauchy-scale") {
    c.proposal.family = "cauchy-scale";
    c.theta0 = {4.0};  // sigma = 2
    c.adapter = "cauchy-mm";
    c.curvature = CurvatureMode::local;
    c.iterations = 250;
    c.batch = 2;
    c.gain.t0 = 1.0;
    c.fixed_arms = {{4.0}, {1.21}};  // sigma = 2, sigma = 1.1
  } else if (name == "mixture-weights") {
    c.target = {"normal-mixture", {1.0 / 3.0, 2.0 / 3.0}, {-1.0, 2.0}, 1.0};
    c.proposal = {"mixture", {-1.0, 2.0}, 1.0};
    c.theta0 = {0.5};
    c.adapter = "mixture-rb";
    c.iterations = 500;
    c.batch = 1;
    c.gain.t0 = 10.0;
    c.fixed_arms = {{0.5}, {0.35}};
  } else {
    throw Error(Errc::config_parse, "unknown experiment '" + std::string(name) + "'");
  }
  return c;
}

ExperimentConfig parse_config(std::string_view json_text) {
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw Error(Errc::config_parse, "config must be a JSON object");
    static const std::set<std::string> known{"experiment", "target",       "proposal",     "theta0", "adapter",
                                             "curvature",  "iterations",   "batch",        "gain",   "box",
                                             "fixed_arms", "replications", "seed",         "out",    "format",
                                             "diagnostics"};
    for (const auto& [key, _] : j.items()) {
      if (!known.count(key)) throw Error(Errc::config_parse, "unknown config key '" + key + "'");
    }

    ExperimentConfig c;
    if (j.contains("experiment")) {
      const auto name = j.at("experiment").get<std::string>();
      const auto names = preset_names();
      if (std::find(names.begin(), names.end(), name) != names.end()) {
        c = preset(name);
      } else {
        c.experiment = name;
      }
    }
    if (j.contains("target")) {
      const json& t = j.at("target");
      read(t, "kind", c.target.kind);
      read(t, "weights", c.target.weights);
      read(t, "means", c.target.means);
      read(t, "sd", c.target.sd);
    }
    if (j.contains("proposal")) {
      const json& p = j.at("proposal");
      read(p, "family", c.proposal.family);
      read(p, "component_means", c.proposal.component_means);
      read(p, "component_sd", c.proposal.component_sd);
    }
    read(j, "theta0", c.theta0);
    read(j, "adapter", c.adapter);
    if (j.contains("curvature")) c.curvature = curvature_mode_from_string(j.at("curvature").get<std::string>());
    read(j, "iterations", c.iterations);
    read(j, "batch", c.batch);
    if (j.contains("gain")) {
      read(j.at("gain"), "c", c.gain.c);
      read(j.at("gain"), "t0", c.gain.t0);
    }
    if (j.contains("box")) {
      if (j.at("box").is_null()) {
        c.box_lo.reset();
        c.box_hi.reset();
      } else {
        c.box_lo = j.at("box").at("lo").get<std::vector<double>>();
        c.box_hi = j.at("box").at("hi").get<std::vector<double>>();
      }
    }
    read(j, "fixed_arms", c.fixed_arms);
    read(j, "replications", c.replications);
    read(j, "seed", c.seed);
    read(j, "out", c.out);
    read(j, "format", c.format);
    read(j, "diagnostics", c.diagnostics);
    validate_config(c);
    return c;
  } catch (const json::exception& e) {
    throw Error(Errc::config_parse, e.what());
  }
}

std::string serialize_config(const ExperimentConfig& config) { return config_to_json(config, true).dump(2) + "\n"; }

std::string config_digest(const ExperimentConfig& config) {
  return fmt::format("{:016x}", fnv1a(config_to_json(config, false).dump()));
}

ExperimentSetup build_setup(const ExperimentConfig& config) {
  validate_config(config);
  ExperimentSetup setup;

  if (config.target.kind == "normal") {
    if (config.target.means.size() != 1) throw Error(Errc::config_parse, "normal target takes one mean");
    const double mean = config.target.means[0];
    const double sd = config.target.sd;
    setup.target = std::make_shared<const TargetDensity>(
        fmt::format("normal({},{})", mean, sd * sd), [mean, sd](double x) { return math::normal_log_pdf(x, mean, sd); },
        [mean, sd](Rng& rng) { return std::normal_distribution<double>(mean, sd)(rng); });
  } else if (config.target.kind == "normal-mixture") {
    setup.target = std::make_shared<const TargetDensity>(
        normal_mixture_target(config.target.weights, config.target.means, config.target.sd));
  } else {
    throw Error(Errc::config_parse, "unknown target kind '" + config.target.kind + "'");
  }

  if (config.proposal.family == "normal-mean") {
    setup.proposal = normal_mean_family();
  } else if (config.proposal.family == "cauchy-scale") {
    setup.proposal = cauchy_scale_family();
  } else if (config.proposal.family == "mixture") {
    std::vector<MixtureComponent> components;
    for (double m : config.proposal.component_means) components.push_back(normal_component(m, config.proposal.component_sd));
    setup.proposal = fixed_component_mixture(std::move(components));
  } else {
    throw Error(Errc::config_parse, "unknown proposal family '" + config.proposal.family + "'");
  }

  const ParameterBox box = (config.box_lo && config.box_hi)
                               ? ParameterBox(to_vector(*config.box_lo), to_vector(*config.box_hi))
                               : setup.proposal->default_box();
  if (static_cast<Eigen::Index>(config.theta0.size()) != setup.proposal->dimension() ||
      box.dimension() != setup.proposal->dimension()) {
    throw Error(Errc::config_parse, "theta0/box dimension does not match the proposal family");
  }

  ArmSpec adaptive{.name = "adaptive",
                   .target = setup.target,
                   .proposal = setup.proposal,
                   .adapter = make_adapter(config.adapter, setup.proposal, config.curvature),
                   .theta0 = to_vector(config.theta0),
                   .schedule = config.gain,
                   .box = box,
                   .iterations = config.iterations,
                   .batch_size = config.batch};
  setup.arms.push_back(adaptive);

  for (std::size_t k = 0; k < config.fixed_arms.size(); ++k) {
    ArmSpec fixed = adaptive;
    fixed.name = "fixed-" + std::to_string(k + 1);
    fixed.adapter.reset();
    fixed.theta0 = to_vector(config.fixed_arms[k]);
    if (fixed.theta0.size() != setup.proposal->dimension()) {
      throw Error(Errc::config_parse, "fixed arm dimension does not match the proposal family");
    }
    setup.proposal->validate(fixed.theta0);
    setup.arms.push_back(std::move(fixed));
  }
  return setup;
}

// ---------------------------------------------------------------------------
// Running

void attach_kl(AdaptationTrace& trace, const TargetDensity& target, const ProposalFamily& proposal) {
  KLOptions options;
  options.resolution = 20000;
  for (auto& rec : trace.records) rec.kl = kl_divergence(target, proposal, rec.theta, options).value;
}

RunResult run(const ExperimentConfig& config, unsigned threads) {
  const ExperimentSetup setup = build_setup(config);
  RunResult result;
  result.report = replicate_mse(config.experiment, setup.arms, config.replications, config.seed, threads);
  result.report.config_digest = config_digest(config);
  AdaptOptions options;
  options.record_ess = config.diagnostics;
  for (std::size_t i = 0; i < setup.arms.size(); ++i) {
    AdaptationTrace trace = run_arm(setup.arms[i], derive_seed(config.seed, i, 0), options);
    if (config.diagnostics) attach_kl(trace, *setup.target, *setup.proposal);
    result.traces.push_back(std::move(trace));
  }
  return result;
}

std::string trace_csv(const AdaptationTrace& trace, bool diagnostics) {
  const Eigen::Index dim = trace.records.empty() ? 0 : trace.records.front().theta.size();
  std::string out = "t";
  for (Eigen::Index d = 0; d < dim; ++d) out += fmt::format(",theta_{}", d + 1);
  out += ",v,mean_w,gamma";
  if (diagnostics) out += ",ess,kl";
  out += "\n";
  auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  for (const auto& rec : trace.records) {
    out += std::to_string(rec.t);
    for (Eigen::Index d = 0; d < dim; ++d) out += "," + num(rec.theta[d]);
    out += "," + num(rec.v) + "," + opt(rec.mean_w) + "," + opt(rec.gamma);
    if (diagnostics) out += "," + opt(rec.ess) + "," + opt(rec.kl);
    out += "\n";
  }
  return out;
}

std::string trace_json(const AdaptationTrace& trace, std::string_view arm, bool diagnostics) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json records = json::array();
  for (const auto& rec : trace.records) {
    json r;
    r["t"] = rec.t;
    r["theta"] = std::vector<double>(rec.theta.data(), rec.theta.data() + rec.theta.size());
    r["v"] = rec.v;
    r["mean_w"] = opt(rec.mean_w);
    r["gamma"] = opt(rec.gamma);
    if (diagnostics) {
      r["ess"] = opt(rec.ess);
      r["kl"] = opt(rec.kl);
    }
    records.push_back(std::move(r));
  }
  json j;
  j["arm"] = arm;
  j["seed"] = trace.seed;
  j["records"] = std::move(records);
  return j.dump(2) + "\n";
}

std::string mse_csv(const std::vector<MSEReport>& reports) {
  std::string out = "example,arm,mse,se,replications\n";
  for (const auto& report : reports) {
    for (const auto& arm : report.arms) {
      out += fmt::format("{},{},{},{},{}\n", report.example, arm.arm, num(arm.mse), num(arm.se), arm.replications);
    }
  }
  return out;
}

std::string mse_json(const std::vector<MSEReport>& reports) {
  json all = json::array();
  for (const auto& report : reports) {
    json arms = json::array();
    for (const auto& arm : report.arms) {
      arms.push_back({{"arm", arm.arm},
                      {"mse", arm.mse},
                      {"se", arm.se},
                      {"mean_v", arm.mean_v},
                      {"se_v", arm.se_v},
                      {"diverged", arm.diverged},
                      {"replications", arm.replications}});
    }
    all.push_back({{"example", report.example},
                   {"config_digest", report.config_digest},
                   {"replications", report.replications},
                   {"arms", std::move(arms)}});
  }
  return all.dump(2) + "\n";
}

std::vector<std::string> write_outputs(const ExperimentConfig& config, const RunResult& result) {
  namespace fs = std::filesystem;
  const fs::path dir(config.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io_failure, "cannot create " + dir.string() + ": " + ec.message());

  std::vector<std::string> written;
  const bool csv = config.format == "csv";
  for (std::size_t i = 0; i < result.traces.size(); ++i) {
    const std::string& arm = result.report.arms.at(i).arm;
    const fs::path path = dir / fmt::format("{}_{}_trace.{}", config.experiment, arm, config.format);
    write_file(path, csv ? trace_csv(result.traces[i], config.diagnostics)
                         : trace_json(result.traces[i], arm, config.diagnostics));
    written.push_back(path.string());
  }
  const fs::path report = dir / fmt::format("{}_mse.{}", config.experiment, config.format);
  write_file(report, csv ? mse_csv({result.report}) : mse_json({result.report}));
  written.push_back(report.string());
  return written;
}

// ---------------------------------------------------------------------------
// Comparison table across presets

std::vector<MSEReport> table1(std::uint64_t master_seed, std::size_t replications, unsigned threads) {
  std::vector<MSEReport> reports;
  const auto names = preset_names();
  for (std::size_t e = 0; e < names.size(); ++e) {
    ExperimentConfig config = preset(names[e]);
    config.replications = replications;
    config.seed = derive_seed(master_seed, 1000 + e, 0);
    const ExperimentSetup setup = build_setup(config);
    MSEReport report = replicate_mse(config.experiment, setup.arms, replications, config.seed, threads);
    report.config_digest = config_digest(config);
    reports.push_back(std::move(report));
  }
  return reports;
}

std::string format_table1(const std::vector<MSEReport>& reports, std::uint64_t master_seed) {
  const std::size_t replications = reports.empty() ? 0 : reports.front().replications;
  std::string out = fmt::format("Mean squared error of v_T against 1 (replications={}, seed={})\n", replications,
                                master_seed);
  out += fmt::format("{:<10}", "arm");
  for (const auto& r : reports) out += fmt::format("  {:>24}", r.example);
  out += "\n";
  if (reports.empty()) return out;
  for (std::size_t a = 0; a < reports.front().arms.size(); ++a) {
    out += fmt::format("{:<10}", reports.front().arms[a].arm);
    for (const auto& r : reports) {
      const ArmReport& arm = r.arms.at(a);
      out += fmt::format("  {:>24}", fmt::format("{:.3e} ({:.1e})", arm.mse, arm.se));
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Figure data

std::size_t GridSpec::count() const {
  if (!(hi > lo) || !(step > 0.0)) throw Error(Errc::config_parse, "grid needs lo < hi and step > 0");
  return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

std::string DensityCurve::to_csv() const {
  std::string out = "x,target";
  for (std::size_t t : iterations) out += fmt::format(",f_t{}", t);
  out += "\n";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out += num(x[i]) + "," + num(target[i]);
    for (Eigen::Index k = 0; k < proposal.cols(); ++k) out += "," + num(proposal(i, k));
    out += "\n";
  }
  return out;
}

DensityCurve density_curve(const ExperimentConfig& config, std::vector<std::size_t> iterations, const GridSpec& grid,
                           std::uint64_t seed) {
  if (iterations.empty()) throw Error(Errc::config_parse, "density curve needs at least one iteration");
  const ExperimentSetup setup = build_setup(config);
  const ArmSpec& arm = setup.arms.front();
  const std::size_t horizon = *std::max_element(iterations.begin(), iterations.end());

  std::vector<Vector> path{arm.theta0};
  if (horizon > 0) {
    ArmSpec run = arm;
    run.iterations = horizon;
    const AdaptationTrace trace = run_arm(run, derive_seed(seed, 0, 0));
    for (std::size_t t = 1; t < trace.records.size(); ++t) path.push_back(trace.records[t].theta);
  }

  DensityCurve curve;
  const auto n = static_cast<Eigen::Index>(grid.count());
  curve.x = Vector::LinSpaced(n, 0.0, static_cast<double>(n - 1)) * grid.step + Vector::Constant(n, grid.lo);
  curve.target.resize(n);
  curve.iterations = iterations;
  curve.proposal.resize(n, static_cast<Eigen::Index>(iterations.size()));
  for (std::size_t t : iterations) curve.thetas.push_back(path.at(t));
  for (Eigen::Index i = 0; i < n; ++i) {
    curve.target[i] = setup.target->density(curve.x[i]);
    for (std::size_t k = 0; k < iterations.size(); ++k) {
      curve.proposal(i, static_cast<Eigen::Index>(k)) = setup.proposal->density(curve.x[i], curve.thetas[k]);
    }
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Verification suite

std::vector<CheckResult> run_checks(std::uint64_t seed) {
  std::vector<CheckResult> results;
  Rng rng(derive_seed(seed, 7, 0));
  const TargetDensity normal = standard_normal_target();
  const auto cauchy = cauchy_scale_family();

  auto random_cauchy_batch = [&](double& sigma_sq) {
    sigma_sq = std::exp(std::uniform_real_distribution<double>(std::log(0.05), std::log(20.0))(rng));
    const std::size_t n = 2 + rng() % 4;
    return draw_batch(*cauchy, Vector::Constant(1, sigma_sq), normal, n, rng);
  };

  {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      double s = 0.0;
      const Batch b = random_cauchy_batch(s);
      const FdResult r = fd_check([&](double v) { return cauchy_log_likelihood(v, b); },
                                  [&](double v) { return cauchy_score(v, b); }, s, 1e-5);
      worst = std::max(worst, r.relative_error);
    }
    results.push_back({"cauchy score vs finite differences", worst < 1e-6, fmt::format("worst relative error {:.3e}", worst)});
  }
  {
    std::size_t violations = 0;
    for (int i = 0; i < 10000; ++i) {
      double s = 0.0;
      const Batch b = random_cauchy_batch(s);
      const CurvatureBound c = cauchy_curvature_bound(s, b);
      if (c.second_derivative < c.lower_bound) ++violations;
    }
    results.push_back({"cauchy curvature lower bound", violations == 0, fmt::format("{} violations in 10000", violations)});
  }
  {
    const double floor = cauchy->default_box().lower()[0];
    const double ceil = cauchy->default_box().upper()[0];
    double worst = -std::numeric_limits<double>::infinity();
    bool ok = true;
    std::vector<Vector> grid;
    for (int k = 0; k < 200; ++k) {
      grid.push_back(Vector::Constant(1, std::exp(std::log(floor) + (std::log(ceil) - std::log(floor)) * k / 199.0)));
    }
    for (int i = 0; i < 50; ++i) {
      double s = 0.0;
      const Batch b = random_cauchy_batch(s);
      const double c = cauchy_curvature_constant(CurvatureMode::box_floor, s, b, floor);
      if (c == 0.0) continue;
      const MinorizationResult r = minorization_check(
          cauchy_minorizer(s, b, c, floor), [&](const Vector& th) { return cauchy_log_likelihood(th[0], b); }, grid);
      ok = ok && r.passed;
      worst = std::max(worst, std::max(r.worst_violation, r.tangency_error));
    }
    results.push_back({"cauchy quadratic minorizer", ok, fmt::format("worst violation {:.3e}", worst)});
  }
  {
    const double self = kl_divergence(normal, *normal_mean_family(), Vector::Zero(1)).value;
    const double shifted = kl_divergence(normal, *normal_mean_family(), Vector::Ones(1)).value;
    results.push_back({"KL quadrature", std::abs(self) < 1e-8 && std::abs(shifted - 0.5) < 1e-6,
                       fmt::format("KL(pi,pi) = {:.2e}, KL(N0,N1) = {:.10f}", self, shifted)});
  }
  {
    const ExperimentConfig mix = preset("mixture-weights");
    const ExperimentSetup setup = build_setup(mix);
    struct Case {
      std::string label;
      const TargetDensity* target;
      ProposalPtr proposal;
      AdaptationMap adapter;
      Vector theta;
    };
    const std::vector<Case> cases{
        {"normal-mean at 1", &normal, normal_mean_family(), make_exp_family_adapter(), Vector::Ones(1)},
        {"cauchy-scale at 4", &normal, cauchy, make_cauchy_mm_adapter(CurvatureMode::local), Vector::Constant(1, 4.0)},
        {"mixture at 0.5", setup.target.get(), setup.proposal, *setup.arms.front().adapter, Vector::Constant(1, 0.5)},
    };
    for (const auto& c : cases) {
      const AscentPoint p = ascent_check(*c.target, *c.proposal, c.adapter, {c.theta}, 20000, rng).front();
      results.push_back({"ascent direction, " + c.label, p.inner_product > -3.0 * p.standard_error,
                         fmt::format("<g,d> = {:.4e} (se {:.1e})", p.inner_product, p.standard_error)});
    }
  }
  {
    bool ok = true;
    for (int i = 0; i < 1000; ++i) {
      double s = 0.0;
      const Batch b = random_cauchy_batch(s);
      if (mean_weight(b) <= 0.0) continue;
      const double ess = effective_sample_size(b);
      ok = ok && ess >= 1.0 - 1e-12 && ess <= static_cast<double>(b.size()) + 1e-12;
    }
    results.push_back({"effective sample size within [1, N]", ok, "1000 random batches"});
  }
  return results;
}

}  // namespace sais
