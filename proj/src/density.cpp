#include "sais/density.hpp"

#include <limits>
#include <numeric>
#include <utility>

#include "sais/errors.hpp"
#include "sais/quadrature.hpp"

namespace sais {

namespace {

constexpr double kNormalizationTolerance = 1e-6;
constexpr std::size_t kQuadraturePanels = 200000;

/// Integral over the whole line via x = tan(u).
template <typename F>
double integrate_real_line(F&& f) {
  const double half_pi = std::numbers::pi / 2.0;
  return simpson(
      [&](double u) {
        const double c = std::cos(u);
        return f(std::tan(u)) / (c * c);
      },
      -half_pi, half_pi, kQuadraturePanels);
}

double scalar_parameter(const Vector& theta, const char* family) {
  if (theta.size() != 1) {
    throw Error(Errc::invalid_argument, std::string(family) + " expects a 1-dimensional parameter");
  }
  return theta[0];
}

}  // namespace

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::proposal_zero_at_sample: return "ProposalZeroAtSample";
    case Errc::nonfinite_weight: return "NonfiniteWeight";
    case Errc::invalid_mixture_weights: return "InvalidMixtureWeights";
    case Errc::nonfinite_parameter: return "NonfiniteParameter";
    case Errc::iteration_diverged: return "IterationDiverged";
    case Errc::nonpositive_scale: return "NonpositiveScale";
    case Errc::nonnegative_curvature: return "NonnegativeCurvature";
    case Errc::missing_component_index: return "MissingComponentIndex";
    case Errc::zero_weights: return "ZeroWeights";
    case Errc::unnormalized_target: return "UnnormalizedTarget";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::too_many_divergences: return "TooManyDivergences";
    case Errc::config_parse: return "ConfigParse";
    case Errc::io_failure: return "IOFailure";
  }
  return "Unknown";
}

const char* to_string(FamilyKind kind) noexcept {
  switch (kind) {
    case FamilyKind::normal_mean: return "normal-mean";
    case FamilyKind::cauchy_scale: return "cauchy-scale";
    case FamilyKind::mixture: return "mixture";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Targets

TargetDensity::TargetDensity(std::string name, LogDensityFn log_density, SamplerFn oracle_sampler)
    : name_(std::move(name)), log_density_(std::move(log_density)), oracle_(std::move(oracle_sampler)) {
  if (!log_density_) {
    throw Error(Errc::invalid_argument, "target '" + name_ + "' has no density");
  }
  const double mass = integrate_real_line([this](double x) { return std::exp(log_density_(x)); });
  if (!(std::abs(mass - 1.0) <= kNormalizationTolerance)) {
    throw Error(Errc::unnormalized_target, "target '" + name_ + "' integrates to " + std::to_string(mass));
  }
}

double TargetDensity::sample_oracle(Rng& rng) const {
  if (!oracle_) {
    throw Error(Errc::invalid_argument, "target '" + name_ + "' has no oracle sampler");
  }
  return oracle_(rng);
}

TargetDensity standard_normal_target() {
  return TargetDensity(
      "normal(0,1)", [](double x) { return math::normal_log_pdf(x, 0.0, 1.0); },
      [](Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); });
}

TargetDensity normal_mixture_target(std::vector<double> weights, std::vector<double> means, double sd) {
  if (weights.empty() || weights.size() != means.size() || !(sd > 0.0)) {
    throw Error(Errc::invalid_argument, "normal mixture target needs matching weights/means and sd > 0");
  }
  for (double a : weights) {
    if (!(a > 0.0)) throw Error(Errc::invalid_mixture_weights, "target mixture weights must be positive");
  }
  std::string name = "normal-mixture(";
  for (std::size_t d = 0; d < weights.size(); ++d) {
    name += (d ? "," : "") + std::to_string(weights[d]) + "*N(" + std::to_string(means[d]) + ")";
  }
  name += ")";

  Vector log_w = Eigen::Map<const Vector>(weights.data(), static_cast<Eigen::Index>(weights.size()))
                     .array()
                     .log();
  auto log_density = [log_w, means, sd](double x) {
    Vector terms(log_w.size());
    for (Eigen::Index d = 0; d < log_w.size(); ++d) {
      terms[d] = log_w[d] + math::normal_log_pdf(x, means[static_cast<std::size_t>(d)], sd);
    }
    return math::log_sum_exp(terms);
  };
  auto sampler = [weights, means, sd](Rng& rng) {
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    const std::size_t d = pick(rng);
    return std::normal_distribution<double>(means[d], sd)(rng);
  };
  return TargetDensity(std::move(name), std::move(log_density), std::move(sampler));
}

// ---------------------------------------------------------------------------
// Normal mean family

ParameterBox NormalMeanFamily::default_box() const {
  return ParameterBox(Vector::Constant(1, -20.0), Vector::Constant(1, 20.0));
}

void NormalMeanFamily::validate(const Vector& theta) const {
  const double mean = scalar_parameter(theta, "normal-mean");
  if (!std::isfinite(mean)) throw Error(Errc::nonfinite_parameter, "normal-mean: mean is not finite");
}

double NormalMeanFamily::log_density(double x, const Vector& theta) const {
  return math::normal_log_pdf(x, scalar_parameter(theta, "normal-mean"), 1.0);
}

Vector NormalMeanFamily::score(double x, const Vector& theta) const {
  return Vector::Constant(1, x - scalar_parameter(theta, "normal-mean"));
}

Draw NormalMeanFamily::sample(const Vector& theta, Rng& rng) const {
  return {std::normal_distribution<double>(scalar_parameter(theta, "normal-mean"), 1.0)(rng), std::nullopt};
}

std::optional<ExponentialForm> NormalMeanFamily::exponential_form() const {
  // Unit variance: eta(mu) = mu, phi(mu) = mu^2 / 2, base measure N(0,1).
  return ExponentialForm{[](double mu) { return mu; }, [](double mu) { return 0.5 * mu * mu; }};
}

// ---------------------------------------------------------------------------
// Cauchy scale family

ParameterBox CauchyScaleFamily::default_box() const {
  return ParameterBox(Vector::Constant(1, 0.01), Vector::Constant(1, 100.0));
}

void CauchyScaleFamily::validate(const Vector& theta) const {
  const double scale_sq = scalar_parameter(theta, "cauchy-scale");
  if (!(scale_sq > 0.0) || !std::isfinite(scale_sq)) {
    throw Error(Errc::nonpositive_scale, "cauchy-scale: sigma^2 must be positive and finite");
  }
}

double CauchyScaleFamily::log_density(double x, const Vector& theta) const {
  validate(theta);
  return math::cauchy_log_pdf(x, theta[0]);
}

Vector CauchyScaleFamily::score(double x, const Vector& theta) const {
  validate(theta);
  const double s = theta[0];
  return Vector::Constant(1, 0.5 / s - std::exp(-math::log_scale_plus_square(s, x)));
}

Draw CauchyScaleFamily::sample(const Vector& theta, Rng& rng) const {
  validate(theta);
  return {std::cauchy_distribution<double>(0.0, std::sqrt(theta[0]))(rng), std::nullopt};
}

// ---------------------------------------------------------------------------
// Mixture with fixed components

MixtureComponent normal_component(double mean, double sd) {
  return {"N(" + std::to_string(mean) + "," + std::to_string(sd * sd) + ")",
          [mean, sd](double x) { return math::normal_log_pdf(x, mean, sd); },
          [mean, sd](Rng& rng) { return std::normal_distribution<double>(mean, sd)(rng); }};
}

FixedComponentMixture::FixedComponentMixture(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.size() < 2) {
    throw Error(Errc::invalid_argument, "mixture needs at least two components");
  }
  for (const auto& c : components_) {
    if (!c.log_density || !c.sampler) {
      throw Error(Errc::invalid_argument, "mixture component '" + c.name + "' is incomplete");
    }
  }
}

ParameterBox FixedComponentMixture::default_box() const { return ParameterBox::simplex(dimension()); }

Vector FixedComponentMixture::full_weights(const Vector& theta) const {
  if (theta.size() != dimension()) {
    throw Error(Errc::invalid_mixture_weights, "mixture expects " + std::to_string(dimension()) + " free weights");
  }
  if (!theta.allFinite() || (theta.array() <= 0.0).any() || !(theta.sum() < 1.0)) {
    throw Error(Errc::invalid_mixture_weights, "free weights must be positive with sum < 1");
  }
  Vector alpha(theta.size() + 1);
  alpha.head(theta.size()) = theta;
  alpha[theta.size()] = 1.0 - theta.sum();
  return alpha;
}

void FixedComponentMixture::validate(const Vector& theta) const { (void)full_weights(theta); }

Vector FixedComponentMixture::component_log_densities(double x) const {
  Vector out(static_cast<Eigen::Index>(components_.size()));
  for (std::size_t d = 0; d < components_.size(); ++d) {
    out[static_cast<Eigen::Index>(d)] = components_[d].log_density(x);
  }
  return out;
}

double FixedComponentMixture::log_density(double x, const Vector& theta) const {
  const Vector alpha = full_weights(theta);
  return math::log_sum_exp((alpha.array().log() + component_log_densities(x).array()).matrix());
}

Vector FixedComponentMixture::score(double x, const Vector& theta) const {
  const Vector alpha = full_weights(theta);
  const Vector log_p = component_log_densities(x);
  const double log_f = math::log_sum_exp((alpha.array().log() + log_p.array()).matrix());
  // d/d alpha_d log f = (p_d - p_D) / f
  const Eigen::Index last = alpha.size() - 1;
  const Vector ratio = (log_p.array() - log_f).exp();
  return (ratio.head(last).array() - ratio[last]).matrix();
}

Draw FixedComponentMixture::sample(const Vector& theta, Rng& rng) const {
  const Vector alpha = full_weights(theta);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  std::size_t d = 0;
  for (; d + 1 < components_.size(); ++d) {
    cumulative += alpha[static_cast<Eigen::Index>(d)];
    if (u < cumulative) break;
  }
  return {components_[d].sampler(rng), static_cast<int>(d) + 1};
}

ProposalPtr normal_mean_family() { return std::make_shared<NormalMeanFamily>(); }

ProposalPtr cauchy_scale_family() { return std::make_shared<CauchyScaleFamily>(); }

std::shared_ptr<const FixedComponentMixture> fixed_component_mixture(std::vector<MixtureComponent> components) {
  return std::make_shared<FixedComponentMixture>(std::move(components));
}

// ---------------------------------------------------------------------------
// Weights

double importance_weight(const TargetDensity& target, const ProposalFamily& proposal, const Vector& theta,
                         double x) {
  const double log_target = target.log_density(x);
  if (log_target == -std::numeric_limits<double>::infinity()) return 0.0;
  const double log_proposal = proposal.log_density(x, theta);
  if (log_proposal == -std::numeric_limits<double>::infinity()) {
    throw Error(Errc::proposal_zero_at_sample, "f(x|theta) = 0 where pi(x) > 0 at x = " + std::to_string(x));
  }
  const double w = std::exp(log_target - log_proposal);
  if (!std::isfinite(w)) {
    throw Error(Errc::nonfinite_weight, "weight overflow at x = " + std::to_string(x));
  }
  return w;
}

Batch draw_batch(const ProposalFamily& proposal, const Vector& theta, const TargetDensity& target, std::size_t n,
                 Rng& rng) {
  if (n == 0) throw Error(Errc::invalid_argument, "draw_batch: n must be at least 1");
  Batch batch;
  batch.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Draw draw = proposal.sample(theta, rng);
    batch.push_back({draw.x, importance_weight(target, proposal, theta, draw.x), draw.component});
  }
  return batch;
}

double mean_weight(std::span<const WeightedSample> batch) {
  if (batch.empty()) throw Error(Errc::invalid_argument, "mean_weight: empty batch");
  double sum = 0.0;
  for (const auto& s : batch) sum += s.w;
  return sum / static_cast<double>(batch.size());
}

}  // namespace sais
