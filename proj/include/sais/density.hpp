#ifndef SAIS_DENSITY_HPP
#define SAIS_DENSITY_HPP

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sais/parameter_box.hpp"
#include "sais/random.hpp"

namespace sais {

namespace math {

template <typename Scalar>
Scalar normal_log_pdf(Scalar x, Scalar mean, Scalar sd) {
  const Scalar z = (x - mean) / sd;
  return Scalar(-0.5) * z * z - std::log(sd) - Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
}

/// log(scale_sq + x^2) without overflow for large |x|.
template <typename Scalar>
Scalar log_scale_plus_square(Scalar scale_sq, Scalar x) {
  const Scalar ax = std::abs(x);
  if (ax > Scalar(1e100)) {
    return Scalar(2) * std::log(ax) + std::log1p(scale_sq / (ax * ax));
  }
  return std::log(scale_sq + x * x);
}

/// Centered Cauchy in the scale-squared parameterization: f(x) = s / (pi (s^2 + x^2)).
template <typename Scalar>
Scalar cauchy_log_pdf(Scalar x, Scalar scale_sq) {
  return Scalar(0.5) * std::log(scale_sq) - std::log(std::numbers::pi_v<Scalar>) -
         log_scale_plus_square(scale_sq, x);
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  const Scalar peak = values.maxCoeff();
  if (!std::isfinite(peak)) return peak;
  return peak + std::log((values.derived().array() - peak).exp().sum());
}

}  // namespace math

/// A draw from a proposal; `component` is the 1-based mixture index when the
/// proposal is a mixture.
struct Draw {
  double x = 0.0;
  std::optional<int> component;
};

struct WeightedSample {
  double x = 0.0;
  double w = 0.0;
  std::optional<int> component;
};

using Batch = std::vector<WeightedSample>;

/// Normalized target density pi on the real line.
class TargetDensity {
 public:
  using LogDensityFn = std::function<double(double)>;
  using SamplerFn = std::function<double(Rng&)>;

  /// Throws Errc::unnormalized_target unless the density integrates to 1 within 1e-6.
  TargetDensity(std::string name, LogDensityFn log_density, SamplerFn oracle_sampler = {});

  const std::string& name() const noexcept { return name_; }
  double log_density(double x) const { return log_density_(x); }
  double density(double x) const { return std::exp(log_density_(x)); }

  bool has_oracle_sampler() const noexcept { return static_cast<bool>(oracle_); }
  /// Exact draw from pi. Only for diagnostics and oracle tests.
  double sample_oracle(Rng& rng) const;

 private:
  std::string name_;
  LogDensityFn log_density_;
  SamplerFn oracle_;
};

TargetDensity standard_normal_target();
/// sum_d weights[d] N(means[d], sd^2).
TargetDensity normal_mixture_target(std::vector<double> weights, std::vector<double> means, double sd = 1.0);

enum class FamilyKind { normal_mean, cauchy_scale, mixture };

const char* to_string(FamilyKind kind) noexcept;

/// Optional exponential-family metadata for f(x|mu) = h(x) exp{eta(mu) x - phi(mu)}.
struct ExponentialForm {
  std::function<double(double)> natural_parameter;
  std::function<double(double)> log_partition;
};

/// Parametric proposal family f(.|theta), theta in R^D.
class ProposalFamily {
 public:
  virtual ~ProposalFamily() = default;

  virtual FamilyKind kind() const noexcept = 0;
  virtual std::string name() const = 0;
  virtual Eigen::Index dimension() const noexcept = 0;
  virtual ParameterBox default_box() const = 0;

  /// Throws if theta is outside the family's parameter space.
  virtual void validate(const Vector& theta) const = 0;
  virtual double log_density(double x, const Vector& theta) const = 0;
  /// Gradient of log f(x|theta) with respect to theta.
  virtual Vector score(double x, const Vector& theta) const = 0;
  virtual Draw sample(const Vector& theta, Rng& rng) const = 0;

  virtual std::optional<ExponentialForm> exponential_form() const { return std::nullopt; }

  double density(double x, const Vector& theta) const { return std::exp(log_density(x, theta)); }
};

using ProposalPtr = std::shared_ptr<const ProposalFamily>;

/// N(theta, 1) with adaptable mean.
class NormalMeanFamily final : public ProposalFamily {
 public:
  FamilyKind kind() const noexcept override { return FamilyKind::normal_mean; }
  std::string name() const override { return "normal-mean"; }
  Eigen::Index dimension() const noexcept override { return 1; }
  ParameterBox default_box() const override;
  void validate(const Vector& theta) const override;
  double log_density(double x, const Vector& theta) const override;
  Vector score(double x, const Vector& theta) const override;
  Draw sample(const Vector& theta, Rng& rng) const override;
  std::optional<ExponentialForm> exponential_form() const override;
};

/// Cauchy(0, sigma) parameterized by theta = sigma^2.
class CauchyScaleFamily final : public ProposalFamily {
 public:
  FamilyKind kind() const noexcept override { return FamilyKind::cauchy_scale; }
  std::string name() const override { return "cauchy-scale"; }
  Eigen::Index dimension() const noexcept override { return 1; }
  ParameterBox default_box() const override;
  void validate(const Vector& theta) const override;
  double log_density(double x, const Vector& theta) const override;
  Vector score(double x, const Vector& theta) const override;
  Draw sample(const Vector& theta, Rng& rng) const override;
};

struct MixtureComponent {
  std::string name;
  std::function<double(double)> log_density;
  std::function<double(Rng&)> sampler;
};

MixtureComponent normal_component(double mean, double sd = 1.0);

/// sum_d alpha_d p_d(x) with fixed p_d. theta holds the D-1 free weights;
/// alpha_D = 1 - sum(theta).
class FixedComponentMixture final : public ProposalFamily {
 public:
  explicit FixedComponentMixture(std::vector<MixtureComponent> components);

  FamilyKind kind() const noexcept override { return FamilyKind::mixture; }
  std::string name() const override { return "mixture"; }
  Eigen::Index dimension() const noexcept override { return static_cast<Eigen::Index>(components_.size()) - 1; }
  ParameterBox default_box() const override;
  void validate(const Vector& theta) const override;
  double log_density(double x, const Vector& theta) const override;
  Vector score(double x, const Vector& theta) const override;
  Draw sample(const Vector& theta, Rng& rng) const override;

  std::size_t component_count() const noexcept { return components_.size(); }
  const MixtureComponent& component(std::size_t d) const { return components_.at(d); }
  /// log p_d(x) for every component d.
  Vector component_log_densities(double x) const;
  /// Full D-vector (theta, 1 - sum theta). Throws Errc::invalid_mixture_weights.
  Vector full_weights(const Vector& theta) const;

 private:
  std::vector<MixtureComponent> components_;
};

ProposalPtr normal_mean_family();
ProposalPtr cauchy_scale_family();
std::shared_ptr<const FixedComponentMixture> fixed_component_mixture(std::vector<MixtureComponent> components);

/// pi(x) / f(x|theta), computed in log space.
double importance_weight(const TargetDensity& target, const ProposalFamily& proposal, const Vector& theta,
                         double x);

Batch draw_batch(const ProposalFamily& proposal, const Vector& theta, const TargetDensity& target,
                 std::size_t n, Rng& rng);

double mean_weight(std::span<const WeightedSample> batch);

}  // namespace sais

#endif  // SAIS_DENSITY_HPP
