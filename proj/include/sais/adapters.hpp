#ifndef SAIS_ADAPTERS_HPP
#define SAIS_ADAPTERS_HPP

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "sais/density.hpp"

namespace sais {

/// The batch mapping M: (theta_t, weighted batch) -> theta tilde.
struct AdaptationMap {
  using ApplyFn = std::function<Vector(const Vector&, std::span<const WeightedSample>)>;

  std::string name;
  FamilyKind family = FamilyKind::normal_mean;
  std::size_t min_batch = 1;
  ApplyFn apply;

  Vector operator()(const Vector& theta, std::span<const WeightedSample> batch) const { return apply(theta, batch); }
};

/// Quadratic (or general) surrogate Q(.|theta_t) touching a at the anchor.
struct Minorizer {
  Vector anchor;
  std::function<double(const Vector&)> value;
  std::function<Vector()> maximizer;
};

// Exponential family, mean parameterization --------------------------------

/// (1/N) sum w_i x_i. theta is unused.
Vector exp_family_map(const Vector& theta, std::span<const WeightedSample> batch);

// Cauchy scale, theta = sigma^2 ---------------------------------------------

/// a(s) = sum w_i log f(x_i | s).
double cauchy_log_likelihood(double sigma_sq, std::span<const WeightedSample> batch);
/// a'(s) = sum w_i [1/(2s) - 1/(s + x_i^2)].
double cauchy_score(double sigma_sq, std::span<const WeightedSample> batch);

struct CurvatureBound {
  double second_derivative;
  double lower_bound;
};

/// a''(s) together with the lower bound -(sum w)/(2 s^2).
CurvatureBound cauchy_curvature_bound(double sigma_sq, std::span<const WeightedSample> batch);

/// Maximizer of the quadratic minorizer with curvature C < 0, floored at `sigma_sq_floor`.
double cauchy_mm_map(double sigma_sq, std::span<const WeightedSample> batch, double curvature,
                     double sigma_sq_floor = 0.01);

/// Q(s|s_t) = a(s_t) + (s - s_t) a'(s_t) + C (s - s_t)^2 / 2.
Minorizer cauchy_minorizer(double sigma_sq, std::span<const WeightedSample> batch, double curvature,
                           double sigma_sq_floor = 0.01);

enum class CurvatureMode {
  box_floor,  ///< C = -(sum w) / (2 s_min^2): valid on the whole box.
  local,      ///< C = -(sum w) / (2 s_t^2): the displayed bound at the current iterate.
  absorbed,   ///< theta tilde = s + a'(s); the constant is folded into the gain.
};

const char* to_string(CurvatureMode mode) noexcept;
CurvatureMode curvature_mode_from_string(std::string_view text);

/// Curvature constant for the given mode; zero when the batch carries no weight.
double cauchy_curvature_constant(CurvatureMode mode, double sigma_sq, std::span<const WeightedSample> batch,
                                 double sigma_sq_floor);

// Mixture weights -------------------------------------------------------------

/// Rao-Blackwellized update: alpha_d <- sum_i w_i r_id / N for the D-1 free weights,
/// r_id = alpha_d p_d(x_i) / sum_e alpha_e p_e(x_i).
Vector mixture_rb_map(const Vector& alpha, std::span<const WeightedSample> batch,
                      const FixedComponentMixture& mixture);

/// Indicator update: alpha_d <- sum_i w_i 1{Z_i = d} / N for the D-1 free weights.
Vector mixture_indicator_map(const Vector& alpha, std::span<const WeightedSample> batch);

// Named adapters --------------------------------------------------------------

AdaptationMap make_exp_family_adapter();
AdaptationMap make_cauchy_mm_adapter(CurvatureMode mode = CurvatureMode::box_floor, double sigma_sq_floor = 0.01);
AdaptationMap make_mixture_rb_adapter(std::shared_ptr<const FixedComponentMixture> mixture);
AdaptationMap make_mixture_indicator_adapter(Eigen::Index free_weights);

/// Adapter by name: "exp-family", "cauchy-mm", "mixture-rb", "mixture-indicator".
AdaptationMap make_adapter(std::string_view name, const ProposalPtr& proposal,
                           CurvatureMode mode = CurvatureMode::box_floor);

}  // namespace sais

#endif  // SAIS_ADAPTERS_HPP
