#include "sais/adapters.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "sais/errors.hpp"

namespace sais {

namespace {

void require_nonempty(std::span<const WeightedSample> batch, const char* who) {
  if (batch.empty()) throw Error(Errc::invalid_argument, std::string(who) + ": empty batch");
}

void require_positive_scale(double sigma_sq) {
  if (!(sigma_sq > 0.0)) throw Error(Errc::nonpositive_scale, "sigma^2 must be positive");
}

double total_weight(std::span<const WeightedSample> batch) {
  double sum = 0.0;
  for (const auto& s : batch) sum += s.w;
  return sum;
}

double single(const Vector& theta, const char* who) {
  if (theta.size() != 1) throw Error(Errc::invalid_argument, std::string(who) + " expects a scalar parameter");
  return theta[0];
}

}  // namespace

Vector exp_family_map(const Vector& /*theta*/, std::span<const WeightedSample> batch) {
  require_nonempty(batch, "exp_family_map");
  double sum = 0.0;
  for (const auto& s : batch) sum += s.w * s.x;
  return Vector::Constant(1, sum / static_cast<double>(batch.size()));
}

double cauchy_log_likelihood(double sigma_sq, std::span<const WeightedSample> batch) {
  require_positive_scale(sigma_sq);
  double a = 0.0;
  for (const auto& s : batch) {
    if (s.w != 0.0) a += s.w * math::cauchy_log_pdf(s.x, sigma_sq);
  }
  return a;
}

double cauchy_score(double sigma_sq, std::span<const WeightedSample> batch) {
  require_positive_scale(sigma_sq);
  double g = 0.0;
  for (const auto& s : batch) {
    g += s.w * (0.5 / sigma_sq - std::exp(-math::log_scale_plus_square(sigma_sq, s.x)));
  }
  return g;
}

CurvatureBound cauchy_curvature_bound(double sigma_sq, std::span<const WeightedSample> batch) {
  require_positive_scale(sigma_sq);
  const double inv_two_s2 = 0.5 / (sigma_sq * sigma_sq);
  double second = 0.0;
  double bound = 0.0;
  for (const auto& s : batch) {
    const double inv = std::exp(-math::log_scale_plus_square(sigma_sq, s.x));
    second += s.w * (inv * inv - inv_two_s2);
    bound -= s.w * inv_two_s2;
  }
  return {second, bound};
}

double cauchy_mm_map(double sigma_sq, std::span<const WeightedSample> batch, double curvature,
                     double sigma_sq_floor) {
  require_positive_scale(sigma_sq);
  if (!(curvature < 0.0)) throw Error(Errc::nonnegative_curvature, "curvature constant C must be negative");
  return std::max(sigma_sq - cauchy_score(sigma_sq, batch) / curvature, sigma_sq_floor);
}

Minorizer cauchy_minorizer(double sigma_sq, std::span<const WeightedSample> batch, double curvature,
                           double sigma_sq_floor) {
  require_positive_scale(sigma_sq);
  if (!(curvature < 0.0)) throw Error(Errc::nonnegative_curvature, "curvature constant C must be negative");
  const double a0 = cauchy_log_likelihood(sigma_sq, batch);
  const double slope = cauchy_score(sigma_sq, batch);
  Batch owned(batch.begin(), batch.end());
  Minorizer q;
  q.anchor = Vector::Constant(1, sigma_sq);
  q.value = [=](const Vector& theta) {
    const double d = theta[0] - sigma_sq;
    return a0 + d * slope + 0.5 * curvature * d * d;
  };
  q.maximizer = [owned = std::move(owned), sigma_sq, curvature, sigma_sq_floor]() {
    return Vector::Constant(1, cauchy_mm_map(sigma_sq, owned, curvature, sigma_sq_floor));
  };
  return q;
}

const char* to_string(CurvatureMode mode) noexcept {
  switch (mode) {
    case CurvatureMode::box_floor: return "box-floor";
    case CurvatureMode::local: return "local";
    case CurvatureMode::absorbed: return "absorbed";
  }
  return "unknown";
}

CurvatureMode curvature_mode_from_string(std::string_view text) {
  if (text == "box-floor") return CurvatureMode::box_floor;
  if (text == "local") return CurvatureMode::local;
  if (text == "absorbed") return CurvatureMode::absorbed;
  throw Error(Errc::config_parse, "unknown curvature mode '" + std::string(text) + "'");
}

double cauchy_curvature_constant(CurvatureMode mode, double sigma_sq, std::span<const WeightedSample> batch,
                                 double sigma_sq_floor) {
  const double w = total_weight(batch);
  switch (mode) {
    case CurvatureMode::box_floor: return -w / (2.0 * sigma_sq_floor * sigma_sq_floor);
    case CurvatureMode::local: return -w / (2.0 * sigma_sq * sigma_sq);
    case CurvatureMode::absorbed: return -1.0;
  }
  return 0.0;
}

Vector mixture_rb_map(const Vector& alpha, std::span<const WeightedSample> batch,
                      const FixedComponentMixture& mixture) {
  require_nonempty(batch, "mixture_rb_map");
  const Vector full = mixture.full_weights(alpha);
  const Vector log_alpha = full.array().log();
  const Eigen::Index free = alpha.size();
  Vector out = Vector::Zero(free);
  for (const auto& s : batch) {
    if (s.w == 0.0) continue;
    const Vector joint = log_alpha + mixture.component_log_densities(s.x);
    const double log_f = math::log_sum_exp(joint);
    out += s.w * (joint.head(free).array() - log_f).exp().matrix();
  }
  return out / static_cast<double>(batch.size());
}

Vector mixture_indicator_map(const Vector& alpha, std::span<const WeightedSample> batch) {
  require_nonempty(batch, "mixture_indicator_map");
  const Eigen::Index free = alpha.size();
  Vector out = Vector::Zero(free);
  for (const auto& s : batch) {
    if (!s.component) throw Error(Errc::missing_component_index, "sample carries no component index");
    const int d = *s.component;
    if (d < 1 || d > free + 1) throw Error(Errc::invalid_argument, "component index out of range");
    if (d <= free) out[d - 1] += s.w;
  }
  return out / static_cast<double>(batch.size());
}

AdaptationMap make_exp_family_adapter() {
  return {"exp-family", FamilyKind::normal_mean, 1, &exp_family_map};
}

AdaptationMap make_cauchy_mm_adapter(CurvatureMode mode, double sigma_sq_floor) {
  AdaptationMap map;
  map.name = "cauchy-mm";
  map.family = FamilyKind::cauchy_scale;
  map.min_batch = 2;  // a single draw drives the weighted likelihood to sigma = 0
  map.apply = [mode, sigma_sq_floor](const Vector& theta, std::span<const WeightedSample> batch) -> Vector {
    const double s = single(theta, "cauchy-mm");
    if (mode == CurvatureMode::absorbed) return Vector::Constant(1, s + cauchy_score(s, batch));
    const double c = cauchy_curvature_constant(mode, s, batch, sigma_sq_floor);
    if (c == 0.0) return theta;  // all weights zero: a' = 0 as well
    return Vector::Constant(1, cauchy_mm_map(s, batch, c, sigma_sq_floor));
  };
  return map;
}

AdaptationMap make_mixture_rb_adapter(std::shared_ptr<const FixedComponentMixture> mixture) {
  if (!mixture) throw Error(Errc::invalid_argument, "mixture-rb needs a mixture family");
  AdaptationMap map;
  map.name = "mixture-rb";
  map.family = FamilyKind::mixture;
  map.apply = [mixture = std::move(mixture)](const Vector& alpha, std::span<const WeightedSample> batch) {
    return mixture_rb_map(alpha, batch, *mixture);
  };
  return map;
}

AdaptationMap make_mixture_indicator_adapter(Eigen::Index free_weights) {
  AdaptationMap map;
  map.name = "mixture-indicator";
  map.family = FamilyKind::mixture;
  map.apply = [free_weights](const Vector& alpha, std::span<const WeightedSample> batch) {
    if (alpha.size() != free_weights) throw Error(Errc::invalid_mixture_weights, "weight dimension mismatch");
    return mixture_indicator_map(alpha, batch);
  };
  return map;
}

AdaptationMap make_adapter(std::string_view name, const ProposalPtr& proposal, CurvatureMode mode) {
  if (!proposal) throw Error(Errc::invalid_argument, "adapter needs a proposal family");
  auto require = [&](FamilyKind kind) {
    if (proposal->kind() != kind) {
      throw Error(Errc::config_parse, "adapter '" + std::string(name) + "' is not valid for family '" +
                                          proposal->name() + "'");
    }
  };
  if (name == "exp-family") {
    require(FamilyKind::normal_mean);
    return make_exp_family_adapter();
  }
  if (name == "cauchy-mm") {
    require(FamilyKind::cauchy_scale);
    return make_cauchy_mm_adapter(mode, proposal->default_box().lower()[0]);
  }
  if (name == "mixture-rb" || name == "mixture-indicator") {
    require(FamilyKind::mixture);
    auto mixture = std::dynamic_pointer_cast<const FixedComponentMixture>(proposal);
    if (name == "mixture-rb") return make_mixture_rb_adapter(std::move(mixture));
    return make_mixture_indicator_adapter(proposal->dimension());
  }
  throw Error(Errc::config_parse, "unknown adapter '" + std::string(name) + "'");
}

}  // namespace sais
