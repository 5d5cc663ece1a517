#include <doctest.h>

#include <limits>

#include "sais/density.hpp"
#include "sais/errors.hpp"
#include "test_helpers.hpp"

using namespace sais;
using namespace sais::testing;

namespace {

/// Uniform(0,1) proposal: zero density outside its support.
class UnitUniform final : public ProposalFamily {
 public:
  FamilyKind kind() const noexcept override { return FamilyKind::normal_mean; }
  std::string name() const override { return "unit-uniform"; }
  Eigen::Index dimension() const noexcept override { return 1; }
  ParameterBox default_box() const override { return ParameterBox(Vector::Zero(1), Vector::Ones(1)); }
  void validate(const Vector&) const override {}
  double log_density(double x, const Vector&) const override {
    return (x >= 0.0 && x <= 1.0) ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  Vector score(double, const Vector&) const override { return Vector::Zero(1); }
  Draw sample(const Vector&, Rng& rng) const override {
    return {std::uniform_real_distribution<double>(0.0, 1.0)(rng), std::nullopt};
  }
};

/// Proposal whose density is astronomically small everywhere.
class Vanishing final : public ProposalFamily {
 public:
  FamilyKind kind() const noexcept override { return FamilyKind::normal_mean; }
  std::string name() const override { return "vanishing"; }
  Eigen::Index dimension() const noexcept override { return 1; }
  ParameterBox default_box() const override { return ParameterBox(Vector::Zero(1), Vector::Ones(1)); }
  void validate(const Vector&) const override {}
  double log_density(double, const Vector&) const override { return -1e6; }
  Vector score(double, const Vector&) const override { return Vector::Zero(1); }
  Draw sample(const Vector&, Rng&) const override { return {0.0, std::nullopt}; }
};

std::shared_ptr<const FixedComponentMixture> example3_family() {
  return fixed_component_mixture({normal_component(-1.0), normal_component(2.0)});
}

Vector scalar(double v) { return Vector::Constant(1, v); }

}  // namespace

TEST_CASE("importance_weight on identical densities is one") {
  const TargetDensity target = standard_normal_target();
  const auto family = normal_mean_family();
  for (double x : {-3.0, -0.2, 0.0, 1.7, 5.0}) {
    CHECK(importance_weight(target, *family, scalar(0.0), x) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("importance_weight matches direct density ratios") {
  const TargetDensity target = standard_normal_target();
  const double normal_ratio = normal_pdf(0.0) / normal_pdf(0.0, 1.0);
  CHECK(importance_weight(target, *normal_mean_family(), scalar(1.0), 0.0) ==
        doctest::Approx(normal_ratio).epsilon(1e-14));
  CHECK(normal_ratio == doctest::Approx(1.64872).epsilon(1e-5));

  const double cauchy_ratio = normal_pdf(0.0) / cauchy_pdf(0.0, 2.0);
  CHECK(importance_weight(target, *cauchy_scale_family(), scalar(4.0), 0.0) ==
        doctest::Approx(cauchy_ratio).epsilon(1e-14));
  CHECK(cauchy_ratio == doctest::Approx(2.50663).epsilon(1e-5));
}

TEST_CASE("importance_weight error paths") {
  const TargetDensity target = standard_normal_target();
  SUBCASE("proposal zero where target is positive") {
    try {
      (void)importance_weight(target, UnitUniform{}, scalar(0.0), 2.0);
      FAIL("expected ProposalZeroAtSample");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::proposal_zero_at_sample);
    }
  }
  SUBCASE("overflowing ratio") {
    try {
      (void)importance_weight(target, Vanishing{}, scalar(0.0), 0.0);
      FAIL("expected NonfiniteWeight");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::nonfinite_weight);
    }
  }
  SUBCASE("far tails give a zero weight, not an error") {
    CHECK(importance_weight(target, *cauchy_scale_family(), scalar(1.0), 1e200) == 0.0);
  }
}

TEST_CASE("family log densities at reference points") {
  CHECK(normal_mean_family()->log_density(0.0, scalar(0.0)) ==
        doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-15));
  CHECK(cauchy_scale_family()->density(0.0, scalar(1.0)) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-15));
  CHECK(std::isfinite(cauchy_scale_family()->log_density(1e300, scalar(1.0))));

  const auto mixture = example3_family();
  const TargetDensity target = normal_mixture_target({1.0 / 3.0, 2.0 / 3.0}, {-1.0, 2.0});
  for (double x = -6.0; x <= 7.0; x += 0.25) {
    CHECK(mixture->density(x, scalar(1.0 / 3.0)) == doctest::Approx(target.density(x)).epsilon(1e-14));
    CHECK(mixture->density(x, scalar(0.2)) == doctest::Approx(example3_mixture(x, 0.2)).epsilon(1e-14));
  }
}

TEST_CASE("normal-mean family exposes its exponential form") {
  const auto form = normal_mean_family()->exponential_form();
  REQUIRE(form.has_value());
  // log f(x|mu) - log f(x|0) = eta(mu) x - phi(mu)
  for (double mu : {-2.0, 0.3, 1.0}) {
    for (double x : {-1.0, 0.0, 2.5}) {
      const double lhs = normal_mean_family()->log_density(x, scalar(mu)) - normal_mean_family()->log_density(x, scalar(0.0));
      CHECK(lhs == doctest::Approx(form->natural_parameter(mu) * x - form->log_partition(mu)).epsilon(1e-12));
    }
  }
  CHECK_FALSE(cauchy_scale_family()->exponential_form().has_value());
}

TEST_CASE("mixture weights are validated") {
  const auto mixture = example3_family();
  for (double bad : {0.0, -0.1, 1.0, 1.5}) {
    try {
      mixture->validate(scalar(bad));
      FAIL("expected InvalidMixtureWeights");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::invalid_mixture_weights);
    }
  }
  const Vector full = mixture->full_weights(scalar(0.25));
  CHECK(full[1] == doctest::Approx(0.75));

  const auto three = fixed_component_mixture({normal_component(-2.0), normal_component(0.0), normal_component(3.0)});
  CHECK(three->dimension() == 2);
  CHECK_THROWS_AS(three->validate(Vector::Constant(2, 0.5)), Error);
  // alpha_D = 1 - sum alpha_d: density equals the explicit sum.
  const Vector alpha = (Vector(2) << 0.2, 0.5).finished();
  const double x = 0.7;
  const double expected = 0.2 * normal_pdf(x, -2.0) + 0.5 * normal_pdf(x, 0.0) + 0.3 * normal_pdf(x, 3.0);
  CHECK(three->density(x, alpha) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("targets must be normalized") {
  CHECK_NOTHROW(standard_normal_target());
  CHECK_NOTHROW(TargetDensity("cauchy", [](double x) { return math::cauchy_log_pdf(x, 1.0); }));
  try {
    TargetDensity twice("twice", [](double x) { return std::log(2.0) + math::normal_log_pdf(x, 0.0, 1.0); });
    FAIL("expected UnnormalizedTarget");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unnormalized_target);
  }
}

TEST_CASE("built-in families integrate to one across their boxes") {
  Rng rng(11);
  const auto mixture = example3_family();
  for (const ProposalPtr& family : {normal_mean_family(), cauchy_scale_family(), ProposalPtr(mixture)}) {
    const ParameterBox box = family->default_box();
    for (int i = 0; i < 100; ++i) {
      Vector theta(box.dimension());
      for (Eigen::Index d = 0; d < theta.size(); ++d) {
        theta[d] = std::uniform_real_distribution<double>(box.lower()[d], box.upper()[d])(rng);
      }
      const double mass = integrate_line([&](double x) { return family->density(x, theta); });
      CHECK_MESSAGE(std::abs(mass - 1.0) < 1e-6, family->name(), " theta=", theta[0], " mass=", mass);
    }
  }
}

TEST_CASE("samplers follow their densities (KS at 1e5 draws)") {
  constexpr std::size_t n = 100000;
  const double critical = 1.95 / std::sqrt(static_cast<double>(n));  // alpha = 0.001
  Rng rng(2024);
  auto draws = [&](const ProposalFamily& f, const Vector& theta) {
    std::vector<double> out(n);
    for (auto& x : out) x = f.sample(theta, rng).x;
    return out;
  };
  CHECK(ks_statistic(draws(*normal_mean_family(), scalar(0.7)), [](double x) { return normal_cdf(x, 0.7); }) < critical);
  CHECK(ks_statistic(draws(*cauchy_scale_family(), scalar(4.0)), [](double x) { return cauchy_cdf(x, 2.0); }) <
        critical);
  CHECK(ks_statistic(draws(*example3_family(), scalar(0.35)), [](double x) {
          return 0.35 * normal_cdf(x, -1.0) + 0.65 * normal_cdf(x, 2.0);
        }) < critical);
}

TEST_CASE("draw_batch") {
  Rng rng(5);
  const TargetDensity normal = standard_normal_target();

  SUBCASE("target equals proposal") {
    const Batch b = draw_batch(*normal_mean_family(), scalar(0.0), normal, 1, rng);
    REQUIRE(b.size() == 1);
    CHECK(b[0].w == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_FALSE(b[0].component.has_value());
  }
  SUBCASE("weights are unbiased for several (target, proposal, theta) triples") {
    const TargetDensity mix_target = normal_mixture_target({1.0 / 3.0, 2.0 / 3.0}, {-1.0, 2.0});
    struct Triple {
      const TargetDensity* target;
      ProposalPtr proposal;
      Vector theta;
    };
    const std::vector<Triple> triples{{&normal, normal_mean_family(), scalar(1.0)},
                                      {&normal, cauchy_scale_family(), scalar(4.0)},
                                      {&normal, cauchy_scale_family(), scalar(1.21)},
                                      {&mix_target, example3_family(), scalar(0.5)}};
    for (const auto& t : triples) {
      const Batch b = draw_batch(*t.proposal, t.theta, *t.target, 100000, rng);
      std::vector<double> w;
      for (const auto& s : b) w.push_back(s.w);
      const MeanSe m = mean_se(w);
      CHECK_MESSAGE(std::abs(m.mean - 1.0) < 3.0 * m.se, t.proposal->name(), " mean w = ", m.mean, " se = ", m.se);
    }
  }
  SUBCASE("mixture component frequencies match alpha") {
    constexpr double alpha = 0.3;
    const Batch b = draw_batch(*example3_family(), scalar(alpha), normal, 100000, rng);
    std::size_t first = 0;
    for (const auto& s : b) {
      REQUIRE(s.component.has_value());
      CHECK((*s.component == 1 || *s.component == 2));
      if (*s.component == 1) ++first;
    }
    const double freq = static_cast<double>(first) / 1e5;
    const double se = std::sqrt(alpha * (1.0 - alpha) / 1e5);
    CHECK(std::abs(freq - alpha) < 3.0 * se);
  }
  SUBCASE("n must be positive") { CHECK_THROWS_AS(draw_batch(*normal_mean_family(), scalar(0.0), normal, 0, rng), Error); }
}
