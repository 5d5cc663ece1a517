#include "sais/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "sais/errors.hpp"
#include "sais/quadrature.hpp"

namespace sais {

namespace {

constexpr double kNegligible = 1e-12;

}  // namespace

KLEstimate kl_divergence(const TargetDensity& target, const ProposalFamily& proposal, const Vector& theta,
                         const KLOptions& options, Rng* rng) {
  proposal.validate(theta);
  KLEstimate est;
  est.method = options.method;

  if (options.method == KLMethod::monte_carlo) {
    if (rng == nullptr || !target.has_oracle_sampler()) {
      throw Error(Errc::invalid_argument, "Monte Carlo KL needs an rng and a target oracle sampler");
    }
    const std::size_t n = std::max<std::size_t>(options.resolution, 2);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = target.sample_oracle(*rng);
      const double log_ratio = target.log_density(x) - proposal.log_density(x, theta);
      if (!std::isfinite(log_ratio)) {
        est.unbounded = true;
        est.value = std::numeric_limits<double>::infinity();
        return est;
      }
      sum += log_ratio;
      sum_sq += log_ratio * log_ratio;
    }
    const auto dn = static_cast<double>(n);
    est.value = sum / dn;
    est.standard_error = std::sqrt(std::max(0.0, (sum_sq - dn * est.value * est.value) / (dn - 1.0)) / dn);
    return est;
  }

  bool proposal_vanishes = false;
  auto integrand = [&](double x) {
    const double log_p = target.log_density(x);
    if (log_p == -std::numeric_limits<double>::infinity()) return 0.0;
    const double log_f = proposal.log_density(x, theta);
    if (log_f == -std::numeric_limits<double>::infinity()) {
      proposal_vanishes = true;
      return 0.0;
    }
    return std::exp(log_p) * (log_p - log_f);
  };
  const double lo = -options.half_width;
  const double hi = options.half_width;
  est.value = simpson(integrand, lo, hi, options.resolution);
  // Contribution still visible at the grid edges means the log ratio outgrows
  // the target's decay there.
  const bool edge_mass = std::abs(integrand(lo)) > kNegligible || std::abs(integrand(hi)) > kNegligible;
  if (proposal_vanishes || edge_mass) {
    est.unbounded = true;
    if (proposal_vanishes) est.value = std::numeric_limits<double>::infinity();
  }
  return est;
}

MinorizationResult minorization_check(const Minorizer& minorizer, const std::function<double(const Vector&)>& objective,
                                      const std::vector<Vector>& grid, double tolerance) {
  MinorizationResult r;
  r.tangency_error = std::abs(minorizer.value(minorizer.anchor) - objective(minorizer.anchor));
  r.worst_violation = -std::numeric_limits<double>::infinity();
  r.worst_point = minorizer.anchor;
  for (const Vector& theta : grid) {
    const double gap = minorizer.value(theta) - objective(theta);
    if (gap > r.worst_violation) {
      r.worst_violation = gap;
      r.worst_point = theta;
    }
  }
  if (grid.empty()) r.worst_violation = 0.0;
  r.passed = r.tangency_error <= tolerance && r.worst_violation <= tolerance;
  if (r.tangency_error > tolerance) r.worst_point = minorizer.anchor;
  return r;
}

double effective_sample_size(std::span<const WeightedSample> batch) {
  if (batch.empty()) throw Error(Errc::invalid_argument, "effective_sample_size: empty batch");
  double top = 0.0;
  for (const auto& s : batch) top = std::max(top, s.w);
  if (!(top > 0.0)) throw Error(Errc::zero_weights, "effective_sample_size: all weights are zero");
  // Scaled by the largest weight so tiny weights do not underflow when squared.
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& s : batch) {
    const double u = s.w / top;
    sum += u;
    sum_sq += u * u;
  }
  return sum * sum / sum_sq;
}

}  // namespace sais
