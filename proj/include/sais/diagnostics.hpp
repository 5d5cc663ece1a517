#ifndef SAIS_DIAGNOSTICS_HPP
#define SAIS_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "sais/adapters.hpp"
#include "sais/density.hpp"

namespace sais {

enum class KLMethod { quadrature, monte_carlo };

struct KLEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  KLMethod method = KLMethod::quadrature;
  bool unbounded = false;  ///< proposal tails lighter than the target's on the grid
};

struct KLOptions {
  KLMethod method = KLMethod::quadrature;
  std::size_t resolution = 100000;  ///< Simpson panels, or Monte Carlo draws
  double half_width = 30.0;
};

/// E_pi log(pi / f(.|theta)).
KLEstimate kl_divergence(const TargetDensity& target, const ProposalFamily& proposal, const Vector& theta,
                         const KLOptions& options = {}, Rng* rng = nullptr);

struct FdResult {
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

/// Central difference of `f` at `point` against the supplied derivative.
template <typename F, typename G>
FdResult fd_check(F&& f, G&& derivative, double point, double step = 1e-5) {
  FdResult r;
  r.analytic = derivative(point);
  r.numeric = (f(point + step) - f(point - step)) / (2.0 * step);
  const double scale = std::max(std::abs(r.analytic), std::abs(r.numeric));
  r.relative_error = scale == 0.0 ? 0.0 : std::abs(r.analytic - r.numeric) / scale;
  return r;
}

struct MinorizationResult {
  bool passed = true;
  double tangency_error = 0.0;
  double worst_violation = 0.0;  ///< max over grid of Q - a (positive means violated)
  Vector worst_point;
};

MinorizationResult minorization_check(const Minorizer& minorizer, const std::function<double(const Vector&)>& objective,
                                      const std::vector<Vector>& grid, double tolerance = 1e-10);

/// (sum w)^2 / sum w^2.
double effective_sample_size(std::span<const WeightedSample> batch);

}  // namespace sais

#endif  // SAIS_DIAGNOSTICS_HPP
