#ifndef SAIS_SA_ENGINE_HPP
#define SAIS_SA_ENGINE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "sais/adapters.hpp"
#include "sais/density.hpp"
#include "sais/parameter_box.hpp"

namespace sais {

/// gamma_t = c / (t + t0 + 1).
struct GainSchedule {
  double c = 1.0;
  double t0 = 0.0;

  double operator()(std::size_t t) const { return c / (static_cast<double>(t) + t0 + 1.0); }
};

double gain(const GainSchedule& schedule, std::size_t t);

/// project(theta + gamma (m_tilde - theta)).
Vector sa_step(const Vector& theta, const Vector& m_tilde, double gamma, const ParameterBox& box);

/// Row t holds theta_t and v_t. Rows t >= 1 also carry the statistics of the
/// batch drawn at iteration t - 1; row 0 is the initial state.
struct TraceRecord {
  std::size_t t = 0;
  Vector theta;
  double v = 0.0;
  std::optional<double> mean_w;
  std::optional<double> gamma;
  std::optional<double> ess;
  std::optional<double> kl;
};

struct AdaptationTrace {
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;

  const Vector& final_theta() const { return records.back().theta; }
  double final_v() const { return records.back().v; }
  std::size_t iterations() const { return records.empty() ? 0 : records.size() - 1; }
};

struct AdaptOptions {
  bool record_ess = false;
};

/// Runs T iterations of: draw N from f(.|theta_t), theta tilde = M(theta_t),
/// theta_{t+1} = sa_step(...), v_{t+1} = integral_update(v_t, batch, 1/(t+1)).
/// Throws Errc::iteration_diverged when M returns a nonfinite parameter.
AdaptationTrace adapt(const TargetDensity& target, const ProposalFamily& proposal, const AdaptationMap& adapter,
                      const GainSchedule& schedule, const ParameterBox& box, const Vector& theta0,
                      std::size_t iterations, std::size_t batch_size, Rng& rng, std::uint64_t seed = 0,
                      AdaptOptions options = {});

struct AscentPoint {
  Vector theta;
  Vector gradient;   ///< estimate of E_pi d/dtheta log f(X|theta)
  Vector direction;  ///< estimate of Mbar(theta) - theta
  double inner_product = 0.0;
  double standard_error = 0.0;
};

/// Monte Carlo estimate of <E_pi d log f, Mbar(theta) - theta> at each grid point,
/// from n_mc batches of the adapter's minimum batch size drawn from f(.|theta).
std::vector<AscentPoint> ascent_check(const TargetDensity& target, const ProposalFamily& proposal,
                                      const AdaptationMap& adapter, const std::vector<Vector>& theta_grid,
                                      std::size_t n_mc, Rng& rng);

}  // namespace sais

#endif  // SAIS_SA_ENGINE_HPP
