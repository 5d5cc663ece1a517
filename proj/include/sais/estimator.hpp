#ifndef SAIS_ESTIMATOR_HPP
#define SAIS_ESTIMATOR_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sais/adapters.hpp"
#include "sais/density.hpp"
#include "sais/sa_engine.hpp"

namespace sais {

using Integrand = std::function<double(double)>;

/// v + gamma (mean_i h(x_i) w_i - v). An empty `h` means h = 1.
double integral_update(double v, std::span<const WeightedSample> batch, double gamma, const Integrand& h = {});

/// Running estimate of the integral of h against pi.
struct IntegralEstimate {
  double v = 0.0;
  std::size_t t = 0;
  Integrand integrand;

  /// Applies the recursion with the running-mean gain 1/(t+1).
  void update(std::span<const WeightedSample> batch) {
    v = integral_update(v, batch, 1.0 / static_cast<double>(t + 1), integrand);
    ++t;
  }
};

/// Same recursion and budget as adapt(), with theta frozen.
AdaptationTrace fixed_proposal_trace(const TargetDensity& target, const ProposalFamily& proposal,
                                     const Vector& theta_fixed, std::size_t iterations, std::size_t batch_size,
                                     Rng& rng, std::uint64_t seed = 0, AdaptOptions options = {});

double fixed_proposal_estimate(const TargetDensity& target, const ProposalFamily& proposal,
                               const Vector& theta_fixed, std::size_t iterations, std::size_t batch_size, Rng& rng);

/// One arm of a comparison: adaptive when `adapter` is set, fixed otherwise.
struct ArmSpec {
  std::string name;
  std::shared_ptr<const TargetDensity> target;
  ProposalPtr proposal;
  std::optional<AdaptationMap> adapter;
  Vector theta0;
  GainSchedule schedule;
  ParameterBox box;
  std::size_t iterations = 500;
  std::size_t batch_size = 1;
};

AdaptationTrace run_arm(const ArmSpec& arm, std::uint64_t seed, AdaptOptions options = {});

struct ArmReport {
  std::string arm;
  double mse = 0.0;
  double se = 0.0;      ///< Monte Carlo standard error of `mse`
  double mean_v = 0.0;
  double se_v = 0.0;    ///< standard error of `mean_v`
  std::size_t replications = 0;
  std::size_t diverged = 0;
  std::vector<double> final_v;
  std::vector<Vector> final_theta;
};

struct MSEReport {
  std::string example;
  std::vector<ArmReport> arms;
  std::size_t replications = 0;
  std::string config_digest;

  const ArmReport& arm(std::string_view name) const;
};

/// R seeded replications of one arm; the seed of replication r is
/// derive_seed(master_seed, arm_index, r). Throws Errc::too_many_divergences
/// when more than 1% of replications diverge.
ArmReport replicate_arm(const ArmSpec& arm, std::size_t replications, std::uint64_t master_seed,
                        std::size_t arm_index, unsigned threads = 1);

MSEReport replicate_mse(std::string example, const std::vector<ArmSpec>& arms, std::size_t replications,
                        std::uint64_t master_seed, unsigned threads = 1);

}  // namespace sais

#endif  // SAIS_ESTIMATOR_HPP
