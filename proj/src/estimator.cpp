#include "sais/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "sais/diagnostics.hpp"
#include "sais/errors.hpp"

namespace sais {

double integral_update(double v, std::span<const WeightedSample> batch, double gamma, const Integrand& h) {
  if (batch.empty()) throw Error(Errc::invalid_argument, "integral_update: empty batch");
  double sum = 0.0;
  for (const auto& s : batch) sum += (h ? h(s.x) : 1.0) * s.w;
  return v + gamma * (sum / static_cast<double>(batch.size()) - v);
}

AdaptationTrace fixed_proposal_trace(const TargetDensity& target, const ProposalFamily& proposal,
                                     const Vector& theta_fixed, std::size_t iterations, std::size_t batch_size,
                                     Rng& rng, std::uint64_t seed, AdaptOptions options) {
  if (iterations == 0 || batch_size == 0) {
    throw Error(Errc::invalid_argument, "fixed proposal needs T >= 1 and N >= 1");
  }
  proposal.validate(theta_fixed);
  AdaptationTrace trace;
  trace.seed = seed;
  trace.records.reserve(iterations + 1);
  trace.records.push_back({0, theta_fixed, 0.0, {}, {}, {}, {}});
  IntegralEstimate estimate;
  for (std::size_t t = 0; t < iterations; ++t) {
    const Batch batch = draw_batch(proposal, theta_fixed, target, batch_size, rng);
    const double gamma = 1.0 / static_cast<double>(t + 1);
    estimate.update(batch);
    TraceRecord rec{t + 1, theta_fixed, estimate.v, mean_weight(batch), gamma, {}, {}};
    if (options.record_ess && mean_weight(batch) > 0.0) rec.ess = effective_sample_size(batch);
    trace.records.push_back(std::move(rec));
  }
  return trace;
}

double fixed_proposal_estimate(const TargetDensity& target, const ProposalFamily& proposal,
                               const Vector& theta_fixed, std::size_t iterations, std::size_t batch_size, Rng& rng) {
  return fixed_proposal_trace(target, proposal, theta_fixed, iterations, batch_size, rng).final_v();
}

AdaptationTrace run_arm(const ArmSpec& arm, std::uint64_t seed, AdaptOptions options) {
  if (!arm.target || !arm.proposal) throw Error(Errc::invalid_argument, "arm '" + arm.name + "' is incomplete");
  Rng rng(seed);
  if (arm.adapter) {
    return adapt(*arm.target, *arm.proposal, *arm.adapter, arm.schedule, arm.box, arm.theta0, arm.iterations,
                 arm.batch_size, rng, seed, options);
  }
  return fixed_proposal_trace(*arm.target, *arm.proposal, arm.theta0, arm.iterations, arm.batch_size, rng, seed,
                              options);
}

ArmReport replicate_arm(const ArmSpec& arm, std::size_t replications, std::uint64_t master_seed,
                        std::size_t arm_index, unsigned threads) {
  if (replications < 2) throw Error(Errc::invalid_argument, "replicate needs R >= 2");

  struct Outcome {
    bool diverged = false;
    double v = 0.0;
    Vector theta;
  };
  std::vector<Outcome> outcomes(replications);
  std::exception_ptr failure;

  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t r = begin; r < replications; r += stride) {
      try {
        const AdaptationTrace trace = run_arm(arm, derive_seed(master_seed, arm_index, r));
        outcomes[r].v = trace.final_v();
        outcomes[r].theta = trace.final_theta();
      } catch (const Error& e) {
        if (e.code() == Errc::iteration_diverged || e.code() == Errc::nonfinite_weight) {
          outcomes[r].diverged = true;
        } else if (!failure) {
          failure = std::current_exception();
        }
      }
    }
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(replications)));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work, i, threads);
  }
  if (failure) std::rethrow_exception(failure);

  ArmReport report;
  report.arm = arm.name;
  report.replications = replications;
  for (const auto& o : outcomes) {
    if (o.diverged) {
      ++report.diverged;
      continue;
    }
    report.final_v.push_back(o.v);
    report.final_theta.push_back(o.theta);
  }
  if (static_cast<double>(report.diverged) > 0.01 * static_cast<double>(replications)) {
    throw Error(Errc::too_many_divergences, "arm '" + arm.name + "': " + std::to_string(report.diverged) + " of " +
                                                std::to_string(replications) + " replications diverged");
  }

  // Fixed index order keeps the sums reproducible.
  const auto n = static_cast<double>(report.final_v.size());
  double sum_sq = 0.0;
  double sum_v = 0.0;
  for (double v : report.final_v) {
    sum_sq += (v - 1.0) * (v - 1.0);
    sum_v += v;
  }
  report.mse = sum_sq / n;
  report.mean_v = sum_v / n;
  double var_sq = 0.0;
  double var_v = 0.0;
  for (double v : report.final_v) {
    const double e = (v - 1.0) * (v - 1.0) - report.mse;
    var_sq += e * e;
    var_v += (v - report.mean_v) * (v - report.mean_v);
  }
  report.se = std::sqrt(var_sq / (n - 1.0) / n);
  report.se_v = std::sqrt(var_v / (n - 1.0) / n);
  return report;
}

const ArmReport& MSEReport::arm(std::string_view name) const {
  for (const auto& a : arms) {
    if (a.arm == name) return a;
  }
  throw Error(Errc::invalid_argument, "no arm named '" + std::string(name) + "'");
}

MSEReport replicate_mse(std::string example, const std::vector<ArmSpec>& arms, std::size_t replications,
                        std::uint64_t master_seed, unsigned threads) {
  MSEReport report;
  report.example = std::move(example);
  report.replications = replications;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    report.arms.push_back(replicate_arm(arms[i], replications, master_seed, i, threads));
  }
  return report;
}

}  // namespace sais
