#include "sais/sa_engine.hpp"

#include <algorithm>
#include <cmath>

#include "sais/diagnostics.hpp"
#include "sais/errors.hpp"
#include "sais/estimator.hpp"

namespace sais {

// ---------------------------------------------------------------------------
// ParameterBox

ParameterBox::ParameterBox(Vector lo, Vector hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size() || lo_.size() == 0) {
    throw Error(Errc::invalid_argument, "parameter box bounds must be nonempty and of equal size");
  }
  if (!lo_.allFinite() || !hi_.allFinite() || !(lo_.array() < hi_.array()).all()) {
    throw Error(Errc::invalid_argument, "parameter box needs finite lo_d < hi_d");
  }
}

ParameterBox ParameterBox::simplex(Eigen::Index free_weights, double lo, double hi) {
  if (!(lo > 0.0) || !(hi < 1.0) || !(lo * static_cast<double>(free_weights + 1) < 1.0)) {
    throw Error(Errc::invalid_argument, "simplex box needs 0 < lo, hi < 1 and room for every weight");
  }
  ParameterBox box(Vector::Constant(free_weights, lo), Vector::Constant(free_weights, hi));
  box.implied_last_floor_ = lo;
  return box;
}

bool ParameterBox::contains(const Vector& theta) const {
  if (theta.size() != dimension() || !theta.allFinite()) return false;
  if ((theta.array() < lo_.array()).any() || (theta.array() > hi_.array()).any()) return false;
  return !implied_last_floor_ || theta.sum() <= 1.0 - *implied_last_floor_;
}

Vector ParameterBox::project(const Vector& theta) const {
  if (theta.size() != dimension()) throw Error(Errc::invalid_argument, "projection dimension mismatch");
  Vector out = theta.cwiseMax(lo_).cwiseMin(hi_);
  if (!implied_last_floor_) return out;
  // Shrink the free weights until the implied last one clears the floor. The
  // loop only repeats when shrinking pushes a coordinate below its own floor.
  const double room = 1.0 - *implied_last_floor_;
  for (int pass = 0; pass < 64 && out.sum() > room; ++pass) {
    const double excess = out.sum() - room;
    const Vector slack = out - lo_;
    const double total_slack = slack.sum();
    if (total_slack <= 0.0) break;
    out -= slack * (excess / total_slack);
    out = out.cwiseMax(lo_);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gains and steps

double gain(const GainSchedule& schedule, std::size_t t) {
  if (!(schedule.c > 0.0) || !(schedule.t0 >= 0.0)) {
    throw Error(Errc::invalid_argument, "gain schedule needs c > 0 and t0 >= 0");
  }
  return schedule(t);
}

Vector sa_step(const Vector& theta, const Vector& m_tilde, double gamma, const ParameterBox& box) {
  if (!m_tilde.allFinite()) throw Error(Errc::nonfinite_parameter, "M returned a nonfinite parameter");
  if (theta.size() != m_tilde.size()) throw Error(Errc::invalid_argument, "sa_step dimension mismatch");
  if (!(gamma > 0.0) || gamma > 1.0) throw Error(Errc::invalid_argument, "sa_step needs gamma in (0, 1]");
  return box.project(theta + gamma * (m_tilde - theta));
}

// ---------------------------------------------------------------------------
// The adaptation loop

AdaptationTrace adapt(const TargetDensity& target, const ProposalFamily& proposal, const AdaptationMap& adapter,
                      const GainSchedule& schedule, const ParameterBox& box, const Vector& theta0,
                      std::size_t iterations, std::size_t batch_size, Rng& rng, std::uint64_t seed,
                      AdaptOptions options) {
  if (iterations == 0 || batch_size == 0) throw Error(Errc::invalid_argument, "adapt needs T >= 1 and N >= 1");
  if (adapter.family != proposal.kind()) {
    throw Error(Errc::invalid_argument, "adapter '" + adapter.name + "' does not fit family '" + proposal.name() + "'");
  }
  if (batch_size < adapter.min_batch) {
    throw Error(Errc::invalid_argument, "adapter '" + adapter.name + "' needs N >= " + std::to_string(adapter.min_batch));
  }
  if (!box.contains(theta0)) throw Error(Errc::invalid_argument, "theta0 lies outside the parameter box");
  proposal.validate(theta0);

  AdaptationTrace trace;
  trace.seed = seed;
  trace.records.reserve(iterations + 1);
  trace.records.push_back({0, theta0, 0.0, {}, {}, {}, {}});

  Vector theta = theta0;
  double v = 0.0;
  for (std::size_t t = 0; t < iterations; ++t) {
    const double gamma = std::min(gain(schedule, t), 1.0);
    const Batch batch = draw_batch(proposal, theta, target, batch_size, rng);

    const Vector m_tilde = adapter(theta, batch);
    if (!m_tilde.allFinite()) {
      throw Error(Errc::iteration_diverged, "nonfinite parameter at iteration " + std::to_string(t));
    }
    v = integral_update(v, batch, 1.0 / static_cast<double>(t + 1));
    theta = sa_step(theta, m_tilde, gamma, box);

    TraceRecord rec{t + 1, theta, v, mean_weight(batch), gamma, {}, {}};
    if (options.record_ess) {
      double sum = 0.0;
      for (const auto& s : batch) sum += s.w;
      if (sum > 0.0) rec.ess = effective_sample_size(batch);
    }
    trace.records.push_back(std::move(rec));
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Condition (5) diagnostic

std::vector<AscentPoint> ascent_check(const TargetDensity& target, const ProposalFamily& proposal,
                                      const AdaptationMap& adapter, const std::vector<Vector>& theta_grid,
                                      std::size_t n_mc, Rng& rng) {
  if (n_mc < 2) throw Error(Errc::invalid_argument, "ascent_check needs n_mc >= 2");
  const std::size_t k = std::max<std::size_t>(adapter.min_batch, 1);
  std::vector<AscentPoint> out;
  out.reserve(theta_grid.size());
  for (const Vector& theta : theta_grid) {
    const Eigen::Index dim = theta.size();
    Eigen::MatrixXd g(dim, static_cast<Eigen::Index>(n_mc));
    Eigen::MatrixXd d(dim, static_cast<Eigen::Index>(n_mc));
    for (std::size_t i = 0; i < n_mc; ++i) {
      const Batch batch = draw_batch(proposal, theta, target, k, rng);
      Vector gi = Vector::Zero(dim);
      for (const auto& s : batch) gi += s.w * proposal.score(s.x, theta);
      g.col(static_cast<Eigen::Index>(i)) = gi / static_cast<double>(k);
      d.col(static_cast<Eigen::Index>(i)) = adapter(theta, batch) - theta;
    }
    AscentPoint p;
    p.theta = theta;
    p.gradient = g.rowwise().mean();
    p.direction = d.rowwise().mean();
    p.inner_product = p.gradient.dot(p.direction);
    // Delta method: z_i = <dbar, g_i> + <gbar, d_i> linearizes the product of means.
    const Eigen::RowVectorXd z = p.direction.transpose() * g + p.gradient.transpose() * d;
    const double mean_z = z.mean();
    const double var_z = (z.array() - mean_z).square().sum() / static_cast<double>(n_mc - 1);
    p.standard_error = std::sqrt(var_z / static_cast<double>(n_mc));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace sais
