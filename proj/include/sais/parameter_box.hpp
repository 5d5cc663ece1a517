#ifndef SAIS_PARAMETER_BOX_HPP
#define SAIS_PARAMETER_BOX_HPP

#include <optional>

#include <Eigen/Dense>

namespace sais {

using Vector = Eigen::VectorXd;

/// Coordinatewise closed box W that keeps the iterates inside a compact set.
///
/// A box built with `simplex()` also keeps the implied last mixture weight
/// 1 - sum(theta) at or above the lower edge by shrinking the free weights.
class ParameterBox {
 public:
  ParameterBox(Vector lo, Vector hi);

  static ParameterBox simplex(Eigen::Index free_weights, double lo = 0.001, double hi = 0.999);

  Eigen::Index dimension() const noexcept { return lo_.size(); }
  const Vector& lower() const noexcept { return lo_; }
  const Vector& upper() const noexcept { return hi_; }
  bool keeps_simplex() const noexcept { return implied_last_floor_.has_value(); }

  bool contains(const Vector& theta) const;
  Vector project(const Vector& theta) const;

 private:
  Vector lo_;
  Vector hi_;
  std::optional<double> implied_last_floor_;
};

}  // namespace sais

#endif  // SAIS_PARAMETER_BOX_HPP
