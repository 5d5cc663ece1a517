#ifndef SAIS_TEST_HELPERS_HPP
#define SAIS_TEST_HELPERS_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sais/quadrature.hpp"

namespace sais::testing {

inline double normal_pdf(double x, double mean = 0.0, double sd = 1.0) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

inline double normal_cdf(double x, double mean = 0.0, double sd = 1.0) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

inline double cauchy_pdf(double x, double scale) {
  return scale / (std::numbers::pi * (scale * scale + x * x));
}

inline double cauchy_cdf(double x, double scale) { return 0.5 + std::atan(x / scale) / std::numbers::pi; }

/// Example-3 target (1/3) N(-1,1) + (2/3) N(2,1) and its proposal family.
inline double example3_mixture(double x, double alpha) {
  return alpha * normal_pdf(x, -1.0) + (1.0 - alpha) * normal_pdf(x, 2.0);
}

/// Integral over the real line through x = tan(u).
template <typename F>
double integrate_line(F&& f, std::size_t panels = 200000) {
  const double h = std::numbers::pi / 2.0;
  return simpson(
      [&](double u) {
        const double c = std::cos(u);
        return f(std::tan(u)) / (c * c);
      },
      -h, h, panels);
}

/// One-sample Kolmogorov-Smirnov statistic.
template <typename Cdf>
double ks_statistic(std::vector<double> draws, Cdf&& cdf) {
  std::sort(draws.begin(), draws.end());
  const auto n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double f = cdf(draws[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

struct MeanSe {
  double mean;
  double se;
};

inline MeanSe mean_se(const std::vector<double>& v) {
  const auto n = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / (n - 1.0) / n)};
}

}  // namespace sais::testing

#endif  // SAIS_TEST_HELPERS_HPP
