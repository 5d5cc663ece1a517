#ifndef SAIS_QUADRATURE_HPP
#define SAIS_QUADRATURE_HPP

#include <cstddef>
#include <stdexcept>

namespace sais {

/// Composite Simpson rule on [lo, hi]. `panels` is rounded up to an even count.
template <typename F>
double simpson(F&& f, double lo, double hi, std::size_t panels) {
  if (!(hi > lo) || panels == 0) {
    throw std::invalid_argument("simpson: need lo < hi and panels > 0");
  }
  if (panels % 2 != 0) ++panels;
  const double h = (hi - lo) / static_cast<double>(panels);
  double odd = 0.0;
  double even = 0.0;
  for (std::size_t i = 1; i < panels; ++i) {
    const double v = f(lo + h * static_cast<double>(i));
    if (i % 2 == 1) {
      odd += v;
    } else {
      even += v;
    }
  }
  return h / 3.0 * (f(lo) + 4.0 * odd + 2.0 * even + f(hi));
}

}  // namespace sais

#endif  // SAIS_QUADRATURE_HPP
