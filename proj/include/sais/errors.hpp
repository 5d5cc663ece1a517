#ifndef SAIS_ERRORS_HPP
#define SAIS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sais {

enum class Errc {
  proposal_zero_at_sample,
  nonfinite_weight,
  invalid_mixture_weights,
  nonfinite_parameter,
  iteration_diverged,
  nonpositive_scale,
  nonnegative_curvature,
  missing_component_index,
  zero_weights,
  unnormalized_target,
  invalid_argument,
  too_many_divergences,
  config_parse,
  io_failure,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace sais

#endif  // SAIS_ERRORS_HPP
