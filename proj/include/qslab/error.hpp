#pragma once

#include <stdexcept>
#include <string>

namespace qslab {

// Invalid input: out-of-range physics parameters, malformed configs,
// degenerate designs handed to a fit.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical contract was broken (non-convergence, leakage, a moment
// inequality that cannot hold). Carries the offending magnitude.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double magnitude)
      : std::runtime_error(what), magnitude_(magnitude) {}
  double magnitude() const noexcept { return magnitude_; }

 private:
  double magnitude_;
};

// Estimator produced an unphysical result from otherwise valid data.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qslab
