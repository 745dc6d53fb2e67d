#ifndef RJFIT_ERRORS_HPP_
#define RJFIT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace rjfit {

/// A fractional moment of order p does not exist for the requested shape.
class moment_undefined_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Data for which every candidate likelihood is unbounded (zero IQR).
class degenerate_data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or malformed input series.
class input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid sampler or run configuration.
class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rjfit

#endif  // RJFIT_ERRORS_HPP_
