#pragma once

#include <stdexcept>
#include <string>

namespace rmstpo {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input: schema problems, parse failures, domain violations,
// bad configuration. Maps to CLI exit code 2.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// The requested cutoff time lies beyond the support of the data (or of a
// leave-one-out subsample). Maps to CLI exit code 3.
class TauSupportError : public Error {
 public:
  TauSupportError(const std::string& msg, double max_valid_tau)
      : Error(msg), max_valid_tau_(max_valid_tau) {}

  double max_valid_tau() const { return max_valid_tau_; }

 private:
  double max_valid_tau_;
};

// An estimator failed to produce a result (rank deficiency, fluctuation
// non-convergence, degenerate inputs). Maps to CLI exit code 4.
class EstimationError : public Error {
 public:
  explicit EstimationError(const std::string& msg) : Error(msg) {}
};

}  // namespace rmstpo
