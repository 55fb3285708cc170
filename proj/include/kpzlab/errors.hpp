#pragma once

#include <stdexcept>
#include <string>

namespace kpzlab {

// Error taxonomy shared across the library. The CLI maps these onto exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Query or construction outside a type's declared domain (off-grid point,
// bad line index, range not covered by a simulation).
struct DomainError : Error {
  using Error::Error;
};

// Invalid scalar parameter or configuration (nonpositive step, bad ranges).
struct ParameterError : Error {
  using Error::Error;
};

// A structural invariant failed validation (malformed path, ragged ensemble).
struct ValidationError : Error {
  using Error::Error;
};

// Instance-size or memory guard tripped.
struct ResourceError : Error {
  using Error::Error;
};

// Rejection sampler exhausted its attempt budget.
struct RejectionError : Error {
  RejectionError(const std::string& msg, long attempts_, double acceptance_rate_)
      : Error(msg), attempts(attempts_), acceptance_rate(acceptance_rate_) {}
  long attempts;
  double acceptance_rate;
};

// A value that requires a stabilized anchored limit was requested before
// stabilization was established.
struct UnavailableError : Error {
  using Error::Error;
};

// Initial condition grows too fast for the variational evolution to be
// well-posed at the requested time.
struct NotFinitaryError : Error {
  using Error::Error;
};

}  // namespace kpzlab
