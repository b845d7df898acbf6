#pragma once

#include <stdexcept>
#include <string>

namespace dlsp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DLSP_ERROR(Name)                  \
  class Name : public Error {             \
   public:                                \
    explicit Name(const std::string& m)   \
        : Error(#Name ": " + m) {}        \
  };

DLSP_ERROR(PartitionError)
DLSP_ERROR(ConvexityError)
DLSP_ERROR(DomainError)
DLSP_ERROR(ProxUnsupported)
DLSP_ERROR(DegenerateConstants)
DLSP_ERROR(ScheduleCertificateError)
DLSP_ERROR(SeparabilityError)
DLSP_ERROR(UnboundedGap)
DLSP_ERROR(ParseError)
DLSP_ERROR(ConfigError)

#undef DLSP_ERROR

// Carries the last residual so callers can report how far off the solve was.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& m, double residual)
      : Error("NoConvergence: " + m), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace dlsp
