#pragma once

#include <stdexcept>
#include <string>

namespace nlsnet {

enum class ErrorKind {
  invalid_domain,
  length_mismatch,
  dimension_mismatch,
  zero_reference,
  singular_kernel,
  nonfinite_field,
  nonfinite_gradient,
  nonfinite_sample,
  invalid_argument,
  divergence,
  config,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_domain: return "invalid-domain";
    case ErrorKind::length_mismatch: return "length-mismatch";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::zero_reference: return "zero-reference";
    case ErrorKind::singular_kernel: return "singular-kernel";
    case ErrorKind::nonfinite_field: return "nonfinite-field";
    case ErrorKind::nonfinite_gradient: return "nonfinite-gradient";
    case ErrorKind::nonfinite_sample: return "nonfinite-sample";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the kinds above so the
/// CLI can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nlsnet
