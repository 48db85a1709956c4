#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pckal {

enum class ErrorCode {
  input_shape,
  empty_pool,
  degenerate_design,
  hyperparameter_domain,
  ill_conditioned,
  underdetermined_trend,
  empty_design,
  exhausted_pool,
  external_evaluator,
  undefined_reference,
  validation,
  unsupported_oracle,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception type thrown by every pckal operation; `code()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pckal
