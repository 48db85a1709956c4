#include "pckal/errors.hpp"

namespace pckal {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::input_shape: return "input-shape";
    case ErrorCode::empty_pool: return "empty-pool";
    case ErrorCode::degenerate_design: return "degenerate-design";
    case ErrorCode::hyperparameter_domain: return "hyperparameter-domain";
    case ErrorCode::ill_conditioned: return "ill-conditioned-design";
    case ErrorCode::underdetermined_trend: return "underdetermined-trend";
    case ErrorCode::empty_design: return "empty-design";
    case ErrorCode::exhausted_pool: return "exhausted-pool";
    case ErrorCode::external_evaluator: return "external-evaluator";
    case ErrorCode::undefined_reference: return "undefined-reference";
    case ErrorCode::validation: return "validation";
    case ErrorCode::unsupported_oracle: return "unsupported-oracle";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace pckal
