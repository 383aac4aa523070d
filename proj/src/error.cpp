#include "genreloom/error.hpp"

namespace genreloom {

std::string_view error_token(ErrorCode code) {
  switch (code) {
    case ErrorCode::validation: return "validation";
    case ErrorCode::unknown_genre: return "unknown-genre";
    case ErrorCode::unknown_pattern: return "unknown-pattern";
    case ErrorCode::invalid_premise: return "invalid-premise";
    case ErrorCode::invalid_pattern: return "invalid-pattern";
    case ErrorCode::invalid_state: return "invalid-state";
    case ErrorCode::revision_limit: return "revision-limit";
    case ErrorCode::length_violation: return "length-violation";
    case ErrorCode::missing_slot: return "missing-slot";
    case ErrorCode::parse_failure: return "parse-failure";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::empty_result: return "empty-result";
    case ErrorCode::fixture_miss: return "fixture-miss";
    case ErrorCode::provider_error: return "provider-error";
    case ErrorCode::retries_exhausted: return "retries-exhausted";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::store_corrupt: return "store-corrupt";
    case ErrorCode::immutable: return "immutable";
  }
  return "validation";
}

}  // namespace genreloom
