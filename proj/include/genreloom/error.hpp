#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace genreloom {

/// Closed set of failure kinds shared by every module. The HTTP layer maps
/// these onto status codes and the CLI onto exit statuses.
enum class ErrorCode {
  validation,
  unknown_genre,
  unknown_pattern,
  invalid_premise,
  invalid_pattern,
  invalid_state,
  revision_limit,
  length_violation,
  missing_slot,
  parse_failure,
  empty_input,
  empty_result,
  fixture_miss,
  provider_error,
  retries_exhausted,
  not_found,
  store_corrupt,
  immutable,
};

/// Kebab-case machine token, e.g. "unknown-pattern".
std::string_view error_token(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, nlohmann::json details = nullptr)
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

}  // namespace genreloom
