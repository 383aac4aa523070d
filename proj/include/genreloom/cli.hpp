#pragma once

#include <iosfwd>

#include "genreloom/error.hpp"

namespace genreloom {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitProvider = 2;

/// 2 for failures of the model provider or its output, 1 otherwise.
int exit_code_of(ErrorCode code);

/// The `genreloom` command line. Reads interactive input from `in`.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace genreloom
