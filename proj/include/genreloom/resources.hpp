#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace genreloom {

// Files under data/ compiled into the library. Paths are relative to data/,
// e.g. "patterns/mystery.json".
std::optional<std::string_view> find_resource(std::string_view path);
std::vector<std::string_view> resource_paths(std::string_view prefix);

}  // namespace genreloom
