#pragma once

#include <filesystem>
#include <mutex>
#include <vector>

#include <json.hpp>

namespace genreloom {

/// Append-only, line-delimited JSON log of every prompt and response. With
/// an empty path entries are only kept in memory (used by tests).
class RunJournal {
 public:
  RunJournal() = default;
  explicit RunJournal(std::filesystem::path path);

  void append(nlohmann::json entry);
  std::vector<nlohmann::json> entries() const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::vector<nlohmann::json> entries_;
};

}  // namespace genreloom
