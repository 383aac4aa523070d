#include "genreloom/journal.hpp"

#include <fstream>

#include "genreloom/error.hpp"

namespace genreloom {

RunJournal::RunJournal(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

void RunJournal::append(nlohmann::json entry) {
  std::lock_guard lock(mu_);
  if (path_.empty()) {
    entries_.push_back(std::move(entry));
    return;
  }
  const std::string line = entry.dump() + "\n";
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::validation, "cannot append to run journal " + path_.string());
}

std::vector<nlohmann::json> RunJournal::entries() const {
  std::lock_guard lock(mu_);
  if (path_.empty()) return entries_;
  std::vector<nlohmann::json> out;
  std::ifstream in(path_, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

}  // namespace genreloom
