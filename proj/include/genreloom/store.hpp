#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "genreloom/composer.hpp"
#include "genreloom/curation.hpp"
#include "genreloom/pattern.hpp"

namespace genreloom {

/// Record kinds and their directory names under the store root.
enum class RecordKind { patterns, exemplars, outlines, sessions, stories };

std::string_view to_token(RecordKind k);
RecordKind record_kind_from_token(std::string_view token);
inline constexpr RecordKind kAllKinds[] = {RecordKind::patterns, RecordKind::exemplars, RecordKind::outlines,
                                           RecordKind::sessions, RecordKind::stories};

using RecordId = std::uint64_t;

/// Points inside put() where a test may simulate a crash by throwing from
/// the hook.
enum class CommitPoint { index_written, temp_written, renamed };

struct StoreOptions {
  std::function<void(CommitPoint)> crash_hook;
};

/// Thrown by crash hooks in tests; put() lets it escape without cleanup.
struct SimulatedCrash : std::exception {
  const char* what() const noexcept override { return "simulated crash"; }
};

/// Layout: base/index.json ({"next_id": {kind: n}, "tombstones": {kind:
/// [ids]}}) and base/<kind>/<id>.json. put() reserves the id in the index,
/// writes <id>.json.tmp and renames it into place, so an interrupted put
/// leaves only an unused id behind.
class Store {
 public:
  /// Creates the layout when missing. Removes leftover temp files. Throws
  /// Error(store_corrupt) when the index and the files disagree.
  explicit Store(std::filesystem::path base, StoreOptions options = {});

  RecordId put(RecordKind kind, const nlohmann::json& record);
  /// Throws Error(not_found).
  nlohmann::json get(RecordKind kind, RecordId id) const;
  bool contains(RecordKind kind, RecordId id) const;
  std::vector<RecordId> list(RecordKind kind) const;
  /// Throws Error(not_found). The id is never reused.
  void remove(RecordKind kind, RecordId id);

  RecordId next_id(RecordKind kind) const;
  const std::filesystem::path& base() const noexcept { return base_; }

  /// Problems found by a consistency scan (empty when healthy).
  static std::vector<std::string> check(const std::filesystem::path& base);
  /// Rebuilds the index from the files, moves unreadable and tombstoned
  /// files aside as <id>.json.corrupt, and returns what it changed.
  static std::vector<std::string> repair(const std::filesystem::path& base);

 private:
  struct Index {
    std::map<std::string, RecordId> next_id;
    std::map<std::string, std::vector<RecordId>> tombstones;
  };

  std::filesystem::path file_of(RecordKind kind, RecordId id) const;
  void write_index(const Index& idx) const;
  std::mutex& writer_lock(RecordKind kind);

  std::filesystem::path base_;
  StoreOptions options_;
  mutable std::mutex index_mu_;
  Index index_;
  std::array<std::mutex, std::size(kAllKinds)> writers_;
};

/// Writes `bytes` to `path` via a sibling temp file, fsync and rename.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);

/// Builtin patterns from the registry plus imported/extracted patterns
/// from the store. Stored pattern ids are their decimal record ids.
class PatternCatalog {
 public:
  PatternCatalog(const PatternRegistry& registry, Store& store);

  std::vector<GenrePattern> list() const;
  /// Throws Error(unknown_pattern).
  GenrePattern get(const std::string& id) const;
  std::optional<GenrePattern> find(const std::string& id) const;
  /// Validates and stores; returns the pattern with its new id. Throws
  /// Error(invalid_pattern) with the violations in details.
  GenrePattern add(GenrePattern pattern);
  /// Throws Error(immutable) for builtins, Error(unknown_pattern) otherwise.
  void remove(const std::string& id);

 private:
  const PatternRegistry& registry_;
  Store& store_;
};

/// Sessions stored as immutable revisions: every save writes a new record
/// and the session id is the record id of its first revision.
class SessionRepository {
 public:
  explicit SessionRepository(Store& store);

  /// Assigns the id and writes the first revision.
  CompositionSession create(CompositionSession session);
  void save(const CompositionSession& session);
  /// Throws Error(not_found).
  CompositionSession get(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  Store& store_;
  mutable std::shared_mutex mu_;
  std::map<RecordId, RecordId> latest_;  // session id -> newest revision record
};

/// Stories, exemplar sets and outlines use their record id as their id.
std::string put_story(Store& store, Story story);
Story get_story(const Store& store, const std::string& id);

std::string put_exemplars(Store& store, const ExemplarSet& set);
ExemplarSet get_exemplars(const Store& store, const std::string& id);

/// Parses a decimal record id; throws Error(not_found) for anything else.
RecordId parse_record_id(std::string_view id, std::string_view what);

}  // namespace genreloom
