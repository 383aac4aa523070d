#include "genreloom/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "genreloom/error.hpp"

namespace genreloom {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_token(RecordKind k) {
  switch (k) {
    case RecordKind::patterns: return "patterns";
    case RecordKind::exemplars: return "exemplars";
    case RecordKind::outlines: return "outlines";
    case RecordKind::sessions: return "sessions";
    case RecordKind::stories: return "stories";
  }
  return "patterns";
}

RecordKind record_kind_from_token(std::string_view token) {
  for (RecordKind k : kAllKinds) {
    if (to_token(k) == token) return k;
  }
  throw Error(ErrorCode::validation, "unknown record kind '" + std::string(token) + "'");
}

namespace {

constexpr std::string_view kIndexFile = "index.json";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::not_found, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_all(const fs::path& path, const std::string& bytes) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::store_corrupt, "cannot create " + path.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw Error(ErrorCode::store_corrupt, "cannot write " + path.string() + ": " + std::strerror(err));
    }
    done += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

void sync_dir(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

std::optional<RecordId> id_of_file(const fs::path& p) {
  if (p.extension() != ".json") return std::nullopt;
  const std::string stem = p.stem().string();
  RecordId id = 0;
  auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), id);
  if (ec != std::errc() || ptr != stem.data() + stem.size() || id == 0) return std::nullopt;
  return id;
}

bool is_temp(const fs::path& p) { return p.extension() == ".tmp"; }

std::string repair_hint(const fs::path& base) { return "run `genreloom store repair --store " + base.string() + "`"; }

struct Scan {
  bool index_ok = false;
  json index;
  std::vector<std::string> problems;
};

Scan scan(const fs::path& base) {
  Scan s;
  const fs::path ip = base / kIndexFile;
  bool any_file = false;
  if (fs::exists(ip)) {
    try {
      s.index = json::parse(read_file(ip));
      if (!s.index.is_object() || !s.index.contains("next_id") || !s.index.at("next_id").is_object()) {
        s.problems.push_back("index.json has no next_id map");
      } else {
        s.index_ok = true;
      }
    } catch (const json::exception& e) {
      s.problems.push_back(std::string("index.json is unreadable: ") + e.what());
    }
  }
  for (RecordKind k : kAllKinds) {
    const std::string kind(to_token(k));
    const fs::path dir = base / kind;
    if (!fs::is_directory(dir)) continue;
    RecordId next = 1;
    std::vector<RecordId> tomb;
    if (s.index_ok) {
      next = s.index.at("next_id").value(kind, RecordId{1});
      if (s.index.contains("tombstones") && s.index.at("tombstones").contains(kind)) {
        tomb = s.index.at("tombstones").at(kind).get<std::vector<RecordId>>();
      }
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto id = id_of_file(entry.path());
      if (!id) continue;
      any_file = true;
      const std::string where = kind + "/" + entry.path().filename().string();
      if (!s.index_ok) continue;
      if (*id >= next) s.problems.push_back(where + " has an id at or past next_id " + std::to_string(next));
      if (std::find(tomb.begin(), tomb.end(), *id) != tomb.end()) s.problems.push_back(where + " was deleted but is present");
      if (!json::accept(read_file(entry.path()))) s.problems.push_back(where + " is not valid JSON");
    }
  }
  if (!fs::exists(ip) && any_file) s.problems.push_back("index.json is missing but records exist");
  return s;
}

}  // namespace

void atomic_write(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  write_all(tmp, bytes);
  fs::rename(tmp, path);
  sync_dir(path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

Store::Store(fs::path base, StoreOptions options) : base_(std::move(base)), options_(std::move(options)) {
  fs::create_directories(base_);
  for (RecordKind k : kAllKinds) {
    const fs::path dir = base_ / std::string(to_token(k));
    fs::create_directories(dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (is_temp(entry.path())) fs::remove(entry.path());
    }
  }
  fs::path itmp = base_ / kIndexFile;
  itmp += ".tmp";
  fs::remove(itmp);

  Scan s = scan(base_);
  if (!s.problems.empty()) {
    std::string msg = "store at " + base_.string() + " is inconsistent: " + s.problems.front();
    throw Error(ErrorCode::store_corrupt, msg, {{"problems", s.problems}, {"hint", repair_hint(base_)}});
  }
  if (s.index_ok) {
    for (auto& [kind, n] : s.index.at("next_id").items()) index_.next_id[kind] = n.get<RecordId>();
    if (s.index.contains("tombstones")) {
      for (auto& [kind, ids] : s.index.at("tombstones").items()) index_.tombstones[kind] = ids.get<std::vector<RecordId>>();
    }
  }
  for (RecordKind k : kAllKinds) index_.next_id.try_emplace(std::string(to_token(k)), 1);
  if (!s.index_ok) write_index(index_);
}

fs::path Store::file_of(RecordKind kind, RecordId id) const {
  return base_ / std::string(to_token(kind)) / (std::to_string(id) + ".json");
}

void Store::write_index(const Index& idx) const {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["next_id"] = idx.next_id;
  j["tombstones"] = idx.tombstones;
  atomic_write(base_ / kIndexFile, j.dump(2) + "\n");
}

std::mutex& Store::writer_lock(RecordKind kind) { return writers_[static_cast<std::size_t>(kind)]; }

RecordId Store::put(RecordKind kind, const json& record) {
  const std::string bytes = record.dump(2, ' ', false, json::error_handler_t::strict) + "\n";
  std::lock_guard writer(writer_lock(kind));
  RecordId id = 0;
  {
    std::lock_guard lk(index_mu_);
    Index next = index_;
    id = next.next_id[std::string(to_token(kind))]++;
    write_index(next);
    index_ = std::move(next);
  }
  if (options_.crash_hook) options_.crash_hook(CommitPoint::index_written);
  const fs::path path = file_of(kind, id);
  fs::path tmp = path;
  tmp += ".tmp";
  write_all(tmp, bytes);
  if (options_.crash_hook) options_.crash_hook(CommitPoint::temp_written);
  fs::rename(tmp, path);
  sync_dir(path.parent_path());
  if (options_.crash_hook) options_.crash_hook(CommitPoint::renamed);
  return id;
}

json Store::get(RecordKind kind, RecordId id) const {
  const fs::path p = file_of(kind, id);
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::not_found, "no " + std::string(to_token(kind)) + " record " + std::to_string(id),
                {{"kind", to_token(kind)}, {"id", std::to_string(id)}});
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::store_corrupt, p.string() + " is not valid JSON: " + e.what(), {{"hint", repair_hint(base_)}});
  }
}

bool Store::contains(RecordKind kind, RecordId id) const { return fs::exists(file_of(kind, id)); }

std::vector<RecordId> Store::list(RecordKind kind) const {
  std::vector<RecordId> ids;
  for (const auto& entry : fs::directory_iterator(base_ / std::string(to_token(kind)))) {
    if (auto id = id_of_file(entry.path())) ids.push_back(*id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

void Store::remove(RecordKind kind, RecordId id) {
  std::lock_guard writer(writer_lock(kind));
  const fs::path p = file_of(kind, id);
  if (!fs::exists(p)) {
    throw Error(ErrorCode::not_found, "no " + std::string(to_token(kind)) + " record " + std::to_string(id),
                {{"kind", to_token(kind)}, {"id", std::to_string(id)}});
  }
  // file first: a crash in between leaves an unused id, never a revived one
  fs::remove(p);
  sync_dir(p.parent_path());
  std::lock_guard lk(index_mu_);
  Index next = index_;
  next.tombstones[std::string(to_token(kind))].push_back(id);
  write_index(next);
  index_ = std::move(next);
}

RecordId Store::next_id(RecordKind kind) const {
  std::lock_guard lk(index_mu_);
  auto it = index_.next_id.find(std::string(to_token(kind)));
  return it == index_.next_id.end() ? 1 : it->second;
}

std::vector<std::string> Store::check(const fs::path& base) { return scan(base).problems; }

std::vector<std::string> Store::repair(const fs::path& base) {
  std::vector<std::string> actions;
  Scan s = scan(base);
  Index idx;
  if (s.index_ok) {
    for (auto& [kind, n] : s.index.at("next_id").items()) idx.next_id[kind] = n.get<RecordId>();
    if (s.index.contains("tombstones")) {
      for (auto& [kind, ids] : s.index.at("tombstones").items()) idx.tombstones[kind] = ids.get<std::vector<RecordId>>();
    }
  } else {
    actions.push_back("rebuilt index.json from the record files");
  }
  for (RecordKind k : kAllKinds) {
    const std::string kind(to_token(k));
    const fs::path dir = base / kind;
    fs::create_directories(dir);
    auto& next = idx.next_id.try_emplace(kind, 1).first->second;
    const auto& tomb = idx.tombstones[kind];
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (is_temp(entry.path())) {
        fs::remove(entry.path());
        actions.push_back("removed " + kind + "/" + entry.path().filename().string());
        continue;
      }
      const auto id = id_of_file(entry.path());
      if (!id) continue;
      bool bad = std::find(tomb.begin(), tomb.end(), *id) != tomb.end();
      if (!bad) bad = !json::accept(read_file(entry.path()));
      if (bad) {
        fs::path aside = entry.path();
        aside += ".corrupt";
        fs::rename(entry.path(), aside);
        actions.push_back("moved " + kind + "/" + entry.path().filename().string() + " aside");
        continue;
      }
      if (*id >= next) {
        next = *id + 1;
        actions.push_back("raised next_id of " + kind + " to " + std::to_string(next));
      }
    }
  }
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["next_id"] = idx.next_id;
  j["tombstones"] = idx.tombstones;
  atomic_write(base / kIndexFile, j.dump(2) + "\n");
  return actions;
}

RecordId parse_record_id(std::string_view id, std::string_view what) {
  RecordId v = 0;
  auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), v);
  if (id.empty() || ec != std::errc() || ptr != id.data() + id.size() || v == 0) {
    throw Error(ErrorCode::not_found, "no " + std::string(what) + " '" + std::string(id) + "'", {{"id", id}});
  }
  return v;
}

// ---- typed views ----------------------------------------------------------------

PatternCatalog::PatternCatalog(const PatternRegistry& registry, Store& store) : registry_(registry), store_(store) {}

std::vector<GenrePattern> PatternCatalog::list() const {
  std::vector<GenrePattern> out = registry_.builtin_patterns();
  for (RecordId id : store_.list(RecordKind::patterns)) {
    try {
      GenrePattern p = pattern_from_json(store_.get(RecordKind::patterns, id));
      p.id = std::to_string(id);
      out.push_back(std::move(p));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::not_found) throw;  // deleted meanwhile
    }
  }
  return out;
}

std::optional<GenrePattern> PatternCatalog::find(const std::string& id) const {
  if (const GenrePattern* b = registry_.find_builtin(id)) return *b;
  RecordId rid = 0;
  try {
    rid = parse_record_id(id, "pattern");
  } catch (const Error&) {
    return std::nullopt;
  }
  if (!store_.contains(RecordKind::patterns, rid)) return std::nullopt;
  try {
    GenrePattern p = pattern_from_json(store_.get(RecordKind::patterns, rid));
    p.id = id;
    return p;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::not_found) return std::nullopt;
    throw;
  }
}

GenrePattern PatternCatalog::get(const std::string& id) const {
  auto p = find(id);
  if (!p) throw Error(ErrorCode::unknown_pattern, "no pattern '" + id + "'", {{"pattern_id", id}});
  return *p;
}

GenrePattern PatternCatalog::add(GenrePattern pattern) {
  if (pattern.provenance == Provenance::builtin) pattern.provenance = Provenance::imported;
  pattern.id.clear();
  if (auto v = validate_pattern(pattern); !v.empty()) {
    json d = json::array();
    for (const auto& x : v) d.push_back({{"field", x.field}, {"rule", x.rule}});
    throw Error(ErrorCode::invalid_pattern, "pattern is invalid: " + v.front().field + " " + v.front().rule, d);
  }
  pattern.id = std::to_string(store_.put(RecordKind::patterns, to_json(pattern)));
  return pattern;
}

void PatternCatalog::remove(const std::string& id) {
  if (registry_.is_builtin(id)) {
    throw Error(ErrorCode::immutable, "builtin pattern '" + id + "' cannot be deleted", {{"pattern_id", id}});
  }
  RecordId rid = 0;
  try {
    rid = parse_record_id(id, "pattern");
    store_.remove(RecordKind::patterns, rid);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::not_found) throw;
    throw Error(ErrorCode::unknown_pattern, "no pattern '" + id + "'", {{"pattern_id", id}});
  }
}

SessionRepository::SessionRepository(Store& store) : store_(store) {
  for (RecordId rec : store_.list(RecordKind::sessions)) {
    const json j = store_.get(RecordKind::sessions, rec);
    const std::string sid = j.value("id", std::string{});
    const RecordId logical = sid.empty() ? rec : parse_record_id(sid, "session");
    auto& latest = latest_[logical];
    latest = std::max(latest, rec);
  }
}

CompositionSession SessionRepository::create(CompositionSession session) {
  session.id.clear();
  const RecordId rec = store_.put(RecordKind::sessions, to_json(session));
  {
    std::unique_lock lk(mu_);
    latest_[rec] = rec;
  }
  session.id = std::to_string(rec);
  return session;
}

void SessionRepository::save(const CompositionSession& session) {
  const RecordId logical = parse_record_id(session.id, "session");
  {
    std::shared_lock lk(mu_);
    if (!latest_.count(logical)) throw Error(ErrorCode::not_found, "no session '" + session.id + "'", {{"id", session.id}});
  }
  const RecordId rec = store_.put(RecordKind::sessions, to_json(session));
  std::unique_lock lk(mu_);
  auto& latest = latest_[logical];
  latest = std::max(latest, rec);
}

CompositionSession SessionRepository::get(const std::string& id) const {
  RecordId rec = 0;
  RecordId logical = 0;
  {
    logical = parse_record_id(id, "session");
    std::shared_lock lk(mu_);
    auto it = latest_.find(logical);
    if (it == latest_.end()) throw Error(ErrorCode::not_found, "no session '" + id + "'", {{"id", id}});
    rec = it->second;
  }
  CompositionSession s = session_from_json(store_.get(RecordKind::sessions, rec));
  s.id = std::to_string(logical);
  return s;
}

std::vector<std::string> SessionRepository::ids() const {
  std::shared_lock lk(mu_);
  std::vector<std::string> out;
  for (const auto& [logical, _] : latest_) out.push_back(std::to_string(logical));
  return out;
}

std::string put_story(Store& store, Story story) {
  story.id.clear();
  return std::to_string(store.put(RecordKind::stories, to_json(story)));
}

Story get_story(const Store& store, const std::string& id) {
  Story s = story_from_json(store.get(RecordKind::stories, parse_record_id(id, "story")));
  s.id = id;
  return s;
}

std::string put_exemplars(Store& store, const ExemplarSet& set) {
  return std::to_string(store.put(RecordKind::exemplars, to_json(set)));
}

ExemplarSet get_exemplars(const Store& store, const std::string& id) {
  return exemplar_set_from_json(store.get(RecordKind::exemplars, parse_record_id(id, "exemplar set")));
}

}  // namespace genreloom
