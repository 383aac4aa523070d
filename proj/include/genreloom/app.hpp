#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "genreloom/composer.hpp"
#include "genreloom/curation.hpp"
#include "genreloom/gateway.hpp"
#include "genreloom/journal.hpp"
#include "genreloom/pattern.hpp"
#include "genreloom/store.hpp"
#include "genreloom/storyboard.hpp"

namespace genreloom {

struct AppConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path store = "genreloom-store";
  TransportMode transport = TransportMode::live;
  std::filesystem::path fixtures;  // default: <store>/fixtures.jsonl
  std::filesystem::path journal;   // default: <store>/journal.jsonl
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::size_t concurrency_cap = 4;
  std::string image_style = ComposerOptions{}.image_style;

  std::filesystem::path fixtures_path() const;
  std::filesystem::path journal_path() const;
};

/// Values explicitly given on the command line; unset fields fall through
/// to the environment, then the config file, then the defaults.
struct ConfigOverrides {
  std::optional<std::filesystem::path> config_file;
  std::optional<std::string> host;
  std::optional<int> port;
  std::optional<std::filesystem::path> store;
  std::optional<std::string> transport;
  std::optional<std::filesystem::path> fixtures;
  std::optional<std::filesystem::path> journal;
  std::optional<std::string> base_url;
  std::optional<std::size_t> concurrency_cap;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

/// GENRELOOM_CONFIG, GENRELOOM_STORE, GENRELOOM_TRANSPORT,
/// GENRELOOM_FIXTURES, GENRELOOM_JOURNAL, GENRELOOM_BASE_URL,
/// GENRELOOM_API_KEY (or OPENAI_API_KEY), GENRELOOM_PORT, GENRELOOM_CAP.
/// The config file is a JSON object with the AppConfig field names.
/// Throws Error(validation) for bad values.
AppConfig resolve_config(const ConfigOverrides& flags, const EnvLookup& env);
EnvLookup process_env();

/// "Title (1934)", "\"Title\" by Author (1934)" or a bare title.
Exemplar parse_title_spec(std::string_view spec, const Genre& genre);

struct ExtractionRequest {
  Genre genre = FundamentalGenre::mystery;
  ExtractionMode mode = ExtractionMode::deterministic;
  std::vector<Exemplar> exemplars;     // used unless outlines are given
  std::vector<StoryOutline> outlines;  // deterministic mode only
};

struct AcceptResult {
  CompositionSession session;
  std::optional<Story> story;
};

/// Library wiring shared by the CLI and the HTTP service. Operations on one
/// session are serialized; everything else may run concurrently.
class App {
 public:
  /// `backend` replaces the OpenAI backend (tests, fixture authoring).
  explicit App(AppConfig config, std::shared_ptr<ChatBackend> backend = nullptr);

  const AppConfig& config() const noexcept { return config_; }
  PatternRegistry& registry() noexcept { return registry_; }
  Store& store() noexcept { return *store_; }
  PatternCatalog& patterns() noexcept { return *catalog_; }
  Gateway& gateway() noexcept { return *gateway_; }
  RunJournal& journal() noexcept { return *journal_; }

  ExemplarSet request_exemplars(const std::vector<Genre>& genres, std::string* stored_id = nullptr);
  StoryOutline outline(const std::string& title, const std::string& year_text, const Genre& genre);
  /// Stores and returns the extracted pattern.
  GenrePattern extract(const ExtractionRequest& request);

  CompositionSession create_session(std::string_view premise, const std::string& pattern_id);
  CompositionSession session(const std::string& id) const;
  std::pair<StoryEvent, CompositionSession> draft(const std::string& id, const std::optional<std::string>& suggestion);
  std::pair<StoryEvent, CompositionSession> regenerate(const std::string& id,
                                                       const std::optional<std::string>& suggestion);
  AcceptResult accept(const std::string& id);
  Story finalize(const std::string& id);

  Story story(const std::string& id) const;
  StoryboardDocument storyboard(const std::string& story_id) const;
  std::string export_story(const std::string& story_id, ExportFormat format) const;

 private:
  std::shared_ptr<std::mutex> session_lock(const std::string& id);

  AppConfig config_;
  PatternRegistry registry_;
  std::unique_ptr<Store> store_;
  std::unique_ptr<PatternCatalog> catalog_;
  std::unique_ptr<SessionRepository> sessions_;
  std::shared_ptr<RunJournal> journal_;
  std::unique_ptr<Gateway> gateway_;
  std::unique_ptr<Curator> curator_;
  std::unique_ptr<Composer> composer_;

  std::mutex locks_mu_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

}  // namespace genreloom
