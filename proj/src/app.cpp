#include "genreloom/app.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "genreloom/error.hpp"
#include "genreloom/text.hpp"

namespace genreloom {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path AppConfig::fixtures_path() const { return fixtures.empty() ? store / "fixtures.jsonl" : fixtures; }
fs::path AppConfig::journal_path() const { return journal.empty() ? store / "journal.jsonl" : journal; }

EnvLookup process_env() {
  return [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
}

namespace {

int parse_port(const std::string& s) {
  try {
    std::size_t used = 0;
    const int p = std::stoi(s, &used);
    if (used == s.size() && p >= 0 && p <= 65535) return p;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::validation, "port must be 0-65535 (got '" + s + "')");
}

std::size_t parse_cap(const std::string& s) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used == s.size() && v >= 1) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::validation, "concurrency cap must be a positive integer (got '" + s + "')");
}

json read_config_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::validation, "cannot read config file " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    json j = json::parse(ss.str());
    if (!j.is_object()) throw Error(ErrorCode::validation, "config file must hold a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::validation, "config file " + p.string() + ": " + e.what());
  }
}

// Stands in for the HTTP backend when no API key is configured.
class MissingKeyBackend final : public ChatBackend {
 public:
  BackendReply send(const ChatTranscript&) override {
    return {BackendReply::Outcome::http_error, 401, "no API key configured (set GENRELOOM_API_KEY or OPENAI_API_KEY)"};
  }
};

std::string year_text_or_unknown(const std::string& y) { return y.empty() ? "year unknown" : y; }

}  // namespace

AppConfig resolve_config(const ConfigOverrides& flags, const EnvLookup& env) {
  AppConfig c;
  std::optional<fs::path> file = flags.config_file;
  if (!file) {
    if (auto v = env("GENRELOOM_CONFIG")) file = *v;
  }
  if (file) {
    const json j = read_config_file(*file);
    try {
      c.host = j.value("host", c.host);
      if (j.contains("port")) c.port = parse_port(j.at("port").dump());
      if (j.contains("store")) c.store = j.at("store").get<std::string>();
      if (j.contains("transport")) c.transport = transport_from_token(j.at("transport").get<std::string>());
      if (j.contains("fixtures")) c.fixtures = j.at("fixtures").get<std::string>();
      if (j.contains("journal")) c.journal = j.at("journal").get<std::string>();
      c.base_url = j.value("base_url", c.base_url);
      c.api_key = j.value("api_key", c.api_key);
      if (j.contains("concurrency_cap")) c.concurrency_cap = parse_cap(j.at("concurrency_cap").dump());
      c.image_style = j.value("image_style", c.image_style);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::validation, "config file " + file->string() + ": " + e.what());
    }
  }

  if (auto v = env("GENRELOOM_HOST")) c.host = *v;
  if (auto v = env("GENRELOOM_PORT")) c.port = parse_port(*v);
  if (auto v = env("GENRELOOM_STORE")) c.store = *v;
  if (auto v = env("GENRELOOM_TRANSPORT")) c.transport = transport_from_token(*v);
  if (auto v = env("GENRELOOM_FIXTURES")) c.fixtures = *v;
  if (auto v = env("GENRELOOM_JOURNAL")) c.journal = *v;
  if (auto v = env("GENRELOOM_BASE_URL")) c.base_url = *v;
  if (auto v = env("OPENAI_API_KEY")) c.api_key = *v;
  if (auto v = env("GENRELOOM_API_KEY")) c.api_key = *v;
  if (auto v = env("GENRELOOM_CAP")) c.concurrency_cap = parse_cap(*v);

  if (flags.host) c.host = *flags.host;
  if (flags.port) c.port = *flags.port;
  if (flags.store) c.store = *flags.store;
  if (flags.transport) c.transport = transport_from_token(*flags.transport);
  if (flags.fixtures) c.fixtures = *flags.fixtures;
  if (flags.journal) c.journal = *flags.journal;
  if (flags.base_url) c.base_url = *flags.base_url;
  if (flags.concurrency_cap) {
    if (*flags.concurrency_cap < 1) throw Error(ErrorCode::validation, "concurrency cap must be at least 1");
    c.concurrency_cap = *flags.concurrency_cap;
  }
  return c;
}

Exemplar parse_title_spec(std::string_view spec, const Genre& genre) {
  Exemplar e;
  e.genre = genre;
  std::string s = text::trim(spec);
  if (!s.empty() && s.back() == ')') {
    const auto open = s.rfind('(');
    if (open != std::string::npos) {
      e.year_text = text::trim(std::string_view(s).substr(open + 1, s.size() - open - 2));
      s = text::trim(std::string_view(s).substr(0, open));
    }
  }
  // "Title" by Author
  for (std::string_view q : {"\"", "\xE2\x80\x9C"}) {
    if (s.compare(0, q.size(), q) != 0) continue;
    const std::string_view close = q == "\"" ? std::string_view("\"") : std::string_view("\xE2\x80\x9D");
    const auto end = s.find(close, q.size());
    if (end == std::string::npos) break;
    std::string rest = text::trim(std::string_view(s).substr(end + close.size()));
    if (text::starts_with_ci(rest, "by ")) e.author = text::trim(std::string_view(rest).substr(3));
    s = s.substr(q.size(), end - q.size());
    break;
  }
  e.title = text::trim(s);
  if (e.title.empty()) throw Error(ErrorCode::validation, "empty title in '" + std::string(spec) + "'");
  return e;
}

App::App(AppConfig config, std::shared_ptr<ChatBackend> backend) : config_(std::move(config)) {
  store_ = std::make_unique<Store>(config_.store);
  catalog_ = std::make_unique<PatternCatalog>(registry_, *store_);
  sessions_ = std::make_unique<SessionRepository>(*store_);
  journal_ = std::make_shared<RunJournal>(config_.journal_path());

  std::shared_ptr<ReplayFixture> fixture;
  if (config_.transport != TransportMode::live) {
    if (config_.transport == TransportMode::replay && !fs::exists(config_.fixtures_path())) {
      throw Error(ErrorCode::validation, "fixture file " + config_.fixtures_path().string() + " does not exist");
    }
    fixture = std::make_shared<ReplayFixture>(config_.fixtures_path());
  }
  if (!backend && config_.transport != TransportMode::replay) {
    if (config_.api_key.empty()) {
      backend = std::make_shared<MissingKeyBackend>();
    } else {
      backend = make_openai_backend({config_.base_url, config_.api_key, std::chrono::seconds(120)});
    }
  }
  GatewayOptions gopt;
  gopt.mode = config_.transport;
  gopt.concurrency_cap = config_.concurrency_cap;
  gateway_ = std::make_unique<Gateway>(gopt, std::move(backend), std::move(fixture), journal_);
  curator_ = std::make_unique<Curator>(*gateway_, registry_);

  ComposerOptions copt;
  copt.image_style = config_.image_style;
  composer_ = std::make_unique<Composer>(
      *gateway_, registry_, [this](const std::string& id) { return catalog_->find(id); },
      [this](const Story& s) { return put_story(*store_, s); }, copt);
}

ExemplarSet App::request_exemplars(const std::vector<Genre>& genres, std::string* stored_id) {
  std::vector<GenreProfile> profiles;
  if (genres.empty()) {
    profiles = registry_.fundamental_profiles();
  } else {
    for (const Genre& g : genres) profiles.push_back(registry_.profile_of(g));
  }
  ExemplarSet set = curator_->request_exemplars(profiles);
  const std::string id = put_exemplars(*store_, set);
  if (stored_id) *stored_id = id;
  return set;
}

StoryOutline App::outline(const std::string& title, const std::string& year_text, const Genre& genre) {
  StoryOutline o = curator_->outline_story(title, year_text_or_unknown(year_text), genre);
  store_->put(RecordKind::outlines, to_json(o));
  return o;
}

GenrePattern App::extract(const ExtractionRequest& r) {
  (void)registry_.profile_of(r.genre);
  GenrePattern p;
  if (!r.outlines.empty()) {
    if (r.mode != ExtractionMode::deterministic) {
      throw Error(ErrorCode::validation, "outlines can only be generalized in deterministic mode");
    }
    p = curator_->extract_from_outlines(r.outlines, r.genre);
  } else {
    std::vector<Exemplar> ex = r.exemplars;
    for (auto& e : ex) {
      e.genre = r.genre;
      e.year_text = year_text_or_unknown(e.year_text);
    }
    p = curator_->extract_pattern(ex, r.mode);
  }
  return catalog_->add(std::move(p));
}

std::shared_ptr<std::mutex> App::session_lock(const std::string& id) {
  std::lock_guard lk(locks_mu_);
  auto& m = locks_[id];
  if (!m) m = std::make_shared<std::mutex>();
  return m;
}

CompositionSession App::create_session(std::string_view premise, const std::string& pattern_id) {
  return sessions_->create(composer_->create_session(premise, pattern_id));
}

CompositionSession App::session(const std::string& id) const { return sessions_->get(id); }

std::pair<StoryEvent, CompositionSession> App::draft(const std::string& id, const std::optional<std::string>& suggestion) {
  auto m = session_lock(id);
  std::lock_guard lk(*m);
  CompositionSession s = sessions_->get(id);
  StoryEvent e = composer_->draft_stage(s, suggestion);
  sessions_->save(s);
  return {std::move(e), std::move(s)};
}

std::pair<StoryEvent, CompositionSession> App::regenerate(const std::string& id,
                                                          const std::optional<std::string>& suggestion) {
  auto m = session_lock(id);
  std::lock_guard lk(*m);
  CompositionSession s = sessions_->get(id);
  StoryEvent e = composer_->regenerate(s, suggestion);
  sessions_->save(s);
  return {std::move(e), std::move(s)};
}

AcceptResult App::accept(const std::string& id) {
  auto m = session_lock(id);
  std::lock_guard lk(*m);
  CompositionSession s = sessions_->get(id);
  std::optional<Story> story = composer_->accept(s);
  sessions_->save(s);
  return {std::move(s), std::move(story)};
}

Story App::finalize(const std::string& id) {
  auto m = session_lock(id);
  std::lock_guard lk(*m);
  CompositionSession s = sessions_->get(id);
  Story story = composer_->finalize(s);
  sessions_->save(s);
  return story;
}

Story App::story(const std::string& id) const { return get_story(*store_, id); }

StoryboardDocument App::storyboard(const std::string& story_id) const {
  const Story s = story(story_id);
  return build_storyboard(s, catalog_->get(s.pattern_id), config_.image_style);
}

std::string App::export_story(const std::string& story_id, ExportFormat format) const {
  return export_document(storyboard(story_id), format);
}

}  // namespace genreloom
