#include "genreloom/gateway.hpp"

#include <fstream>
#include <thread>

#include <openssl/evp.h>

#include "genreloom/error.hpp"
#include "genreloom/journal.hpp"

namespace genreloom {

using nlohmann::json;

namespace {

std::string normalize_newlines(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\r') {
      out.push_back('\n');
      if (i + 1 < s.size() && s[i + 1] == '\n') ++i;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::validation, "SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

class LimiterGuard {
 public:
  explicit LimiterGuard(FifoLimiter& l) : l_(l) { l_.acquire(); }
  ~LimiterGuard() { l_.release(); }
  LimiterGuard(const LimiterGuard&) = delete;
  LimiterGuard& operator=(const LimiterGuard&) = delete;

 private:
  FifoLimiter& l_;
};

}  // namespace

std::string_view to_token(Role r) {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

Role role_from_token(std::string_view token) {
  if (token == "system") return Role::system;
  if (token == "user") return Role::user;
  if (token == "assistant") return Role::assistant;
  throw Error(ErrorCode::validation, "unknown chat role '" + std::string(token) + "'");
}

std::vector<std::string> validate_transcript(const ChatTranscript& t) {
  std::vector<std::string> out;
  if (t.model.empty()) out.push_back("model must be set");
  if (!(t.temperature >= 0.0 && t.temperature <= 2.0)) out.push_back("temperature must lie in [0, 2]");
  if (t.messages.empty()) out.push_back("transcript has no messages");
  for (std::size_t i = 0; i < t.messages.size(); ++i) {
    if (t.messages[i].content.empty()) out.push_back("message " + std::to_string(i) + " is empty");
  }
  if (!t.messages.empty() && t.messages.back().role != Role::user) out.push_back("last message must be from the user");
  return out;
}

json canonical_json(const ChatTranscript& t) {
  json messages = json::array();
  for (const auto& m : t.messages) {
    messages.push_back(json{{"content", normalize_newlines(m.content)}, {"role", std::string(to_token(m.role))}});
  }
  return json{{"messages", std::move(messages)}, {"model", t.model}, {"temperature", t.temperature}};
}

ChatTranscript transcript_from_json(const json& j) {
  ChatTranscript t;
  t.model = j.at("model").get<std::string>();
  t.temperature = j.at("temperature").get<double>();
  for (const auto& m : j.at("messages")) {
    t.messages.push_back({role_from_token(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
  }
  return t;
}

std::string fingerprint(const ChatTranscript& t) { return sha256_hex(canonical_json(t).dump()); }

// ---- fixtures ---------------------------------------------------------------

ReplayFixture::ReplayFixture(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::validation,
                  "fixture " + path_.string() + " line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!rec.contains("fingerprint") || !rec.contains("response")) {
      throw Error(ErrorCode::validation, "fixture " + path_.string() + " line " + std::to_string(lineno) +
                                             ": needs fingerprint and response");
    }
    auto fp = rec.at("fingerprint").get<std::string>();
    if (!entries_.emplace(fp, rec.at("response").get<std::string>()).second) {
      throw Error(ErrorCode::validation, "fixture " + path_.string() + " repeats fingerprint " + fp);
    }
  }
}

std::optional<std::string> ReplayFixture::lookup(const std::string& fp) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(fp);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

bool ReplayFixture::append(const ChatTranscript& request, const std::string& response) {
  const std::string fp = fingerprint(request);
  std::lock_guard lock(mu_);
  if (entries_.count(fp)) return false;
  if (!path_.empty()) {
    json rec{{"fingerprint", fp}, {"request", canonical_json(request)}, {"response", response}};
    const std::string line = rec.dump() + "\n";
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::validation, "cannot append to fixture " + path_.string());
  }
  entries_.emplace(fp, response);
  return true;
}

std::size_t ReplayFixture::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

// ---- transport mode ---------------------------------------------------------------

std::string_view to_token(TransportMode m) {
  switch (m) {
    case TransportMode::live: return "live";
    case TransportMode::record: return "record";
    case TransportMode::replay: return "replay";
  }
  return "live";
}

TransportMode transport_from_token(std::string_view token) {
  if (token == "live") return TransportMode::live;
  if (token == "record") return TransportMode::record;
  if (token == "replay") return TransportMode::replay;
  throw Error(ErrorCode::validation, "transport must be live, record or replay (got '" + std::string(token) + "')");
}

bool is_retryable(const BackendReply& r) {
  switch (r.outcome) {
    case BackendReply::Outcome::ok: return false;
    case BackendReply::Outcome::transport_error: return true;
    case BackendReply::Outcome::http_error: return r.status == 429 || r.status == 503;
  }
  return false;
}

// ---- limiter ------------------------------------------------------------------

FifoLimiter::FifoLimiter(std::size_t cap) : cap_(cap) {
  if (cap == 0) throw Error(ErrorCode::validation, "concurrency cap must be at least 1");
}

void FifoLimiter::acquire() {
  std::unique_lock lock(mu_);
  const std::uint64_t ticket = next_ticket_++;
  cv_.wait(lock, [&] { return ticket == serving_ && in_flight_ < cap_; });
  ++serving_;
  ++in_flight_;
  cv_.notify_all();
}

void FifoLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_all();
}

void FifoLimiter::set_cap(std::size_t cap) {
  if (cap == 0) throw Error(ErrorCode::validation, "concurrency cap must be at least 1");
  {
    std::lock_guard lock(mu_);
    cap_ = cap;
  }
  cv_.notify_all();
}

std::size_t FifoLimiter::cap() const {
  std::lock_guard lock(mu_);
  return cap_;
}

std::size_t FifoLimiter::in_flight() const {
  std::lock_guard lock(mu_);
  return in_flight_;
}

// ---- gateway ------------------------------------------------------------------

Gateway::Gateway(GatewayOptions options, std::shared_ptr<ChatBackend> backend, std::shared_ptr<ReplayFixture> fixture,
                 std::shared_ptr<RunJournal> journal)
    : options_(std::move(options)),
      backend_(std::move(backend)),
      fixture_(std::move(fixture)),
      journal_(std::move(journal)),
      limiter_(options_.concurrency_cap) {
  if (options_.mode != TransportMode::live && !fixture_) {
    throw Error(ErrorCode::validation, std::string(to_token(options_.mode)) + " transport needs a fixture file");
  }
  if (options_.mode != TransportMode::replay && !backend_) {
    throw Error(ErrorCode::validation, std::string(to_token(options_.mode)) + " transport needs a chat backend");
  }
  if (options_.retry.max_attempts < 1) throw Error(ErrorCode::validation, "retry policy needs at least one attempt");
  if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

void Gateway::concurrency_cap(std::size_t n) { limiter_.set_cap(n); }

std::string Gateway::live(const ChatTranscript& t) {
  LimiterGuard guard(limiter_);
  auto backoff = options_.retry.initial_backoff;
  BackendReply last;
  for (int attempt = 1; attempt <= options_.retry.max_attempts; ++attempt) {
    last = backend_->send(t);
    if (last.outcome == BackendReply::Outcome::ok) return last.text;
    if (!is_retryable(last)) {
      throw Error(ErrorCode::provider_error, "provider returned status " + std::to_string(last.status),
                  json{{"status", last.status}, {"body", last.text}});
    }
    if (attempt < options_.retry.max_attempts) {
      options_.sleep(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<std::int64_t>(static_cast<double>(backoff.count()) * options_.retry.multiplier));
    }
  }
  throw Error(ErrorCode::retries_exhausted,
              "gave up after " + std::to_string(options_.retry.max_attempts) + " attempts",
              json{{"status", last.status}, {"body", last.text}});
}

std::string Gateway::complete(const ChatTranscript& t, const JournalContext& context) {
  if (auto problems = validate_transcript(t); !problems.empty()) {
    throw Error(ErrorCode::validation, "invalid transcript: " + problems.front(), json(problems));
  }
  const std::string fp = fingerprint(t);
  std::string response;
  switch (options_.mode) {
    case TransportMode::replay: {
      auto hit = fixture_->lookup(fp);
      if (!hit) {
        throw Error(ErrorCode::fixture_miss, "no recorded response for request " + fp,
                    json{{"fingerprint", fp}, {"fixture", fixture_->path().string()}, {"context", context}});
      }
      response = std::move(*hit);
      break;
    }
    case TransportMode::live:
      response = live(t);
      break;
    case TransportMode::record:
      response = live(t);
      fixture_->append(t, response);
      break;
  }
  if (journal_) {
    journal_->append(json{{"context", context},
                          {"transport", std::string(to_token(options_.mode))},
                          {"fingerprint", fp},
                          {"request", canonical_json(t)},
                          {"response", response}});
  }
  return response;
}

}  // namespace genreloom
