#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace genreloom {

class RunJournal;

enum class Role { system, user, assistant };

std::string_view to_token(Role r);
Role role_from_token(std::string_view token);

struct ChatMessage {
  Role role = Role::user;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatTranscript {
  std::string model;
  double temperature = 0.8;
  std::vector<ChatMessage> messages;

  friend bool operator==(const ChatTranscript&, const ChatTranscript&) = default;
};

/// Temperatures used unless a call site overrides them.
inline constexpr double kCreativeTemperature = 0.8;
inline constexpr double kStructuredTemperature = 0.0;

/// Empty when the transcript may be submitted: model set, temperature in
/// [0, 2], at least one message, no empty content, last role = user.
std::vector<std::string> validate_transcript(const ChatTranscript& t);

/// Sorted-key JSON with "\r\n" and lone "\r" normalized to "\n".
nlohmann::json canonical_json(const ChatTranscript& t);
ChatTranscript transcript_from_json(const nlohmann::json& j);

/// SHA-256 of the compact canonical JSON, as 64 lower-case hex digits.
std::string fingerprint(const ChatTranscript& t);

// ---- backends -----------------------------------------------------------------

struct BackendReply {
  enum class Outcome { ok, transport_error, http_error };
  Outcome outcome = Outcome::ok;
  int status = 200;
  std::string text;  // assistant text on ok, error body/message otherwise
};

/// One network round trip, no retry. Implementations must be safe to call
/// from several threads at once.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual BackendReply send(const ChatTranscript& transcript) = 0;
};

struct OpenAIBackendConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::chrono::seconds timeout{120};
};

/// POST {base_url}/chat/completions with the OpenAI-compatible body
/// {model, temperature, messages}; reads choices[0].message.content.
std::unique_ptr<ChatBackend> make_openai_backend(OpenAIBackendConfig config);

/// Request body (exposed for tests of the wire format).
nlohmann::json openai_request_body(const ChatTranscript& t);
/// Extracts the assistant text; nullopt when the body has no content.
std::optional<std::string> openai_response_text(std::string_view body);

// ---- fixtures -----------------------------------------------------------------

/// Line-delimited {fingerprint, request, response} records. Lookups are
/// served from memory; appends go to memory and to the file as one
/// write per line.
class ReplayFixture {
 public:
  ReplayFixture() = default;
  /// Loads `path` if it exists. Throws Error(validation) on a malformed
  /// line or a duplicate fingerprint.
  explicit ReplayFixture(std::filesystem::path path);

  std::optional<std::string> lookup(const std::string& fingerprint) const;
  /// False (and no write) when the fingerprint is already recorded.
  bool append(const ChatTranscript& request, const std::string& response);
  std::size_t size() const;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> entries_;
};

// ---- gateway ------------------------------------------------------------------

enum class TransportMode { live, record, replay };

std::string_view to_token(TransportMode m);
TransportMode transport_from_token(std::string_view token);

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  double multiplier = 2.0;
};

/// Transport failures, 429 and 503 are retried; any other non-2xx status
/// is a provider error.
bool is_retryable(const BackendReply& reply);

/// Counting semaphore that admits waiters strictly in arrival order.
class FifoLimiter {
 public:
  explicit FifoLimiter(std::size_t cap);

  void acquire();
  void release();
  /// Applies to acquisitions that have not been granted yet.
  void set_cap(std::size_t cap);
  std::size_t cap() const;
  std::size_t in_flight() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t cap_;
  std::size_t in_flight_ = 0;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t serving_ = 0;
};

struct GatewayOptions {
  TransportMode mode = TransportMode::live;
  RetryPolicy retry;
  std::size_t concurrency_cap = 4;
  /// Replaced in tests to avoid real sleeping.
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// Caller-supplied label for the run journal, e.g. {"session": "3",
/// "operation": "draft"}.
using JournalContext = nlohmann::json;

class Gateway {
 public:
  /// `backend` may be null in replay mode. `fixture` is required for
  /// record and replay.
  Gateway(GatewayOptions options, std::shared_ptr<ChatBackend> backend, std::shared_ptr<ReplayFixture> fixture,
          std::shared_ptr<RunJournal> journal = nullptr);

  /// Throws Error(validation) for an invalid transcript, Error(fixture_miss),
  /// Error(provider_error) or Error(retries_exhausted).
  std::string complete(const ChatTranscript& transcript, const JournalContext& context = nullptr);

  void concurrency_cap(std::size_t n);
  std::size_t concurrency_cap() const { return limiter_.cap(); }
  TransportMode mode() const noexcept { return options_.mode; }

 private:
  std::string live(const ChatTranscript& transcript);

  GatewayOptions options_;
  std::shared_ptr<ChatBackend> backend_;
  std::shared_ptr<ReplayFixture> fixture_;
  std::shared_ptr<RunJournal> journal_;
  FifoLimiter limiter_;
};

}  // namespace genreloom
