#include <httplib.h>

#include "genreloom/error.hpp"
#include "genreloom/gateway.hpp"

namespace genreloom {

using nlohmann::json;

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::validation, "base URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

class OpenAIBackend final : public ChatBackend {
 public:
  explicit OpenAIBackend(OpenAIBackendConfig config) : config_(std::move(config)), url_(split_url(config_.base_url)) {}

  BackendReply send(const ChatTranscript& t) override {
    httplib::Client client(url_.origin);
    client.set_connection_timeout(std::chrono::seconds(15));
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto res = client.Post(url_.path + "/chat/completions", headers, openai_request_body(t).dump(), "application/json");
    if (!res) {
      return {BackendReply::Outcome::transport_error, 0, httplib::to_string(res.error())};
    }
    if (res->status < 200 || res->status >= 300) {
      return {BackendReply::Outcome::http_error, res->status, res->body};
    }
    auto text = openai_response_text(res->body);
    if (!text) return {BackendReply::Outcome::http_error, res->status, "response carried no message content"};
    return {BackendReply::Outcome::ok, res->status, std::move(*text)};
  }

 private:
  OpenAIBackendConfig config_;
  SplitUrl url_;
};

}  // namespace

json openai_request_body(const ChatTranscript& t) {
  json messages = json::array();
  for (const auto& m : t.messages) messages.push_back({{"role", std::string(to_token(m.role))}, {"content", m.content}});
  return json{{"model", t.model}, {"temperature", t.temperature}, {"messages", std::move(messages)}, {"stream", false}};
}

std::optional<std::string> openai_response_text(std::string_view body) {
  const json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    return std::nullopt;
  }
  const json& msg = j["choices"][0].value("message", json::object());
  if (!msg.contains("content") || !msg["content"].is_string()) return std::nullopt;
  return msg["content"].get<std::string>();
}

std::unique_ptr<ChatBackend> make_openai_backend(OpenAIBackendConfig config) {
  return std::make_unique<OpenAIBackend>(std::move(config));
}

}  // namespace genreloom
