#include "genreloom/server.hpp"

#include <httplib.h>

#include <functional>
#include <regex>

#include "genreloom/text.hpp"

namespace genreloom {

using nlohmann::json;

namespace {

struct Reply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  std::string filename;
};

Reply json_reply(const json& j, int status = 200) { return {status, j.dump(2) + "\n", "application/json", {}}; }

using Params = std::vector<std::string>;
using Handler = std::function<Reply(App&, const httplib::Request&, const Params&)>;

struct Route {
  RouteInfo info;
  Handler handler;
};

json body_of(const httplib::Request& req) {
  if (text::trim(req.body).empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::validation, "request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::validation, std::string("request body is not valid JSON: ") + e.what());
  }
}

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::validation, std::string("missing field '") + key + "'", {{"field", key}});
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::validation, std::string("field '") + key + "' has the wrong type", {{"field", key}});
  }
}

std::optional<std::string> suggestion_of(const json& body) {
  if (!body.contains("suggestion") || body.at("suggestion").is_null()) return std::nullopt;
  std::string s = field<std::string>(body, "suggestion");
  if (text::trim(s).empty()) return std::nullopt;
  return s;
}

json session_view(App& app, const CompositionSession& s) {
  json j = to_json(s);
  if (auto p = app.patterns().find(s.pattern_id)) j["stage_count"] = p->stages.size();
  return j;
}

ExtractionRequest extraction_of(const json& body) {
  ExtractionRequest r;
  r.genre = Genre::parse(field<std::string>(body, "genre"));
  if (body.contains("mode")) r.mode = extraction_mode_from_token(field<std::string>(body, "mode"));
  if (body.contains("outlines")) {
    for (const auto& o : body.at("outlines")) r.outlines.push_back(outline_from_json(o));
  }
  if (body.contains("exemplars")) {
    for (const auto& e : body.at("exemplars")) {
      if (e.is_string()) {
        r.exemplars.push_back(parse_title_spec(e.get<std::string>(), r.genre));
        continue;
      }
      Exemplar x;
      x.genre = r.genre;
      x.title = field<std::string>(e, "title");
      x.author = e.value("author", std::string{});
      x.year_text = e.value("year_text", std::string{});
      x.justification = e.value("justification", std::string{});
      r.exemplars.push_back(std::move(x));
    }
  }
  if (body.contains("titles")) {
    for (const auto& t : body.at("titles")) r.exemplars.push_back(parse_title_spec(t.get<std::string>(), r.genre));
  }
  if (r.outlines.empty() && r.exemplars.empty()) {
    throw Error(ErrorCode::validation, "give 'exemplars', 'titles' or 'outlines'");
  }
  return r;
}

const std::vector<Route>& routes() {
  static const std::vector<Route> table = {
      {{"GET", "/healthz", "Liveness probe"},
       [](App&, const httplib::Request&, const Params&) { return json_reply({{"status", "ok"}}); }},
      {{"GET", "/spec", "This route description"},
       [](App&, const httplib::Request&, const Params&) { return json_reply(service_description()); }},
      {{"GET", "/genres", "Fundamental and seed genre profiles"},
       [](App& app, const httplib::Request&, const Params&) {
         json out = json::array();
         for (const auto& p : app.registry().fundamental_profiles()) out.push_back(to_json(p));
         for (const auto& p : app.registry().imdb_seed_profiles()) out.push_back(to_json(p));
         return json_reply(out);
       }},
      {{"GET", "/patterns", "List builtin and stored patterns"},
       [](App& app, const httplib::Request&, const Params&) {
         json out = json::array();
         for (const auto& p : app.patterns().list()) out.push_back(to_json(p));
         return json_reply(out);
       }},
      {{"GET", "/patterns/{id}", "One pattern"},
       [](App& app, const httplib::Request&, const Params& p) { return json_reply(to_json(app.patterns().get(p[0]))); }},
      {{"POST", "/patterns", "Import a pattern"},
       [](App& app, const httplib::Request& req, const Params&) {
         GenrePattern p = pattern_from_json(body_of(req));
         return json_reply(to_json(app.patterns().add(std::move(p))), 201);
       }},
      {{"DELETE", "/patterns/{id}", "Delete a stored pattern"},
       [](App& app, const httplib::Request&, const Params& p) {
         app.patterns().remove(p[0]);
         return json_reply({{"deleted", p[0]}});
       }},
      {{"POST", "/extractions", "Extract a pattern from exemplars, titles or outlines"},
       [](App& app, const httplib::Request& req, const Params&) {
         return json_reply(to_json(app.extract(extraction_of(body_of(req)))), 201);
       }},
      {{"POST", "/exemplar-requests", "Ask for three exemplars per genre"},
       [](App& app, const httplib::Request& req, const Params&) {
         const json body = body_of(req);
         std::vector<Genre> genres;
         if (body.contains("genres")) {
           for (const auto& g : field<std::vector<std::string>>(body, "genres")) genres.push_back(Genre::parse(g));
         }
         std::string id;
         json out = to_json(app.request_exemplars(genres, &id));
         out["id"] = id;
         return json_reply(out, 201);
       }},
      {{"POST", "/sessions", "Start a composition session"},
       [](App& app, const httplib::Request& req, const Params&) {
         const json body = body_of(req);
         auto s = app.create_session(field<std::string>(body, "premise"), field<std::string>(body, "pattern_id"));
         return json_reply(session_view(app, s), 201);
       }},
      {{"GET", "/sessions/{id}", "Session state"},
       [](App& app, const httplib::Request&, const Params& p) { return json_reply(session_view(app, app.session(p[0]))); }},
      {{"POST", "/sessions/{id}/draft", "Draft the current stage"},
       [](App& app, const httplib::Request& req, const Params& p) {
         auto [e, s] = app.draft(p[0], suggestion_of(body_of(req)));
         return json_reply({{"event", to_json(e)}, {"session", session_view(app, s)}});
       }},
      {{"POST", "/sessions/{id}/regenerate", "Redraft the current stage"},
       [](App& app, const httplib::Request& req, const Params& p) {
         auto [e, s] = app.regenerate(p[0], suggestion_of(body_of(req)));
         return json_reply({{"event", to_json(e)}, {"session", session_view(app, s)}});
       }},
      {{"POST", "/sessions/{id}/accept", "Accept the current draft"},
       [](App& app, const httplib::Request&, const Params& p) {
         auto r = app.accept(p[0]);
         return json_reply(
             {{"session", session_view(app, r.session)}, {"story", r.story ? to_json(*r.story) : json(nullptr)}});
       }},
      {{"POST", "/sessions/{id}/finalize", "Title, summarize and store the story"},
       [](App& app, const httplib::Request&, const Params& p) { return json_reply(to_json(app.finalize(p[0])), 201); }},
      {{"GET", "/stories/{id}", "A finished story"},
       [](App& app, const httplib::Request&, const Params& p) { return json_reply(to_json(app.story(p[0]))); }},
      {{"GET", "/stories/{id}/export", "Storyboard export (format=html|markdown|json)"},
       [](App& app, const httplib::Request& req, const Params& p) {
         const ExportFormat f =
             export_format_from_token(req.has_param("format") ? req.get_param_value("format") : std::string("html"));
         const StoryboardDocument doc = app.storyboard(p[0]);
         Reply r{200, export_document(doc, f), "", export_filename(doc, f)};
         switch (f) {
           case ExportFormat::html: r.content_type = "text/html; charset=utf-8"; break;
           case ExportFormat::markdown: r.content_type = "text/markdown; charset=utf-8"; break;
           case ExportFormat::json: r.content_type = "application/json"; break;
         }
         return r;
       }},
      {{"GET", "/stories/{id}/consistency", "Per-stage similarity of events to stage descriptions"},
       [](App& app, const httplib::Request&, const Params& p) {
         const Story s = app.story(p[0]);
         json out = json::array();
         for (const auto& c : consistency_report(s, app.patterns().get(s.pattern_id))) {
           out.push_back({{"stage_index", c.stage_index}, {"score", c.score}, {"flagged", c.flagged}});
         }
         return json_reply(out);
       }},
  };
  return table;
}

std::string path_regex(const std::string& path) {
  return std::regex_replace(path, std::regex(R"(\{[a-z_]+\})"), "([^/]+)");
}

}  // namespace

const std::vector<RouteInfo>& service_routes() {
  static const std::vector<RouteInfo> infos = [] {
    std::vector<RouteInfo> v;
    for (const auto& r : routes()) v.push_back(r.info);
    return v;
  }();
  return infos;
}

json service_description() {
  json paths = json::object();
  for (const auto& r : service_routes()) {
    std::string m = text::to_lower(r.method);
    paths[r.path][m] = {{"summary", r.summary}};
  }
  return {{"openapi", "3.0.3"}, {"info", {{"title", "genreloom"}, {"version", "1.0.0"}}}, {"paths", paths}};
}

int http_status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::not_found:
    case ErrorCode::unknown_pattern:
    case ErrorCode::unknown_genre: return 404;
    case ErrorCode::invalid_state:
    case ErrorCode::revision_limit:
    case ErrorCode::immutable: return 409;
    case ErrorCode::provider_error:
    case ErrorCode::retries_exhausted:
    case ErrorCode::fixture_miss:
    case ErrorCode::parse_failure:
    case ErrorCode::length_violation: return 502;
    case ErrorCode::store_corrupt: return 500;
    case ErrorCode::validation:
    case ErrorCode::invalid_premise:
    case ErrorCode::invalid_pattern:
    case ErrorCode::missing_slot:
    case ErrorCode::empty_input:
    case ErrorCode::empty_result: return 422;
  }
  return 500;
}

json api_error(const Error& e) {
  return {{"code", error_token(e.code())}, {"message", e.what()}, {"details", e.details()}};
}

struct HttpService::Impl {
  App& app;
  httplib::Server server;

  explicit Impl(App& a) : app(a) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
    server.set_payload_max_length(8 * 1024 * 1024);
    for (const auto& r : routes()) {
      auto handler = [this, h = r.handler](const httplib::Request& req, httplib::Response& res) {
        Reply out;
        try {
          Params params;
          for (std::size_t i = 1; i < req.matches.size(); ++i) params.push_back(req.matches[i].str());
          out = h(app, req, params);
        } catch (const Error& e) {
          out = json_reply(api_error(e), http_status_of(e.code()));
        } catch (const std::exception& e) {
          out = json_reply({{"code", "internal"}, {"message", e.what()}, {"details", nullptr}}, 500);
        }
        res.status = out.status;
        if (!out.filename.empty()) res.set_header("Content-Disposition", "inline; filename=\"" + out.filename + "\"");
        res.set_content(out.body, out.content_type);
      };
      const std::string pattern = path_regex(r.info.path);
      if (r.info.method == "GET") server.Get(pattern, handler);
      if (r.info.method == "POST") server.Post(pattern, handler);
      if (r.info.method == "DELETE") server.Delete(pattern, handler);
    }
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.status == 404 && res.body.empty()) {
        res.set_content(json({{"code", "not-found"}, {"message", "no such route"}, {"details", nullptr}}).dump(2) + "\n",
                        "application/json");
      }
    });
  }
};

HttpService::HttpService(App& app) : impl_(std::make_unique<Impl>(app)) {}
HttpService::~HttpService() = default;

int HttpService::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port)) return -1;
  return port;
}

bool HttpService::run() { return impl_->server.listen_after_bind(); }
void HttpService::stop() { impl_->server.stop(); }
void HttpService::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace genreloom
