#include "genreloom/composer.hpp"

#include <algorithm>

#include "genreloom/curation.hpp"
#include "genreloom/error.hpp"
#include "genreloom/prompt.hpp"
#include "genreloom/storyboard.hpp"
#include "genreloom/text.hpp"

namespace genreloom {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::size_t code_points(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

[[noreturn]] void bad_state(const CompositionSession& s, std::string_view op, std::string_view needed) {
  throw Error(ErrorCode::invalid_state,
              std::string(op) + " needs status " + std::string(needed) + ", session is " + std::string(to_token(s.status)),
              {{"status", to_token(s.status)}, {"cursor", s.cursor}, {"operation", op}});
}

std::string story_text(const std::vector<StoryEvent>& events) {
  std::string out;
  for (const auto& e : events) out += (out.empty() ? "" : "\n\n") + e.text;
  return out;
}

std::string clean_prose(std::string_view reply) {
  std::string s = text::normalize_whitespace(reply);
  // paragraphs are joined; events are single paragraphs
  std::string out;
  bool space = false;
  for (char c : s) {
    if (c == '\n' || c == '\r') {
      space = true;
      continue;
    }
    if (space && !out.empty() && out.back() != ' ') out += ' ';
    space = false;
    out += c;
  }
  return text::normalize_whitespace(out);
}

std::string clean_title(std::string_view reply) {
  std::string s = clean_prose(reply);
  if (text::starts_with_ci(s, "title:")) s = text::trim(std::string_view(s).substr(6));
  s.erase(std::remove(s.begin(), s.end(), '*'), s.end());
  for (std::string_view q : {"\"", "\xE2\x80\x9C", "\xE2\x80\x9D"}) {
    if (s.size() >= q.size() && s.compare(0, q.size(), q) == 0) s.erase(0, q.size());
    if (s.size() >= q.size() && s.compare(s.size() - q.size(), q.size(), q) == 0) s.erase(s.size() - q.size());
  }
  s = text::trim(s);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return text::trim(s);
}

std::string profile_text(const PatternRegistry& registry, const Genre& g) {
  try {
    return describe_profile(registry.profile_of(g));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::unknown_genre) throw;
    return {};
  }
}

}  // namespace

std::string make_premise(std::string_view input) {
  std::string p = text::trim(input);
  if (p.empty()) throw Error(ErrorCode::invalid_premise, "premise is empty");
  const std::size_t n = code_points(p);
  if (n > kMaxPremiseChars) {
    throw Error(ErrorCode::invalid_premise,
                "premise has " + std::to_string(n) + " characters; at most " + std::to_string(kMaxPremiseChars) +
                    " are allowed",
                {{"length", n}});
  }
  return p;
}

std::string_view to_token(SessionStatus s) {
  switch (s) {
    case SessionStatus::drafting: return "drafting";
    case SessionStatus::reviewing: return "reviewing";
    case SessionStatus::complete: return "complete";
  }
  return "drafting";
}

SessionStatus session_status_from_token(std::string_view t) {
  if (t == "drafting") return SessionStatus::drafting;
  if (t == "reviewing") return SessionStatus::reviewing;
  if (t == "complete") return SessionStatus::complete;
  throw Error(ErrorCode::validation, "unknown session status '" + std::string(t) + "'");
}

std::vector<std::string> session_violations(const CompositionSession& s, std::size_t n) {
  std::vector<std::string> v;
  const auto count = s.events.size();
  for (std::size_t i = 0; i < count; ++i) {
    const auto& e = s.events[i];
    if (e.stage_index != static_cast<int>(i + 1)) v.push_back("events[" + std::to_string(i) + "] has the wrong stage index");
    if (e.revision < 1 || e.revision > kMaxRevision) v.push_back("events[" + std::to_string(i) + "] revision out of range");
    if (text::trim(e.text).empty()) v.push_back("events[" + std::to_string(i) + "] is empty");
  }
  if (s.cursor < 1 || static_cast<std::size_t>(s.cursor) > n) v.push_back("cursor out of range");
  switch (s.status) {
    case SessionStatus::drafting:
      if (count + 1 != static_cast<std::size_t>(s.cursor)) v.push_back("drafting session must hold cursor-1 events");
      break;
    case SessionStatus::reviewing:
      if (count != static_cast<std::size_t>(s.cursor)) v.push_back("reviewing session must hold cursor events");
      break;
    case SessionStatus::complete:
      if (count != n) v.push_back("complete session must hold one event per stage");
      if (!s.title || text::trim(*s.title).empty()) v.push_back("complete session has no title");
      if (!s.summary || text::trim(*s.summary).empty()) v.push_back("complete session has no summary");
      break;
  }
  if (s.status != SessionStatus::complete && (s.title || s.summary)) v.push_back("title/summary set before completion");
  return v;
}

// ---- JSON -----------------------------------------------------------------------

json to_json(const StoryEvent& e) {
  ordered_json j;
  j["stage_index"] = e.stage_index;
  j["text"] = e.text;
  j["suggestion"] = e.suggestion ? json(*e.suggestion) : json(nullptr);
  j["revision"] = e.revision;
  j["image_prompt"] = e.image_prompt ? json(*e.image_prompt) : json(nullptr);
  return json(j);
}

namespace {

std::optional<std::string> opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

template <class F>
auto shape_checked(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::validation, std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

StoryEvent event_from_json(const json& j) {
  return shape_checked("event", [&] {
    StoryEvent e;
    e.stage_index = j.at("stage_index").get<int>();
    e.text = j.at("text").get<std::string>();
    e.suggestion = opt_string(j, "suggestion");
    e.revision = j.value("revision", 1);
    e.image_prompt = opt_string(j, "image_prompt");
    return e;
  });
}

json to_json(const CompositionSession& s) {
  ordered_json j;
  j["id"] = s.id;
  j["premise"] = s.premise;
  j["pattern_id"] = s.pattern_id;
  j["cursor"] = s.cursor;
  j["status"] = to_token(s.status);
  json events = json::array();
  for (const auto& e : s.events) events.push_back(to_json(e));
  j["events"] = events;
  j["title"] = s.title ? json(*s.title) : json(nullptr);
  j["summary"] = s.summary ? json(*s.summary) : json(nullptr);
  j["story_id"] = s.story_id ? json(*s.story_id) : json(nullptr);
  return json(j);
}

CompositionSession session_from_json(const json& j) {
  return shape_checked("session", [&] {
    CompositionSession s;
    s.id = j.value("id", std::string{});
    s.premise = j.at("premise").get<std::string>();
    s.pattern_id = j.at("pattern_id").get<std::string>();
    s.cursor = j.at("cursor").get<int>();
    s.status = session_status_from_token(j.at("status").get<std::string>());
    for (const auto& e : j.at("events")) s.events.push_back(event_from_json(e));
    s.title = opt_string(j, "title");
    s.summary = opt_string(j, "summary");
    s.story_id = opt_string(j, "story_id");
    return s;
  });
}

json to_json(const Story& s) {
  ordered_json j;
  j["id"] = s.id;
  j["title"] = s.title;
  j["premise"] = s.premise;
  j["genre"] = s.genre.token();
  j["pattern_id"] = s.pattern_id;
  j["events"] = s.events;
  j["summary"] = s.summary;
  return json(j);
}

Story story_from_json(const json& j) {
  return shape_checked("story", [&] {
    Story s;
    s.id = j.value("id", std::string{});
    s.title = j.at("title").get<std::string>();
    s.premise = j.at("premise").get<std::string>();
    s.genre = Genre::from_token(j.at("genre").get<std::string>());
    s.pattern_id = j.at("pattern_id").get<std::string>();
    s.events = j.at("events").get<std::vector<std::string>>();
    s.summary = j.at("summary").get<std::string>();
    return s;
  });
}

std::string serialize_story(const Story& s) {
  ordered_json j;
  j["id"] = s.id;
  j["title"] = s.title;
  j["premise"] = s.premise;
  j["genre"] = s.genre.token();
  j["pattern_id"] = s.pattern_id;
  j["events"] = s.events;
  j["summary"] = s.summary;
  return j.dump(2) + "\n";
}

std::vector<StageConsistency> consistency_report(const Story& story, const GenrePattern& pattern) {
  if (story.events.size() != pattern.stages.size()) {
    throw Error(ErrorCode::validation, "story has " + std::to_string(story.events.size()) + " events but the pattern has " +
                                           std::to_string(pattern.stages.size()) + " stages");
  }
  std::vector<StageConsistency> out;
  for (std::size_t i = 0; i < story.events.size(); ++i) {
    const double score = text::jaccard(text::token_set(story.events[i]), text::token_set(pattern.stages[i].description));
    out.push_back({pattern.stages[i].index, score, score < kConsistencyFlagBelow});
  }
  return out;
}

// ---- composer -------------------------------------------------------------------

Composer::Composer(Gateway& gateway, const PatternRegistry& registry, PatternLookup patterns, StorySink sink,
                   ComposerOptions options)
    : gateway_(gateway),
      registry_(registry),
      patterns_(std::move(patterns)),
      sink_(std::move(sink)),
      options_(std::move(options)) {}

GenrePattern Composer::pattern_of(const CompositionSession& s) const {
  auto p = patterns_ ? patterns_(s.pattern_id) : std::nullopt;
  if (!p) throw Error(ErrorCode::unknown_pattern, "no pattern '" + s.pattern_id + "'", {{"pattern_id", s.pattern_id}});
  return *p;
}

CompositionSession Composer::create_session(std::string_view premise, const std::string& pattern_id) const {
  CompositionSession s;
  s.pattern_id = pattern_id;
  pattern_of(s);
  s.premise = make_premise(premise);
  return s;
}

std::string Composer::ask_checked(std::vector<ChatMessage> messages, const std::string& model, double temperature,
                                  const json& context,
                                  const std::function<std::optional<std::string>(const std::string&)>& check,
                                  const std::function<std::string(std::string_view)>& clean) {
  std::string problem;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string reply = gateway_.complete(ChatTranscript{model, temperature, messages}, context);
    std::string cleaned = clean(reply);
    auto p = check(cleaned);
    if (!p) return cleaned;
    problem = *p;
    messages.push_back({Role::assistant, reply});
    messages.push_back({Role::user, render(prompt_template("length_correction"), {{"problem", problem}})});
  }
  throw Error(ErrorCode::length_violation, problem + " (after a corrective retry)", context);
}

std::string Composer::generate_event(const CompositionSession& s, const GenrePattern& p,
                                     const std::optional<std::string>& suggestion, const StoryEvent* previous,
                                     int revision) {
  const Stage& stage = p.stages[static_cast<std::size_t>(s.cursor - 1)];
  std::vector<StoryEvent> prior(s.events.begin(), s.events.begin() + (s.cursor - 1));
  const std::string so_far = prior.empty() ? "(nothing yet)" : story_text(prior);
  Bindings b{{"genre_name", p.genre.display_name()},
             {"genre_profile", profile_text(registry_, p.genre)},
             {"premise", s.premise},
             {"story_so_far", so_far},
             {"stage_index", std::to_string(s.cursor)},
             {"stage_count", std::to_string(p.stages.size())},
             {"stage_name", stage.name},
             {"stage_description", stage.description},
             {"suggestion", suggestion && !text::trim(*suggestion).empty() ? "User suggestion: " + *suggestion + "\n" : ""}};
  std::string id = "draft_event";
  if (previous) {
    id = "regenerate_event";
    b["previous_draft"] = previous->text;
    b["revision"] = std::to_string(revision);
  }
  std::vector<ChatMessage> messages{{Role::system, prompt_template("composer_system").body},
                                    {Role::user, render(prompt_template(id), b)}};
  const json context = {{"session", s.id},
                        {"operation", previous ? "regenerate" : "draft"},
                        {"stage", s.cursor},
                        {"revision", revision}};
  const auto lo = options_.min_event_sentences;
  const auto hi = options_.max_event_sentences;
  return ask_checked(
      std::move(messages), options_.model, options_.draft_temperature, context,
      [lo, hi](const std::string& t) -> std::optional<std::string> {
        const auto n = text::sentences(t).size();
        if (n >= lo && n <= hi) return std::nullopt;
        return "The event has " + std::to_string(n) + " sentences; it must have " + std::to_string(lo) + " to " +
               std::to_string(hi) + ".";
      },
      clean_prose);
}

StoryEvent Composer::draft_stage(CompositionSession& s, const std::optional<std::string>& suggestion) {
  if (s.status != SessionStatus::drafting) bad_state(s, "draft", "drafting");
  const GenrePattern p = pattern_of(s);
  StoryEvent e;
  e.stage_index = s.cursor;
  e.text = generate_event(s, p, suggestion, nullptr, 1);
  e.suggestion = suggestion;
  e.revision = 1;
  e.image_prompt = image_prompt(e.text, options_.image_style);
  s.events.push_back(e);
  s.status = SessionStatus::reviewing;
  return e;
}

StoryEvent Composer::regenerate(CompositionSession& s, const std::optional<std::string>& suggestion) {
  if (s.status != SessionStatus::reviewing) bad_state(s, "regenerate", "reviewing");
  StoryEvent& current = s.events.back();
  if (current.revision >= kMaxRevision) {
    throw Error(ErrorCode::revision_limit,
                "stage " + std::to_string(s.cursor) + " has reached " + std::to_string(kMaxRevision - 1) + " regenerations",
                {{"stage", s.cursor}, {"revision", current.revision}});
  }
  const GenrePattern p = pattern_of(s);
  StoryEvent e;
  e.stage_index = s.cursor;
  e.revision = current.revision + 1;
  e.text = generate_event(s, p, suggestion, &current, e.revision);
  e.suggestion = suggestion;
  e.image_prompt = image_prompt(e.text, options_.image_style);
  current = e;
  return e;
}

std::optional<Story> Composer::accept(CompositionSession& s) {
  if (s.status != SessionStatus::reviewing) bad_state(s, "accept", "reviewing");
  const GenrePattern p = pattern_of(s);
  if (static_cast<std::size_t>(s.cursor) >= p.stages.size()) return finalize(s);
  ++s.cursor;
  s.status = SessionStatus::drafting;
  return std::nullopt;
}

Story Composer::finalize(CompositionSession& s) {
  const GenrePattern p = pattern_of(s);
  if (s.status != SessionStatus::reviewing || static_cast<std::size_t>(s.cursor) != p.stages.size()) {
    throw Error(ErrorCode::invalid_state, "finalize needs the last stage drafted and under review",
                {{"status", to_token(s.status)}, {"cursor", s.cursor}, {"operation", "finalize"}});
  }
  const std::string body = story_text(s.events);
  const std::size_t max_words = options_.max_title_words;
  std::string title = ask_checked(
      {{Role::user, render(prompt_template("story_title"),
                           {{"genre_name", p.genre.display_name()}, {"premise", s.premise}, {"story", body}})}},
      options_.model, options_.title_temperature, {{"session", s.id}, {"operation", "title"}},
      [max_words](const std::string& t) -> std::optional<std::string> {
        const auto n = text::word_count(t);
        if (n >= 1 && n <= max_words) return std::nullopt;
        return "The title has " + std::to_string(n) + " words; it must have 1 to " + std::to_string(max_words) + ".";
      },
      clean_title);
  const auto lo = options_.min_summary_sentences;
  const auto hi = options_.max_summary_sentences;
  std::string summary = ask_checked(
      {{Role::user, render(prompt_template("story_summary"), {{"genre_name", p.genre.display_name()},
                                                              {"title", title},
                                                              {"premise", s.premise},
                                                              {"story", body}})}},
      options_.summary_model, options_.summary_temperature, {{"session", s.id}, {"operation", "summary"}},
      [lo, hi](const std::string& t) -> std::optional<std::string> {
        const auto n = text::sentences(t).size();
        if (n >= lo && n <= hi) return std::nullopt;
        return "The summary has " + std::to_string(n) + " sentences; it must have " + std::to_string(lo) + " to " +
               std::to_string(hi) + ".";
      },
      clean_prose);

  Story story;
  story.title = title;
  story.premise = s.premise;
  story.genre = p.genre;
  story.pattern_id = p.id;
  for (const auto& e : s.events) story.events.push_back(e.text);
  story.summary = summary;
  story.id = sink_ ? sink_(story) : s.id;

  s.title = std::move(title);
  s.summary = std::move(summary);
  s.story_id = story.id;
  s.status = SessionStatus::complete;
  return story;
}

}  // namespace genreloom
