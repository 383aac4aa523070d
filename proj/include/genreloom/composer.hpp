#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "genreloom/gateway.hpp"
#include "genreloom/pattern.hpp"

namespace genreloom {

inline constexpr std::size_t kMaxPremiseChars = 2000;
inline constexpr int kMaxRevision = 11;  // first draft plus 10 regenerations

/// Trimmed premise text. Throws Error(invalid_premise) when empty or longer
/// than kMaxPremiseChars code points.
std::string make_premise(std::string_view text);

struct StoryEvent {
  int stage_index = 0;
  std::string text;
  std::optional<std::string> suggestion;
  int revision = 1;
  std::optional<std::string> image_prompt;

  friend bool operator==(const StoryEvent&, const StoryEvent&) = default;
};

enum class SessionStatus { drafting, reviewing, complete };

std::string_view to_token(SessionStatus s);
SessionStatus session_status_from_token(std::string_view token);

struct CompositionSession {
  std::string id;
  std::string premise;
  std::string pattern_id;
  int cursor = 1;
  std::vector<StoryEvent> events;
  SessionStatus status = SessionStatus::drafting;
  std::optional<std::string> title;
  std::optional<std::string> summary;
  std::optional<std::string> story_id;

  friend bool operator==(const CompositionSession&, const CompositionSession&) = default;
};

struct Story {
  std::string id;
  std::string title;
  std::string premise;
  Genre genre = FundamentalGenre::comedy;
  std::string pattern_id;
  std::vector<std::string> events;
  std::string summary;

  friend bool operator==(const Story&, const Story&) = default;
};

/// Every broken invariant of `s` for a pattern with `stage_count` stages.
std::vector<std::string> session_violations(const CompositionSession& s, std::size_t stage_count);

nlohmann::json to_json(const StoryEvent& e);
StoryEvent event_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CompositionSession& s);
CompositionSession session_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Story& s);
Story story_from_json(const nlohmann::json& j);

/// Canonical bytes (two-space indent, fixed key order, trailing newline).
std::string serialize_story(const Story& s);

struct StageConsistency {
  int stage_index = 0;
  double score = 0.0;
  bool flagged = false;
};

inline constexpr double kConsistencyFlagBelow = 0.05;

/// Token-set Jaccard similarity of each event against its stage
/// description. Throws Error(validation) when the story does not have one
/// event per stage.
std::vector<StageConsistency> consistency_report(const Story& story, const GenrePattern& pattern);

/// Resolves a pattern id; nullopt when unknown.
using PatternLookup = std::function<std::optional<GenrePattern>(const std::string&)>;
/// Persists a finished story and returns its id.
using StorySink = std::function<std::string(const Story&)>;

struct ComposerOptions {
  std::string model = "gpt-4-turbo";
  std::string summary_model = "gpt-3.5-turbo-0125";
  double draft_temperature = kCreativeTemperature;
  double title_temperature = kCreativeTemperature;
  double summary_temperature = kCreativeTemperature;
  std::size_t min_event_sentences = 2;
  std::size_t max_event_sentences = 5;
  std::size_t max_title_words = 12;
  std::size_t min_summary_sentences = 3;
  std::size_t max_summary_sentences = 6;
  std::string image_style = "storyboard panel, muted watercolor illustration";
};

/// Operations take the session by reference and change it only when they
/// succeed; a thrown error leaves it as it was. Callers serialize access
/// to any one session.
class Composer {
 public:
  Composer(Gateway& gateway, const PatternRegistry& registry, PatternLookup patterns, StorySink sink = nullptr,
           ComposerOptions options = {});

  /// Throws Error(unknown_pattern) or Error(invalid_premise).
  CompositionSession create_session(std::string_view premise, const std::string& pattern_id) const;

  /// Throws Error(invalid_state) unless drafting.
  StoryEvent draft_stage(CompositionSession& s, const std::optional<std::string>& suggestion = std::nullopt);
  /// Throws Error(invalid_state) unless reviewing, Error(revision_limit)
  /// once the event is at kMaxRevision.
  StoryEvent regenerate(CompositionSession& s, const std::optional<std::string>& suggestion = std::nullopt);
  /// Moves to the next stage, or finalizes after the last one (the story is
  /// then returned). Throws Error(invalid_state) unless reviewing.
  std::optional<Story> accept(CompositionSession& s);
  /// Throws Error(invalid_state) unless reviewing the last stage.
  Story finalize(CompositionSession& s);

  GenrePattern pattern_of(const CompositionSession& s) const;
  const ComposerOptions& options() const noexcept { return options_; }

 private:
  std::string generate_event(const CompositionSession& s, const GenrePattern& p, const std::optional<std::string>& suggestion,
                             const StoryEvent* previous, int revision);
  std::string ask_checked(std::vector<ChatMessage> messages, const std::string& model, double temperature,
                          const nlohmann::json& context, const std::function<std::optional<std::string>(const std::string&)>& check,
                          const std::function<std::string(std::string_view)>& clean);

  Gateway& gateway_;
  const PatternRegistry& registry_;
  PatternLookup patterns_;
  StorySink sink_;
  ComposerOptions options_;
};

}  // namespace genreloom
