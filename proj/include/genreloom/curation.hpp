#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "genreloom/gateway.hpp"
#include "genreloom/generalizer.hpp"
#include "genreloom/pattern.hpp"

namespace genreloom {

struct Exemplar {
  Genre genre = FundamentalGenre::comedy;
  std::string title;
  std::string author;     // may be empty
  std::string year_text;  // as written: "1934", "circa 1600", "1954-1955"
  std::string justification;

  friend bool operator==(const Exemplar&, const Exemplar&) = default;
};

struct ExemplarSet {
  std::vector<Exemplar> exemplars;
  std::string prompt_fingerprint;  // empty when parsed outside a request

  std::vector<Exemplar> of_genre(const Genre& g) const;
  friend bool operator==(const ExemplarSet&, const ExemplarSet&) = default;
};

nlohmann::json to_json(const ExemplarSet& set);
ExemplarSet exemplar_set_from_json(const nlohmann::json& j);

/// Reads numbered genre blocks holding bulleted entries shaped like
///
///     1. **Mystery**:
///        - "Title" by Author (year) - justification
///
/// Accepts straight, curly and TeX-style quotes, bold/italic markers,
/// hyphen/en/em dash separators and free-form year text ("circa 8th
/// century BCE"). Wrapped justification lines are joined with a newline.
/// Throws Error(parse_failure) with {line, message} diagnostics.
ExemplarSet parse_exemplars(std::string_view text);

/// Three exemplars per represented genre, unique titles within a genre,
/// non-empty fields, and (if non-empty) every genre in `expected` present.
std::vector<std::string> validate_exemplar_set(const ExemplarSet& set, std::span<const Genre> expected = {});

// ---- outlines -----------------------------------------------------------------

/// The fixed signature outline features are drawn from.
struct FeatureVocabulary {
  static const std::set<std::string>& roles();
  static const std::set<std::string>& moves();
  static const std::set<std::string>& settings();

  /// A vocabulary constant, or move(arg, ...) with role/setting arguments.
  static bool admits(const Term& feature);
};

struct OutlineParse {
  StoryOutline outline;
  std::vector<std::string> violations;  // empty on success
};

/// STAGE n: label / DESCRIPTION: ... / FEATURES: t1; t2 blocks. Collects
/// every violation instead of stopping at the first one.
OutlineParse parse_outline_response(std::string_view text, std::string title, std::optional<int> year);

// ---- pattern listings ------------------------------------------------------------

struct ListedStage {
  std::string name;
  std::string description;
};

/// Numbered "N. Name. Description" lines; "**Name**." and "Name:" /
/// "Name - " separators are accepted too. Throws Error(parse_failure)
/// when no numbered item is found or numbering is off.
std::vector<ListedStage> parse_pattern_listing(std::string_view text);

/// Capitalized words that appear mid-sentence in outline prose, i.e. the
/// likely character and place names of the exemplars.
std::set<std::string> harvest_proper_names(std::span<const StoryOutline> outlines);
std::set<std::string> harvest_proper_names(std::span<const std::string> prose);

struct ProseLimits {
  std::size_t max_name_words = 6;
  std::size_t min_sentences = 1;
  std::size_t max_sentences = 3;
};

/// Checks the rewritten stages: required count (when given), name length,
/// description sentence count, and no forbidden names.
std::vector<std::string> check_pattern_prose(std::span<const ListedStage> stages, std::optional<std::size_t> count,
                                             const std::set<std::string>& forbidden_names, const ProseLimits& limits = {});

// ---- orchestration ------------------------------------------------------------

enum class ExtractionMode { deterministic, llm_assisted };

std::string_view to_token(ExtractionMode m);
ExtractionMode extraction_mode_from_token(std::string_view token);

struct CurationOptions {
  std::string exemplar_model = "gpt-3.5-turbo-0125";
  std::string model = "gpt-4-turbo";
  double exemplar_temperature = kStructuredTemperature;
  double outline_temperature = kStructuredTemperature;
  double abstraction_temperature = kStructuredTemperature;
  GeneralizeOptions generalize;
  /// Outlines requested at once while extracting (the gateway cap still
  /// applies underneath).
  std::size_t outline_parallelism = 3;
};

/// Renders the exemplar request for the given profiles.
std::string render_exemplar_request(std::span<const GenreProfile> profiles);
std::string describe_profile(const GenreProfile& profile);

class Curator {
 public:
  Curator(Gateway& gateway, const PatternRegistry& registry, CurationOptions options = {});

  /// Asks for three titles per genre; one corrective follow-up on
  /// validation failure, then Error(parse_failure).
  ExemplarSet request_exemplars(std::span<const GenreProfile> profiles);

  /// One corrective follow-up, then Error(parse_failure).
  StoryOutline outline_story(const std::string& title, const std::string& year_text, const Genre& genre);

  GenrePattern extract_pattern(std::span<const Exemplar> exemplars, ExtractionMode mode);

  /// Deterministic mode starting from outlines already at hand.
  GenrePattern extract_from_outlines(std::span<const StoryOutline> outlines, const Genre& genre);

 private:
  std::vector<ListedStage> ask_for_listing(std::vector<ChatMessage> messages, std::optional<std::size_t> count,
                                           const std::set<std::string>& forbidden, const nlohmann::json& context);
  GenrePattern finish(const Genre& genre, std::vector<ListedStage> stages, std::vector<std::string> sources) const;

  Gateway& gateway_;
  const PatternRegistry& registry_;
  CurationOptions options_;
};

}  // namespace genreloom
