#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace genreloom {

enum class FundamentalGenre { comedy, romance, tragedy, satire, mystery };

inline constexpr FundamentalGenre kFundamentalGenres[] = {
    FundamentalGenre::comedy, FundamentalGenre::romance, FundamentalGenre::tragedy,
    FundamentalGenre::satire, FundamentalGenre::mystery};

/// One of the five fundamental genres, or a user-named custom genre.
///
/// Fundamental genres serialize as their lower-case token ("satire"); custom
/// genres as "custom:<name>", so a custom "Comedy" never aliases the
/// fundamental one.
class Genre {
 public:
  Genre(FundamentalGenre g) : fundamental_(g) {}  // NOLINT(google-explicit-constructor)

  /// Throws Error(validation) on an empty or blank name.
  static Genre custom(std::string_view name);

  /// Accepts a fundamental token in any case ("Mystery"), "custom:<name>",
  /// or any other non-blank text as a custom name.
  static Genre parse(std::string_view text);

  /// Like parse() but only accepts the serialized token form.
  static Genre from_token(std::string_view token);

  bool is_fundamental() const noexcept { return fundamental_.has_value(); }
  std::optional<FundamentalGenre> fundamental() const noexcept { return fundamental_; }
  const std::string& custom_name() const noexcept { return custom_; }

  std::string token() const;
  std::string display_name() const;

  friend bool operator==(const Genre&, const Genre&) = default;
  friend auto operator<=>(const Genre& a, const Genre& b) { return a.token() <=> b.token(); }

 private:
  Genre() = default;
  std::optional<FundamentalGenre> fundamental_;
  std::string custom_;
};

std::string_view to_token(FundamentalGenre g);

struct GenreProfile {
  Genre genre;
  std::string season;
  std::string world;
  std::string protagonist;
  std::string definition;
  /// Representative titles, when the source lists any (the IMDB seeds do).
  std::vector<std::string> examples;

  friend bool operator==(const GenreProfile&, const GenreProfile&) = default;
};

struct Stage {
  int index = 0;  // 1-based
  std::string name;
  std::string description;

  friend bool operator==(const Stage&, const Stage&) = default;
};

enum class Provenance { builtin, extracted, imported };

std::string_view to_token(Provenance p);
Provenance provenance_from_token(std::string_view token);

struct GenrePattern {
  std::string id;
  Genre genre = FundamentalGenre::comedy;
  std::string title;
  std::vector<Stage> stages;
  Provenance provenance = Provenance::imported;
  std::vector<std::string> source_titles;

  std::size_t stage_count() const noexcept { return stages.size(); }
  friend bool operator==(const GenrePattern&, const GenrePattern&) = default;
};

struct Violation {
  std::string field;  // e.g. "stages[2].description"
  std::string rule;   // e.g. "empty description"

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Structural checks only; stage prose is not judged.
std::vector<Violation> validate_pattern(const GenrePattern& pattern);

nlohmann::json to_json(const GenreProfile& profile);
GenreProfile profile_from_json(const nlohmann::json& j);

/// Pattern interchange format: {id, genre, title, provenance, source_titles,
/// stages:[{index, name, description}]}. Throws Error(validation) on shape
/// errors; does not run validate_pattern.
nlohmann::json to_json(const GenrePattern& pattern);
GenrePattern pattern_from_json(const nlohmann::json& j);

/// Canonical bytes: two-space indented JSON, keys in fixed order, trailing
/// newline. This is the byte form of the bundled data files.
std::string serialize_pattern(const GenrePattern& pattern);
GenrePattern deserialize_pattern(std::string_view bytes);

/// The bundled canonical data: six built-in patterns, the five fundamental
/// genre profiles and the 28 IMDB seed profiles. Immutable after
/// construction; custom profiles are kept in a separate map guarded by the
/// caller (see add_custom_profile).
class PatternRegistry {
 public:
  PatternRegistry();

  /// comedy, romance, tragedy, satire, mystery, heros-journey, in that order.
  const std::vector<GenrePattern>& builtin_patterns() const noexcept { return builtins_; }
  const GenrePattern* find_builtin(std::string_view id) const noexcept;
  bool is_builtin(std::string_view id) const noexcept { return find_builtin(id) != nullptr; }

  /// Throws Error(unknown_genre) for a custom genre with no stored profile.
  const GenreProfile& profile_of(const Genre& genre) const;
  const std::vector<GenreProfile>& fundamental_profiles() const noexcept { return fundamentals_; }
  const std::vector<GenreProfile>& imdb_seed_profiles() const noexcept { return imdb_; }

  /// Registers a profile for a custom genre. Names are trimmed; an existing
  /// name (case-insensitive) is rejected with Error(validation).
  void add_custom_profile(GenreProfile profile);

 private:
  std::vector<GenrePattern> builtins_;
  std::vector<GenreProfile> fundamentals_;
  std::vector<GenreProfile> imdb_;
  std::map<std::string, GenreProfile> custom_;
};

/// Convenience accessors over a process-wide registry instance.
const PatternRegistry& default_registry();
std::vector<GenrePattern> builtin_patterns();
GenreProfile profile_of(const Genre& genre);
std::vector<GenreProfile> imdb_seed_profiles();

}  // namespace genreloom
