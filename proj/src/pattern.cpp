#include "genreloom/pattern.hpp"

#include <algorithm>
#include <set>

#include "genreloom/error.hpp"
#include "genreloom/resources.hpp"
#include "genreloom/text.hpp"

namespace genreloom {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kCustomPrefix = "custom:";

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    if (c < 0x80) {
      len = 1;
    } else if ((c >> 5) == 0x6) {
      len = 2;
    } else if ((c >> 4) == 0xE) {
      len = 3;
    } else if ((c >> 3) == 0x1E) {
      len = 4;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    }
    i += len;
  }
  return true;
}

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::validation, std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

std::string require_string(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_string()) throw Error(ErrorCode::validation, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::string optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  if (!j.at(key).is_string()) throw Error(ErrorCode::validation, std::string("field '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

std::vector<std::string> string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  const json& v = j.at(key);
  if (!v.is_array()) throw Error(ErrorCode::validation, std::string("field '") + key + "' must be a list");
  for (const auto& e : v) {
    if (!e.is_string()) throw Error(ErrorCode::validation, std::string("field '") + key + "' must hold strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

json parse_json(std::string_view bytes, std::string_view what) {
  try {
    return json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::validation, std::string(what) + ": " + e.what());
  }
}

std::string_view resource_or_throw(std::string_view path) {
  auto r = find_resource(path);
  if (!r) throw Error(ErrorCode::not_found, "missing bundled resource " + std::string(path));
  return *r;
}

}  // namespace

// ---- Genre ----------------------------------------------------------------

std::string_view to_token(FundamentalGenre g) {
  switch (g) {
    case FundamentalGenre::comedy: return "comedy";
    case FundamentalGenre::romance: return "romance";
    case FundamentalGenre::tragedy: return "tragedy";
    case FundamentalGenre::satire: return "satire";
    case FundamentalGenre::mystery: return "mystery";
  }
  return "comedy";
}

Genre Genre::custom(std::string_view name) {
  std::string n = text::normalize_whitespace(name);
  if (n.empty()) throw Error(ErrorCode::validation, "custom genre name must not be empty");
  Genre g;
  g.custom_ = std::move(n);
  return g;
}

Genre Genre::parse(std::string_view raw) {
  const std::string t = text::trim(raw);
  if (text::starts_with_ci(t, kCustomPrefix)) return custom(std::string_view(t).substr(kCustomPrefix.size()));
  const std::string lower = text::to_lower(t);
  for (FundamentalGenre g : kFundamentalGenres) {
    if (lower == to_token(g)) return g;
  }
  return custom(t);
}

Genre Genre::from_token(std::string_view token) {
  if (token.substr(0, kCustomPrefix.size()) == kCustomPrefix) return custom(token.substr(kCustomPrefix.size()));
  for (FundamentalGenre g : kFundamentalGenres) {
    if (token == to_token(g)) return g;
  }
  throw Error(ErrorCode::unknown_genre, "unknown genre token '" + std::string(token) + "'");
}

std::string Genre::token() const {
  if (fundamental_) return std::string(to_token(*fundamental_));
  return std::string(kCustomPrefix) + custom_;
}

std::string Genre::display_name() const {
  if (!fundamental_) return custom_;
  std::string s(to_token(*fundamental_));
  s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

// ---- Provenance -------------------------------------------------------------

std::string_view to_token(Provenance p) {
  switch (p) {
    case Provenance::builtin: return "builtin";
    case Provenance::extracted: return "extracted";
    case Provenance::imported: return "imported";
  }
  return "imported";
}

Provenance provenance_from_token(std::string_view token) {
  if (token == "builtin") return Provenance::builtin;
  if (token == "extracted") return Provenance::extracted;
  if (token == "imported") return Provenance::imported;
  throw Error(ErrorCode::validation, "unknown provenance '" + std::string(token) + "'");
}

// ---- validation -------------------------------------------------------------

std::vector<Violation> validate_pattern(const GenrePattern& p) {
  std::vector<Violation> out;
  auto check_utf8 = [&](const std::string& field, const std::string& value) {
    if (!valid_utf8(value)) out.push_back({field, "invalid UTF-8"});
  };
  check_utf8("id", p.id);
  check_utf8("title", p.title);
  check_utf8("genre", p.genre.token());
  for (std::size_t i = 0; i < p.source_titles.size(); ++i) {
    check_utf8("source_titles[" + std::to_string(i) + "]", p.source_titles[i]);
  }
  if (p.stages.empty()) {
    out.push_back({"stages", "empty stages"});
    return out;
  }

  for (std::size_t i = 0; i < p.stages.size(); ++i) {
    const Stage& s = p.stages[i];
    const std::string at = "stages[" + std::to_string(i) + "]";
    if (s.index <= 0) out.push_back({at + ".index", "non-positive index"});
    if (text::trim(s.name).empty()) out.push_back({at + ".name", "empty name"});
    if (s.name.find_first_of("\r\n") != std::string::npos) out.push_back({at + ".name", "line break in name"});
    if (text::trim(s.description).empty()) out.push_back({at + ".description", "empty description"});
    check_utf8(at + ".name", s.name);
    check_utf8(at + ".description", s.description);
  }

  std::set<int> seen;
  for (std::size_t i = 0; i < p.stages.size(); ++i) {
    const int idx = p.stages[i].index;
    if (!seen.insert(idx).second) {
      out.push_back({"stages[" + std::to_string(i) + "].index", "duplicate index"});
    }
    if (i > 0 && idx < p.stages[i - 1].index) {
      out.push_back({"stages[" + std::to_string(i) + "].index", "index order"});
    }
  }
  int expected = 1;
  for (int idx : seen) {
    if (idx <= 0) continue;
    if (idx > expected) out.push_back({"stages", "index gap"});
    expected = idx + 1;
  }
  return out;
}

// ---- JSON -------------------------------------------------------------------

json to_json(const GenreProfile& p) {
  ordered_json j;
  j["genre"] = p.genre.token();
  j["season"] = p.season;
  j["world"] = p.world;
  j["protagonist"] = p.protagonist;
  j["definition"] = p.definition;
  if (!p.examples.empty()) j["examples"] = p.examples;
  return json(j);
}

GenreProfile profile_from_json(const json& j) {
  GenreProfile p{Genre::from_token(require_string(j, "genre")), optional_string(j, "season"),
                 optional_string(j, "world"), optional_string(j, "protagonist"),
                 require_string(j, "definition"), string_list(j, "examples")};
  return p;
}

namespace {

ordered_json ordered_pattern_json(const GenrePattern& p) {
  ordered_json j;
  j["id"] = p.id;
  j["genre"] = p.genre.token();
  j["title"] = p.title;
  j["provenance"] = std::string(to_token(p.provenance));
  j["source_titles"] = p.source_titles;
  ordered_json stages = ordered_json::array();
  for (const Stage& s : p.stages) {
    ordered_json st;
    st["index"] = s.index;
    st["name"] = s.name;
    st["description"] = s.description;
    stages.push_back(std::move(st));
  }
  j["stages"] = std::move(stages);
  return j;
}

}  // namespace

json to_json(const GenrePattern& p) { return json(ordered_pattern_json(p)); }

GenrePattern pattern_from_json(const json& j) {
  GenrePattern p;
  p.id = require_string(j, "id");
  p.genre = Genre::from_token(require_string(j, "genre"));
  p.title = optional_string(j, "title");
  p.provenance = j.contains("provenance") ? provenance_from_token(require_string(j, "provenance"))
                                          : Provenance::imported;
  p.source_titles = string_list(j, "source_titles");
  const json& stages = require(j, "stages");
  if (!stages.is_array()) throw Error(ErrorCode::validation, "field 'stages' must be a list");
  for (const auto& s : stages) {
    const json& idx = require(s, "index");
    if (!idx.is_number_integer()) throw Error(ErrorCode::validation, "stage index must be an integer");
    p.stages.push_back({idx.get<int>(), require_string(s, "name"), require_string(s, "description")});
  }
  return p;
}

std::string serialize_pattern(const GenrePattern& p) {
  try {
    return ordered_pattern_json(p).dump(2) + "\n";
  } catch (const json::type_error& e) {
    throw Error(ErrorCode::invalid_pattern, std::string("pattern is not serializable: ") + e.what());
  }
}

GenrePattern deserialize_pattern(std::string_view bytes) {
  return pattern_from_json(parse_json(bytes, "pattern document"));
}

// ---- registry ---------------------------------------------------------------

namespace {

constexpr std::string_view kBuiltinOrder[] = {"comedy", "romance", "tragedy", "satire", "mystery", "heros-journey"};

}  // namespace

PatternRegistry::PatternRegistry() {
  for (std::string_view id : kBuiltinOrder) {
    const std::string path = "patterns/" + std::string(id) + ".json";
    GenrePattern p = deserialize_pattern(resource_or_throw(path));
    // whitespace normalization is part of what "canonical" means here
    for (Stage& s : p.stages) {
      s.name = text::normalize_whitespace(s.name);
      s.description = text::normalize_whitespace(s.description);
    }
    if (p.provenance != Provenance::builtin || p.id != id || !validate_pattern(p).empty()) {
      throw Error(ErrorCode::invalid_pattern, "bundled pattern " + path + " is malformed");
    }
    builtins_.push_back(std::move(p));
  }

  for (const auto& j : parse_json(resource_or_throw("profiles.json"), "profiles.json")) {
    fundamentals_.push_back(profile_from_json(j));
  }
  for (const auto& j : parse_json(resource_or_throw("imdb_genres.json"), "imdb_genres.json")) {
    imdb_.push_back(GenreProfile{Genre::custom(j.at("name").get<std::string>()), {}, {}, {},
                                 j.at("definition").get<std::string>(), string_list(j, "examples")});
  }
}

const GenrePattern* PatternRegistry::find_builtin(std::string_view id) const noexcept {
  for (const auto& p : builtins_) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

const GenreProfile& PatternRegistry::profile_of(const Genre& genre) const {
  if (auto f = genre.fundamental()) {
    for (const auto& p : fundamentals_) {
      if (p.genre == genre) return p;
    }
  }
  const std::string key = text::to_lower(genre.custom_name());
  if (auto it = custom_.find(key); it != custom_.end()) return it->second;
  for (const auto& p : imdb_) {
    if (text::to_lower(p.genre.custom_name()) == key) return p;
  }
  throw Error(ErrorCode::unknown_genre, "no profile stored for genre '" + genre.display_name() + "'",
              json{{"genre", genre.token()}});
}

void PatternRegistry::add_custom_profile(GenreProfile profile) {
  if (profile.genre.is_fundamental()) {
    throw Error(ErrorCode::validation, "fundamental genre profiles are fixed");
  }
  if (text::trim(profile.definition).empty()) {
    throw Error(ErrorCode::validation, "profile definition must not be empty");
  }
  const std::string key = text::to_lower(profile.genre.custom_name());
  if (!custom_.emplace(key, std::move(profile)).second) {
    throw Error(ErrorCode::validation, "custom genre '" + key + "' already exists");
  }
}

const PatternRegistry& default_registry() {
  static const PatternRegistry registry;
  return registry;
}

std::vector<GenrePattern> builtin_patterns() { return default_registry().builtin_patterns(); }
GenreProfile profile_of(const Genre& genre) { return default_registry().profile_of(genre); }
std::vector<GenreProfile> imdb_seed_profiles() { return default_registry().imdb_seed_profiles(); }

}  // namespace genreloom
