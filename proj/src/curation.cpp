#include "genreloom/curation.hpp"

#include <algorithm>
#include <cctype>
#include <future>
#include <regex>
#include <sstream>

#include "genreloom/error.hpp"
#include "genreloom/prompt.hpp"
#include "genreloom/text.hpp"

namespace genreloom {

using nlohmann::json;

// ---- outlines -----------------------------------------------------------------

const std::set<std::string>& FeatureVocabulary::roles() {
  static const std::set<std::string> s = {"protagonist", "antagonist", "mentor", "ally"};
  return s;
}

const std::set<std::string>& FeatureVocabulary::moves() {
  static const std::set<std::string> s = {"disruption", "quest",    "confrontation",
                                          "revelation", "reversal", "resolution"};
  return s;
}

const std::set<std::string>& FeatureVocabulary::settings() {
  static const std::set<std::string> s = {"ordinary-world", "special-world"};
  return s;
}

bool FeatureVocabulary::admits(const Term& f) {
  if (f.is_constant()) {
    return roles().count(f.symbol()) || moves().count(f.symbol()) || settings().count(f.symbol());
  }
  if (!f.is_compound() || !moves().count(f.symbol())) return false;
  return std::all_of(f.args().begin(), f.args().end(), [](const Term& a) {
    return a.is_constant() && (roles().count(a.symbol()) || settings().count(a.symbol()));
  });
}

namespace {

std::string strip_markup(std::string_view line) {
  std::string s = text::trim(line);
  while (!s.empty() && (s.front() == '#' || s.front() == '*' || s.front() == '_' || s.front() == '>')) s.erase(0, 1);
  s = text::trim(s);
  if (s.size() > 1 && (s.front() == '-' || s.front() == '+') && s[1] == ' ') s = text::trim(std::string_view(s).substr(1));
  // "**STAGE 1:** label" keeps bold markers after the key
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.compare(i, 2, "**") == 0) {
      ++i;
      continue;
    }
    out += s[i];
  }
  return text::trim(out);
}

bool key_prefix(const std::string& line, std::string_view key, std::string& rest) {
  if (!text::starts_with_ci(line, key)) return false;
  std::string_view r = std::string_view(line).substr(key.size());
  if (!r.empty() && std::isalpha(static_cast<unsigned char>(r.front()))) return false;
  rest = text::trim(r);
  return true;
}

std::vector<std::string> split_features(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if ((c == ';' || (c == ',' && depth == 0))) {
      out.push_back(text::trim(cur));
      cur.clear();
      continue;
    }
    cur += c;
  }
  out.push_back(text::trim(cur));
  std::erase_if(out, [](const std::string& f) { return f.empty(); });
  return out;
}

}  // namespace

OutlineParse parse_outline_response(std::string_view input, std::string title, std::optional<int> year) {
  OutlineParse result;
  result.outline.title = std::move(title);
  result.outline.year = year;
  auto& v = result.violations;

  struct Pending {
    int number = 0;
    OutlineStage stage;
    bool has_description = false;
    bool has_features = false;
  };
  std::vector<Pending> stages;
  enum class Field { none, description } field = Field::none;

  static const std::regex stage_re(R"(^stage\s*(\d+)\s*[:.)\-]?\s*(.*)$)", std::regex::icase);

  for (const std::string& raw : text::split_lines(input)) {
    const std::string line = strip_markup(raw);
    if (line.empty()) {
      field = Field::none;
      continue;
    }
    std::smatch m;
    std::string rest;
    if (std::regex_match(line, m, stage_re)) {
      Pending p;
      p.number = std::stoi(m[1].str());
      std::string label = text::trim(m[2].str());
      // "STAGE 1 - label" leaves a dash behind
      while (!label.empty() && (label.front() == '-' || label.front() == ':')) label = text::trim(label.substr(1));
      p.stage.label = label;
      stages.push_back(std::move(p));
      field = Field::none;
    } else if (key_prefix(line, "description", rest)) {
      if (stages.empty()) {
        v.push_back("DESCRIPTION line before the first STAGE line");
        continue;
      }
      if (!rest.empty() && rest.front() == ':') rest = text::trim(std::string_view(rest).substr(1));
      stages.back().stage.description = rest;
      stages.back().has_description = true;
      field = Field::description;
    } else if (key_prefix(line, "features", rest)) {
      if (stages.empty()) {
        v.push_back("FEATURES line before the first STAGE line");
        continue;
      }
      if (!rest.empty() && rest.front() == ':') rest = text::trim(std::string_view(rest).substr(1));
      auto& p = stages.back();
      p.has_features = true;
      const std::string at = "stage " + std::to_string(p.number);
      for (const std::string& f : split_features(text::to_lower(rest))) {
        try {
          Term t = parse_term(f);
          if (!FeatureVocabulary::admits(t)) {
            v.push_back(at + ": feature '" + f + "' is outside the vocabulary");
            continue;
          }
          p.stage.features.push_back(std::move(t));
        } catch (const Error&) {
          v.push_back(at + ": feature '" + f + "' is not a term");
        }
      }
      field = Field::none;
    } else if (field == Field::description) {
      auto& d = stages.back().stage.description;
      d += (d.empty() ? "" : " ") + line;
    }
    // other lines are commentary
  }

  if (stages.empty()) {
    v.push_back("no STAGE lines found");
    return result;
  }
  if (stages.size() < 5 || stages.size() > 12) {
    v.push_back("outline has " + std::to_string(stages.size()) + " stages; 5 to 12 are required");
  }
  for (std::size_t i = 0; i < stages.size(); ++i) {
    auto& p = stages[i];
    const std::string at = "stage " + std::to_string(p.number);
    if (p.number != static_cast<int>(i + 1)) {
      v.push_back("stage numbered " + std::to_string(p.number) + " where " + std::to_string(i + 1) + " was expected");
    }
    if (p.stage.label.empty()) v.push_back(at + ": empty label");
    if (!p.has_description || text::trim(p.stage.description).empty()) {
      v.push_back(at + ": missing description");
    } else if (text::sentences(p.stage.description).size() != 1) {
      v.push_back(at + ": description must be one sentence");
    }
    if (!p.has_features) {
      v.push_back(at + ": missing FEATURES line");
    } else if (p.stage.features.empty() || p.stage.features.size() > 4) {
      v.push_back(at + ": " + std::to_string(p.stage.features.size()) + " usable features; 1 to 4 are required");
    }
    result.outline.stages.push_back(std::move(p.stage));
  }
  return result;
}

// ---- pattern listings ------------------------------------------------------------

namespace {

std::string strip_wrapping(std::string s, char c) {
  while (s.size() >= 2 && s.front() == c && s.back() == c) s = text::trim(std::string_view(s).substr(1, s.size() - 2));
  return s;
}

ListedStage split_stage(std::string content) {
  content = strip_wrapping(text::trim(content), '*');
  ListedStage st;
  if (content.compare(0, 2, "**") == 0) {
    const auto end = content.find("**", 2);
    if (end != std::string::npos) {
      st.name = text::trim(std::string_view(content).substr(2, end - 2));
      std::string rest = text::trim(std::string_view(content).substr(end + 2));
      while (!rest.empty() && (rest.front() == '.' || rest.front() == ':' || rest.front() == '-')) {
        rest = text::trim(std::string_view(rest).substr(1));
      }
      for (std::string_view dash : {"\xE2\x80\x93", "\xE2\x80\x94"}) {
        if (rest.compare(0, dash.size(), dash) == 0) rest = text::trim(std::string_view(rest).substr(dash.size()));
      }
      st.description = rest;
      while (!st.name.empty() && (st.name.back() == '.' || st.name.back() == ':')) st.name.pop_back();
      return st;
    }
  }
  std::size_t best = std::string::npos;
  std::size_t len = 0;
  for (std::string_view sep : {". ", ": ", " - ", " \xE2\x80\x93 ", " \xE2\x80\x94 "}) {
    const auto p = content.find(sep);
    if (p != std::string::npos && p < best) {
      best = p;
      len = sep.size();
    }
  }
  if (best == std::string::npos) {
    st.name = content;
    while (!st.name.empty() && st.name.back() == '.') st.name.pop_back();
    return st;
  }
  st.name = strip_wrapping(text::trim(std::string_view(content).substr(0, best)), '*');
  st.name = strip_wrapping(st.name, '_');
  st.description = text::trim(std::string_view(content).substr(best + len));
  return st;
}

}  // namespace

std::vector<ListedStage> parse_pattern_listing(std::string_view input) {
  static const std::regex item_re(R"(^\s*(?:\*\*)?(\d+)[.)](?:\*\*)?\s+(.*)$)");
  std::vector<std::pair<int, std::string>> items;
  for (const std::string& raw : text::split_lines(input)) {
    const std::string line = text::trim(raw);
    std::smatch m;
    if (std::regex_match(line, m, item_re)) {
      items.emplace_back(std::stoi(m[1].str()), m[2].str());
    } else if (!line.empty() && !items.empty() && (raw.front() == ' ' || raw.front() == '\t')) {
      items.back().second += " " + line;
    }
  }
  if (items.empty()) throw Error(ErrorCode::parse_failure, "no numbered stages found");
  std::vector<ListedStage> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].first != static_cast<int>(i + 1)) {
      throw Error(ErrorCode::parse_failure, "stage numbered " + std::to_string(items[i].first) + " where " +
                                                std::to_string(i + 1) + " was expected");
    }
    ListedStage st = split_stage(items[i].second);
    st.name = text::normalize_whitespace(st.name);
    st.description = text::normalize_whitespace(st.description);
    out.push_back(std::move(st));
  }
  return out;
}

namespace {

bool is_punct_byte(unsigned char c) { return c < 0x80 && !std::isalnum(c) && c != '-'; }

// Strips ASCII punctuation, curly quotes and a trailing possessive.
std::string bare_word(std::string_view w) {
  auto strip_curly = [](std::string_view& s, bool front) {
    for (std::string_view q : {"\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x98", "\xE2\x80\x99"}) {
      if (s.size() >= q.size() &&
          (front ? s.substr(0, q.size()) == q : s.substr(s.size() - q.size()) == q)) {
        s = front ? s.substr(q.size()) : s.substr(0, s.size() - q.size());
        return true;
      }
    }
    return false;
  };
  bool changed = true;
  while (changed && !w.empty()) {
    changed = false;
    if (is_punct_byte(static_cast<unsigned char>(w.front()))) {
      w.remove_prefix(1);
      changed = true;
    } else if (strip_curly(w, true)) {
      changed = true;
    }
  }
  changed = true;
  while (changed && !w.empty()) {
    changed = false;
    if (is_punct_byte(static_cast<unsigned char>(w.back()))) {
      w.remove_suffix(1);
      changed = true;
    } else if (w.size() > 4 && w.substr(w.size() - 4) == "\xE2\x80\x99s") {
      w.remove_suffix(4);
      changed = true;
    } else if (w.size() > 2 && w.substr(w.size() - 2) == "'s") {
      w.remove_suffix(2);
      changed = true;
    } else if (strip_curly(w, false)) {
      changed = true;
    }
  }
  return std::string(w);
}

std::vector<std::string> words_of(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(bare_word(s.substr(i, j - i)));
    i = j;
  }
  return out;
}

void harvest_from(std::string_view prose, std::set<std::string>& names) {
  static const std::set<std::string> ignore = {"I"};
  for (const std::string& sentence : text::sentences(prose)) {
    const auto words = words_of(sentence);
    for (std::size_t k = 1; k < words.size(); ++k) {
      const std::string& w = words[k];
      if (w.size() < 2 || !std::isupper(static_cast<unsigned char>(w.front())) || ignore.count(w)) continue;
      names.insert(w);
    }
  }
}

}  // namespace

std::set<std::string> harvest_proper_names(std::span<const StoryOutline> outlines) {
  std::set<std::string> names;
  for (const auto& o : outlines) {
    for (const auto& s : o.stages) harvest_from(s.description, names);
  }
  return names;
}

std::set<std::string> harvest_proper_names(std::span<const std::string> prose) {
  std::set<std::string> names;
  for (const auto& p : prose) harvest_from(p, names);
  return names;
}

std::vector<std::string> check_pattern_prose(std::span<const ListedStage> stages, std::optional<std::size_t> count,
                                             const std::set<std::string>& forbidden, const ProseLimits& limits) {
  std::vector<std::string> v;
  if (count && stages.size() != *count) {
    v.push_back("the pattern has " + std::to_string(stages.size()) + " stages; exactly " + std::to_string(*count) +
                " are required");
  }
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto& s = stages[i];
    const std::string at = "stage " + std::to_string(i + 1);
    const std::size_t nw = text::word_count(s.name);
    if (nw == 0) v.push_back(at + ": empty name");
    if (nw > limits.max_name_words) {
      v.push_back(at + ": name has " + std::to_string(nw) + " words; at most " + std::to_string(limits.max_name_words) +
                  " are allowed");
    }
    const std::size_t ns = text::sentences(s.description).size();
    if (ns < limits.min_sentences || ns > limits.max_sentences) {
      v.push_back(at + ": description has " + std::to_string(ns) + " sentences; " +
                  std::to_string(limits.min_sentences) + " to " + std::to_string(limits.max_sentences) +
                  " are required");
    }
    std::set<std::string> hits;
    for (const auto* field : {&s.name, &s.description}) {
      for (const auto& w : words_of(*field)) {
        if (forbidden.count(w)) hits.insert(w);
      }
    }
    for (const auto& h : hits) v.push_back(at + ": mentions the specific name '" + h + "'");
  }
  return v;
}

// ---- orchestration ------------------------------------------------------------

std::string_view to_token(ExtractionMode m) {
  return m == ExtractionMode::deterministic ? "deterministic" : "llm_assisted";
}

ExtractionMode extraction_mode_from_token(std::string_view token) {
  const std::string t = text::to_lower(token);
  if (t == "deterministic") return ExtractionMode::deterministic;
  if (t == "llm_assisted" || t == "llm-assisted") return ExtractionMode::llm_assisted;
  throw Error(ErrorCode::validation, "unknown extraction mode '" + std::string(token) + "'");
}

namespace {

std::string count_word(std::size_t n) {
  static const char* words[] = {"zero",    "one",     "two",       "three",    "four",     "five",    "six",
                                "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
                                "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen", "twenty"};
  return n <= 20 ? words[n] : std::to_string(n);
}

std::string bullet_list(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& i : items) out += (out.empty() ? "- " : "\n- ") + i;
  return out;
}

std::optional<int> year_of(std::string_view year_text) {
  static const std::regex year_re(R"(\d{3,4})");
  std::cmatch m;
  if (std::regex_search(year_text.begin(), year_text.end(), m, year_re)) return std::stoi(m.str());
  return std::nullopt;
}

ChatTranscript transcript(const std::string& model, double temperature, std::vector<ChatMessage> messages) {
  return ChatTranscript{model, temperature, std::move(messages)};
}

}  // namespace

std::string render_exemplar_request(std::span<const GenreProfile> profiles) {
  if (profiles.empty()) throw Error(ErrorCode::empty_input, "no genres to ask about");
  std::string defs;
  bool romance = false;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const auto& p = profiles[i];
    if (p.genre == Genre(FundamentalGenre::romance)) romance = true;
    if (!defs.empty()) defs += "\n";
    defs += std::to_string(i + 1) + ". **" + p.genre.display_name() + "**: " + p.definition;
  }
  std::string notes;
  if (romance) {
    notes =
        " Note that the genre of \xE2\x80\x9Cromance\xE2\x80\x9D refers here to epic plots, and not to the modern "
        "notion of \xE2\x80\x9Clove story\xE2\x80\x9D, and thus all your choices of the romance genre must concern "
        "epic action.";
  }
  return render(prompt_template("exemplar_request"),
                {{"definitions", defs}, {"genre_count", count_word(profiles.size())}, {"genre_notes", notes}});
}

std::string describe_profile(const GenreProfile& p) {
  std::string out;
  if (!p.season.empty()) out += "Season: " + p.season + ". ";
  if (!p.world.empty()) out += "World: " + p.world + ". ";
  if (!p.protagonist.empty()) out += "Protagonist: " + p.protagonist + ". ";
  out += p.definition;
  return text::trim(out);
}

Curator::Curator(Gateway& gateway, const PatternRegistry& registry, CurationOptions options)
    : gateway_(gateway), registry_(registry), options_(std::move(options)) {}

ExemplarSet Curator::request_exemplars(std::span<const GenreProfile> profiles) {
  std::vector<Genre> expected;
  for (const auto& p : profiles) expected.push_back(p.genre);

  std::vector<ChatMessage> messages{{Role::user, render_exemplar_request(profiles)}};
  const ChatTranscript first = transcript(options_.exemplar_model, options_.exemplar_temperature, messages);
  const json context = {{"operation", "exemplars"}};

  std::vector<std::string> problems;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const ChatTranscript t = transcript(options_.exemplar_model, options_.exemplar_temperature, messages);
    const std::string reply = gateway_.complete(t, context);
    problems.clear();
    try {
      ExemplarSet set = parse_exemplars(reply);
      problems = validate_exemplar_set(set, expected);
      if (problems.empty()) {
        set.prompt_fingerprint = fingerprint(first);
        return set;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::parse_failure) throw;
      for (const auto& d : e.details()) {
        problems.push_back("line " + std::to_string(d.at("line").get<int>()) + ": " + d.at("message").get<std::string>());
      }
    }
    messages.push_back({Role::assistant, reply});
    messages.push_back({Role::user, render(prompt_template("exemplar_correction"),
                                           {{"violations", bullet_list(problems)},
                                            {"genre_count", count_word(profiles.size())}})});
  }
  throw Error(ErrorCode::parse_failure, "exemplar answer unusable after a corrective retry", json(problems));
}

StoryOutline Curator::outline_story(const std::string& title, const std::string& year_text, const Genre& genre) {
  std::vector<ChatMessage> messages{
      {Role::user, render(prompt_template("outline_story"),
                          {{"title", title}, {"year_text", year_text}, {"genre_name", genre.display_name()}})}};
  const json context = {{"operation", "outline"}, {"title", title}};
  std::vector<std::string> problems;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string reply =
        gateway_.complete(transcript(options_.model, options_.outline_temperature, messages), context);
    OutlineParse parsed = parse_outline_response(reply, title, year_of(year_text));
    if (parsed.violations.empty()) return std::move(parsed.outline);
    problems = std::move(parsed.violations);
    messages.push_back({Role::assistant, reply});
    messages.push_back({Role::user, render(prompt_template("outline_correction"), {{"violations", bullet_list(problems)}})});
  }
  throw Error(ErrorCode::parse_failure, "outline of '" + title + "' unusable after a corrective retry", json(problems));
}

GenrePattern Curator::extract_pattern(std::span<const Exemplar> exemplars, ExtractionMode mode) {
  if (exemplars.size() < 2) throw Error(ErrorCode::empty_input, "at least two exemplars are needed");
  const Genre genre = exemplars.front().genre;
  for (const auto& e : exemplars) {
    if (!(e.genre == genre)) throw Error(ErrorCode::validation, "exemplars must share one genre");
  }

  if (mode == ExtractionMode::deterministic) {
    std::vector<StoryOutline> outlines(exemplars.size());
    const std::size_t batch = std::max<std::size_t>(1, options_.outline_parallelism);
    for (std::size_t start = 0; start < exemplars.size(); start += batch) {
      std::vector<std::future<StoryOutline>> running;
      const std::size_t end = std::min(exemplars.size(), start + batch);
      for (std::size_t i = start; i < end; ++i) {
        running.push_back(std::async(std::launch::async, [this, &exemplars, &genre, i] {
          return outline_story(exemplars[i].title, exemplars[i].year_text, genre);
        }));
      }
      for (std::size_t i = start; i < end; ++i) outlines[i] = running[i - start].get();
    }
    return extract_from_outlines(outlines, genre);
  }

  std::vector<std::string> titles;
  std::vector<std::string> justifications;
  std::vector<std::string> sources;
  for (const auto& e : exemplars) {
    std::string line = "- \"" + e.title + "\" (" + e.year_text + ")";
    if (!e.author.empty()) line += " by " + e.author;
    titles.push_back(line);
    justifications.push_back(e.justification);
    sources.push_back(e.title);
  }
  std::string title_block;
  for (const auto& t : titles) title_block += (title_block.empty() ? "" : "\n") + t;
  std::vector<ChatMessage> messages{
      {Role::user, render(prompt_template("extract_direct"), {{"genre_name", genre.display_name()},
                                                              {"titles", title_block},
                                                              {"genre_profile", describe_profile(registry_.profile_of(genre))}})}};
  std::set<std::string> forbidden = harvest_proper_names(justifications);
  for (const auto& e : exemplars) {
    std::istringstream words(e.author);
    for (std::string w; words >> w;)
      if (!w.empty() && std::isupper(static_cast<unsigned char>(w[0])) && w.back() != '.') forbidden.insert(w);
  }
  auto stages = ask_for_listing(std::move(messages), std::nullopt, forbidden,
                                {{"operation", "extract"}, {"mode", "llm_assisted"}, {"genre", genre.token()}});
  return finish(genre, std::move(stages), std::move(sources));
}

GenrePattern Curator::extract_from_outlines(std::span<const StoryOutline> outlines, const Genre& genre) {
  PatternSkeleton sk = generalize(outlines, options_.generalize);
  std::string block;
  for (const auto& st : sk.stages) {
    if (!block.empty()) block += "\n\n";
    block += "Stage " + std::to_string(st.index) + ": " + st.label + "\nFeatures: ";
    std::string feats;
    for (const auto& f : st.features) feats += (feats.empty() ? "" : "; ") + to_string(f);
    block += feats.empty() ? "none" : feats;
    for (std::size_t k = 0; k < st.contributors.size(); ++k) {
      block += "\n- " + st.source_descriptions[k] + " (\"" + outlines[st.contributors[k]].title + "\")";
    }
  }
  std::vector<ChatMessage> messages{
      {Role::user, render(prompt_template("abstract_stages"),
                          {{"stage_count", std::to_string(sk.stages.size())},
                           {"genre_name", genre.display_name()},
                           {"stages", block},
                           {"genre_profile", describe_profile(registry_.profile_of(genre))}})}};
  auto stages = ask_for_listing(std::move(messages), sk.stages.size(), harvest_proper_names(outlines),
                                {{"operation", "extract"}, {"mode", "deterministic"}, {"genre", genre.token()}});
  return finish(genre, std::move(stages), sk.source_titles);
}

std::vector<ListedStage> Curator::ask_for_listing(std::vector<ChatMessage> messages, std::optional<std::size_t> count,
                                                  const std::set<std::string>& forbidden, const json& context) {
  std::string requirements = count ? "Exactly " + std::to_string(*count) + " stages" : std::string("5 to 12 stages");
  requirements +=
      ", names of at most 6 words, descriptions of 1 to 3 sentences, and no character, place or title names.";
  std::vector<std::string> problems;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string reply =
        gateway_.complete(transcript(options_.model, options_.abstraction_temperature, messages), context);
    problems.clear();
    try {
      auto stages = parse_pattern_listing(reply);
      problems = check_pattern_prose(stages, count, forbidden);
      if (!count && (stages.size() < 5 || stages.size() > 12)) {
        problems.push_back("the pattern has " + std::to_string(stages.size()) + " stages; 5 to 12 are required");
      }
      if (problems.empty()) return stages;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::parse_failure) throw;
      problems.push_back(e.what());
    }
    messages.push_back({Role::assistant, reply});
    messages.push_back({Role::user, render(prompt_template("pattern_correction"),
                                           {{"violations", bullet_list(problems)}, {"requirements", requirements}})});
  }
  throw Error(ErrorCode::parse_failure, "pattern answer unusable after a corrective retry", json(problems));
}

GenrePattern Curator::finish(const Genre& genre, std::vector<ListedStage> stages, std::vector<std::string> sources) const {
  GenrePattern p;
  p.genre = genre;
  p.title = genre.display_name() + " (extracted)";
  p.provenance = Provenance::extracted;
  p.source_titles = std::move(sources);
  for (std::size_t i = 0; i < stages.size(); ++i) {
    p.stages.push_back({static_cast<int>(i + 1), std::move(stages[i].name), std::move(stages[i].description)});
  }
  if (auto v = validate_pattern(p); !v.empty()) {
    throw Error(ErrorCode::invalid_pattern, "extracted pattern is invalid: " + v.front().field + " " + v.front().rule);
  }
  return p;
}

}  // namespace genreloom
