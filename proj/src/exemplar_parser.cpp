#include <algorithm>
#include <cctype>
#include <map>

#include "genreloom/curation.hpp"
#include "genreloom/error.hpp"
#include "genreloom/text.hpp"

namespace genreloom {

using nlohmann::json;

namespace {

struct QuotePair {
  std::string_view open;
  std::vector<std::string_view> close;
};

// TeX quotes come first so "``" is not read as a stray backtick.
const std::vector<QuotePair>& quote_pairs() {
  static const std::vector<QuotePair> pairs = {
      {"``", {"''", "\"", "\xE2\x80\x9D"}},
      {"\xE2\x80\x9C", {"\xE2\x80\x9D", "\"", "''"}},  // “ ”
      {"\xE2\x80\x9E", {"\xE2\x80\x9D", "\xE2\x80\x9C", "\""}},  // „
      {"\xC2\xAB", {"\xC2\xBB"}},  // « »
      {"\"", {"\"", "\xE2\x80\x9D"}},
  };
  return pairs;
}

// Dash-like separators between the year and the justification.
const std::vector<std::string_view>& separators() {
  static const std::vector<std::string_view> seps = {"\xE2\x80\x94", "\xE2\x80\x93", "-", ":"};
  return seps;
}

std::string strip_emphasis(std::string_view s, std::size_t* stripped = nullptr) {
  std::size_t b = 0;
  while (b < s.size() && (s[b] == '*' || s[b] == '_')) ++b;
  if (stripped) *stripped = b;
  return text::trim(s.substr(b));
}

std::string strip_trailing_emphasis(std::string s, std::size_t count) {
  while (count > 0 && !s.empty() && (s.back() == '*' || s.back() == '_')) {
    s.pop_back();
    --count;
  }
  return text::trim(s);
}

struct ListMarker {
  enum class Kind { none, number, bullet, heading } kind = Kind::none;
  std::string rest;
};

ListMarker strip_marker(const std::string& line) {
  std::size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')') &&
      (i + 1 == line.size() || line[i + 1] == ' ' || line[i + 1] == '\t')) {
    return {ListMarker::Kind::number, text::trim(std::string_view(line).substr(i + 1))};
  }
  if (!line.empty() && line[0] == '#') {
    std::size_t k = 0;
    while (k < line.size() && line[k] == '#') ++k;
    return {ListMarker::Kind::heading, text::trim(std::string_view(line).substr(k))};
  }
  for (std::string_view b : {std::string_view("-"), std::string_view("*"), std::string_view("+"),
                             std::string_view("\xE2\x80\xA2"), std::string_view("\xE2\x80\x93"),
                             std::string_view("\xE2\x80\x94")}) {
    if (line.size() > b.size() && line.compare(0, b.size(), b) == 0 &&
        (line[b.size()] == ' ' || line[b.size()] == '\t')) {
      return {ListMarker::Kind::bullet, text::trim(std::string_view(line).substr(b.size()))};
    }
  }
  return {ListMarker::Kind::none, line};
}

struct QuotedTitle {
  std::string title;
  std::size_t end;  // offset just past the closing quote
};

std::optional<QuotedTitle> quoted_title(std::string_view s) {
  for (const auto& q : quote_pairs()) {
    if (s.substr(0, q.open.size()) != q.open) continue;
    std::size_t best = std::string_view::npos;
    std::size_t best_len = 0;
    for (auto c : q.close) {
      const std::size_t p = s.find(c, q.open.size());
      if (p != std::string_view::npos && p < best) {
        best = p;
        best_len = c.size();
      }
    }
    if (best == std::string_view::npos) return std::nullopt;
    std::string title = text::trim(s.substr(q.open.size(), best - q.open.size()));
    // "Title," with the comma inside the quotes
    while (!title.empty() && (title.back() == ',' || title.back() == '*' || title.back() == '_')) title.pop_back();
    return QuotedTitle{text::trim(title), best + best_len};
  }
  return std::nullopt;
}

bool looks_like_year(std::string_view s) {
  if (std::any_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; })) {
    return true;
  }
  const std::string l = text::to_lower(s);
  return l.find("century") != std::string::npos || l.find("circa") != std::string::npos ||
         l.find("unknown") != std::string::npos;
}

struct EntryParse {
  std::optional<Exemplar> exemplar;
  std::string problem;
};

EntryParse parse_entry(std::string_view content, const Genre& genre) {
  std::size_t lead = 0;
  std::string body = strip_emphasis(content, &lead);
  body = strip_trailing_emphasis(body, lead);
  auto qt = quoted_title(body);
  if (!qt) return {std::nullopt, "entry does not start with a quoted title"};

  Exemplar ex;
  ex.genre = genre;
  ex.title = qt->title;
  if (ex.title.empty()) return {std::nullopt, "empty title"};

  std::string_view rest = std::string_view(body).substr(qt->end);
  // locate the parenthesized year group
  std::size_t open = 0;
  std::size_t close = std::string_view::npos;
  while ((open = rest.find('(', open)) != std::string_view::npos) {
    std::size_t depth = 0;
    std::size_t k = open;
    for (; k < rest.size(); ++k) {
      if (rest[k] == '(') ++depth;
      if (rest[k] == ')' && --depth == 0) break;
    }
    if (k >= rest.size()) break;
    if (looks_like_year(rest.substr(open + 1, k - open - 1))) {
      close = k;
      break;
    }
    open = k + 1;
  }
  if (close == std::string_view::npos) return {std::nullopt, "no (year) after title \"" + ex.title + "\""};

  ex.year_text = text::normalize_whitespace(rest.substr(open + 1, close - open - 1));
  std::string between = strip_emphasis(text::trim(rest.substr(0, open)));
  while (!between.empty() && (between.back() == ',' || between.back() == '*')) between.pop_back();
  if (auto by = text::to_lower(between).find("by "); by != std::string::npos) {
    ex.author = text::trim(std::string_view(between).substr(by + 3));
  }

  std::string_view after = rest.substr(close + 1);
  std::string tail = strip_emphasis(text::trim(after));
  for (auto sep : separators()) {
    if (tail.compare(0, sep.size(), sep) == 0) {
      tail = text::trim(std::string_view(tail).substr(sep.size()));
      break;
    }
  }
  ex.justification = tail;
  return {std::move(ex), {}};
}

std::optional<Genre> header_genre(const ListMarker& m) {
  std::string s = m.rest;
  s.erase(std::remove(s.begin(), s.end(), '*'), s.end());
  s = text::trim(s);
  while (!s.empty() && (s.back() == ':' || s.back() == '.')) s.pop_back();
  s = text::trim(s);
  if (s.empty() || text::word_count(s) > 4) return std::nullopt;
  if (m.kind == ListMarker::Kind::none && m.rest.find(':') == std::string::npos &&
      m.rest.find("**") == std::string::npos) {
    return std::nullopt;
  }
  // "Genre: Mystery" style headers
  if (text::starts_with_ci(s, "genre")) {
    const auto colon = s.find_first_of(":-");
    if (colon != std::string::npos) s = text::trim(std::string_view(s).substr(colon + 1));
  }
  if (s.empty()) return std::nullopt;
  return Genre::parse(s);
}

std::string format_diagnostics(const json& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += "; ";
    out += "line " + std::to_string(d.at("line").get<int>()) + ": " + d.at("message").get<std::string>();
  }
  return out;
}

}  // namespace

std::vector<Exemplar> ExemplarSet::of_genre(const Genre& g) const {
  std::vector<Exemplar> out;
  std::copy_if(exemplars.begin(), exemplars.end(), std::back_inserter(out), [&](const auto& e) { return e.genre == g; });
  return out;
}

json to_json(const ExemplarSet& set) {
  json list = json::array();
  for (const auto& e : set.exemplars) {
    nlohmann::ordered_json j;
    j["genre"] = e.genre.token();
    j["title"] = e.title;
    j["author"] = e.author;
    j["year_text"] = e.year_text;
    j["justification"] = e.justification;
    list.push_back(json(j));
  }
  nlohmann::ordered_json out;
  out["prompt_fingerprint"] = set.prompt_fingerprint;
  out["exemplars"] = list;
  return json(out);
}

ExemplarSet exemplar_set_from_json(const json& j) {
  if (!j.is_object() || !j.contains("exemplars") || !j.at("exemplars").is_array()) {
    throw Error(ErrorCode::validation, "exemplar set needs an 'exemplars' list");
  }
  ExemplarSet set;
  set.prompt_fingerprint = j.value("prompt_fingerprint", std::string{});
  for (const auto& e : j.at("exemplars")) {
    set.exemplars.push_back({Genre::parse(e.at("genre").get<std::string>()), e.value("title", std::string{}),
                             e.value("author", std::string{}), e.value("year_text", std::string{}),
                             e.value("justification", std::string{})});
  }
  return set;
}

ExemplarSet parse_exemplars(std::string_view input) {
  const auto lines = text::split_lines(input);
  json diags = json::array();
  ExemplarSet set;
  std::optional<Genre> current;
  bool last_was_entry = false;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& raw = lines[i];
    const int lineno = static_cast<int>(i + 1);
    const std::string line = text::trim(raw);
    if (line.empty()) {
      last_was_entry = false;
      continue;
    }
    const ListMarker m = strip_marker(line);
    const std::string content = strip_emphasis(m.rest);
    const bool quoted = quoted_title(content).has_value();

    if (quoted && m.kind != ListMarker::Kind::heading) {
      if (!current) {
        diags.push_back({{"line", lineno}, {"message", "entry appears before any genre heading"}});
        last_was_entry = false;
        continue;
      }
      EntryParse e = parse_entry(m.rest, *current);
      if (!e.exemplar) {
        diags.push_back({{"line", lineno}, {"message", e.problem}});
        last_was_entry = false;
        continue;
      }
      set.exemplars.push_back(std::move(*e.exemplar));
      last_was_entry = true;
      continue;
    }
    if (m.kind != ListMarker::Kind::bullet) {
      if (auto g = header_genre(m)) {
        current = *g;
        last_was_entry = false;
        continue;
      }
    }
    // wrapped justification: an indented, unmarked line right after an entry
    const bool indented = !raw.empty() && (raw[0] == ' ' || raw[0] == '\t');
    if (last_was_entry && indented && m.kind == ListMarker::Kind::none) {
      auto& j = set.exemplars.back().justification;
      j += (j.empty() ? "" : "\n") + line;
      continue;
    }
    last_was_entry = false;
    if (current && m.kind == ListMarker::Kind::bullet) {
      diags.push_back({{"line", lineno}, {"message", "bulleted line is not a \"Title\" (year) - justification entry"}});
    }
    // anything else is surrounding prose
  }

  if (set.exemplars.empty() && diags.empty()) {
    diags.push_back({{"line", static_cast<int>(lines.size())}, {"message", "no exemplar entries found"}});
  }
  if (!diags.empty()) {
    throw Error(ErrorCode::parse_failure, "cannot parse exemplar list: " + format_diagnostics(diags), diags);
  }
  return set;
}

std::vector<std::string> validate_exemplar_set(const ExemplarSet& set, std::span<const Genre> expected) {
  std::vector<std::string> out;
  std::vector<Genre> order;
  std::map<std::string, std::vector<const Exemplar*>> by_genre;
  for (const auto& e : set.exemplars) {
    if (!by_genre.count(e.genre.token())) order.push_back(e.genre);
    by_genre[e.genre.token()].push_back(&e);
    if (text::trim(e.title).empty()) out.push_back("an entry of " + e.genre.display_name() + " has no title");
    if (text::trim(e.year_text).empty()) out.push_back("\"" + e.title + "\" has no year");
    if (text::trim(e.justification).empty()) out.push_back("\"" + e.title + "\" has no explanation");
  }
  for (const Genre& g : expected) {
    if (!by_genre.count(g.token())) out.push_back(g.display_name() + " is missing");
  }
  for (const Genre& g : order) {
    const auto& list = by_genre[g.token()];
    if (list.size() != 3) {
      out.push_back(g.display_name() + " has " + std::to_string(list.size()) + " titles; exactly 3 are required");
    }
    std::set<std::string> titles;
    for (const auto* e : list) {
      if (!titles.insert(text::to_lower(e->title)).second) {
        out.push_back(g.display_name() + " lists \"" + e->title + "\" more than once");
      }
    }
    if (!expected.empty() && std::find(expected.begin(), expected.end(), g) == expected.end()) {
      out.push_back(g.display_name() + " was not asked for");
    }
  }
  return out;
}

}  // namespace genreloom
