#include "genreloom/text.hpp"

#include <algorithm>
#include <cctype>

namespace genreloom::text {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string normalize_whitespace(std::string_view s) {
  const std::string t = trim(s);
  std::string out;
  out.reserve(t.size());
  bool in_run = false;
  for (char c : t) {
    if (c == ' ' || c == '\t') {
      if (!in_run) out.push_back(' ');
      in_run = true;
    } else {
      out.push_back(c);
      in_run = false;
    }
  }
  return out;
}

std::set<std::string> token_set(std::string_view s) {
  std::set<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.insert(std::exchange(cur, {}));
  };
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    // U+2000..U+206F (dashes, curly quotes, ellipsis) separate words.
    if (c == 0xE2 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80) {
      flush();
      i += 3;
      continue;
    }
    if (is_word_byte(c)) {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : s[i]);
    } else {
      flush();
    }
    ++i;
  }
  flush();
  // the "s" left over from possessives ("Merlin's") carries no content
  out.erase("s");
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::string> sentences(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  auto is_closer = [](std::string_view rest) {
    // ASCII closers or the UTF-8 right double/single quotation marks
    if (rest.empty()) return std::size_t{0};
    const char c = rest[0];
    if (c == '"' || c == '\'' || c == ')' || c == ']') return std::size_t{1};
    if (rest.size() >= 3 && rest.substr(0, 3) == "\xE2\x80\x9D") return std::size_t{3};
    if (rest.size() >= 3 && rest.substr(0, 3) == "\xE2\x80\x99") return std::size_t{3};
    return std::size_t{0};
  };
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    cur.push_back(c);
    ++i;
    if (c == '.' || c == '!' || c == '?') {
      while (i < s.size() && (s[i] == '.' || s[i] == '!' || s[i] == '?')) cur.push_back(s[i++]);
      while (std::size_t n = is_closer(s.substr(i))) {
        cur.append(s.substr(i, n));
        i += n;
      }
      if (i == s.size() || is_space(s[i])) {
        std::string t = trim(cur);
        if (!t.empty()) out.push_back(std::move(t));
        cur.clear();
      }
    }
  }
  std::string t = trim(cur);
  if (!t.empty()) out.push_back(std::move(t));
  return out;
}

std::size_t word_count(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : s) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  }
  return true;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c); });
  return out;
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t nl = s.find('\n', start);
    std::string_view line = s.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.emplace_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

}  // namespace genreloom::text
