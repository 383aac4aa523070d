#include "genreloom/prompt.hpp"

#include <algorithm>
#include <cctype>

#include "genreloom/error.hpp"
#include "genreloom/resources.hpp"

namespace genreloom {

namespace {

struct Placeholder {
  std::size_t begin;
  std::size_t end;  // one past the closing braces
  std::string name;
};

bool slot_char(char c) {
  return std::islower(static_cast<unsigned char>(c)) != 0 || std::isdigit(static_cast<unsigned char>(c)) != 0 || c == '_';
}

std::vector<Placeholder> scan(std::string_view body) {
  std::vector<Placeholder> out;
  std::size_t pos = 0;
  while ((pos = body.find("{{", pos)) != std::string_view::npos) {
    std::size_t k = pos + 2;
    while (k < body.size() && slot_char(body[k])) ++k;
    if (k > pos + 2 && body.substr(k, 2) == "}}") {
      out.push_back({pos, k + 2, std::string(body.substr(pos + 2, k - pos - 2))});
      pos = k + 2;
    } else {
      pos += 2;
    }
  }
  return out;
}

}  // namespace

PromptTemplate PromptTemplate::from_body(std::string id, std::string body) {
  PromptTemplate t{std::move(id), {}, std::move(body)};
  for (auto& ph : scan(t.body)) {
    if (std::find(t.slots.begin(), t.slots.end(), ph.name) == t.slots.end()) t.slots.push_back(ph.name);
  }
  return t;
}

std::vector<std::string> PromptTemplate::validate() const {
  std::vector<std::string> problems;
  std::vector<std::string> used;
  for (auto& ph : scan(body)) {
    if (std::find(used.begin(), used.end(), ph.name) == used.end()) used.push_back(ph.name);
  }
  for (const auto& u : used) {
    if (std::find(slots.begin(), slots.end(), u) == slots.end()) problems.push_back("undeclared placeholder '" + u + "'");
  }
  for (const auto& s : slots) {
    if (std::find(used.begin(), used.end(), s) == used.end()) problems.push_back("unused slot '" + s + "'");
  }
  return problems;
}

std::string render(const PromptTemplate& tmpl, const Bindings& bindings) {
  std::vector<std::string> missing;
  for (const auto& s : tmpl.slots) {
    if (bindings.find(s) == bindings.end()) missing.push_back(s);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::missing_slot, "template '" + tmpl.id + "' is missing bindings for: " + list,
                nlohmann::json(missing));
  }
  std::string out;
  out.reserve(tmpl.body.size());
  std::size_t last = 0;
  for (const auto& ph : scan(tmpl.body)) {
    out.append(tmpl.body, last, ph.begin - last);
    auto it = bindings.find(ph.name);
    if (it != bindings.end()) {
      out += it->second;
    } else {
      out.append(tmpl.body, ph.begin, ph.end - ph.begin);
    }
    last = ph.end;
  }
  out.append(tmpl.body, last, std::string::npos);
  return out;
}

namespace {

const std::map<std::string, PromptTemplate, std::less<>>& catalog() {
  static const auto templates = [] {
    std::map<std::string, PromptTemplate, std::less<>> m;
    constexpr std::string_view prefix = "prompts/";
    for (std::string_view path : resource_paths(prefix)) {
      std::string_view file = path.substr(prefix.size());
      if (file.size() < 4 || file.substr(file.size() - 4) != ".txt") continue;
      std::string id(file.substr(0, file.size() - 4));
      std::string body(*find_resource(path));
      // a single trailing newline in the file is an editor artifact
      if (!body.empty() && body.back() == '\n') body.pop_back();
      m.emplace(id, PromptTemplate::from_body(id, std::move(body)));
    }
    return m;
  }();
  return templates;
}

}  // namespace

const PromptTemplate& prompt_template(std::string_view id) {
  const auto& c = catalog();
  auto it = c.find(id);
  if (it == c.end()) throw Error(ErrorCode::not_found, "no prompt template '" + std::string(id) + "'");
  return it->second;
}

std::vector<std::string> prompt_template_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, _] : catalog()) ids.push_back(id);
  return ids;
}

}  // namespace genreloom
