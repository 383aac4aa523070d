#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace genreloom {

/// A prompt body with `{{slot}}` placeholders. Slot names are
/// [a-z0-9_]+; `slots` lists each distinct name once, in order of first
/// appearance.
struct PromptTemplate {
  std::string id;
  std::vector<std::string> slots;
  std::string body;

  /// Derives the slot list from the body.
  static PromptTemplate from_body(std::string id, std::string body);

  /// Empty when every placeholder is declared and every slot is used.
  std::vector<std::string> validate() const;
};

using Bindings = std::map<std::string, std::string, std::less<>>;

/// Placeholder substitution only. Throws Error(missing_slot) naming the
/// unbound slots.
std::string render(const PromptTemplate& tmpl, const Bindings& bindings);

/// Templates bundled under data/prompts/<id>.txt. Throws Error(not_found).
const PromptTemplate& prompt_template(std::string_view id);
std::vector<std::string> prompt_template_ids();

}  // namespace genreloom
