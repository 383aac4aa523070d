#include <doctest.h>

#include <regex>

#include "../support/test_support.hpp"
#include "genreloom/error.hpp"
#include "genreloom/storyboard.hpp"
#include "genreloom/text.hpp"

using namespace genreloom;
using namespace testing_support;

namespace {

Story sample_story() {
  const auto& p = *default_registry().find_builtin("mystery");
  Story s{"7", "A <Dark> & \"Stormy\" Night", "Premise with <b>tags</b>.", FundamentalGenre::mystery, "mystery", {}, ""};
  for (const auto& st : p.stages) s.events.push_back("# Event for " + st.name + ". Then *more* happens & ends.");
  s.summary = "It was dark. It was stormy. It ended.";
  return s;
}

// Every opened tag is closed in order; void tags must self-close.
bool balanced_markup(const std::string& html, std::string& why) {
  static const std::regex tag(R"(<(/?)([A-Za-z][A-Za-z0-9]*)((?:[^>"']|"[^"]*"|'[^']*')*?)(/?)>)");
  std::vector<std::string> stack;
  for (auto it = std::sregex_iterator(html.begin(), html.end(), tag); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    const std::string name = m[2];
    if (m[4].length()) continue;
    if (m[1].length()) {
      if (stack.empty() || stack.back() != name) {
        why = "unexpected </" + name + ">";
        return false;
      }
      stack.pop_back();
    } else {
      stack.push_back(name);
    }
  }
  if (!stack.empty()) why = "unclosed <" + stack.back() + ">";
  return stack.empty();
}

std::size_t count_lines_starting(const std::string& s, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& line : text::split_lines(s))
    if (line.rfind(prefix, 0) == 0) ++n;
  return n;
}

}  // namespace

TEST_CASE("image prompts") {
  CHECK(image_prompt("She walks. Then runs!", "ink") == "ink, She walks, detailed scene, no text overlay");
  CHECK(image_prompt("Alone", " ") == "Alone, detailed scene, no text overlay");
}

TEST_CASE("storyboard construction") {
  const Story s = sample_story();
  const auto& p = *default_registry().find_builtin("mystery");
  const StoryboardDocument d = build_storyboard(s, p, "ink");
  REQUIRE(d.panels.size() == 9);
  CHECK(d.panels[3].stage_index == 4);
  CHECK(d.panels[3].stage_name == p.stages[3].name);
  CHECK(d.panels[0].image_prompt.rfind("ink, ", 0) == 0);
  CHECK_THROWS_AS(build_storyboard(s, *default_registry().find_builtin("satire")), Error);
  Story short_story = s;
  short_story.events.pop_back();
  CHECK_THROWS_AS(build_storyboard(short_story, p), Error);
}

TEST_CASE("exports") {
  const StoryboardDocument d = build_storyboard(sample_story(), *default_registry().find_builtin("mystery"));
  const std::string html = export_document(d, ExportFormat::html);
  std::string why;
  CHECK_MESSAGE(balanced_markup(html, why), why);
  CHECK(html.rfind("<!DOCTYPE html>", 0) == 0);
  CHECK(html.find("A &lt;Dark&gt; &amp; &quot;Stormy&quot; Night") != std::string::npos);
  CHECK(html.find("<b>tags</b>") == std::string::npos);
  std::size_t sections = 0;
  for (std::size_t at = html.find("<section"); at != std::string::npos; at = html.find("<section", at + 1)) ++sections;
  CHECK(sections == 9);

  const std::string md = export_document(d, ExportFormat::markdown);
  CHECK(count_lines_starting(md, "## ") == 9);
  CHECK(count_lines_starting(md, "# ") == 1);
  CHECK(md.find("\\# Event") != std::string::npos);

  const std::string js = export_document(d, ExportFormat::json);
  CHECK(storyboard_from_json(nlohmann::json::parse(js)) == d);
  CHECK(storyboard_from_json(to_json(d)) == d);

  CHECK(export_filename(d, ExportFormat::markdown) == "story-7.md");
  CHECK(export_format_from_token("md") == ExportFormat::markdown);
  CHECK_THROWS_AS(export_format_from_token("pdf"), Error);
}

TEST_CASE("placeholder images are attached") {
  TempDir dir;
  StoryboardDocument d = build_storyboard(sample_story(), *default_registry().find_builtin("mystery"));
  PlaceholderRenderer r;
  attach_images(d, r, dir.path());
  for (const auto& p : d.panels) {
    REQUIRE(p.image_ref.has_value());
    const auto svg = read_file(dir.path() / *p.image_ref);
    CHECK(svg.find("<svg") != std::string::npos);
    std::string why;
    CHECK_MESSAGE(balanced_markup(svg, why), why);
  }
  CHECK(d.panels[8].image_ref == "story-7-panel-9.svg");
  CHECK(export_document(d, ExportFormat::html).find("<img") != std::string::npos);
}
