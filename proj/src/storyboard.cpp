#include "genreloom/storyboard.hpp"

#include <fstream>

#include "genreloom/error.hpp"
#include "genreloom/text.hpp"

namespace genreloom {

using nlohmann::json;
using nlohmann::ordered_json;

std::string image_prompt(std::string_view event_text, std::string_view style) {
  const auto sentences = text::sentences(event_text);
  std::string subject = sentences.empty() ? text::trim(event_text) : sentences.front();
  while (!subject.empty() && (subject.back() == '.' || subject.back() == '!' || subject.back() == '?')) subject.pop_back();
  subject = text::trim(subject);
  std::string out;
  const std::string s = text::trim(style);
  if (!s.empty()) out = s + ", ";
  if (!subject.empty()) out += subject + ", ";
  out += "detailed scene, no text overlay";
  return out;
}

StoryboardDocument build_storyboard(const Story& story, const GenrePattern& pattern, std::string_view style) {
  if (!story.pattern_id.empty() && story.pattern_id != pattern.id) {
    throw Error(ErrorCode::validation, "story follows pattern '" + story.pattern_id + "', not '" + pattern.id + "'");
  }
  if (story.events.size() != pattern.stages.size()) {
    throw Error(ErrorCode::validation, "story has " + std::to_string(story.events.size()) + " events but the pattern has " +
                                           std::to_string(pattern.stages.size()) + " stages");
  }
  StoryboardDocument doc{story.id, story.title, story.premise, {}, story.summary};
  for (std::size_t i = 0; i < story.events.size(); ++i) {
    doc.panels.push_back(
        {pattern.stages[i].index, pattern.stages[i].name, story.events[i], image_prompt(story.events[i], style), std::nullopt});
  }
  return doc;
}

std::string_view to_token(ExportFormat f) {
  switch (f) {
    case ExportFormat::html: return "html";
    case ExportFormat::markdown: return "markdown";
    case ExportFormat::json: return "json";
  }
  return "json";
}

ExportFormat export_format_from_token(std::string_view token) {
  const std::string t = text::to_lower(token);
  if (t == "html") return ExportFormat::html;
  if (t == "markdown" || t == "md") return ExportFormat::markdown;
  if (t == "json") return ExportFormat::json;
  throw Error(ErrorCode::validation, "unknown export format '" + std::string(token) + "'",
              {{"accepted", {"html", "markdown", "json"}}});
}

std::string_view file_extension(ExportFormat f) {
  switch (f) {
    case ExportFormat::html: return "html";
    case ExportFormat::markdown: return "md";
    case ExportFormat::json: return "json";
  }
  return "json";
}

std::string export_filename(const StoryboardDocument& doc, ExportFormat f) {
  return "story-" + doc.story_id + "." + std::string(file_extension(f));
}

namespace {

ordered_json ordered(const StoryboardDocument& doc) {
  ordered_json j;
  j["story_id"] = doc.story_id;
  j["title"] = doc.title;
  j["premise"] = doc.premise;
  ordered_json panels = ordered_json::array();
  for (const auto& p : doc.panels) {
    ordered_json pj;
    pj["stage_index"] = p.stage_index;
    pj["stage_name"] = p.stage_name;
    pj["event_text"] = p.event_text;
    pj["image_prompt"] = p.image_prompt;
    pj["image_ref"] = p.image_ref ? ordered_json(*p.image_ref) : ordered_json(nullptr);
    panels.push_back(std::move(pj));
  }
  j["panels"] = std::move(panels);
  j["summary"] = doc.summary;
  return j;
}

std::string escape_html(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

// A markdown line must not open a heading or other block of its own.
std::string escape_markdown_line(const std::string& line) {
  if (!line.empty() && (line[0] == '#' || line[0] == '>' || line[0] == '-' || line[0] == '*' || line[0] == '+')) {
    return "\\" + line;
  }
  return line;
}

std::string markdown_paragraph(std::string_view s) {
  std::string out;
  for (const auto& l : text::split_lines(s)) out += (out.empty() ? "" : "\n") + escape_markdown_line(text::trim(l));
  return out;
}

const char* kStyle =
    "body{font-family:Georgia,serif;max-width:60rem;margin:2rem auto;padding:0 1rem;color:#222;background:#faf8f4}"
    "header p{font-style:italic}"
    ".panels{display:grid;grid-template-columns:repeat(auto-fill,minmax(17rem,1fr));gap:1rem}"
    ".panel{border:2px solid #333;background:#fff;padding:.75rem}"
    ".frame{aspect-ratio:4/3;background:#ddd;display:flex;align-items:center;justify-content:center;"
    "font-size:.8rem;color:#555;padding:.5rem;text-align:center}"
    ".frame img{max-width:100%;max-height:100%}"
    ".panel h2{font-size:1rem;margin:.5rem 0}"
    "footer{margin-top:2rem}";

std::string to_html(const StoryboardDocument& doc) {
  std::string h;
  h += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\" />\n";
  h += "<title>" + escape_html(doc.title) + "</title>\n<style>" + kStyle + "</style>\n</head>\n<body>\n";
  h += "<header>\n<h1>" + escape_html(doc.title) + "</h1>\n<p>" + escape_html(doc.premise) + "</p>\n</header>\n";
  h += "<main class=\"panels\">\n";
  for (const auto& p : doc.panels) {
    h += "<section class=\"panel\" id=\"stage-" + std::to_string(p.stage_index) + "\">\n<div class=\"frame\">";
    if (p.image_ref) {
      h += "<img src=\"" + escape_html(*p.image_ref) + "\" alt=\"" + escape_html(p.image_prompt) + "\" />";
    } else {
      h += escape_html(p.image_prompt);
    }
    h += "</div>\n<h2>" + std::to_string(p.stage_index) + ". " + escape_html(p.stage_name) + "</h2>\n";
    h += "<p>" + escape_html(p.event_text) + "</p>\n</section>\n";
  }
  h += "</main>\n<footer>\n<h3>Summary</h3>\n<p>" + escape_html(doc.summary) + "</p>\n</footer>\n</body>\n</html>\n";
  return h;
}

std::string to_markdown(const StoryboardDocument& doc) {
  std::string m = "# " + text::trim(doc.title) + "\n\n";
  m += "*Premise:* " + markdown_paragraph(doc.premise) + "\n\n";
  for (const auto& p : doc.panels) {
    m += "## " + std::to_string(p.stage_index) + ". " + text::trim(p.stage_name) + "\n\n";
    m += markdown_paragraph(p.event_text) + "\n\n";
    if (p.image_ref) m += "![" + p.image_prompt + "](" + *p.image_ref + ")\n\n";
    m += "*Image prompt:* " + markdown_paragraph(p.image_prompt) + "\n\n";
  }
  m += "**Summary.** " + markdown_paragraph(doc.summary) + "\n";
  return m;
}

}  // namespace

json to_json(const StoryboardDocument& doc) { return json(ordered(doc)); }

StoryboardDocument storyboard_from_json(const json& j) {
  try {
    StoryboardDocument doc;
    doc.story_id = j.at("story_id").get<std::string>();
    doc.title = j.at("title").get<std::string>();
    doc.premise = j.at("premise").get<std::string>();
    doc.summary = j.at("summary").get<std::string>();
    for (const auto& pj : j.at("panels")) {
      Panel p;
      p.stage_index = pj.at("stage_index").get<int>();
      p.stage_name = pj.at("stage_name").get<std::string>();
      p.event_text = pj.at("event_text").get<std::string>();
      p.image_prompt = pj.at("image_prompt").get<std::string>();
      if (pj.contains("image_ref") && !pj.at("image_ref").is_null()) p.image_ref = pj.at("image_ref").get<std::string>();
      doc.panels.push_back(std::move(p));
    }
    return doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::validation, std::string("malformed storyboard: ") + e.what());
  }
}

std::string export_document(const StoryboardDocument& doc, ExportFormat f) {
  switch (f) {
    case ExportFormat::html: return to_html(doc);
    case ExportFormat::markdown: return to_markdown(doc);
    case ExportFormat::json: return ordered(doc).dump(2, ' ', false, json::error_handler_t::replace) + "\n";
  }
  return {};
}

std::string PlaceholderRenderer::render(const std::string& prompt) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">";
  s += "<rect width=\"640\" height=\"480\" fill=\"#dddddd\" stroke=\"#333333\" stroke-width=\"4\"/>";
  s += "<text x=\"320\" y=\"240\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">";
  s += escape_html(prompt.size() > 80 ? prompt.substr(0, 77) + "..." : prompt);
  s += "</text></svg>\n";
  return s;
}

void attach_images(StoryboardDocument& doc, ImageRenderer& renderer, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (auto& p : doc.panels) {
    const std::string name =
        "story-" + doc.story_id + "-panel-" + std::to_string(p.stage_index) + "." + std::string(renderer.extension());
    const std::string bytes = renderer.render(p.image_prompt);
    std::ofstream out(dir / name, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::validation, "cannot write image " + (dir / name).string());
    p.image_ref = name;
  }
}

}  // namespace genreloom
