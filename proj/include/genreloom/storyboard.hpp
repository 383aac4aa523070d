#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "genreloom/composer.hpp"
#include "genreloom/pattern.hpp"

namespace genreloom {

struct Panel {
  int stage_index = 0;
  std::string stage_name;
  std::string event_text;
  std::string image_prompt;
  std::optional<std::string> image_ref;

  friend bool operator==(const Panel&, const Panel&) = default;
};

struct StoryboardDocument {
  std::string story_id;
  std::string title;
  std::string premise;
  std::vector<Panel> panels;
  std::string summary;

  friend bool operator==(const StoryboardDocument&, const StoryboardDocument&) = default;
};

/// "<style>, <first sentence of the event>, detailed scene, no text overlay";
/// the style clause is dropped when `style` is blank.
std::string image_prompt(std::string_view event_text, std::string_view style);

/// One panel per event, names taken from the pattern. Throws
/// Error(validation) when the pattern is not the story's or the counts
/// differ.
StoryboardDocument build_storyboard(const Story& story, const GenrePattern& pattern, std::string_view style = {});

enum class ExportFormat { html, markdown, json };

std::string_view to_token(ExportFormat f);
/// Accepts "html", "markdown"/"md" and "json".
ExportFormat export_format_from_token(std::string_view token);
std::string_view file_extension(ExportFormat f);

/// "story-<id>.<ext>"
std::string export_filename(const StoryboardDocument& doc, ExportFormat f);

std::string export_document(const StoryboardDocument& doc, ExportFormat f);

nlohmann::json to_json(const StoryboardDocument& doc);
StoryboardDocument storyboard_from_json(const nlohmann::json& j);

/// Turns an image prompt into image bytes.
class ImageRenderer {
 public:
  virtual ~ImageRenderer() = default;
  virtual std::string render(const std::string& prompt) = 0;
  virtual std::string_view extension() const = 0;
};

/// SVG card showing the prompt text.
class PlaceholderRenderer final : public ImageRenderer {
 public:
  std::string render(const std::string& prompt) override;
  std::string_view extension() const override { return "svg"; }
};

/// Renders every panel into `dir` as story-<id>-panel-<n>.<ext> and records
/// the file name in image_ref.
void attach_images(StoryboardDocument& doc, ImageRenderer& renderer, const std::filesystem::path& dir);

}  // namespace genreloom
