#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "genreloom/pattern.hpp"
#include "genreloom/term.hpp"

namespace genreloom {

struct OutlineStage {
  std::string label;
  std::string description;
  std::vector<Term> features;  // ground

  friend bool operator==(const OutlineStage&, const OutlineStage&) = default;
};

struct StoryOutline {
  std::string title;
  std::optional<int> year;
  std::vector<OutlineStage> stages;

  friend bool operator==(const StoryOutline&, const StoryOutline&) = default;
};

/// Empty result means the outline is valid.
std::vector<std::string> validate_outline(const StoryOutline& outline);

/// Outline file format: {title, year, stages:[{label, description,
/// features:[term]}]}; terms use the JSON form from term.hpp (the text form
/// is accepted on input too).
nlohmann::json to_json(const StoryOutline& outline);
StoryOutline outline_from_json(const nlohmann::json& j);

/// One column per aligned position; `cells[k]` is the 0-based stage index
/// of outline k in that column, or nullopt for a gap.
struct AlignmentColumn {
  std::vector<std::optional<std::size_t>> cells;

  std::size_t support() const noexcept;
  friend bool operator==(const AlignmentColumn&, const AlignmentColumn&) = default;
};

struct Alignment {
  std::size_t outline_count = 0;
  std::vector<AlignmentColumn> columns;

  friend bool operator==(const Alignment&, const Alignment&) = default;
};

/// Order preservation plus exact coverage of every stage of every outline.
bool alignment_is_well_formed(const Alignment& a, std::span<const StoryOutline> outlines);

using StageScorer = std::function<double(const OutlineStage&, const OutlineStage&)>;

/// Jaccard similarity of description token sets, +0.25 when labels are
/// identical, clamped to [0, 1].
double default_stage_score(const OutlineStage& a, const OutlineStage& b);

struct AlignmentOptions {
  double gap_penalty = 0.05;
  /// A stage may only be matched into a column whose mean score reaches
  /// this value; weaker pairings are gapped instead.
  double min_match = 0.2;
};

/// Progressive global alignment: the first two outlines are aligned by
/// dynamic programming, then each further outline is aligned against the
/// running column sequence (column score = mean score against the stages
/// already in it). Ties prefer a match, then keep existing columns ahead
/// of newly opened ones. Throws Error(empty_input) for fewer than 2
/// outlines.
Alignment align(std::span<const StoryOutline> outlines, const StageScorer& scorer = default_stage_score,
                const AlignmentOptions& options = {});

/// Merges the feature lists of the contributing stages: position-wise lggN
/// across lists of equal length (shared variables across positions), a
/// single variable when lengths differ.
std::vector<Term> merge_features(std::span<const std::vector<Term>> feature_lists);

struct SkeletonStage {
  int index = 0;  // 1-based, renumbered after filtering
  std::string label;
  std::vector<Term> features;
  std::vector<std::size_t> contributors;  // outline positions, ascending
  std::vector<std::string> source_labels;
  std::vector<std::string> source_descriptions;
};

struct PatternSkeleton {
  std::vector<std::string> source_titles;
  Alignment alignment;
  std::vector<SkeletonStage> stages;
};

struct GeneralizeOptions {
  std::size_t min_support = 2;
  AlignmentOptions alignment;
};

/// Keeps columns supported by at least min_support outlines. Throws
/// Error(empty_input) for fewer than 2 outlines, Error(validation) for
/// min_support outside [2, outlines], Error(empty_result) when nothing
/// survives.
PatternSkeleton generalize(std::span<const StoryOutline> outlines, const GeneralizeOptions& options = {},
                           const StageScorer& scorer = default_stage_score);

/// Uses the merged labels and the first source description verbatim; the
/// curation module normally rewrites these into pattern prose instead.
GenrePattern skeleton_to_pattern(const PatternSkeleton& skeleton, const Genre& genre, std::string title);

}  // namespace genreloom
