#include "genreloom/generalizer.hpp"

#include <algorithm>

#include "genreloom/error.hpp"
#include "genreloom/text.hpp"

namespace genreloom {

using nlohmann::json;

namespace {

constexpr double kEps = 1e-12;

enum class Move { diag, left, up };

}  // namespace

std::vector<std::string> validate_outline(const StoryOutline& o) {
  std::vector<std::string> out;
  if (o.stages.empty()) out.push_back("outline has no stages");
  for (std::size_t i = 0; i < o.stages.size(); ++i) {
    const auto& s = o.stages[i];
    const std::string at = "stage " + std::to_string(i + 1);
    if (text::trim(s.label).empty()) out.push_back(at + ": empty label");
    for (const Term& f : s.features) {
      if (!f.is_ground()) out.push_back(at + ": feature '" + to_string(f) + "' is not ground");
    }
  }
  return out;
}

json to_json(const StoryOutline& o) {
  nlohmann::ordered_json j;
  j["title"] = o.title;
  j["year"] = o.year ? json(*o.year) : json(nullptr);
  nlohmann::ordered_json stages = nlohmann::ordered_json::array();
  for (const auto& s : o.stages) {
    nlohmann::ordered_json st;
    st["label"] = s.label;
    st["description"] = s.description;
    json features = json::array();
    for (const Term& f : s.features) features.push_back(to_json(f));
    st["features"] = features;
    stages.push_back(std::move(st));
  }
  j["stages"] = std::move(stages);
  return json(j);
}

StoryOutline outline_from_json(const json& j) {
  if (!j.is_object() || !j.contains("stages") || !j.at("stages").is_array()) {
    throw Error(ErrorCode::validation, "outline needs a 'stages' list");
  }
  StoryOutline o;
  o.title = j.value("title", std::string{});
  if (j.contains("year") && !j.at("year").is_null()) o.year = j.at("year").get<int>();
  for (const auto& s : j.at("stages")) {
    OutlineStage st;
    st.label = s.value("label", std::string{});
    st.description = s.value("description", std::string{});
    if (s.contains("features")) {
      for (const auto& f : s.at("features")) st.features.push_back(term_from_json(f));
    }
    o.stages.push_back(std::move(st));
  }
  return o;
}

std::size_t AlignmentColumn::support() const noexcept {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return c.has_value(); }));
}

bool alignment_is_well_formed(const Alignment& a, std::span<const StoryOutline> outlines) {
  if (a.outline_count != outlines.size()) return false;
  for (std::size_t k = 0; k < outlines.size(); ++k) {
    std::size_t next = 0;
    for (const auto& col : a.columns) {
      if (col.cells.size() != outlines.size()) return false;
      if (!col.cells[k]) continue;
      // strictly increasing and gap-free coverage in one pass
      if (*col.cells[k] != next) return false;
      ++next;
    }
    if (next != outlines[k].stages.size()) return false;
  }
  for (const auto& col : a.columns) {
    if (col.support() == 0) return false;
  }
  return true;
}

double default_stage_score(const OutlineStage& a, const OutlineStage& b) {
  double s = text::jaccard(text::token_set(a.description), text::token_set(b.description));
  if (a.label == b.label) s += 0.25;
  return std::clamp(s, 0.0, 1.0);
}

Alignment align(std::span<const StoryOutline> outlines, const StageScorer& scorer, const AlignmentOptions& opt) {
  if (outlines.size() < 2) throw Error(ErrorCode::empty_input, "alignment needs at least two outlines");

  Alignment result;
  result.outline_count = 1;
  for (std::size_t i = 0; i < outlines[0].stages.size(); ++i) {
    result.columns.push_back(AlignmentColumn{{i}});
  }

  for (std::size_t k = 1; k < outlines.size(); ++k) {
    const auto& stages = outlines[k].stages;
    const std::size_t m = result.columns.size();
    const std::size_t n = stages.size();

    // column-vs-stage scores; nullopt when the pairing is not allowed
    std::vector<std::vector<std::optional<double>>> score(m, std::vector<std::optional<double>>(n));
    for (std::size_t i = 0; i < m; ++i) {
      const auto& cells = result.columns[i].cells;
      for (std::size_t j = 0; j < n; ++j) {
        double sum = 0;
        std::size_t present = 0;
        for (std::size_t p = 0; p < cells.size(); ++p) {
          if (!cells[p]) continue;
          sum += scorer(outlines[p].stages[*cells[p]], stages[j]);
          ++present;
        }
        const double mean = present ? sum / static_cast<double>(present) : 0.0;
        if (mean + kEps >= opt.min_match) score[i][j] = mean;
      }
    }

    std::vector<std::vector<double>> best(m + 1, std::vector<double>(n + 1, 0.0));
    for (std::size_t i = 1; i <= m; ++i) best[i][0] = best[i - 1][0] - opt.gap_penalty;
    for (std::size_t j = 1; j <= n; ++j) best[0][j] = best[0][j - 1] - opt.gap_penalty;
    for (std::size_t i = 1; i <= m; ++i) {
      for (std::size_t j = 1; j <= n; ++j) {
        double v = std::max(best[i - 1][j], best[i][j - 1]) - opt.gap_penalty;
        if (score[i - 1][j - 1]) v = std::max(v, best[i - 1][j - 1] + *score[i - 1][j - 1]);
        best[i][j] = v;
      }
    }

    std::vector<Move> moves;
    std::size_t i = m;
    std::size_t j = n;
    while (i > 0 || j > 0) {
      if (i > 0 && j > 0 && score[i - 1][j - 1] &&
          std::abs(best[i][j] - (best[i - 1][j - 1] + *score[i - 1][j - 1])) <= kEps) {
        moves.push_back(Move::diag);
        --i;
        --j;
      } else if (j > 0 && std::abs(best[i][j] - (best[i][j - 1] - opt.gap_penalty)) <= kEps) {
        moves.push_back(Move::left);
        --j;
      } else {
        moves.push_back(Move::up);
        --i;
      }
    }
    std::reverse(moves.begin(), moves.end());

    std::vector<AlignmentColumn> merged;
    merged.reserve(moves.size());
    std::size_t ci = 0;
    std::size_t sj = 0;
    for (Move mv : moves) {
      switch (mv) {
        case Move::diag: {
          AlignmentColumn c = std::move(result.columns[ci++]);
          c.cells.emplace_back(sj++);
          merged.push_back(std::move(c));
          break;
        }
        case Move::up: {
          AlignmentColumn c = std::move(result.columns[ci++]);
          c.cells.emplace_back(std::nullopt);
          merged.push_back(std::move(c));
          break;
        }
        case Move::left: {
          AlignmentColumn c;
          c.cells.assign(k, std::nullopt);
          c.cells.emplace_back(sj++);
          merged.push_back(std::move(c));
          break;
        }
      }
    }
    result.columns = std::move(merged);
    result.outline_count = k + 1;
  }
  return result;
}

std::vector<Term> merge_features(std::span<const std::vector<Term>> lists) {
  if (lists.empty()) return {};
  const std::size_t len = lists.front().size();
  const bool same_length = std::all_of(lists.begin(), lists.end(), [&](const auto& l) { return l.size() == len; });
  if (!same_length) return {Term::variable("X1")};
  if (len == 0) return {};
  std::vector<Term> wrapped;
  wrapped.reserve(lists.size());
  for (const auto& l : lists) wrapped.push_back(Term::compound("features", l));
  const Term merged = lggN(wrapped);
  return {merged.args().begin(), merged.args().end()};
}

PatternSkeleton generalize(std::span<const StoryOutline> outlines, const GeneralizeOptions& opt,
                           const StageScorer& scorer) {
  if (outlines.size() < 2) throw Error(ErrorCode::empty_input, "generalization needs at least two outlines");
  if (opt.min_support < 2 || opt.min_support > outlines.size()) {
    throw Error(ErrorCode::validation, "min_support must lie in [2, " + std::to_string(outlines.size()) + "]");
  }
  for (const auto& o : outlines) {
    if (auto v = validate_outline(o); !v.empty()) {
      throw Error(ErrorCode::validation, "invalid outline '" + o.title + "': " + v.front(), json(v));
    }
  }

  PatternSkeleton sk;
  for (const auto& o : outlines) sk.source_titles.push_back(o.title);
  sk.alignment = align(outlines, scorer, opt.alignment);

  for (const auto& col : sk.alignment.columns) {
    if (col.support() < opt.min_support) continue;
    SkeletonStage st;
    std::vector<std::vector<Term>> features;
    for (std::size_t k = 0; k < col.cells.size(); ++k) {
      if (!col.cells[k]) continue;
      const OutlineStage& src = outlines[k].stages[*col.cells[k]];
      st.contributors.push_back(k);
      st.source_labels.push_back(src.label);
      st.source_descriptions.push_back(src.description);
      features.push_back(src.features);
    }
    st.label = st.source_labels.front();
    st.features = merge_features(features);
    st.index = static_cast<int>(sk.stages.size()) + 1;
    sk.stages.push_back(std::move(st));
  }
  if (sk.stages.empty()) {
    throw Error(ErrorCode::empty_result,
                "no aligned stage is shared by " + std::to_string(opt.min_support) + " or more outlines");
  }
  return sk;
}

GenrePattern skeleton_to_pattern(const PatternSkeleton& sk, const Genre& genre, std::string title) {
  GenrePattern p;
  p.genre = genre;
  p.title = std::move(title);
  p.provenance = Provenance::extracted;
  p.source_titles = sk.source_titles;
  for (const auto& s : sk.stages) {
    p.stages.push_back({s.index, text::normalize_whitespace(s.label), text::normalize_whitespace(s.source_descriptions.front())});
  }
  return p;
}

}  // namespace genreloom
