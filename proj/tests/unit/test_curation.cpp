#include <doctest.h>

#include "../support/test_support.hpp"
#include "genreloom/curation.hpp"
#include "genreloom/error.hpp"
#include "genreloom/prompt.hpp"

using namespace genreloom;
using namespace testing_support;

namespace {

const std::string kSource = GENRELOOM_SOURCE_DIR;

std::string output1() { return read_file(kSource + "/fixtures/output1.txt"); }

const char* kGoodOutline =
    "STAGE 1: Home\nDESCRIPTION: The hero lives quietly in a village.\nFEATURES: protagonist; ordinary-world\n\n"
    "STAGE 2: Call\nDESCRIPTION: A stranger brings news of war.\nFEATURES: disruption(ordinary-world)\n\n"
    "STAGE 3: Road\nDESCRIPTION: The hero travels with a friend.\nFEATURES: quest(protagonist, ally)\n\n"
    "STAGE 4: Battle\nDESCRIPTION: The hero fights the tyrant.\nFEATURES: confrontation(protagonist, antagonist)\n\n"
    "STAGE 5: Home Again\nDESCRIPTION: The hero returns in peace.\nFEATURES: resolution, ordinary-world\n";

}  // namespace

TEST_CASE("bundled exemplar listing parses into fifteen exemplars") {
  const ExemplarSet set = parse_exemplars(output1());
  REQUIRE(set.exemplars.size() == 15);
  CHECK(validate_exemplar_set(set, std::vector<Genre>(std::begin(kFundamentalGenres), std::end(kFundamentalGenres))).empty());
  const auto mystery = set.of_genre(FundamentalGenre::mystery);
  REQUIRE(mystery.size() == 3);
  CHECK(mystery[0].title == "Murder on the Orient Express");
  CHECK(mystery[0].author == "Agatha Christie");
  CHECK(mystery[2].year_text == "1887-1927");
  CHECK_FALSE(mystery[2].justification.empty());
  CHECK(exemplar_set_from_json(to_json(set)) == set);
}

TEST_CASE("exemplar parsing variants") {
  const char* text =
      "1. Genre: Comedy\n"
      "   - \"Alpha\" by Someone (1901) - Funny.\n"
      "   * \xE2\x80\x9C" "Beta\xE2\x80\x9D (circa 1600): Also funny\n"
      "     and more on a second line.\n"
      "   + \"Gamma\" (year unknown) \xE2\x80\x93 Light.\n";
  const ExemplarSet set = parse_exemplars(text);
  REQUIRE(set.exemplars.size() == 3);
  CHECK(set.exemplars[0].author == "Someone");
  CHECK(set.exemplars[1].year_text == "circa 1600");
  CHECK(set.exemplars[1].justification.find("second line") != std::string::npos);
  CHECK(set.exemplars[2].title == "Gamma");
  CHECK(validate_exemplar_set(set, std::vector<Genre>{FundamentalGenre::comedy}).empty());
  CHECK_FALSE(validate_exemplar_set(set, std::vector<Genre>{FundamentalGenre::satire}).empty());
}

TEST_CASE("unparseable exemplar text reports line diagnostics") {
  try {
    (void)parse_exemplars("1. **Comedy**:\n   - Title without year - reason\n");
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse_failure);
    REQUIRE(e.details().is_array());
    CHECK(e.details()[0]["line"] == 2);
  }
  CHECK_THROWS_AS(parse_exemplars(""), Error);
}

TEST_CASE("outline parsing") {
  const auto good = parse_outline_response(kGoodOutline, "T", 1900);
  CHECK(good.violations.empty());
  REQUIRE(good.outline.stages.size() == 5);
  CHECK(good.outline.stages[4].features.size() == 2);
  CHECK(to_string(good.outline.stages[2].features[0]) == "quest(protagonist, ally)");

  auto bad = parse_outline_response("STAGE 1: A\nDESCRIPTION: One. Two.\nFEATURES: wizard\n", "T", std::nullopt);
  CHECK(bad.violations.size() >= 3);  // too few stages, two sentences, outside vocabulary
  bad = parse_outline_response("nothing here", "T", std::nullopt);
  CHECK_FALSE(bad.violations.empty());
}

TEST_CASE("feature vocabulary") {
  CHECK(FeatureVocabulary::admits(parse_term("mentor")));
  CHECK(FeatureVocabulary::admits(parse_term("reversal(protagonist, special-world)")));
  CHECK_FALSE(FeatureVocabulary::admits(parse_term("protagonist(mentor)")));
  CHECK_FALSE(FeatureVocabulary::admits(parse_term("quest(quest(ally))")));
  CHECK_FALSE(FeatureVocabulary::admits(parse_term("dragon")));
}

TEST_CASE("pattern listing parsing and prose checks") {
  const auto stages = parse_pattern_listing(
      "Here you go:\n1. **Set Up**. Things begin. People meet.\n2) Turn: Something shifts.\n"
      "3. Finale - All ends.\n   It ends well.\n");
  REQUIRE(stages.size() == 3);
  CHECK(stages[0].name == "Set Up");
  CHECK(stages[1].name == "Turn");
  CHECK(stages[2].description == "All ends. It ends well.");
  CHECK(check_pattern_prose(stages, 3, {}).empty());
  CHECK_FALSE(check_pattern_prose(stages, 4, {}).empty());
  CHECK_FALSE(check_pattern_prose(stages, 3, {"People"}).empty());
  CHECK_THROWS_AS(parse_pattern_listing("no list"), Error);
  CHECK_THROWS_AS(parse_pattern_listing("1. A. b.\n3. C. d.\n"), Error);
}

TEST_CASE("proper names are harvested from mid-sentence capitals") {
  const std::vector<std::string> prose{"The detective Hercule Poirot boards a train to London.",
                                       "Then I saw Watson's hat."};
  const auto names = harvest_proper_names(prose);
  CHECK(names.count("Hercule") == 1);
  CHECK(names.count("Poirot") == 1);
  CHECK(names.count("London") == 1);
  CHECK(names.count("Watson") == 1);
  CHECK(names.count("The") == 0);
  CHECK(names.count("Then") == 0);
  CHECK(names.count("I") == 0);
}

TEST_CASE("exemplar request prompt") {
  const auto& r = default_registry();
  const std::string p = render_exemplar_request(r.fundamental_profiles());
  CHECK(p.find("1. **Comedy**:") != std::string::npos);
  CHECK(p.find("five") != std::string::npos);
  CHECK(describe_profile(r.profile_of(FundamentalGenre::mystery)).rfind("Season: Return. World: enigmatic.", 0) == 0);
}

TEST_CASE("curator retries once with a correction") {
  std::vector<ChatTranscript> seen;
  auto backend = std::make_shared<FnBackend>([&](const ChatTranscript& t) {
    seen.push_back(t);
    return ok(seen.size() == 1 ? "STAGE 1: oops" : kGoodOutline);
  });
  GatewayOptions opt;
  opt.sleep = [](std::chrono::milliseconds) {};
  Gateway g(opt, backend, nullptr);
  Curator c(g, default_registry());
  const StoryOutline o = c.outline_story("Saga", "circa 1200", FundamentalGenre::romance);
  CHECK(o.year == 1200);
  CHECK(o.stages.size() == 5);
  REQUIRE(seen.size() == 2);
  CHECK(seen[1].messages.size() == seen[0].messages.size() + 2);
  CHECK(seen[1].messages[seen[0].messages.size()].role == Role::assistant);

  seen.clear();
  auto never = std::make_shared<FnBackend>([](const ChatTranscript&) { return ok("no stages"); });
  Gateway g2(opt, never, nullptr);
  Curator c2(g2, default_registry());
  try {
    (void)c2.outline_story("Saga", "1200", FundamentalGenre::romance);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse_failure);
  }
  CHECK(never->calls == 2);
}

TEST_CASE("llm-assisted extraction forbids source names") {
  const ExemplarSet set = parse_exemplars(output1());
  int call = 0;
  auto backend = std::make_shared<FnBackend>([&](const ChatTranscript&) {
    ++call;
    const std::string rest = "\n2. Clue. A clue appears.\n3. Doubt. Doubt grows.\n4. Turn. It turns.\n5. End. All is known.";
    if (call == 1) return ok("1. Start. The board is set by Christie." + rest);
    return ok("1. Start. The board is set." + rest);
  });
  Gateway g(GatewayOptions{}, backend, nullptr);
  Curator c(g, default_registry());
  const GenrePattern p = c.extract_pattern(set.of_genre(FundamentalGenre::mystery), ExtractionMode::llm_assisted);
  CHECK(call == 2);
  CHECK(p.stages.size() == 5);
  CHECK(p.provenance == Provenance::extracted);
  CHECK(p.genre == Genre(FundamentalGenre::mystery));
  CHECK(p.source_titles.size() == 3);
}

TEST_CASE("bundled fixture replays the Odyssey outline") {
  auto fx = std::make_shared<ReplayFixture>(kSource + "/fixtures/bundled.jsonl");
  GatewayOptions opt;
  opt.mode = TransportMode::replay;
  Gateway g(opt, nullptr, fx);
  Curator c(g, default_registry());
  const StoryOutline o = c.outline_story("The Odyssey", "circa 8th century BCE", FundamentalGenre::romance);
  CHECK(o.stages.size() >= 5);
  CHECK(o.stages.size() <= 12);
  for (const auto& s : o.stages) {
    CHECK_FALSE(s.features.empty());
    for (const auto& f : s.features) {
      CHECK(f.is_ground());
      CHECK(FeatureVocabulary::admits(f));
    }
  }
}
