// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "../support/lgg_oracle.hpp"
#include "../support/test_support.hpp"
#include "genreloom/composer.hpp"
#include "genreloom/curation.hpp"
#include "genreloom/error.hpp"
#include "genreloom/generalizer.hpp"
#include "genreloom/pattern.hpp"
#include "genreloom/store.hpp"
#include "genreloom/text.hpp"

#include "expected_patterns.inc"

using namespace genreloom;
using namespace testing_support;
using nlohmann::json;

namespace {

const std::string kSource = GENRELOOM_SOURCE_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

std::string norm(std::string_view s) {
  std::string out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out += (out.empty() ? "" : " ") + w;
  return out;
}

// ---- 1 ------------------------------------------------------------------------

Outcome canonical_data() {
  Outcome o;
  const auto patterns = builtin_patterns();
  const std::vector<std::pair<std::string, std::size_t>> counts{{"comedy", 7},  {"romance", 10}, {"tragedy", 7},
                                                                {"satire", 8},  {"mystery", 9},  {"heros-journey", 12}};
  if (patterns.size() != 6) {
    o.fail("expected 6 patterns, got " + std::to_string(patterns.size()));
    return o;
  }
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& p = patterns[i];
    const auto& want = kExpectedPatterns[i];
    if (p.id != counts[i].first || p.id != want.id) o.fail("pattern " + std::to_string(i) + " is " + p.id);
    if (p.stage_count() != counts[i].second) o.fail(p.id + " has " + std::to_string(p.stage_count()) + " stages");
    for (std::size_t k = 0; k < std::min(p.stages.size(), want.stages.size()); ++k) {
      if (norm(p.stages[k].name) != norm(want.stages[k].name)) o.fail(p.id + " stage " + std::to_string(k + 1) + " name");
      if (norm(p.stages[k].description) != norm(want.stages[k].description))
        o.fail(p.id + " stage " + std::to_string(k + 1) + " description");
    }
  }
  struct Row {
    FundamentalGenre g;
    const char* season;
    const char* world;
    const char* protagonist;
  };
  const Row rows[] = {{FundamentalGenre::comedy, "Spring", "just", "conforms"},
                      {FundamentalGenre::romance, "Summer", "challenging", "wins"},
                      {FundamentalGenre::tragedy, "Autumn", "unforgiving", "succumbs"},
                      {FundamentalGenre::satire, "Winter", "dystopian", "is helpless"},
                      {FundamentalGenre::mystery, "Return", "enigmatic", "discovers"}};
  for (const auto& r : rows) {
    const GenreProfile p = profile_of(r.g);
    if (p.season != r.season || p.world != r.world || p.protagonist != r.protagonist)
      o.fail("profile row for " + std::string(to_token(r.g)));
  }
  const auto seeds = imdb_seed_profiles();
  if (seeds.size() != 28) o.fail("imdb seeds: " + std::to_string(seeds.size()));
  if (o.pass) o.detail = "6 patterns (7/10/7/8/9/12 stages), 5 profile rows, 28 IMDB seeds";
  return o;
}

// ---- 2 ------------------------------------------------------------------------

Outcome output1_parser() {
  Outcome o;
  const ExemplarSet set = parse_exemplars(read_file(kSource + "/fixtures/output1.txt"));
  if (set.exemplars.size() != 15) o.fail(std::to_string(set.exemplars.size()) + " exemplars");
  for (FundamentalGenre g : kFundamentalGenres) {
    if (set.of_genre(g).size() != 3) o.fail(std::string(to_token(g)) + " does not have 3 exemplars");
  }
  const std::set<std::string> expect{"1813",       "1895",       "circa 1598-1599", "circa 8th century BCE", "1954-1955",
                                     "circa 1600", "circa 1606", "1949",            "1961",                  "1945",
                                     "1934",       "2003",       "1887-1927"};
  std::set<std::string> got;
  for (const auto& e : set.exemplars) got.insert(e.year_text);
  if (got != expect) {
    std::string diff;
    for (const auto& y : got)
      if (!expect.count(y)) diff += " +" + y;
    for (const auto& y : expect)
      if (!got.count(y)) diff += " -" + y;
    o.fail("year set differs:" + diff);
  }
  if (o.pass) o.detail = "15 exemplars, 3 per genre, 13 distinct years as written";
  return o;
}

// ---- 3 ------------------------------------------------------------------------

Outcome lgg_oracle() {
  Outcome o;
  TermGen gen(20240611);
  int pairs = 0, guard = 0;
  while (pairs < 1000 && ++guard < 100000) {
    const Term s = gen.ground(3);
    const Term t = gen.mutate(s, 3);
    if (s.size() > 12 || t.size() > 12) continue;
    const auto expect = brute_force_lgg(s, t);
    const Term got = lgg2(s, t);
    if (!expect) o.fail("oracle found no least generalization for " + to_string(s) + ", " + to_string(t));
    else if (!oracle_variant(got, *expect))
      o.fail("lgg2(" + to_string(s) + ", " + to_string(t) + ") = " + to_string(got) + ", oracle " + to_string(*expect));
    if (!oracle_subsumes(got, s) || !oracle_subsumes(got, t)) o.fail("result does not subsume its inputs");
    ++pairs;
  }
  if (pairs < 1000) o.fail("only " + std::to_string(pairs) + " pairs generated");
  int triples = 0;
  for (; triples < 200; ++triples) {
    std::vector<Term> ts{gen.ground(3)};
    ts.push_back(gen.mutate(ts[0], 3));
    ts.push_back(gen.mutate(ts[0], 3));
    const Term ref = lggN(ts);
    std::vector<int> idx{0, 1, 2};
    do {
      const std::vector<Term> p{ts[idx[0]], ts[idx[1]], ts[idx[2]]};
      if (!oracle_variant(lggN(p), ref)) o.fail("lggN depends on order for " + to_string(ts[0]));
    } while (std::next_permutation(idx.begin(), idx.end()));
  }
  if (o.pass) o.detail = std::to_string(pairs) + " pairs match the brute-force oracle, " + std::to_string(triples) +
                         " triples order-invariant";
  return o;
}

// ---- 4 ------------------------------------------------------------------------

OutlineStage random_stage(std::mt19937_64& rng) {
  static const char* words[] = {"hero", "storm", "king", "ship", "letter", "war", "feast", "ghost", "crown", "river",
                                "ring", "oath", "dawn", "thief", "tower", "trial"};
  static const char* feats[] = {"protagonist", "ally", "quest(protagonist)", "resolution", "revelation(antagonist)",
                                "confrontation(protagonist, antagonist)"};
  std::uniform_int_distribution<int> w(0, 15), f(0, 5), n(3, 7);
  std::string desc;
  for (int i = n(rng); i > 0; --i) desc += std::string(desc.empty() ? "" : " ") + words[w(rng)];
  return {std::string("L") + words[w(rng)], desc, {parse_term(feats[f(rng)])}};
}

StoryOutline random_outline(std::mt19937_64& rng, int lo, int hi) {
  StoryOutline o{"o", std::nullopt, {}};
  for (int i = std::uniform_int_distribution<int>(lo, hi)(rng); i > 0; --i) o.stages.push_back(random_stage(rng));
  return o;
}

// independent check: each outline's stage indices appear once each, in order
bool order_preserved(const Alignment& a, std::span<const StoryOutline> outlines) {
  for (std::size_t k = 0; k < outlines.size(); ++k) {
    std::vector<std::size_t> seen;
    for (const auto& c : a.columns) {
      if (c.cells.size() != outlines.size()) return false;
      if (c.cells[k]) seen.push_back(*c.cells[k]);
    }
    if (seen.size() != outlines[k].stages.size()) return false;
    for (std::size_t i = 0; i < seen.size(); ++i)
      if (seen[i] != i) return false;
  }
  for (const auto& c : a.columns) {
    bool any = false;
    for (const auto& cell : c.cells) any = any || cell.has_value();
    if (!any) return false;
  }
  return true;
}

Outcome alignment_properties() {
  Outcome o;
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    const StoryOutline x = random_outline(rng, 1, 10);
    const std::vector<StoryOutline> pair{x, x};
    const Alignment a = align(pair);
    bool identity = a.columns.size() == x.stages.size();
    for (std::size_t c = 0; identity && c < a.columns.size(); ++c)
      identity = a.columns[c].cells == std::vector<std::optional<std::size_t>>{c, c};
    if (!identity) o.fail("align(o, o) is not the identity");
    const std::size_t k = 2 + static_cast<std::size_t>(i % 4);
    const std::vector<StoryOutline> same(k, x);
    const PatternSkeleton sk = generalize(same);
    bool kept = sk.stages.size() == x.stages.size();
    for (std::size_t s = 0; kept && s < sk.stages.size(); ++s)
      kept = sk.stages[s].label == x.stages[s].label && sk.stages[s].features == x.stages[s].features;
    if (!kept) o.fail("generalize on identical outlines changed the structure");
  }
  int fuzzed = 0;
  for (; fuzzed < 500; ++fuzzed) {
    std::vector<StoryOutline> pair{random_outline(rng, 1, 12), random_outline(rng, 1, 12)};
    if (fuzzed % 2) pair[1].stages.insert(pair[1].stages.begin(), pair[0].stages.begin(),
                                          pair[0].stages.begin() + static_cast<long>(pair[0].stages.size() / 2));
    if (!order_preserved(align(pair), pair)) o.fail("order not preserved on fuzzed pair " + std::to_string(fuzzed));
  }

  auto st = [](std::string label, std::string desc, const char* f) { return OutlineStage{std::move(label), std::move(desc), {parse_term(f)}}; };
  const OutlineStage a = st("Opening", "the hero leaves home at dawn", "protagonist");
  const OutlineStage c = st("Ending", "the hero returns home changed", "resolution");
  const std::vector<StoryOutline> hand{
      {"o1", 1, {a, st("Storm", "thunder breaks over harbor walls", "ally"), c}},
      {"o2", 2, {a, st("Feast", "merchants quarrel about spices", "ally"), c}},
      {"o3", 3, {a, st("Duel", "swords clash beneath moonlight", "ally"), c}},
  };
  using Col = std::vector<std::optional<std::size_t>>;
  const std::vector<Col> want{{0, 0, 0}, {1, std::nullopt, std::nullopt}, {std::nullopt, 1, std::nullopt},
                              {std::nullopt, std::nullopt, 1}, {2, 2, 2}};
  const Alignment got = align(hand);
  std::vector<Col> cols;
  for (const auto& col : got.columns) cols.push_back(col.cells);
  if (cols != want) o.fail("hand-built fixture columns differ");
  if (generalize(hand).stages.size() != 2) o.fail("hand-built fixture does not keep 2 stages");
  if (o.pass) o.detail = "identity and k-copy checks on 100 outlines, " + std::to_string(fuzzed) +
                         " fuzzed pairs order-preserving, hand fixture exact";
  return o;
}

// ---- 5 ------------------------------------------------------------------------

std::string run_capture(const std::string& cmd, int& status) {
  std::string out;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) {
    status = -1;
    return out;
  }
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, p)) > 0;) out.append(buf, n);
  status = ::pclose(p);
  return out;
}

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) h = (h ^ ch) * 1099511628211ull;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// recorded draft response for stage k of an n-stage genre, read straight from the fixture file
std::map<int, std::string> recorded_drafts(const std::string& genre_name, int n) {
  std::map<int, std::string> out;
  std::istringstream lines(read_file(kSource + "/fixtures/bundled.jsonl"));
  for (std::string line; std::getline(lines, line);) {
    if (line.empty()) continue;
    const json r = json::parse(line);
    const std::string u = r["request"]["messages"].back()["content"];
    if (u.find("Genre: " + genre_name + ".") == std::string::npos || u.find("Write the next event") == std::string::npos)
      continue;
    for (int k = 1; k <= n; ++k)
      if (u.find("Current stage (" + std::to_string(k) + " of " + std::to_string(n) + ")") != std::string::npos)
        out[k] = r["response"];
  }
  return out;
}

Outcome replay_determinism() {
  Outcome o;
  std::string summary;
  for (const auto& [pattern, genre_name, n] : {std::tuple<std::string, std::string, int>{"mystery", "Mystery", 9},
                                                {"satire", "Satire", 8}}) {
    const auto drafts = recorded_drafts(genre_name, n);
    std::set<std::string> hashes;
    for (int run = 0; run < 3; ++run) {
      TempDir store;
      int status = 0;
      const std::string cmd = std::string("'") + GENRELOOM_CLI + "' --transport replay --fixtures '" + kSource +
                              "/fixtures/bundled.jsonl' --store '" + store.path().string() +
                              "' compose --auto --pattern " + pattern + " --premise-file '" + kSource +
                              "/fixtures/premise-eira.txt' 2>/dev/null";
      const std::string out = run_capture(cmd, status);
      if (status != 0) {
        o.fail(pattern + " run " + std::to_string(run) + " exited with " + std::to_string(status));
        continue;
      }
      hashes.insert(fnv1a(out));
      const Story s = story_from_json(json::parse(out));
      if (static_cast<int>(s.events.size()) != n) o.fail(pattern + ": " + std::to_string(s.events.size()) + " events");
      for (int k = 1; k <= std::min<int>(n, static_cast<int>(s.events.size())); ++k) {
        if (!drafts.count(k) || s.events[k - 1] != text::trim(drafts.at(k))) o.fail(pattern + " event " + std::to_string(k) + " out of stage order");
      }
      if (s.title.empty() || text::word_count(s.title) > 12) o.fail(pattern + " title '" + s.title + "'");
      if (s.summary.empty()) o.fail(pattern + " summary empty");
    }
    if (hashes.size() != 1) o.fail(pattern + ": outputs differ across runs");
    summary += (summary.empty() ? "" : ", ") + pattern + " " + std::to_string(n) + " events hash " +
               (hashes.empty() ? std::string("-") : *hashes.begin());
  }
  if (o.pass) o.detail = summary + " (3 runs each)";
  return o;
}

// ---- 6 ------------------------------------------------------------------------

enum class Fault { none, provider, short_reply };

Outcome state_machine() {
  Outcome o;
  Fault fault = Fault::none;
  int serial = 0;
  auto backend = std::make_shared<FnBackend>([&](const ChatTranscript& t) -> BackendReply {
    if (fault == Fault::provider) return http(400, "injected");
    if (fault == Fault::short_reply) return ok("x");
    const std::string u = last_user(t);
    if (u.find("Propose a title") != std::string::npos) return ok("Title " + std::to_string(++serial));
    if (u.find("Summarize this story") != std::string::npos) return ok("One. Two. Three.");
    return ok("Event " + std::to_string(++serial) + " begins. It ends.");
  });
  GatewayOptions gopt;
  gopt.sleep = [](std::chrono::milliseconds) {};
  Gateway gateway(gopt, backend, nullptr);
  int stored = 0;
  Composer composer(
      gateway, default_registry(),
      [](const std::string& id) -> std::optional<GenrePattern> {
        if (const auto* p = default_registry().find_builtin(id)) return *p;
        return std::nullopt;
      },
      [&](const Story&) { return std::to_string(++stored); });

  std::mt19937_64 rng(4242);
  const auto& patterns = default_registry().builtin_patterns();
  long ops = 0, illegal = 0, faults = 0, completed = 0;
  enum Op { draft, regen, accept, finalize };

  // reference invariants, written here rather than taken from session_violations
  auto invariant_breaks = [](const CompositionSession& s, int n) -> std::string {
    for (std::size_t i = 0; i < s.events.size(); ++i) {
      const auto& e = s.events[i];
      if (e.stage_index != static_cast<int>(i) + 1) return "stage index";
      if (e.revision < 1 || e.revision > 11) return "revision range";
      if (e.text.empty()) return "empty event";
    }
    if (s.cursor < 1 || s.cursor > n) return "cursor range";
    const auto events = static_cast<int>(s.events.size());
    switch (s.status) {
      case SessionStatus::drafting:
        if (events != s.cursor - 1) return "drafting event count";
        if (s.title || s.summary) return "early title";
        break;
      case SessionStatus::reviewing:
        if (events != s.cursor) return "reviewing event count";
        if (s.title || s.summary) return "early title";
        break;
      case SessionStatus::complete:
        if (events != n || !s.title || !s.summary || !s.story_id) return "incomplete completion";
        break;
    }
    return {};
  };

  for (int seq = 0; seq < 10000 && o.pass; ++seq) {
    const auto& p = patterns[rng() % patterns.size()];
    const int n = static_cast<int>(p.stage_count());
    CompositionSession s = composer.create_session("A premise for run " + std::to_string(seq) + ".", p.id);
    const int len = 1 + static_cast<int>(rng() % 40);
    for (int step = 0; step < len && o.pass; ++step) {
      const int r = static_cast<int>(rng() % 100);
      const Op op = r < 40 ? draft : r < 55 ? regen : r < 92 ? accept : finalize;
      const int fr = static_cast<int>(rng() % 100);
      fault = fr < 3 ? Fault::provider : fr < 5 ? Fault::short_reply : Fault::none;
      const std::optional<std::string> suggestion =
          rng() % 3 == 0 ? std::optional<std::string>("try " + std::to_string(step)) : std::nullopt;

      // expected outcome from the transition table
      std::optional<ErrorCode> expect;
      const bool reviewing = s.status == SessionStatus::reviewing;
      switch (op) {
        case draft:
          if (s.status != SessionStatus::drafting) expect = ErrorCode::invalid_state;
          break;
        case regen:
          if (!reviewing) expect = ErrorCode::invalid_state;
          else if (s.events.back().revision >= 11) expect = ErrorCode::revision_limit;
          break;
        case accept:
          if (!reviewing) expect = ErrorCode::invalid_state;
          break;
        case finalize:
          if (!reviewing || s.cursor != n) expect = ErrorCode::invalid_state;
          break;
      }
      const bool calls_model = !expect && (op != accept || s.cursor == n);
      if (calls_model && fault != Fault::none) {
        expect = fault == Fault::provider ? ErrorCode::provider_error : ErrorCode::length_violation;
        ++faults;
      }

      const CompositionSession before = s;
      std::optional<ErrorCode> got;
      std::optional<Story> story;
      try {
        switch (op) {
          case draft: composer.draft_stage(s, suggestion); break;
          case regen: composer.regenerate(s, suggestion); break;
          case accept: story = composer.accept(s); break;
          case finalize: story = composer.finalize(s); break;
        }
      } catch (const Error& e) {
        got = e.code();
      }
      ++ops;
      if (got != expect) {
        o.fail("sequence " + std::to_string(seq) + " step " + std::to_string(step) + ": expected " +
               (expect ? std::string(error_token(*expect)) : "success") + ", got " +
               (got ? std::string(error_token(*got)) : "success"));
        break;
      }
      if (got) {
        if (!(s == before)) o.fail("failed operation changed the session");
        if (*got == ErrorCode::invalid_state || *got == ErrorCode::revision_limit) ++illegal;
      } else {
        switch (op) {
          case draft:
            if (s.status != SessionStatus::reviewing || s.events.back().revision != 1 ||
                s.events.back().suggestion != suggestion)
              o.fail("draft postcondition");
            break;
          case regen:
            if (s.events.back().revision != before.events.back().revision + 1) o.fail("regenerate postcondition");
            break;
          case accept:
            if (before.cursor < n ? (s.cursor != before.cursor + 1 || s.status != SessionStatus::drafting || story)
                                  : (s.status != SessionStatus::complete || !story ||
                                     static_cast<int>(story->events.size()) != n))
              o.fail("accept postcondition");
            break;
          case finalize:
            if (s.status != SessionStatus::complete || !story) o.fail("finalize postcondition");
            break;
        }
        if (s.status == SessionStatus::complete) ++completed;
      }
      if (const auto why = invariant_breaks(s, n); !why.empty()) o.fail("invariant broken: " + why);
      if (!session_violations(s, static_cast<std::size_t>(n)).empty()) o.fail("session_violations reports a problem");
    }
  }
  if (o.pass)
    o.detail = "10000 sequences, " + std::to_string(ops) + " operations (" + std::to_string(illegal) + " illegal, " +
               std::to_string(faults) + " injected faults, " + std::to_string(completed) + " completions)";
  return o;
}

// ---- 7 ------------------------------------------------------------------------

bool any_temp(const fs::path& base) {
  for (const auto& e : fs::recursive_directory_iterator(base))
    if (e.path().extension() == ".tmp") return true;
  return false;
}

Outcome crash_safety() {
  Outcome o;
  std::mt19937_64 rng(777);
  int trials = 0;
  for (; trials < 100; ++trials) {
    TempDir dir;
    std::vector<std::tuple<RecordKind, RecordId, json>> prior;
    const RecordKind kind = kAllKinds[rng() % std::size(kAllKinds)];
    {
      Store st(dir.path());
      for (int i = 1 + static_cast<int>(rng() % 5); i > 0; --i) {
        const RecordKind k = i == 1 ? kind : kAllKinds[rng() % std::size(kAllKinds)];
        json rec{{"trial", trials}, {"i", i}, {"blob", std::string(rng() % 2000, 'x')}};
        prior.emplace_back(k, st.put(k, rec), rec);
      }
    }
    RecordId doomed = 0;
    {
      StoreOptions opt;
      opt.crash_hook = [](CommitPoint p) {
        if (p == CommitPoint::temp_written) throw SimulatedCrash();
      };
      Store st(dir.path(), opt);
      doomed = st.next_id(kind);
      bool crashed = false;
      try {
        st.put(kind, json{{"doomed", true}});
      } catch (const SimulatedCrash&) {
        crashed = true;
      }
      if (!crashed) o.fail("crash hook did not fire");
    }
    try {
      Store st(dir.path());
      for (const auto& [k, id, rec] : prior)
        if (st.get(k, id) != rec) o.fail("prior record changed in trial " + std::to_string(trials));
      if (st.contains(kind, doomed)) o.fail("partial record visible in trial " + std::to_string(trials));
      if (any_temp(dir.path())) o.fail("temp file left behind in trial " + std::to_string(trials));
      if (!Store::check(dir.path()).empty()) o.fail("consistency check failed in trial " + std::to_string(trials));
      if (st.put(kind, json{{"after", true}}) <= doomed) o.fail("id reused after crash");
    } catch (const Error& e) {
      o.fail("store unreadable after crash: " + std::string(e.what()));
    }
  }
  // session revisions go through the same commit path
  int session_trials = 0;
  for (; session_trials < 50; ++session_trials) {
    TempDir dir;
    CompositionSession saved;
    {
      Store st(dir.path());
      SessionRepository repo(st);
      CompositionSession s;
      s.premise = "premise " + std::to_string(session_trials);
      s.pattern_id = "mystery";
      saved = repo.create(s);
      saved.events.push_back({1, "First event happens.", std::nullopt, 1, std::nullopt});
      saved.status = SessionStatus::reviewing;
      repo.save(saved);
    }
    {
      StoreOptions opt;
      opt.crash_hook = [](CommitPoint p) {
        if (p == CommitPoint::temp_written) throw SimulatedCrash();
      };
      Store st(dir.path(), opt);
      SessionRepository repo(st);
      CompositionSession next = saved;
      next.events.back().revision = 2;
      next.events.back().text = "A different first event.";
      try {
        repo.save(next);
        o.fail("crash hook did not fire for a session revision");
      } catch (const SimulatedCrash&) {
      }
    }
    Store st(dir.path());
    SessionRepository repo(st);
    if (!(repo.get(saved.id) == saved)) o.fail("session revision lost in trial " + std::to_string(session_trials));
    if (any_temp(dir.path())) o.fail("temp file left behind by session trial " + std::to_string(session_trials));
  }
  if (o.pass)
    o.detail = std::to_string(trials) + " record and " + std::to_string(session_trials) +
               " session-revision crash trials between temp write and rename";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
    double budget_s;  // 0 when the criterion sets no limit
  };
  const Criterion criteria[] = {
      {"canonical-data", canonical_data, 1},         {"output1-parser", output1_parser, 1},
      {"lgg-oracle", lgg_oracle, 60},                {"alignment-properties", alignment_properties, 30},
      {"replay-determinism", replay_determinism, 10}, {"state-machine", state_machine, 60},
      {"store-crash-safety", crash_safety, 0},
  };
  bool all = true;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.fail(std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.fail("took " + std::to_string(secs) + "s, budget " + std::to_string(c.budget_s) + "s");
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2fs", secs);
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << c.name << " (" << timing << "): " << o.detail << "\n";
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
