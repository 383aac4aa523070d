// Records the bundled replay fixtures by driving App in record mode against
// a scripted backend. Usage:
//   genreloom_fixture_author <script.json> <output.jsonl> <premise.txt>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "genreloom/app.hpp"
#include "genreloom/curation.hpp"
#include "genreloom/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace genreloom;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Entry {
  std::vector<std::string> needles;
  std::string response;
};

// Answers with the single entry whose needles all occur in the last user
// message. No match or an ambiguous match is a transport error.
class ScriptedBackend final : public ChatBackend {
 public:
  explicit ScriptedBackend(std::vector<Entry> entries) : entries_(std::move(entries)) {}

  BackendReply send(const ChatTranscript& t) override {
    std::string last;
    for (const auto& m : t.messages)
      if (m.role == Role::user) last = m.content;
    const Entry* hit = nullptr;
    for (const auto& e : entries_) {
      bool all = true;
      for (const auto& n : e.needles) all = all && last.find(n) != std::string::npos;
      if (!all) continue;
      if (hit) return {BackendReply::Outcome::transport_error, 0, "ambiguous script match"};
      hit = &e;
    }
    if (!hit) {
      std::cerr << "no script entry for prompt:\n" << last.substr(0, 400) << "\n";
      return {BackendReply::Outcome::transport_error, 0, "no script entry"};
    }
    return {BackendReply::Outcome::ok, 200, hit->response};
  }

 private:
  std::vector<Entry> entries_;
};

std::vector<Entry> load_script(const fs::path& path, const fs::path& root) {
  const json j = json::parse(slurp(path));
  std::vector<Entry> out;
  for (const auto& e : j.at("entries")) {
    Entry entry;
    entry.needles = e.at("needles").get<std::vector<std::string>>();
    entry.response = e.contains("response_file") ? slurp(root / e.at("response_file").get<std::string>())
                                                 : e.at("response").get<std::string>();
    out.push_back(std::move(entry));
  }
  return out;
}

void compose_auto(App& app, const std::string& premise, const std::string& pattern) {
  CompositionSession s = app.create_session(premise, pattern);
  for (;;) {
    app.draft(s.id, std::nullopt);
    AcceptResult r = app.accept(s.id);
    if (r.story) {
      std::cout << pattern << ": \"" << r.story->title << "\", " << r.story->events.size() << " events\n";
      return;
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::cerr << "usage: " << argv[0] << " <script.json> <output.jsonl> <premise.txt>\n";
    return 1;
  }
  const fs::path script = argv[1], output = argv[2], premise_file = argv[3];
  const fs::path root = fs::absolute(script).parent_path().parent_path().parent_path();
  const fs::path store = fs::temp_directory_path() / ("genreloom-author-" + std::to_string(::getpid()));
  try {
    fs::remove(output);
    auto backend = std::make_shared<ScriptedBackend>(load_script(script, root));
    AppConfig cfg;
    cfg.store = store;
    cfg.transport = TransportMode::record;
    cfg.fixtures = output;
    cfg.journal = store / "journal.jsonl";
    App app(cfg, backend);

    const ExemplarSet set = app.request_exemplars({});
    std::cout << "exemplars: " << set.exemplars.size() << "\n";

    const Genre mystery = Genre::parse("mystery");
    ExtractionRequest det{mystery, ExtractionMode::deterministic, set.of_genre(mystery), {}};
    std::cout << "deterministic: " << app.extract(det).stages.size() << " stages\n";
    ExtractionRequest llm{mystery, ExtractionMode::llm_assisted, set.of_genre(mystery), {}};
    std::cout << "llm_assisted: " << app.extract(llm).stages.size() << " stages\n";

    const StoryOutline o = app.outline("The Odyssey", "circa 8th century BCE", Genre::parse("romance"));
    std::cout << "odyssey outline: " << o.stages.size() << " stages\n";

    std::string premise = slurp(premise_file);
    compose_auto(app, premise, "mystery");
    compose_auto(app, premise, "satire");
  } catch (const Error& e) {
    std::cerr << "error [" << error_token(e.code()) << "]: " << e.what() << "\n" << e.details().dump(2) << "\n";
    fs::remove_all(store);
    return 1;
  }
  fs::remove_all(store);
  return 0;
}
