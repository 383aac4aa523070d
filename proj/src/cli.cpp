#include "genreloom/cli.hpp"

#include <CLI11.hpp>
#include <csignal>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <sstream>
#include <thread>

#include "genreloom/app.hpp"
#include "genreloom/server.hpp"
#include "genreloom/text.hpp"

namespace genreloom {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::provider_error:
    case ErrorCode::retries_exhausted:
    case ErrorCode::fixture_miss:
    case ErrorCode::parse_failure:
    case ErrorCode::length_violation: return kExitProvider;
    default: return kExitValidation;
  }
}

namespace {

std::string read_text_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::validation, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const fs::path& p) {
  try {
    return json::parse(read_text_file(p));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::validation, p.string() + " is not valid JSON: " + e.what());
  }
}

void write_text_file(const fs::path& p, const std::string& bytes) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::validation, "cannot write " + p.string());
}

void emit(std::ostream& out, const std::string& bytes, const std::string& path) {
  if (path.empty() || path == "-") {
    out << bytes;
  } else {
    write_text_file(path, bytes);
  }
}

struct Globals {
  std::string config;
  std::string store;
  std::string transport;
  std::string fixtures;
  std::string journal;
  std::string base_url;
  std::size_t cap = 0;
};

AppConfig config_of(const Globals& g, std::optional<std::string> host = std::nullopt, std::optional<int> port = std::nullopt) {
  ConfigOverrides o;
  if (!g.config.empty()) o.config_file = g.config;
  if (!g.store.empty()) o.store = g.store;
  if (!g.transport.empty()) o.transport = g.transport;
  if (!g.fixtures.empty()) o.fixtures = g.fixtures;
  if (!g.journal.empty()) o.journal = g.journal;
  if (!g.base_url.empty()) o.base_url = g.base_url;
  if (g.cap > 0) o.concurrency_cap = g.cap;
  o.host = std::move(host);
  o.port = port;
  return resolve_config(o, process_env());
}

struct ComposeArgs {
  std::string premise;
  std::string premise_file;
  std::string pattern;
  std::string session;
  bool auto_mode = false;
  std::string out;
};

void show_event(std::ostream& err, const GenrePattern& p, const StoryEvent& e) {
  const Stage& st = p.stages[static_cast<std::size_t>(e.stage_index - 1)];
  err << "\n== Stage " << e.stage_index << "/" << p.stages.size() << ": " << st.name << " (draft " << e.revision
      << ")\n"
      << e.text << "\n";
}

int compose(App& app, const ComposeArgs& a, std::istream& in, std::ostream& out, std::ostream& err) {
  CompositionSession s;
  if (!a.session.empty()) {
    s = app.session(a.session);
  } else {
    if (a.pattern.empty()) throw Error(ErrorCode::validation, "--pattern is required");
    std::string premise = a.premise;
    if (!a.premise_file.empty()) premise = read_text_file(a.premise_file);
    s = app.create_session(premise, a.pattern);
    err << "session " << s.id << "\n";
  }
  const GenrePattern p = app.patterns().get(s.pattern_id);
  std::optional<Story> story;
  if (s.status == SessionStatus::complete && s.story_id) story = app.story(*s.story_id);

  while (!story) {
    if (s.status == SessionStatus::drafting) {
      auto [e, next] = app.draft(s.id, std::nullopt);
      s = std::move(next);
      if (a.auto_mode) {
        err << "stage " << e.stage_index << "/" << p.stages.size() << " drafted\n";
      } else {
        show_event(err, p, e);
      }
    }
    if (a.auto_mode) {
      story = app.accept(s.id).story;
      s = app.session(s.id);
      continue;
    }
    err << "[a]ccept, [r]egenerate [suggestion], [q]uit > " << std::flush;
    std::string line;
    if (!std::getline(in, line)) line = "q";
    line = text::trim(line);
    if (line == "a" || line == "accept") {
      auto r = app.accept(s.id);
      s = std::move(r.session);
      story = std::move(r.story);
    } else if (line == "q" || line == "quit") {
      err << "session " << s.id << " saved; resume with --session " << s.id << "\n";
      return kExitOk;
    } else if (line == "r" || line.rfind("r ", 0) == 0 || line.rfind("regenerate", 0) == 0) {
      const auto space = line.find(' ');
      std::optional<std::string> suggestion;
      if (space != std::string::npos && !text::trim(line.substr(space)).empty()) suggestion = text::trim(line.substr(space));
      try {
        auto [e, next] = app.regenerate(s.id, suggestion);
        s = std::move(next);
        show_event(err, p, e);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::revision_limit) throw;
        err << e.what() << "\n";
      }
    } else {
      err << "unknown command '" << line << "'\n";
    }
  }
  emit(out, serialize_story(*story), a.out);
  err << "story " << story->id << ": " << story->title << "\n";
  return kExitOk;
}

int serve(App& app, std::ostream& err) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  HttpService service(app);
  const int port = service.bind(app.config().host, app.config().port);
  if (port < 0) throw Error(ErrorCode::validation, "cannot bind " + app.config().host + ":" + std::to_string(app.config().port));
  err << "listening on http://" << app.config().host << ":" << port << " (transport "
      << to_token(app.config().transport) << ")\n"
      << std::flush;

  std::thread watcher([&] {
    int sig = 0;
    sigwait(&set, &sig);
    service.stop();
  });
  const bool ok = service.run();
  // wake the watcher if the listener ended on its own
  pthread_kill(watcher.native_handle(), SIGTERM);
  watcher.join();
  err << "stopped\n";
  return ok ? kExitOk : kExitValidation;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Genre-pattern interactive story engine", "genreloom"};
  cli.require_subcommand(1);
  Globals g;
  cli.add_option("--config", g.config, "JSON config file");
  cli.add_option("--store", g.store, "Store directory");
  cli.add_option("--transport", g.transport, "live, record or replay")->check(CLI::IsMember({"live", "record", "replay"}));
  cli.add_option("--fixtures", g.fixtures, "Replay fixture file (JSONL)");
  cli.add_option("--journal", g.journal, "Run journal file (JSONL)");
  cli.add_option("--base-url", g.base_url, "OpenAI-compatible API base URL");
  cli.add_option("--cap", g.cap, "Concurrent model requests")->check(CLI::PositiveNumber);

  std::function<int(App&)> action;
  bool needs_app = true;
  std::function<int()> standalone;

  // patterns
  auto* patterns = cli.add_subcommand("patterns", "Builtin and stored genre patterns");
  patterns->require_subcommand(1);
  bool list_json = false;
  auto* plist = patterns->add_subcommand("list", "List patterns");
  plist->add_flag("--json", list_json, "Print JSON");
  plist->callback([&] {
    action = [&](App& app) {
      const auto all = app.patterns().list();
      if (list_json) {
        json j = json::array();
        for (const auto& p : all) j.push_back(to_json(p));
        out << j.dump(2) << "\n";
      } else {
        for (const auto& p : all) {
          out << p.id << "\t" << p.genre.token() << "\t" << p.stages.size() << "\t" << to_token(p.provenance) << "\t"
              << p.title << "\n";
        }
      }
      return kExitOk;
    };
  });
  std::string pattern_id;
  auto* pshow = patterns->add_subcommand("show", "Print one pattern");
  pshow->add_option("id", pattern_id, "Pattern id")->required();
  pshow->callback([&] {
    action = [&](App& app) {
      out << serialize_pattern(app.patterns().get(pattern_id));
      return kExitOk;
    };
  });
  std::string import_file;
  auto* pimport = patterns->add_subcommand("import", "Store a pattern from a JSON file");
  pimport->add_option("file", import_file, "Pattern JSON")->required();
  pimport->callback([&] {
    action = [&](App& app) {
      const GenrePattern p = app.patterns().add(pattern_from_json(read_json_file(import_file)));
      out << p.id << "\n";
      return kExitOk;
    };
  });
  auto* pdelete = patterns->add_subcommand("delete", "Delete a stored pattern");
  pdelete->add_option("id", pattern_id, "Pattern id")->required();
  pdelete->callback([&] {
    action = [&](App& app) {
      app.patterns().remove(pattern_id);
      return kExitOk;
    };
  });

  // genres
  auto* genres = cli.add_subcommand("genres", "Genre profiles usable for exemplars and extraction");
  genres->callback([&] {
    action = [&](App& app) {
      for (const auto& p : app.registry().fundamental_profiles()) out << p.genre.token() << "\t" << p.definition << "\n";
      for (const auto& p : app.registry().imdb_seed_profiles()) out << p.genre.token() << "\t" << p.definition << "\n";
      return kExitOk;
    };
  });

  // exemplars
  std::vector<std::string> genre_names;
  std::string out_file;
  auto* exemplars = cli.add_subcommand("exemplars", "Exemplar narratives");
  exemplars->require_subcommand(1);
  auto* ereq = exemplars->add_subcommand("request", "Ask the model for three titles per genre");
  ereq->add_option("--genre", genre_names, "Genre (repeatable; default: the five fundamental genres)");
  ereq->add_option("--out", out_file, "Output file");
  ereq->callback([&] {
    action = [&](App& app) {
      std::vector<Genre> gs;
      for (const auto& n : genre_names) gs.push_back(Genre::parse(n));
      std::string id;
      json j = to_json(app.request_exemplars(gs, &id));
      j["id"] = id;
      emit(out, j.dump(2) + "\n", out_file);
      return kExitOk;
    };
  });

  // outline
  std::string title, year, genre_name;
  auto* outline = cli.add_subcommand("outline", "Outline one narrative as stages with features");
  outline->add_option("--title", title, "Narrative title")->required();
  outline->add_option("--year", year, "Year as written");
  outline->add_option("--genre", genre_name, "Genre")->required();
  outline->add_option("--out", out_file, "Output file");
  outline->callback([&] {
    action = [&](App& app) {
      emit(out, to_json(app.outline(title, year, Genre::parse(genre_name))).dump(2) + "\n", out_file);
      return kExitOk;
    };
  });

  // extract
  std::vector<std::string> titles, outline_files;
  std::string exemplar_file, mode = "deterministic";
  auto* extract = cli.add_subcommand("extract", "Construct a genre pattern");
  extract->add_option("--genre", genre_name, "Genre")->required();
  auto* t_opt = extract->add_option("--titles", titles, "\"Title (year)\" entries");
  auto* o_opt = extract->add_option("--outline-files", outline_files, "Outline JSON files")->check(CLI::ExistingFile);
  auto* x_opt = extract->add_option("--exemplars", exemplar_file, "Exemplar set JSON")->check(CLI::ExistingFile);
  t_opt->excludes(o_opt)->excludes(x_opt);
  o_opt->excludes(x_opt);
  extract->add_option("--mode", mode, "deterministic or llm_assisted")
      ->check(CLI::IsMember({"deterministic", "llm_assisted", "llm-assisted"}));
  extract->add_option("--out", out_file, "Output file");
  extract->callback([&] {
    action = [&](App& app) {
      ExtractionRequest r;
      r.genre = Genre::parse(genre_name);
      r.mode = extraction_mode_from_token(mode);
      for (const auto& t : titles) r.exemplars.push_back(parse_title_spec(t, r.genre));
      for (const auto& f : outline_files) r.outlines.push_back(outline_from_json(read_json_file(f)));
      if (!exemplar_file.empty()) r.exemplars = exemplar_set_from_json(read_json_file(exemplar_file)).of_genre(r.genre);
      if (r.exemplars.empty() && r.outlines.empty()) {
        throw Error(ErrorCode::validation, "give --titles, --outline-files or --exemplars with entries for the genre");
      }
      const GenrePattern p = app.extract(r);
      emit(out, serialize_pattern(p), out_file);
      return kExitOk;
    };
  });

  // compose
  ComposeArgs ca;
  auto* comp = cli.add_subcommand("compose", "Compose a story from a premise");
  auto* pr = comp->add_option("--premise", ca.premise, "Premise text");
  auto* pf = comp->add_option("--premise-file", ca.premise_file, "File holding the premise")->check(CLI::ExistingFile);
  auto* ss = comp->add_option("--session", ca.session, "Resume a session");
  pr->excludes(pf)->excludes(ss);
  pf->excludes(ss);
  comp->add_option("--pattern", ca.pattern, "Pattern id");
  comp->add_flag("--auto", ca.auto_mode, "Accept every draft without suggestions");
  comp->add_option("--out", ca.out, "Story output file (default stdout)");
  comp->callback([&] { action = [&](App& app) { return compose(app, ca, in, out, err); }; });

  // export
  std::string story_id, format = "html", out_dir;
  bool images = false;
  auto* exp = cli.add_subcommand("export", "Export a story as a storyboard");
  exp->add_option("--story", story_id, "Story id")->required();
  exp->add_option("--format", format, "html, markdown or json");
  exp->add_option("--out", out_file, "Output file ('-' for stdout)");
  exp->add_option("--dir", out_dir, "Directory for story-<id>.<ext> (default: current directory)");
  exp->add_flag("--images", images, "Write placeholder panel images next to the export");
  exp->callback([&] {
    action = [&](App& app) {
      const ExportFormat f = export_format_from_token(format);
      StoryboardDocument doc = app.storyboard(story_id);
      const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
      if (images) {
        PlaceholderRenderer r;
        attach_images(doc, r, dir);
      }
      const std::string bytes = export_document(doc, f);
      if (out_file == "-") {
        out << bytes;
      } else {
        const fs::path target = out_file.empty() ? dir / export_filename(doc, f) : fs::path(out_file);
        write_text_file(target, bytes);
        out << target.string() << "\n";
      }
      return kExitOk;
    };
  });

  auto* cons = cli.add_subcommand("consistency", "Per-stage similarity of a story's events to its pattern");
  cons->add_option("--story", story_id, "Story id")->required();
  cons->callback([&] {
    action = [&](App& app) {
      const Story s = app.story(story_id);
      for (const auto& c : consistency_report(s, app.patterns().get(s.pattern_id))) {
        out << c.stage_index << "\t" << c.score << (c.flagged ? "\tflagged" : "") << "\n";
      }
      return kExitOk;
    };
  });

  // serve
  std::string host;
  int port = -1;
  auto* srv = cli.add_subcommand("serve", "Run the HTTP service");
  srv->add_option("--host", host, "Listen address");
  srv->add_option("--port", port, "Listen port (0 = any free port)")->check(CLI::Range(0, 65535));
  srv->callback([&] { action = [&](App& app) { return serve(app, err); }; });

  // store maintenance
  auto* store = cli.add_subcommand("store", "Store maintenance");
  store->require_subcommand(1);
  auto* scheck = store->add_subcommand("check", "Report inconsistencies");
  scheck->callback([&] {
    needs_app = false;
    standalone = [&] {
      const auto problems = Store::check(config_of(g).store);
      for (const auto& p : problems) out << p << "\n";
      return problems.empty() ? kExitOk : kExitValidation;
    };
  });
  auto* srepair = store->add_subcommand("repair", "Rebuild the index and set damaged records aside");
  srepair->callback([&] {
    needs_app = false;
    standalone = [&] {
      for (const auto& a : Store::repair(config_of(g).store)) out << a << "\n";
      return kExitOk;
    };
  });

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      cli.exit(e, out, err);
      return kExitOk;
    }
    err << e.what() << "\n\n" << cli.help();
    return kExitValidation;
  }

  try {
    if (!needs_app) return standalone();
    std::optional<std::string> h;
    std::optional<int> pt;
    if (!host.empty()) h = host;
    if (port >= 0) pt = port;
    App app(config_of(g, h, pt));
    return action(app);
  } catch (const Error& e) {
    err << "error [" << error_token(e.code()) << "]: " << e.what() << "\n";
    if (!e.details().is_null()) err << e.details().dump(2) << "\n";
    return exit_code_of(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace genreloom
