#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "genreloom/gateway.hpp"
#include "genreloom/term.hpp"

namespace testing_support {

namespace fs = std::filesystem;
using genreloom::BackendReply;
using genreloom::ChatBackend;
using genreloom::ChatTranscript;
using genreloom::Role;
using genreloom::Term;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("genreloom-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

inline std::string last_user(const ChatTranscript& t) {
  for (auto it = t.messages.rbegin(); it != t.messages.rend(); ++it)
    if (it->role == Role::user) return it->content;
  return {};
}

/// Backend driven by a callback; counts calls.
class FnBackend final : public ChatBackend {
 public:
  using Fn = std::function<BackendReply(const ChatTranscript&)>;
  explicit FnBackend(Fn fn) : fn_(std::move(fn)) {}
  BackendReply send(const ChatTranscript& t) override {
    ++calls;
    std::lock_guard lk(mu_);
    return fn_(t);
  }
  std::atomic<int> calls{0};

 private:
  std::mutex mu_;
  Fn fn_;
};

inline BackendReply ok(std::string text) { return {BackendReply::Outcome::ok, 200, std::move(text)}; }
inline BackendReply http(int status, std::string body = "error") {
  return {BackendReply::Outcome::http_error, status, std::move(body)};
}

/// Well-formed composer answers: two-sentence events, a short title and a
/// three-sentence summary.
inline BackendReply story_reply(const ChatTranscript& t) {
  const std::string u = last_user(t);
  if (u.find("Propose a title") != std::string::npos) return ok("The Quiet Tower");
  if (u.find("Summarize this story") != std::string::npos)
    return ok("A young sorceress arrives at a tower. She learns its secrets. She leaves wiser.");
  static std::atomic<int> n{0};
  return ok("Something happens in scene " + std::to_string(++n) + ". The heroine reacts to it.");
}

// ---- term oracles -------------------------------------------------------------
// Written independently of the library: plain structural recursion over
// the public Term accessors.

inline bool oracle_match(const Term& g, const Term& s, std::map<std::string, Term>& bind) {
  if (g.is_variable()) {
    auto it = bind.find(g.symbol());
    if (it == bind.end()) {
      bind.emplace(g.symbol(), s);
      return true;
    }
    return it->second == s;
  }
  if (g.kind() != s.kind() || g.symbol() != s.symbol() || g.arity() != s.arity()) return false;
  for (std::size_t i = 0; i < g.arity(); ++i)
    if (!oracle_match(g.args()[i], s.args()[i], bind)) return false;
  return true;
}

inline bool oracle_subsumes(const Term& g, const Term& s) {
  std::map<std::string, Term> bind;
  return oracle_match(g, s, bind);
}

inline bool oracle_variant(const Term& a, const Term& b) { return oracle_subsumes(a, b) && oracle_subsumes(b, a); }

struct TermGen {
  std::mt19937_64 rng;
  explicit TermGen(std::uint64_t seed) : rng(seed) {}

  // functors f/1, g/2, h/3, k/2; constants a, b, c
  Term ground(int depth) {
    static const char* consts[] = {"a", "b", "c"};
    static const std::pair<const char*, int> functors[] = {{"f", 1}, {"g", 2}, {"h", 3}, {"k", 2}};
    std::uniform_int_distribution<int> pick(0, 99);
    if (depth == 0 || pick(rng) < 40) return Term::constant(consts[pick(rng) % 3]);
    const auto& [name, arity] = functors[pick(rng) % 4];
    std::vector<Term> args;
    for (int i = 0; i < arity; ++i) args.push_back(ground(depth - 1));
    return Term::compound(name, std::move(args));
  }

  /// A ground term that shares structure with `t` now and then.
  Term mutate(const Term& t, int depth) {
    std::uniform_int_distribution<int> pick(0, 99);
    if (pick(rng) < 30 || depth == 0) return pick(rng) < 50 ? t : ground(depth);
    if (!t.is_compound()) return ground(depth);
    std::vector<Term> args;
    for (const auto& a : t.args()) args.push_back(mutate(a, depth - 1));
    return Term::compound(t.symbol(), std::move(args));
  }
};

}  // namespace testing_support
