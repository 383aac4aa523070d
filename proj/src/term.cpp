#include "genreloom/term.hpp"

#include <cctype>
#include <map>
#include <unordered_map>

#include "genreloom/error.hpp"

namespace genreloom {

using nlohmann::json;

namespace {

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}

bool variable_start(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0 || c == '_'; }

bool constant_start(char c) {
  return std::islower(static_cast<unsigned char>(c)) != 0 || std::isdigit(static_cast<unsigned char>(c)) != 0;
}

class TermParser {
 public:
  explicit TermParser(std::string_view src) : src_(src) {}

  Term parse_all() {
    Term t = parse();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return t;
  }

 private:
  Term parse() {
    skip_ws();
    if (pos_ >= src_.size()) fail("expected a term");
    const char c = src_[pos_];
    if (!variable_start(c) && !constant_start(c)) fail("expected an identifier");
    const bool is_var = variable_start(c);
    const std::size_t start = pos_;
    while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
    std::string name(src_.substr(start, pos_ - start));
    if (is_var) return Term::variable(std::move(name));
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      ++pos_;
      std::vector<Term> args;
      args.push_back(parse());
      skip_ws();
      while (pos_ < src_.size() && src_[pos_] == ',') {
        ++pos_;
        args.push_back(parse());
        skip_ws();
      }
      if (pos_ >= src_.size() || src_[pos_] != ')') fail("expected ',' or ')'");
      ++pos_;
      return Term::compound(std::move(name), std::move(args));
    }
    return Term::constant(std::move(name));
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])) != 0) ++pos_;
  }

  [[noreturn]] void fail(const char* what) const {
    throw Error(ErrorCode::parse_failure,
                std::string("term: ") + what + " at offset " + std::to_string(pos_) + " in '" + std::string(src_) + "'",
                json{{"offset", pos_}, {"input", std::string(src_)}});
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

void print(const Term& t, std::string& out) {
  out += t.symbol();
  if (!t.is_compound()) return;
  out.push_back('(');
  bool first = true;
  for (const Term& a : t.args()) {
    if (!first) out += ", ";
    first = false;
    print(a, out);
  }
  out.push_back(')');
}

Term rename(const Term& t, std::map<std::string, std::string>& names) {
  switch (t.kind()) {
    case Term::Kind::variable: {
      auto [it, inserted] = names.try_emplace(t.symbol());
      if (inserted) it->second = "X" + std::to_string(names.size());
      return Term::variable(it->second);
    }
    case Term::Kind::constant:
      return t;
    case Term::Kind::compound: {
      std::vector<Term> args;
      args.reserve(t.arity());
      for (const Term& a : t.args()) args.push_back(rename(a, names));
      return Term::compound(t.symbol(), std::move(args));
    }
  }
  return t;
}

bool alpha(const Term& a, const Term& b, std::map<std::string, std::string>& fwd,
           std::map<std::string, std::string>& bwd) {
  if (a.kind() != b.kind()) return false;
  if (a.is_variable()) {
    auto [f, fnew] = fwd.try_emplace(a.symbol(), b.symbol());
    auto [r, rnew] = bwd.try_emplace(b.symbol(), a.symbol());
    return f->second == b.symbol() && r->second == a.symbol();
  }
  if (a.symbol() != b.symbol() || a.arity() != b.arity()) return false;
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (!alpha(a.args()[i], b.args()[i], fwd, bwd)) return false;
  }
  return true;
}

bool match(const Term& g, const Term& s, std::unordered_map<std::string, const Term*>& binding) {
  if (g.is_variable()) {
    auto [it, inserted] = binding.try_emplace(g.symbol(), &s);
    return inserted || *it->second == s;
  }
  if (g.kind() != s.kind() || g.symbol() != s.symbol() || g.arity() != s.arity()) return false;
  for (std::size_t i = 0; i < g.arity(); ++i) {
    if (!match(g.args()[i], s.args()[i], binding)) return false;
  }
  return true;
}

// Fresh variables carry a prefix that the text grammar cannot produce, so
// they never collide with variables already present in the inputs.
class AntiUnifier {
 public:
  Term run(const Term& s, const Term& t) {
    if (s == t) return s;
    if (s.is_compound() && t.is_compound() && s.symbol() == t.symbol() && s.arity() == t.arity()) {
      std::vector<Term> args;
      args.reserve(s.arity());
      for (std::size_t i = 0; i < s.arity(); ++i) args.push_back(run(s.args()[i], t.args()[i]));
      return Term::compound(s.symbol(), std::move(args));
    }
    std::string key = to_string(s);
    key.push_back('\0');
    key += to_string(t);
    auto [it, inserted] = memo_.try_emplace(std::move(key));
    if (inserted) it->second = "\x01G" + std::to_string(memo_.size());
    return Term::variable(it->second);
  }

 private:
  std::unordered_map<std::string, std::string> memo_;
};

}  // namespace

Term Term::variable(std::string name) {
  if (name.empty()) throw Error(ErrorCode::validation, "variable name must not be empty");
  return Term(Kind::variable, std::move(name), {});
}

Term Term::constant(std::string symbol) {
  if (symbol.empty()) throw Error(ErrorCode::validation, "constant symbol must not be empty");
  return Term(Kind::constant, std::move(symbol), {});
}

Term Term::compound(std::string functor, std::vector<Term> args) {
  if (functor.empty()) throw Error(ErrorCode::validation, "functor must not be empty");
  if (args.empty()) throw Error(ErrorCode::validation, "compound term '" + functor + "' needs at least one argument");
  return Term(Kind::compound, std::move(functor), std::move(args));
}

bool Term::is_ground() const noexcept {
  if (is_variable()) return false;
  for (const Term& a : args_) {
    if (!a.is_ground()) return false;
  }
  return true;
}

std::size_t Term::depth() const noexcept {
  std::size_t d = 0;
  for (const Term& a : args_) d = std::max(d, a.depth() + 1);
  return d;
}

std::size_t Term::size() const noexcept {
  std::size_t n = 1;
  for (const Term& a : args_) n += a.size();
  return n;
}

std::string to_string(const Term& t) {
  std::string out;
  print(t, out);
  return out;
}

Term parse_term(std::string_view text) { return TermParser(text).parse_all(); }

json to_json(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::variable: return json{{"var", t.symbol()}};
    case Term::Kind::constant: return json{{"const", t.symbol()}};
    case Term::Kind::compound: {
      json args = json::array();
      for (const Term& a : t.args()) args.push_back(to_json(a));
      return json{{"compound", t.symbol()}, {"args", std::move(args)}};
    }
  }
  return nullptr;
}

Term term_from_json(const json& j) {
  if (j.is_string()) return parse_term(j.get<std::string>());
  if (!j.is_object()) throw Error(ErrorCode::validation, "term must be an object or a string");
  if (j.contains("var")) return Term::variable(j.at("var").get<std::string>());
  if (j.contains("const")) return Term::constant(j.at("const").get<std::string>());
  if (j.contains("compound")) {
    if (!j.contains("args") || !j.at("args").is_array()) {
      throw Error(ErrorCode::validation, "compound term needs an 'args' list");
    }
    std::vector<Term> args;
    for (const auto& a : j.at("args")) args.push_back(term_from_json(a));
    return Term::compound(j.at("compound").get<std::string>(), std::move(args));
  }
  throw Error(ErrorCode::validation, "term object needs one of var, const, compound");
}

Term canonicalize_variables(const Term& t) {
  std::map<std::string, std::string> names;
  return rename(t, names);
}

bool alpha_equivalent(const Term& a, const Term& b) {
  std::map<std::string, std::string> fwd;
  std::map<std::string, std::string> bwd;
  return alpha(a, b, fwd, bwd);
}

bool subsumes(const Term& general, const Term& specific) {
  std::unordered_map<std::string, const Term*> binding;
  return match(general, specific, binding);
}

Term lgg2(const Term& s, const Term& t) {
  AntiUnifier au;
  return canonicalize_variables(au.run(s, t));
}

Term lggN(std::span<const Term> terms) {
  if (terms.empty()) throw Error(ErrorCode::empty_input, "lggN needs at least one term");
  Term acc = canonicalize_variables(terms.front());
  for (std::size_t i = 1; i < terms.size(); ++i) acc = lgg2(acc, terms[i]);
  return acc;
}

}  // namespace genreloom
