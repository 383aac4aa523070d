#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace genreloom {

/// First-order term: a variable, a constant, or a compound f(t1, ..., tn)
/// with n >= 1.
///
/// Text grammar (used by outlines and the CLI):
///
///     term     := variable | constant | compound
///     variable := [A-Z_][A-Za-z0-9_-]*
///     constant := [a-z0-9][A-Za-z0-9_-]*
///     compound := constant '(' term (',' term)* ')'
///
/// Whitespace between tokens is ignored. JSON form is one of
/// {"var": "X"}, {"const": "a"} or {"compound": "f", "args": [...]}.
class Term {
 public:
  enum class Kind { variable, constant, compound };

  static Term variable(std::string name);
  static Term constant(std::string symbol);
  /// Throws Error(validation) for an empty functor or an empty argument list.
  static Term compound(std::string functor, std::vector<Term> args);

  Kind kind() const noexcept { return kind_; }
  bool is_variable() const noexcept { return kind_ == Kind::variable; }
  bool is_constant() const noexcept { return kind_ == Kind::constant; }
  bool is_compound() const noexcept { return kind_ == Kind::compound; }

  /// Variable name, constant symbol, or functor.
  const std::string& symbol() const noexcept { return symbol_; }
  std::span<const Term> args() const noexcept { return args_; }
  std::size_t arity() const noexcept { return args_.size(); }

  bool is_ground() const noexcept;
  std::size_t depth() const noexcept;  // constants and variables have depth 0
  std::size_t size() const noexcept;   // node count

  friend bool operator==(const Term&, const Term&) = default;

 private:
  Term(Kind kind, std::string symbol, std::vector<Term> args)
      : kind_(kind), symbol_(std::move(symbol)), args_(std::move(args)) {}

  Kind kind_;
  std::string symbol_;
  std::vector<Term> args_;
};

std::string to_string(const Term& t);

/// Throws Error(parse_failure) with the offending offset in details.
Term parse_term(std::string_view text);

nlohmann::json to_json(const Term& t);
Term term_from_json(const nlohmann::json& j);

/// Renames variables to X1, X2, ... in first-occurrence (depth-first,
/// left-to-right) order.
Term canonicalize_variables(const Term& t);

/// Equal up to a consistent, injective renaming of variables.
bool alpha_equivalent(const Term& a, const Term& b);

/// True iff some substitution maps `general` onto `specific`. The
/// substitution is consistent: a variable bound once stays bound.
bool subsumes(const Term& general, const Term& specific);

/// Least general generalization (Plotkin anti-unification). Identical
/// subterms are kept; mismatched pairs become variables, and the same
/// mismatched pair always maps to the same variable. Result variables are
/// canonical (X1, X2, ...).
Term lgg2(const Term& s, const Term& t);

/// Left fold of lgg2. Precondition: non-empty; throws Error(empty_input).
Term lggN(std::span<const Term> terms);

}  // namespace genreloom
