#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mb/layers.hpp"

namespace mb {

/// Sort of a discourse referent, read off its name prefix.
enum class Sort { box, entity, event, time, state };

char sort_prefix(Sort s);
/// Throws unless `name` is a prefix letter followed by digits.
Sort sort_of(std::string_view name);
bool is_variable(std::string_view field);

/// Argument of a condition: a referent or a quoted constant.
struct Arg {
  std::string value;
  bool constant = false;

  static Arg ref(std::string name) { return {std::move(name), false}; }
  static Arg lit(std::string text) { return {std::move(text), true}; }
  bool operator==(const Arg&) const = default;
};

struct Drs;

struct Condition {
  enum class Kind { Concept, Role, Named, Comparison, Not, Imp, Dis, Prop };

  Kind kind = Kind::Concept;
  std::string symbol;  // concept symbol, role label or comparison operator
  Sense sense;         // concepts only
  std::vector<Arg> args;
  std::vector<Drs> boxes;
  int origin = -1;  // contributing token; not serialised

  static Condition concept_of(std::string symbol, Sense sense, std::string ref);
  static Condition role(std::string label, std::string ref, Arg arg);
  static Condition named(std::string ref, std::string name);
  static Condition comparison(std::string op, Arg a, Arg b);
  static Condition negation(Drs box);
  static Condition implication(Drs antecedent, Drs consequent);
  static Condition disjunction(Drs a, Drs b);
  static Condition proposition(std::string ref, Drs box);

  bool operator==(const Condition& o) const;
};

struct Drs {
  std::string label = "b1";
  std::vector<std::string> referents;
  std::vector<Condition> conditions;

  bool operator==(const Drs&) const = default;
};

/// One clause line: box, operator, arguments (constants keep their quotes).
struct Clause {
  std::string box;
  std::string op;
  std::vector<std::string> args;

  std::string str() const;
  static Clause parse(std::string_view line);
  auto operator<=>(const Clause&) const = default;
};

std::string quote(std::string_view text);
std::string unquote(std::string_view field);

/// Referent introductions, then conditions, nested boxes after the condition
/// that owns them.
std::vector<Clause> to_clauses(const Drs& d);
std::string clauses_text(const std::vector<Clause>& clauses);
std::vector<Clause> parse_clause_lines(std::string_view text);
Drs from_clauses(const std::vector<Clause>& clauses);

/// Boxes b1.. in depth-first order; referents renumbered per sort in order
/// of first occurrence.
Drs canonicalize(const Drs& d);

/// Empty when the DRS is well formed; otherwise one message per problem.
std::vector<std::string> well_formedness_errors(const Drs& d);
inline bool well_formed(const Drs& d) { return well_formedness_errors(d).empty(); }

/// Every referent introduced anywhere in the DRS, depth-first.
std::vector<std::string> all_referents(const Drs& d);
/// Renames referent occurrences (introductions and arguments).
void rename_referent(Drs& d, const std::string& from, const std::string& to);

}  // namespace mb
