#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mb/ccg.hpp"
#include "mb/drs.hpp"
#include "mb/layers.hpp"

namespace mb {

// ---------------------------------------------------------------------------
// Simple types

class SemType {
 public:
  static SemType entity();
  static SemType truth();
  static SemType fn(const SemType& from, const SemType& to);

  bool is_fn() const { return from_ != nullptr; }
  bool is_entity() const { return !is_fn() && atom_ == 'e'; }
  bool is_truth() const { return !is_fn() && atom_ == 't'; }
  const SemType& from() const { return *from_; }
  const SemType& to() const { return *to_; }
  std::string str() const;
  bool operator==(const SemType& o) const;

 private:
  char atom_ = 't';
  std::shared_ptr<const SemType> from_, to_;
};

/// S and NP denote generalised quantifiers over entities (S over its event),
/// N and PP are properties, slashes become functions.
SemType type_of(const Category& c);

// ---------------------------------------------------------------------------
// Fresh names shared across one document

class NameSupply {
 public:
  std::string fresh_variable();
  std::string fresh_box();
  std::string fresh_referent(char sort, int token);
  /// Referent -> token whose lexical entry introduced it.
  const std::map<std::string, int>& referent_origins() const { return origins_; }

 private:
  std::map<char, int> counters_;
  int variables_ = 0;
  std::map<std::string, int> origins_;
};

// ---------------------------------------------------------------------------
// Lambda terms

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct TermCondition {
  Condition::Kind kind = Condition::Kind::Concept;
  std::string symbol;
  Sense sense;
  std::vector<Arg> args;  // non-constant values are variables or referents
  std::vector<TermPtr> boxes;
  int origin = -1;
  bool role_placeholder = false;  // label filled from the role layer after reduction
};

struct Term {
  enum class Kind { Var, Ref, Lam, App, Box, Merge };

  Kind kind = Kind::Var;
  std::string name;  // Var, Ref, Lam binder
  std::optional<SemType> binder_type;
  TermPtr left, right;  // Lam body in `left`; App function/argument; Merge operands
  std::vector<std::string> referents;
  std::vector<TermCondition> conditions;

  static TermPtr var(std::string name);
  static TermPtr ref(std::string name);
  static TermPtr lam(std::string name, SemType type, TermPtr body);
  static TermPtr app(TermPtr f, TermPtr a);
  static TermPtr box(std::vector<std::string> referents, std::vector<TermCondition> conditions);
  static TermPtr merge(TermPtr a, TermPtr b);
};

/// Variables are the names handed out by NameSupply::fresh_variable.
bool is_variable_name(std::string_view name);

std::string to_string(const TermPtr& t);
/// Infers the type of a closed term; throws Error on a clash or free variable.
SemType type_check(const TermPtr& t);
/// Capture-avoiding normal-order beta reduction, merging adjacent boxes.
TermPtr beta_normalize(const TermPtr& t, NameSupply& names, std::size_t fuel = 1'000'000);

// ---------------------------------------------------------------------------
// Lexical templates

struct LexicalInput {
  int index = 0;  // document-wide token index
  std::string token;
  Category category;
  std::string semtag;
  std::string symbol;
  std::optional<Sense> sense;  // defaulted from the category when absent
  std::string role = std::string(kNoRole);
};

Sense default_sense(const Category& c);

/// Templates keyed by (semtag, category). The category column may be the
/// pattern `X|X` for any modifier, and the semtag column may be `*`.
class TemplateRegistry {
 public:
  static TemplateRegistry load(const std::string& path);
  static TemplateRegistry parse(std::string_view tsv);
  void add(const std::string& semtag, const std::string& category, std::string body);
  const std::string* find(std::string_view semtag, const Category& category) const;
  std::size_t size() const { return templates_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, std::string> templates_;
};

/// Instantiates a template body for one token. Throws Error on syntax errors.
TermPtr instantiate_template(std::string_view body, const LexicalInput& input, NameSupply& names);

TermPtr lexical_entry(const TemplateRegistry& registry, const LexicalInput& input, NameSupply& names);

// ---------------------------------------------------------------------------
// Composition

struct Composition {
  Drs drs;
  std::map<int, std::string> token_referents;
};

/// Fragments of an incomplete parse are closed and merged left to right.
Composition compose(const ParseResult& parse, const std::vector<LexicalInput>& inputs,
                    const TemplateRegistry& registry, NameSupply& names);
Composition compose(const Derivation& derivation, const std::vector<LexicalInput>& inputs,
                    const TemplateRegistry& registry, NameSupply& names);

/// antecedents[token] = earlier token. Replaces each anaphor's referent by its
/// antecedent's.
void resolve_coreference(std::vector<Composition>& sentences, const std::map<int, int>& antecedents);

/// Sequential merge into one top box, relabelled canonically.
Drs merge_document(const std::vector<Drs>& sentences);

}  // namespace mb
