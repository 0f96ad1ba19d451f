#pragma once

#include <map>
#include <string>
#include <string_view>
#include <optional>
#include <vector>

#include "mb/layers.hpp"

namespace mb {

struct Symbol {
  std::string lemma;
  std::string symbol;
  bool operator==(const Symbol&) const = default;
};

/// Irregular forms plus (for English) suffix-stripping rules. Lemmatisation
/// is total: unknown forms fall back to their lowercased self.
class LemmaLexicon {
 public:
  explicit LemmaLexicon(bool english_rules = true) : english_rules_(english_rules) {}
  static LemmaLexicon load(const std::string& path, bool english_rules);

  void add(std::string form, std::string lemma);
  /// Name-typed tokens skip suffix rules.
  std::string lemmatize(std::string_view token, bool is_name = false) const;
  bool english_rules() const { return english_rules_; }

 private:
  std::map<std::string, std::string, std::less<>> forms_;
  bool english_rules_;
};

/// Suffix rules for English inflection (-s, -ed, -ing with undoubling and e-restoration).
std::string strip_english_suffix(std::string_view word);

bool is_name_tag(std::string_view semtag);

/// (lemma, semtag) -> most frequent gold symbol.
class SymbolTable {
 public:
  void add(const std::string& lemma, const std::string& semtag, const std::string& symbol, long count = 1);
  /// Highest count, ties broken by the lexicographically smallest symbol.
  std::optional<std::string> lookup(std::string_view lemma, std::string_view semtag) const;
  const std::map<std::string, long>* candidates(std::string_view lemma, std::string_view semtag) const;
  std::size_t size() const { return entries_.size(); }

  /// `lemma<TAB>semtag<TAB>symbol<TAB>count`, sorted.
  std::string serialize() const;
  static SymbolTable deserialize(std::string_view tsv);
  bool operator==(const SymbolTable&) const = default;

 private:
  std::map<std::pair<std::string, std::string>, std::map<std::string, long>, std::less<>> entries_;
};

struct SymbolTriple {
  std::string lemma;
  std::string semtag;
  std::string symbol;
};

SymbolTable learn_symbol_table(const std::vector<SymbolTriple>& triples);

Symbol symbolise(const SymbolTable& table, const LemmaLexicon& lexicon, std::string_view token,
                 std::string_view semtag);

}  // namespace mb
