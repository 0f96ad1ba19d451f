#include "mb/symboliser.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace mb {

namespace {

bool is_vowel(char c) { return std::string_view("aeiou").find(c) != std::string_view::npos; }

int vowel_groups(std::string_view s) {
  int groups = 0;
  bool in = false;
  for (char c : s) {
    bool v = is_vowel(c);
    if (v && !in) ++groups;
    in = v;
  }
  return groups;
}

bool has_vowel(std::string_view s) { return vowel_groups(s) > 0; }

bool ends_with(std::string_view s, std::string_view suf) {
  return s.size() >= suf.size() && s.substr(s.size() - suf.size()) == suf;
}

/// Undo consonant doubling and restore a dropped final -e after -ed/-ing removal.
std::string repair_stem(std::string stem) {
  std::size_t n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) &&
      std::string_view("lsfz").find(stem[n - 1]) == std::string_view::npos)
    return stem.substr(0, n - 1);
  if (n == 0) return stem;
  char last = stem[n - 1];
  if (last == 'v' || last == 'c' || last == 'z') return stem + "e";
  if (n > 4 && ends_with(stem, "at")) return stem + "e";
  if (n >= 3 && !is_vowel(stem[n - 2]) && stem[n - 1] == 'l' &&
      std::string_view("bdgkpt").find(stem[n - 2]) != std::string_view::npos)
    return stem + "e";
  // single-syllable consonant-vowel-consonant stems: hop(ed) -> hope
  if (n >= 3 && vowel_groups(stem) == 1 && !is_vowel(stem[n - 3]) && is_vowel(stem[n - 2]) &&
      !is_vowel(last) && std::string_view("wxy").find(last) == std::string_view::npos)
    return stem + "e";
  return stem;
}

}  // namespace

std::string strip_english_suffix(std::string_view w) {
  std::string word(w);
  if (word.size() <= 3 || !std::all_of(word.begin(), word.end(), [](unsigned char c) { return std::islower(c); }))
    return word;
  if (ends_with(word, "ied") || (ends_with(word, "ies") && word.size() > 4))
    return word.substr(0, word.size() - 3) + "y";
  if (ends_with(word, "eed")) return word.substr(0, word.size() - 1);
  if (ends_with(word, "ed")) {
    std::string stem = word.substr(0, word.size() - 2);
    return has_vowel(stem) ? repair_stem(stem) : word;
  }
  if (ends_with(word, "ing")) {
    std::string stem = word.substr(0, word.size() - 3);
    return stem.size() >= 2 && has_vowel(stem) ? repair_stem(stem) : word;
  }
  if (ends_with(word, "sses") || ends_with(word, "xes") || ends_with(word, "ches") || ends_with(word, "shes"))
    return word.substr(0, word.size() - 2);
  if (ends_with(word, "s") && !ends_with(word, "ss") && !ends_with(word, "us") && !ends_with(word, "is"))
    return word.substr(0, word.size() - 1);
  return word;
}

bool is_name_tag(std::string_view semtag) {
  return semtag == "PER" || semtag == "GPE" || semtag == "ORG";
}

LemmaLexicon LemmaLexicon::load(const std::string& path, bool english_rules) {
  LemmaLexicon lex(english_rules);
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2) throw Error("lemma lexicon " + path + ": expected form<TAB>lemma");
    lex.add(cols[0], cols[1]);
  }
  return lex;
}

void LemmaLexicon::add(std::string form, std::string lemma) { forms_[std::move(form)] = std::move(lemma); }

std::string LemmaLexicon::lemmatize(std::string_view token, bool is_name) const {
  std::string low(token);
  for (auto& c : low) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (auto it = forms_.find(low); it != forms_.end()) return it->second;
  // multiword tokens: parts joined with "~"
  if (low.find(' ') != std::string::npos) {
    std::string out;
    for (const auto& part : split(low, ' ')) {
      if (part.empty()) continue;
      if (!out.empty()) out += '~';
      out += part;
    }
    return out;
  }
  if (!english_rules_ || is_name) return low;
  return strip_english_suffix(low);
}

// ---------------------------------------------------------------------------

void SymbolTable::add(const std::string& lemma, const std::string& semtag, const std::string& symbol,
                      long count) {
  if (count <= 0) throw Error("symbol counts must be positive");
  entries_[{lemma, semtag}][symbol] += count;
}

const std::map<std::string, long>* SymbolTable::candidates(std::string_view lemma,
                                                           std::string_view semtag) const {
  auto it = entries_.find(std::make_pair(std::string(lemma), std::string(semtag)));
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<std::string> SymbolTable::lookup(std::string_view lemma, std::string_view semtag) const {
  const auto* c = candidates(lemma, semtag);
  if (!c) return std::nullopt;
  const std::string* best = nullptr;
  long best_count = 0;
  for (const auto& [sym, n] : *c)  // map order: lexicographic, so strict > keeps the smallest on ties
    if (n > best_count) {
      best = &sym;
      best_count = n;
    }
  return *best;
}

std::string SymbolTable::serialize() const {
  std::string out;
  for (const auto& [key, syms] : entries_)
    for (const auto& [sym, n] : syms)
      out += escape_cell(key.first) + "\t" + escape_cell(key.second) + "\t" + escape_cell(sym) + "\t" +
             std::to_string(n) + "\n";
  return out;
}

SymbolTable SymbolTable::deserialize(std::string_view tsv) {
  SymbolTable t;
  std::size_t row = 0;
  for (const auto& line : split(tsv, '\n')) {
    ++row;
    if (line.empty()) continue;
    auto c = split(line, '\t');
    if (c.size() != 4) throw Error("symbol table row " + std::to_string(row) + " malformed");
    t.add(unescape_cell(c[0]), unescape_cell(c[1]), unescape_cell(c[2]), std::stol(c[3]));
  }
  return t;
}

SymbolTable learn_symbol_table(const std::vector<SymbolTriple>& triples) {
  SymbolTable t;
  for (const auto& tr : triples) t.add(tr.lemma, tr.semtag, tr.symbol);
  return t;
}

Symbol symbolise(const SymbolTable& table, const LemmaLexicon& lexicon, std::string_view token,
                 std::string_view semtag) {
  Symbol s;
  s.lemma = lexicon.lemmatize(token, is_name_tag(semtag));
  auto hit = table.lookup(s.lemma, semtag);
  s.symbol = hit ? *hit : s.lemma;
  return s;
}

}  // namespace mb
