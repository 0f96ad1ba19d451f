#include <doctest.h>

#include "mb/symboliser.hpp"
#include "oracles.hpp"

using namespace mb;

TEST_CASE("numbers written as words map to digits through the learned table") {
  SymbolTable table = learn_symbol_table({{"eight", "QUC", "8"}, {"eight", "QUC", "8"}, {"1866", "YOC", "1866"}});
  LemmaLexicon lex;
  CHECK(symbolise(table, lex, "eight", "QUC") == Symbol{"eight", "8"});
  CHECK(symbolise(table, lex, "Eight", "QUC").symbol == "8");
  CHECK(symbolise(table, lex, "eight", "CON").symbol == "eight");
}

TEST_CASE("English lemmatisation handles regular inflection") {
  CHECK(strip_english_suffix("invented") == "invent");
  CHECK(strip_english_suffix("apples") == "apple");
  CHECK(strip_english_suffix("stopped") == "stop");
  CHECK(strip_english_suffix("running") == "run");
  CHECK(strip_english_suffix("loved") == "love");
  CHECK(strip_english_suffix("studies") == "study");
  CHECK(strip_english_suffix("boxes") == "box");
  CHECK(strip_english_suffix("bus") == "bus");
  CHECK(strip_english_suffix("glass") == "glass");
  CHECK(strip_english_suffix("Paris") == "Paris");
}

TEST_CASE("the lexicon overrides rules, names skip them, other languages only lowercase") {
  LemmaLexicon en;
  en.add("ate", "eat");
  CHECK(en.lemmatize("Ate") == "eat");
  CHECK(en.lemmatize("Nobels", true) == "nobels");
  CHECK(en.lemmatize("New York") == "new~york");
  LemmaLexicon nl(false);
  CHECK(nl.lemmatize("Uitgevonden") == "uitgevonden");
  CHECK(is_name_tag("PER"));
  CHECK_FALSE(is_name_tag("CON"));
}

TEST_CASE("ties between symbols go to the lexicographically smallest") {
  SymbolTable t;
  t.add("x", "CON", "beta", 2);
  t.add("x", "CON", "alpha", 2);
  t.add("x", "CON", "gamma", 1);
  CHECK(t.lookup("x", "CON") == "alpha");
  t.add("x", "CON", "gamma", 2);
  CHECK(t.lookup("x", "CON") == "gamma");
  CHECK_FALSE(t.lookup("x", "PER").has_value());
  CHECK_THROWS_AS(t.add("x", "CON", "a", 0), Error);
}

TEST_CASE("symbol tables serialise exactly, including awkward cells") {
  SymbolTable t;
  t.add("a\tb", "CON", "sym\nbol", 3);
  t.add("dynamiet", "CON", "dynamite");
  auto copy = SymbolTable::deserialize(t.serialize());
  CHECK(copy == t);
  CHECK(copy.lookup("a\tb", "CON") == "sym\nbol");
  CHECK_THROWS_AS(SymbolTable::deserialize("only\tthree\tcols\n"), Error);
}

TEST_CASE("pairs seen with a single symbol always get that symbol back") {
  oracle::Rng rng(47);
  LemmaLexicon lex(false);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<SymbolTriple> triples;
    std::map<std::pair<std::string, std::string>, std::set<std::string>> seen;
    for (int i = 0; i < 20; ++i) {
      SymbolTriple tr{"l" + std::to_string(oracle::uniform(rng, 0, 6)),
                      oracle::pick(rng, std::vector<std::string>{"CON", "QUC", "EPS"}),
                      "s" + std::to_string(oracle::uniform(rng, 0, 3))};
      seen[{tr.lemma, tr.semtag}].insert(tr.symbol);
      triples.push_back(tr);
    }
    SymbolTable table = learn_symbol_table(triples);
    for (const auto& [key, symbols] : seen) {
      auto got = symbolise(table, lex, key.first, key.second).symbol;
      CHECK(symbols.count(got) == 1);
      if (symbols.size() == 1) CHECK(got == *symbols.begin());
    }
  }
}
