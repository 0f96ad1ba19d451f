#include <doctest.h>

#include "mb/ccg.hpp"
#include "oracles.hpp"

using namespace mb;

namespace {

Category cat(std::string_view s) { return parse_category(s); }

std::vector<std::vector<ScoredCategory>> single(const std::vector<std::string>& cats) {
  std::vector<std::vector<ScoredCategory>> out;
  for (const auto& c : cats) out.push_back({{cat(c), 0.0}});
  return out;
}

bool uses(const Derivation& d, Combinator rule) {
  if (d.rule == rule) return true;
  for (const auto& c : d.children)
    if (uses(c, rule)) return true;
  return false;
}

}  // namespace

TEST_CASE("categories parse left-associatively and print canonically") {
  CHECK(cat("S\\NP/NP").str() == "(S\\NP)/NP");
  CHECK(cat("((S\\NP)/NP)") == cat("(S\\NP)/NP"));
  CHECK(cat("(S\\NP)\\(S\\NP)").argument().str() == "S\\NP");
  CHECK_THROWS_AS(cat("S/"), Error);
  CHECK_THROWS_AS(cat("VP"), Error);
  CHECK_THROWS_AS(cat("(S"), Error);
}

TEST_CASE("each combinator applies exactly to its pattern") {
  CHECK(combine(Combinator::FA, cat("NP/N"), cat("N")) == cat("NP"));
  CHECK(combine(Combinator::BA, cat("NP"), cat("S\\NP")) == cat("S"));
  CHECK(combine(Combinator::FC, cat("S/NP"), cat("NP/N")) == cat("S/N"));
  CHECK(combine(Combinator::BC, cat("S\\NP"), cat("S\\S")) == cat("S\\NP"));
  CHECK(combine(Combinator::BCX, cat("(S\\NP)/NP"), cat("(S\\NP)\\(S\\NP)")) == cat("(S\\NP)/NP"));
  CHECK(combine(Combinator::RP, cat("S"), cat("PUNCT")) == cat("S"));
  CHECK(combine(Combinator::LP, cat("PUNCT"), cat("NP")) == cat("NP"));
  CHECK_FALSE(combine(Combinator::FA, cat("NP/N"), cat("NP")));
  CHECK_FALSE(combine(Combinator::BA, cat("NP"), cat("S/NP")));
  CHECK_FALSE(combine(Combinator::BCX, cat("S\\NP"), cat("S\\S")));
  CHECK(is_composition(Combinator::BCX));
  CHECK_FALSE(is_composition(Combinator::FA));
}

TEST_CASE("CKY finds the best derivation that exhaustive enumeration finds") {
  oracle::Rng rng(53);
  int complete = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto cands = oracle::random_candidates(rng, static_cast<std::size_t>(oracle::uniform(rng, 1, 6)));
    auto expected = oracle::best_complete(cands);
    auto got = parse(cands);
    INFO("trial " << trial);
    if (!expected) {
      CHECK(got.fragments.size() > 1);
      CHECK_FALSE(got.complete);
      continue;
    }
    ++complete;
    REQUIRE(got.complete);
    REQUIRE(got.fragments.size() == 1);
    const Derivation& d = got.fragments[0];
    CHECK(d.quality() == *expected);
    CHECK(type_checks(d));
    CHECK(d.width() == static_cast<int>(cands.size()));
  }
  CHECK(complete > 20);
}

TEST_CASE("fragment covers partition the tokens") {
  oracle::Rng rng(59);
  for (int trial = 0; trial < 100; ++trial) {
    auto cands = oracle::random_candidates(rng, static_cast<std::size_t>(oracle::uniform(rng, 1, 7)));
    auto got = parse(cands);
    int next = 0;
    for (const auto& f : got.fragments) {
      CHECK(f.first_token() == next);
      CHECK(type_checks(f));
      next = f.last_token() + 1;
    }
    CHECK(next == static_cast<int>(cands.size()));
  }
}

TEST_CASE("the Dutch verb-particle order parses through crossed composition") {
  // Alfred Nobel vond in 1866 het dynamiet uit .
  auto cands = single({"NP/NP", "NP", "(S\\NP)/NP", "((S\\NP)\\(S\\NP))/NP", "NP", "NP/N", "N",
                       "(S\\NP)\\(S\\NP)", "PUNCT"});
  auto got = parse(cands);
  REQUIRE(got.complete);
  const Derivation& d = got.fragments[0];
  CHECK(d.category == cat("S"));
  CHECK(uses(d, Combinator::BCX));
  CHECK(d.leaves().size() == 9);

  auto without = parse(cands, {CombinatorSet::all().without(Combinator::BCX)});
  const bool s_root = without.fragments.size() == 1 && without.fragments[0].category.is("S");
  CHECK_FALSE(s_root);
}

TEST_CASE("S roots win over better scoring non-S roots") {
  std::vector<std::vector<ScoredCategory>> cands = {{{cat("NP"), 0.0}}, {{cat("S\\NP"), -1.0}, {cat("NP\\NP"), 0.0}}};
  auto got = parse(cands);
  REQUIRE(got.complete);
  CHECK(got.fragments[0].category == cat("S"));
}

TEST_CASE("derivations serialise and parse back") {
  auto got = parse(single({"NP", "(S\\NP)/NP", "NP", "PUNCT"}));
  REQUIRE(got.complete);
  const std::string text = serialize_derivation(got.fragments[0]);
  // ties on score and compositions go to the more right-branching tree
  CHECK(text == "(BA (lex 0 NP) (FA (lex 1 (S\\NP)/NP) (RP (lex 2 NP) (lex 3 PUNCT))))");
  CHECK(serialize_derivation(parse_derivation(text)) == text);
  CHECK_THROWS_AS(parse_derivation("(FA (lex 0 NP) (lex 1 NP))"), Error);
  CHECK_THROWS_AS(parse_derivation("(XX (lex 0 NP) (lex 1 NP))"), Error);
  CHECK_THROWS_AS(parse_derivation("(lex 0 NP) junk"), Error);
}

TEST_CASE("parsing rejects empty cells and accepts empty sentences") {
  CHECK_THROWS_AS(parse({{}}), Error);
  CHECK(parse({}).fragments.empty());
  CHECK_THROWS_AS(ParseScore::quantize(-std::numeric_limits<double>::infinity()), Error);
}
