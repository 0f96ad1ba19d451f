#include <doctest.h>

#include "mb/drs.hpp"
#include "oracles.hpp"

using namespace mb;

TEST_CASE("referent sorts come from the name prefix") {
  CHECK(sort_of("b3") == Sort::box);
  CHECK(sort_of("x1") == Sort::entity);
  CHECK(sort_of("e12") == Sort::event);
  CHECK(sort_of("t1") == Sort::time);
  CHECK(sort_of("s2") == Sort::state);
  CHECK_THROWS_AS(sort_of("q1"), Error);
  CHECK_THROWS_AS(sort_of("x"), Error);
  CHECK(is_variable("x10"));
  CHECK_FALSE(is_variable("\"x1\""));
}

TEST_CASE("constants quote and unquote inverse to each other") {
  for (std::string s : {"", "plain", "say \"hi\"", "back\\slash", "trailing\\", "a b  c"}) {
    INFO(s);
    CHECK(unquote(quote(s)) == s);
    CHECK(Clause::parse("b1 Named x1 " + quote(s)).args[1] == quote(s));
  }
  CHECK_THROWS_AS(unquote("bare"), Error);
  CHECK_THROWS_AS(Clause::parse("b1 Named x1 \"open"), Error);
  CHECK_THROWS_AS(Clause::parse("b1 REF"), Error);
  CHECK_THROWS_AS(Clause::parse("x1 REF x2"), Error);
}

TEST_CASE("random DRSs survive the clause round trip") {
  oracle::Rng rng(61);
  for (int trial = 0; trial < 500; ++trial) {
    Drs d = oracle::random_drs(rng);
    INFO(clauses_text(to_clauses(d)));
    REQUIRE(well_formed(d));
    auto clauses = to_clauses(d);
    CHECK(from_clauses(clauses) == d);
    CHECK(parse_clause_lines(clauses_text(clauses)) == clauses);
    Drs canon = canonicalize(d);
    CHECK(canonicalize(canon) == canon);
    CHECK(well_formed(canon));
    CHECK(canon.label == "b1");
  }
}

TEST_CASE("canonical names follow first occurrence per sort") {
  Drs d;
  d.label = "b7";
  d.referents = {"e9", "x4", "x2"};
  d.conditions.push_back(Condition::role("Agent", "e9", Arg::ref("x4")));
  d.conditions.push_back(Condition::negation(Drs{"b3", {"t5"}, {Condition::comparison("EQU", Arg::ref("t5"), Arg::lit("1866"))}}));
  Drs c = canonicalize(d);
  CHECK(c.referents == std::vector<std::string>{"e1", "x1", "x2"});
  CHECK(c.conditions[1].boxes[0].label == "b2");
  CHECK(c.conditions[1].boxes[0].referents == std::vector<std::string>{"t1"});
}

TEST_CASE("well-formedness reports scope and naming problems") {
  Drs free_ref;
  free_ref.conditions.push_back(Condition::concept_of("dog", Sense{'n', 1}, "x1"));
  CHECK(well_formedness_errors(free_ref).size() == 1);

  Drs twice;
  twice.referents = {"x1"};
  twice.conditions.push_back(Condition::negation(Drs{"b2", {"x1"}, {}}));
  CHECK_FALSE(well_formed(twice));

  Drs dup_box;
  dup_box.conditions.push_back(Condition::negation(Drs{"b1", {}, {}}));
  CHECK_FALSE(well_formed(dup_box));

  Drs inner_only;
  inner_only.conditions.push_back(Condition::negation(Drs{"b2", {"x1"}, {}}));
  inner_only.conditions.push_back(Condition::concept_of("dog", Sense{'n', 1}, "x1"));
  CHECK_FALSE(well_formed(inner_only));

  Drs conditional;
  conditional.conditions.push_back(Condition::implication(
      Drs{"b2", {"x1"}, {Condition::concept_of("farmer", Sense{'n', 1}, "x1")}},
      Drs{"b3", {}, {Condition::concept_of("happy", Sense{'a', 1}, "x1")}}));
  CHECK(well_formed(conditional));
}

TEST_CASE("clause sets reject structural damage") {
  CHECK_THROWS_AS(from_clauses(parse_clause_lines("b1 NOT b2\nb2 NOT b1\n")), Error);
  CHECK_THROWS_AS(from_clauses(parse_clause_lines("b1 REF x1\nb2 REF x2\n")), Error);
  CHECK_THROWS_AS(from_clauses(parse_clause_lines("b1 REF x1 x2\n")), Error);
  CHECK(from_clauses({}).conditions.empty());
  CHECK(parse_clause_lines("% comment\n\nb1 REF x1\n").size() == 1);
}

TEST_CASE("referents can be renamed everywhere") {
  oracle::Rng rng(67);
  Drs d = oracle::random_drs(rng, 2);
  for (int i = 0; i < 20 && all_referents(d).empty(); ++i) d = oracle::random_drs(rng, 2);
  REQUIRE_FALSE(all_referents(d).empty());
  const std::string from = all_referents(d).front();
  rename_referent(d, from, "x999");
  auto text = clauses_text(to_clauses(d));
  CHECK(text.find(" " + from + "\n") == std::string::npos);
  CHECK(text.find("x999") != std::string::npos);
}
