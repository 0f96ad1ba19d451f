#include <doctest.h>

#include "mb/matcher.hpp"
#include "oracles.hpp"

using namespace mb;

namespace {

std::vector<Clause> renamed(const std::vector<Clause>& clauses, const std::map<std::string, std::string>& m) {
  std::vector<Clause> out;
  for (const auto& c : clauses) {
    Clause r = c;
    if (auto it = m.find(r.box); it != m.end()) r.box = it->second;
    for (auto& a : r.args)
      if (auto it = m.find(a); it != m.end()) a = it->second;
    out.push_back(r);
  }
  return out;
}

std::size_t distinct(const std::vector<Clause>& c) { return std::set<Clause>(c.begin(), c.end()).size(); }

}  // namespace

TEST_CASE("hill climbing reaches the exhaustive optimum on small clause sets") {
  oracle::Rng rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    auto a = oracle::random_clause_set(rng, 6);
    auto b = oracle::random_clause_set(rng, 6);
    INFO(clauses_text(a) << "--\n" << clauses_text(b));
    auto r = match(a, b);
    CHECK(r.matched == oracle::brute_force_match(a, b));
  }
}

TEST_CASE("reported scores agree with the mapping") {
  oracle::Rng rng(73);
  for (int trial = 0; trial < 100; ++trial) {
    auto a = oracle::random_clause_set(rng, 7);
    auto b = oracle::random_clause_set(rng, 7);
    auto r = match(a, b);
    std::set<Clause> sb(b.begin(), b.end());
    std::set<Clause> sa(a.begin(), a.end());
    int n = 0;
    for (const auto& c : sa) n += sb.count(map_clause(c, r.mapping)) ? 1 : 0;
    CHECK(n == r.matched);
    std::set<std::string> targets;
    for (const auto& [from, to] : r.mapping) {
      CHECK(from[0] == to[0]);
      CHECK(targets.insert(to).second);
    }
    auto expected = score_counts(r.matched, sa.size(), sb.size());
    CHECK(r.precision == doctest::Approx(expected.precision));
    CHECK(r.recall == doctest::Approx(expected.recall));
    CHECK(r.f_score == doctest::Approx(expected.f_score));
    CHECK(r.f_score >= 0.0);
    CHECK(r.f_score <= 1.0);
  }
}

TEST_CASE("a renamed copy matches perfectly and F is symmetric") {
  oracle::Rng rng(79);
  for (int trial = 0; trial < 100; ++trial) {
    auto a = oracle::random_clause_set(rng, 8);
    auto b = renamed(a, oracle::random_renaming(rng, a));
    auto r = match(a, b);
    CHECK(r.matched == static_cast<int>(distinct(a)));
    CHECK(r.f_score == doctest::Approx(1.0));
    auto c = oracle::random_clause_set(rng, 5);
    CHECK(match(a, c).f_score == doctest::Approx(match(c, a).f_score));
  }
}

TEST_CASE("the running example scores against a perturbed version") {
  auto gold = parse_clause_lines(
      "b1 REF x1\nb1 REF x2\nb1 REF e1\nb1 REF t1\nb1 Named x1 \"nobel\"\nb1 person \"n.01\" x1\n"
      "b1 Named x1 \"alfred\"\nb1 dynamite \"n.01\" x2\nb1 invent \"v.01\" e1\nb1 Agent e1 x1\n"
      "b1 Theme e1 x2\nb1 EQU t1 \"1866\"\nb1 Time e1 t1\n");
  auto system = parse_clause_lines(
      "b3 REF x7\nb3 REF x5\nb3 REF e2\nb3 REF t4\nb3 Named x7 \"nobel\"\nb3 person \"n.01\" x7\n"
      "b3 Named x7 \"alfred\"\nb3 dynamiet \"n.01\" x5\nb3 invent \"v.01\" e2\nb3 Agent e2 x7\n"
      "b3 Theme e2 x5\nb3 EQU t4 \"1866\"\nb3 Time e2 t4\n");
  auto r = match(system, gold);
  CHECK(r.matched == 12);
  CHECK(r.precision == doctest::Approx(12.0 / 13));
  CHECK(r.mapping.at("x7") == "x1");
  CHECK(r.mapping.at("b3") == "b1");
}

TEST_CASE("edge cases") {
  auto one = parse_clause_lines("b1 REF x1\n");
  CHECK(match({}, {}).f_score == 1.0);
  CHECK(match(one, {}).precision == 0.0);
  CHECK(match({}, one).recall == 0.0);
  CHECK_THROWS_AS(match(one, one, {0, 1}), Error);
  auto dup = parse_clause_lines("b1 REF x1\nb1 REF x1\n");
  CHECK(match(dup, one).f_score == doctest::Approx(1.0));
  CHECK(clause_variables(parse_clause_lines("b2 Agent e1 x3\nb2 REF x3\n")) ==
        std::vector<std::string>{"b2", "e1", "x3"});
  CHECK(map_clause(Clause::parse("b1 Agent e1 x1"), {{"b1", "b9"}, {"e1", "e4"}}).str() == "b9 Agent e4 ?x1");
}
