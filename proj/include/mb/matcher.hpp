#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mb/drs.hpp"

namespace mb {

struct MatchResult {
  double precision = 0;
  double recall = 0;
  double f_score = 0;
  int matched = 0;
  std::map<std::string, std::string> mapping;  // variable of A -> variable of B
};

struct MatchOptions {
  int restarts = 20;
  std::uint32_t seed = 1;
};

/// Best-F one-to-one, sort-respecting variable mapping found by hill climbing
/// from a concept-driven start plus random restarts, then refined by a
/// bounded branch-and-bound search that is exact when it finishes. Duplicate
/// clauses are counted once.
MatchResult match(const std::vector<Clause>& a, const std::vector<Clause>& b, const MatchOptions& options = {});

/// Precision, recall and F for a given number of matched clauses.
MatchResult score_counts(int matched, std::size_t size_a, std::size_t size_b);

/// Variables of a clause set in order of first occurrence.
std::vector<std::string> clause_variables(const std::vector<Clause>& clauses);

/// Applies a variable mapping; unmapped variables become `?` + name.
Clause map_clause(const Clause& c, const std::map<std::string, std::string>& mapping);

}  // namespace mb
