#pragma once

// Exhaustive reference implementations and random generators shared by the
// unit tests and the acceptance checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mb/ccg.hpp"
#include "mb/chain.hpp"
#include "mb/drs.hpp"
#include "mb/hmm.hpp"
#include "mb/matcher.hpp"
#include "mb/tokenizer.hpp"

namespace oracle {

using Rng = std::mt19937;

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(v.size()) - 1))];
}

/// Calls `fn` on every sequence in {0..k-1}^n in lexicographic order.
inline void for_each_sequence(int k, std::size_t n, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> seq(n, 0);
  while (true) {
    fn(seq);
    std::size_t i = n;
    while (i > 0 && seq[i - 1] == k - 1) seq[--i] = 0;
    if (i == 0) return;
    ++seq[i - 1];
  }
}

/// Lexicographically smallest sequence whose score is within `eps` of the
/// maximum. The tolerance only absorbs summation-order rounding.
inline std::vector<int> argmax_sequence(int k, std::size_t n, const std::function<double(const std::vector<int>&)>& score,
                                        double eps = 1e-9) {
  std::vector<std::pair<std::vector<int>, double>> all;
  double best = -std::numeric_limits<double>::infinity();
  for_each_sequence(k, n, [&](const std::vector<int>& s) {
    double v = score(s);
    all.emplace_back(s, v);
    best = std::max(best, v);
  });
  for (const auto& [s, v] : all)
    if (v >= best - eps * std::max(1.0, std::abs(best))) return s;
  return {};
}

// ---------------------------------------------------------------------------
// Tokenizer

/// Random text with known segmentation: words, commas and
/// sentence breaks.
inline std::pair<std::string, std::vector<mb::Token>> random_segmented(Rng& rng) {
  static const std::vector<std::string> words = {"Tom", "ate", "eight", "apples", "in", "1866", "the", "car",
                                                 "Paris", "don", "U.S.", "e-mail", "Nobel", "it"};
  std::string raw;
  std::vector<mb::Token> tokens;
  int sentences = uniform(rng, 1, 3);
  for (int s = 0; s < sentences; ++s) {
    int n = uniform(rng, 1, 6);
    for (int i = 0; i < n; ++i) {
      if (!raw.empty()) raw += ' ';
      std::string w = pick(rng, words);
      tokens.push_back({w, raw.size(), raw.size() + w.size(), s});
      raw += w;
      if (uniform(rng, 0, 4) == 0) {
        tokens.push_back({",", raw.size(), raw.size() + 1, s});
        raw += ",";
      }
    }
    tokens.push_back({".", raw.size(), raw.size() + 1, s});
    raw += ".";
  }
  return {raw, tokens};
}

// ---------------------------------------------------------------------------
// Trigram HMM

inline double hmm_path_score(const mb::TrigramHmm& m, const std::vector<std::string>& words, const std::vector<int>& tags) {
  const int B = m.boundary();
  double s = 0;
  int a = B, b = B;
  for (std::size_t i = 0; i < words.size(); ++i) {
    s += m.transition_logprob(a, b, tags[i]) + m.emission_logprob(words[i], tags[i]);
    a = b;
    b = tags[i];
  }
  return s + m.end_logprob(a, b);
}

inline std::vector<std::string> brute_force_hmm(const mb::TrigramHmm& m, const std::vector<std::string>& words) {
  const int T = static_cast<int>(m.tags().size());
  auto best = argmax_sequence(T, words.size(), [&](const std::vector<int>& s) { return hmm_path_score(m, words, s); });
  std::vector<std::string> out;
  for (int t : best) out.push_back(m.tags()[static_cast<std::size_t>(t)]);
  return out;
}

/// Random tagged corpus where words prefer one tag but may take others.
inline std::vector<mb::TaggedSentence> random_tagged_corpus(Rng& rng, const std::vector<std::string>& tags,
                                                           int vocab, int sentences, int max_len) {
  std::vector<mb::TaggedSentence> out;
  for (int s = 0; s < sentences; ++s) {
    mb::TaggedSentence ts;
    int n = uniform(rng, 1, max_len);
    for (int i = 0; i < n; ++i) {
      int w = uniform(rng, 0, vocab - 1);
      std::size_t tag = static_cast<std::size_t>(w) % tags.size();
      if (uniform(rng, 0, 3) == 0) tag = static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(tags.size()) - 1));
      ts.words.push_back("w" + std::to_string(w) + (w % 2 ? "ing" : "ed"));
      ts.tags.push_back(tags[tag]);
    }
    out.push_back(std::move(ts));
  }
  return out;
}

/// Test sentences over the training vocabulary plus unseen words.
inline std::vector<std::string> random_words(Rng& rng, int vocab, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    int w = uniform(rng, 0, vocab + 2);
    out.push_back("w" + std::to_string(w) + (w % 2 ? "ing" : "ed"));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Role chain

inline double chain_path_score(const mb::ChainModel& m, const std::vector<mb::RoleFeatures>& tokens,
                               const std::vector<int>& labels) {
  double s = 0;
  int prev = -1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    s += m.transition_score(prev, labels[i]) + m.emission_score(m.feature_ids(mb::role_feature_strings(tokens, i)), labels[i]);
    prev = labels[i];
  }
  return s;
}

inline std::vector<std::string> brute_force_chain(const mb::ChainModel& m, const std::vector<mb::RoleFeatures>& tokens) {
  const int L = static_cast<int>(m.labels().size());
  auto best = argmax_sequence(L, tokens.size(), [&](const std::vector<int>& s) { return chain_path_score(m, tokens, s); });
  std::vector<std::string> out;
  for (int l : best) out.push_back(m.labels()[static_cast<std::size_t>(l)]);
  return out;
}

inline std::vector<mb::RoleFeatures> random_role_tokens(Rng& rng, std::size_t n) {
  static const std::vector<std::string> sems = {"PER", "EPS", "CON", "DEF", "REL", "YOC"};
  static const std::vector<std::string> cats = {"NP", "(S\\NP)/NP", "N", "NP/N", "PP/NP"};
  std::vector<mb::RoleFeatures> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({pick(rng, sems), "s" + std::to_string(uniform(rng, 0, 5)), pick(rng, cats)});
  return out;
}

/// Roles depend on the semtag plus noise, so the perceptron has real work.
inline std::vector<mb::RoleSentence> random_role_corpus(Rng& rng, int sentences, int max_len) {
  std::vector<mb::RoleSentence> out;
  for (int s = 0; s < sentences; ++s) {
    mb::RoleSentence r;
    r.tokens = random_role_tokens(rng, static_cast<std::size_t>(uniform(rng, 1, max_len)));
    for (const auto& t : r.tokens) {
      std::string role = t.semtag == "PER" ? "Agent" : t.semtag == "CON" ? "Theme" : t.semtag == "YOC" ? "Time" : "NONE";
      if (uniform(rng, 0, 4) == 0) role = pick(rng, std::vector<std::string>{"Agent", "Theme", "Time", "NONE"});
      r.roles.push_back(role);
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CKY

struct Scored {
  mb::Category category;
  mb::ParseScore score;
};

/// Every derivation of tokens [i, j], without any pruning.
inline std::vector<Scored> all_derivations(const std::vector<std::vector<mb::ScoredCategory>>& cands, int i, int j) {
  std::vector<Scored> out;
  if (i == j) {
    for (const auto& c : cands[static_cast<std::size_t>(i)])
      out.push_back({c.category, {mb::ParseScore::quantize(c.score), 0, 0}});
    return out;
  }
  for (int k = i; k < j; ++k) {
    auto left = all_derivations(cands, i, k);
    auto right = all_derivations(cands, k + 1, j);
    for (const auto& l : left)
      for (const auto& r : right)
        for (mb::Combinator rule : mb::kBinaryCombinators)
          if (auto c = mb::combine(rule, l.category, r.category)) {
            mb::ParseScore node{0, mb::is_composition(rule) ? 1 : 0, j - k};
            out.push_back({*c, l.score + r.score + node});
          }
  }
  return out;
}

/// Best root score the parser must reach: over S roots when any exist,
/// otherwise over every root.
inline std::optional<mb::ParseScore> best_complete(const std::vector<std::vector<mb::ScoredCategory>>& cands) {
  auto all = all_derivations(cands, 0, static_cast<int>(cands.size()) - 1);
  bool any_s = std::any_of(all.begin(), all.end(), [](const Scored& s) { return s.category.is("S"); });
  std::optional<mb::ParseScore> best;
  for (const auto& s : all) {
    if (any_s && !s.category.is("S")) continue;
    if (!best || s.score.better_than(*best)) best = s.score;
  }
  return best;
}

inline std::vector<std::vector<mb::ScoredCategory>> random_candidates(Rng& rng, std::size_t n) {
  static const std::vector<std::string> pool = {"NP", "N", "S", "NP/N", "S\\NP", "(S\\NP)/NP", "(S\\NP)\\(S\\NP)",
                                                "N/N", "S/S", "PUNCT", "S/NP", "NP\\NP", "PP", "(N\\N)/NP"};
  std::vector<std::vector<mb::ScoredCategory>> out(n);
  for (auto& cell : out) {
    int k = uniform(rng, 1, 2);
    std::set<std::string> seen;
    for (int c = 0; c < k; ++c) {
      const std::string& cat = pick(rng, pool);
      if (!seen.insert(cat).second) continue;
      // quarter-unit scores make exact ties common
      cell.push_back({mb::parse_category(cat), -0.25 * uniform(rng, 0, 8)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matcher

/// Maximum matched clause count over every one-to-one, sort-respecting mapping.
inline int brute_force_match(const std::vector<mb::Clause>& a_in, const std::vector<mb::Clause>& b_in) {
  std::set<mb::Clause> sa(a_in.begin(), a_in.end()), sb(b_in.begin(), b_in.end());
  std::vector<mb::Clause> a(sa.begin(), sa.end());
  auto va = mb::clause_variables(a);
  auto vb = mb::clause_variables(std::vector<mb::Clause>(sb.begin(), sb.end()));
  std::map<std::string, std::string> mapping;
  std::set<std::string> used;
  int best = 0;
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i == va.size()) {
      int n = 0;
      for (const auto& c : a) n += sb.count(mb::map_clause(c, mapping)) ? 1 : 0;
      best = std::max(best, n);
      return;
    }
    go(i + 1);  // unmapped
    for (const auto& v : vb) {
      if (v[0] != va[i][0] || used.count(v)) continue;
      mapping[va[i]] = v;
      used.insert(v);
      go(i + 1);
      used.erase(v);
      mapping.erase(va[i]);
    }
  };
  go(0);
  return best;
}

/// Flat random clause set over at most `max_vars` variables.
inline std::vector<mb::Clause> random_clause_set(Rng& rng, int max_vars) {
  static const std::vector<std::string> concepts = {"dog", "cat", "run", "see", "old"};
  static const std::vector<std::string> roles = {"Agent", "Theme", "Time"};
  std::vector<std::string> vars = {"b1"};
  int boxes = 1;
  int budget = uniform(rng, 2, max_vars) - 1;
  if (budget > 2 && uniform(rng, 0, 2) == 0) {
    vars.push_back("b2");
    boxes = 2;
    --budget;
  }
  std::vector<std::string> refs;
  int counts[3] = {0, 0, 0};
  const char sorts[3] = {'x', 'e', 't'};
  for (int r = 0; r < budget; ++r) {
    int s = uniform(rng, 0, 2);
    refs.push_back(std::string(1, sorts[s]) + std::to_string(++counts[s]));
  }
  std::vector<mb::Clause> out;
  auto box = [&] { return "b" + std::to_string(uniform(rng, 1, boxes)); };
  for (const auto& r : refs) out.push_back({box(), "REF", {r}});
  int extra = uniform(rng, 1, 6);
  for (int k = 0; k < extra && !refs.empty(); ++k) {
    switch (uniform(rng, 0, 3)) {
      case 0: out.push_back({box(), pick(rng, concepts), {"\"n.01\"", pick(rng, refs)}}); break;
      case 1: out.push_back({box(), pick(rng, roles), {pick(rng, refs), pick(rng, refs)}}); break;
      case 2: out.push_back({box(), "Named", {pick(rng, refs), "\"n" + std::to_string(uniform(rng, 0, 2)) + "\""}}); break;
      default: out.push_back({box(), "EQU", {pick(rng, refs), "\"" + std::to_string(uniform(rng, 1, 3)) + "\""}}); break;
    }
  }
  if (boxes == 2) out.push_back({"b1", "NOT", {"b2"}});
  return out;
}

/// Random variable renaming: variables keep their sort but change names.
inline std::map<std::string, std::string> random_renaming(Rng& rng, const std::vector<mb::Clause>& clauses) {
  auto vars = clause_variables(clauses);
  std::map<char, std::vector<int>> ids;
  for (const auto& v : vars) ids[v[0]].push_back(static_cast<int>(ids[v[0]].size()) + 10);
  for (auto& [sort, v] : ids) std::shuffle(v.begin(), v.end(), rng);
  std::map<std::string, std::string> out;
  std::map<char, std::size_t> next;
  for (const auto& v : vars) out[v] = std::string(1, v[0]) + std::to_string(ids[v[0]][next[v[0]]++]);
  return out;
}

// ---------------------------------------------------------------------------
// Structured DRSs

/// Random well-formed DRS whose conditions only use referents already in scope.
inline mb::Drs random_drs(Rng& rng, int depth = 2) {
  int box_counter = 0;
  int ref_counter = 0;
  std::function<mb::Drs(std::vector<std::string>, int)> build = [&](std::vector<std::string> scope, int d) {
    mb::Drs box;
    box.label = "b" + std::to_string(++box_counter);
    int nrefs = uniform(rng, 0, 2);
    for (int r = 0; r < nrefs; ++r) {
      const char sorts[] = {'x', 'e', 't', 's'};
      std::string name = std::string(1, sorts[uniform(rng, 0, 3)]) + std::to_string(++ref_counter);
      box.referents.push_back(name);
      scope.push_back(name);
    }
    int nconds = uniform(rng, 0, 3);
    for (int c = 0; c < nconds; ++c) {
      int kind = uniform(rng, 0, d > 0 ? 7 : 3);
      if (scope.empty() && kind < 4) continue;
      switch (kind) {
        case 0:
          box.conditions.push_back(mb::Condition::concept_of(pick(rng, std::vector<std::string>{"dog", "run~fast", "o'neill"}),
                                                              mb::Sense{uniform(rng, 0, 1) ? 'n' : 'v', uniform(rng, 1, 3)},
                                                              pick(rng, scope)));
          break;
        case 1:
          box.conditions.push_back(mb::Condition::role("Agent", pick(rng, scope), mb::Arg::ref(pick(rng, scope))));
          break;
        case 2:
          box.conditions.push_back(mb::Condition::named(pick(rng, scope), "say \"hi\" \\ there"));
          break;
        case 3:
          box.conditions.push_back(mb::Condition::comparison("TPR", mb::Arg::ref(pick(rng, scope)), mb::Arg::lit("now")));
          break;
        case 4: box.conditions.push_back(mb::Condition::negation(build(scope, d - 1))); break;
        case 5: {
          mb::Drs ante = build(scope, d - 1);
          auto inner = scope;
          inner.insert(inner.end(), ante.referents.begin(), ante.referents.end());
          box.conditions.push_back(mb::Condition::implication(std::move(ante), build(inner, d - 1)));
          break;
        }
        case 6: box.conditions.push_back(mb::Condition::disjunction(build(scope, d - 1), build(scope, d - 1))); break;
        default:
          if (scope.empty()) break;
          box.conditions.push_back(mb::Condition::proposition(pick(rng, scope), build(scope, d - 1)));
          break;
      }
    }
    return box;
  };
  return build({}, depth);
}

}  // namespace oracle
