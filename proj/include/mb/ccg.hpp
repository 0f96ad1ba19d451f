#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mb/hmm.hpp"
#include "mb/layers.hpp"

namespace mb {

/// LEX marks a leaf. RP and LP absorb punctuation on the right and left.
enum class Combinator { LEX, FA, BA, FC, BC, BCX, RP, LP };

std::string_view to_string(Combinator c);
Combinator parse_combinator(std::string_view s);
bool is_composition(Combinator c);

class CombinatorSet {
 public:
  static CombinatorSet all();
  static CombinatorSet none() { return CombinatorSet(0); }
  CombinatorSet with(Combinator c) const { return CombinatorSet(bits_ | bit(c)); }
  CombinatorSet without(Combinator c) const { return CombinatorSet(bits_ & ~bit(c)); }
  bool contains(Combinator c) const { return (bits_ & bit(c)) != 0; }

 private:
  explicit CombinatorSet(unsigned bits) : bits_(bits) {}
  static unsigned bit(Combinator c) { return 1u << static_cast<unsigned>(c); }
  unsigned bits_;
};

inline constexpr Combinator kBinaryCombinators[] = {Combinator::FA, Combinator::BA, Combinator::FC,
                                                    Combinator::BC, Combinator::BCX, Combinator::RP,
                                                    Combinator::LP};

/// Result of applying a binary combinator, if it applies.
std::optional<Category> combine(Combinator rule, const Category& left, const Category& right);

struct ScoredCategory {
  Category category;
  double score = 0;  // log-probability relative to the best supertag sequence
};

/// Lexicographic parse quality: leaf score, then fewer compositions, then
/// more right-branching. Every component is additive over the tree.
struct ParseScore {
  std::int64_t leaf = 0;  // sum of leaf scores in units of 1e-9
  int compositions = 0;
  int right_branching = 0;  // sum over internal nodes of the right child's width

  static std::int64_t quantize(double logprob);
  ParseScore operator+(const ParseScore& o) const;
  bool operator==(const ParseScore&) const = default;
  bool better_than(const ParseScore& o) const;
};

struct Derivation {
  Combinator rule = Combinator::LEX;
  Category category;
  int token = -1;    // leaves only
  double score = 0;  // leaves only
  std::vector<Derivation> children;  // empty or two

  bool is_leaf() const { return rule == Combinator::LEX; }
  int first_token() const;
  int last_token() const;
  int width() const { return last_token() - first_token() + 1; }
  ParseScore quality() const;
  std::vector<const Derivation*> leaves() const;
};

/// Recomputes every internal category from its children.
bool type_checks(const Derivation& d, CombinatorSet rules = CombinatorSet::all());

struct ParseResult {
  /// One tree when complete, otherwise the best cover by fewest fragments.
  std::vector<Derivation> fragments;
  bool complete = false;
};

struct ParseOptions {
  CombinatorSet rules = CombinatorSet::all();
};

/// CKY over the candidate categories. Prefers an S-rooted derivation over
/// any other single constituent.
ParseResult parse(const std::vector<std::vector<ScoredCategory>>& candidates, const ParseOptions& options = {});

/// Per token, up to k categories from the supertagger, best first.
std::vector<std::vector<ScoredCategory>> assign_categories(const TrigramHmm& supertagger,
                                                           const std::vector<std::string>& tokens,
                                                           std::size_t k = 3);

/// `(FA (lex 0 (S\NP)/NP) (lex 1 NP))`
std::string serialize_derivation(const Derivation& d);
Derivation parse_derivation(std::string_view text);

}  // namespace mb
