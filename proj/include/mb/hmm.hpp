#pragma once

#include <array>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mb/layers.hpp"

namespace mb {

struct TaggedSentence {
  std::vector<std::string> words;
  std::vector<std::string> tags;
};

struct ScoredTag {
  std::string tag;
  double score;  // log-probability of the best path through this tag, relative to the best path
};

/// Second-order HMM tagger with deleted-interpolation transitions and a
/// suffix model for unknown words.
class TrigramHmm {
 public:
  static constexpr int kMaxSuffix = 4;
  static constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  /// Model tags, sorted; ids index into this list. The sentence boundary
  /// has id `boundary()`.
  const std::vector<std::string>& tags() const { return tags_; }
  int boundary() const { return static_cast<int>(tags_.size()); }
  int tag_id(std::string_view tag) const;  // -1 when unknown

  /// Interpolation weights for unigram, bigram and trigram estimates.
  const std::array<double, 3>& lambdas() const { return lambdas_; }

  double transition_logprob(int t1, int t2, int t3) const;
  double end_logprob(int t1, int t2) const { return transition_logprob(t1, t2, boundary()); }
  double emission_logprob(std::string_view word, int tag) const;
  /// Suffix-model distribution P(tag | word) used for unknown words.
  std::vector<double> suffix_distribution(std::string_view word) const;
  bool known(std::string_view word) const;

  /// Viterbi decode; among equal-scoring paths the lexicographically
  /// smallest tag sequence wins.
  std::vector<std::string> tag(const std::vector<std::string>& words) const;
  /// Viterbi restricted so that position i carries `fixed[i]` when set.
  std::vector<std::string> tag(const std::vector<std::string>& words,
                               const std::vector<std::optional<std::string>>& fixed) const;
  /// Per position, up to k tags ranked by max-marginal score; the first entry
  /// is always the Viterbi tag.
  std::vector<std::vector<ScoredTag>> kbest(const std::vector<std::string>& words, std::size_t k) const;

  std::string serialize() const;
  static TrigramHmm deserialize(std::string_view text);
  bool operator==(const TrigramHmm& o) const;

 private:
  friend TrigramHmm train_hmm(const std::vector<TaggedSentence>&, const Inventory*);

  struct Lattice {
    // delta[i][a * T + b]: best score of a prefix ending in (a, b) at position i
    std::vector<std::vector<double>> delta;
    std::vector<std::vector<int>> back;
    double best = kNegInf;
    std::vector<int> path;
  };
  Lattice viterbi(const std::vector<std::string>& words,
                  const std::vector<std::optional<int>>& fixed) const;
  std::vector<std::vector<double>> emission_table(const std::vector<std::string>& words,
                                                  const std::vector<std::optional<int>>& fixed) const;
  void finalize();  // derive lambdas and suffix smoothing from counts
  std::string suffix_key(std::string_view word, std::size_t len) const;
  const std::map<int, int>* word_counts(std::string_view word) const;

  std::vector<std::string> tags_;
  std::map<std::string, int, std::less<>> tag_index_;
  long sentences_ = 0;
  long tokens_ = 0;
  std::vector<long> unigram_;                         // size T + 1 (boundary = sentence ends)
  std::map<std::pair<int, int>, long> bigram_;        // includes boundary contexts
  std::map<std::array<int, 3>, long> trigram_;
  std::map<std::string, std::map<int, int>, std::less<>> lexicon_;
  std::map<std::string, std::map<int, int>, std::less<>> suffixes_;
  std::array<double, 3> lambdas_{1.0 / 3, 1.0 / 3, 1.0 / 3};
  double theta_ = 1.0;
};

/// Counts tags, words and suffixes. When `tagset` is given every tag must be in it.
TrigramHmm train_hmm(const std::vector<TaggedSentence>& sentences, const Inventory* tagset = nullptr);

/// Semantic tagger: a TrigramHmm validated against the semantic tagset.
TrigramHmm train_semtagger(const std::vector<TaggedSentence>& sentences, const Inventory& tagset);
std::vector<std::string> tag_semtags(const TrigramHmm& model, const std::vector<std::string>& tokens);

}  // namespace mb
