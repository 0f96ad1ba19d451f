#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mb/layers.hpp"
#include "mb/store.hpp"

namespace mb {

using Link = std::pair<int, int>;  // (source index, target index)

struct AlignmentSet {
  std::vector<Link> links;  // sorted
  bool perfect = true;
};

struct SentencePair {
  std::vector<std::string> source;
  std::vector<std::string> target;
};

/// Lexical translation table t(target | source) with an optional NULL source.
class Ibm1Model {
 public:
  static constexpr std::string_view kNull = "<null>";

  double prob(std::string_view target, std::string_view source) const;
  bool uses_null() const { return use_null_; }
  /// Corpus log-likelihood before the first update and after each iteration.
  const std::vector<double>& log_likelihood() const { return history_; }
  const std::map<std::string, std::map<std::string, double>, std::less<>>& table() const { return t_; }

  /// Per target position, the best source position or -1 for NULL / no candidate.
  std::vector<int> best_sources(const std::vector<std::string>& source,
                                const std::vector<std::string>& target) const;

  std::string serialize() const;
  static Ibm1Model deserialize(std::string_view text);

 private:
  friend Ibm1Model train_ibm1(const std::vector<SentencePair>&, int, bool);
  std::map<std::string, std::map<std::string, double>, std::less<>> t_;
  bool use_null_ = true;
  std::vector<double> history_;
};

Ibm1Model train_ibm1(const std::vector<SentencePair>& bitext, int iterations = 5, bool use_null = true);

/// Corpus log-likelihood of `bitext` under `model`.
double corpus_log_likelihood(const Ibm1Model& model, const std::vector<SentencePair>& bitext);

std::vector<SentencePair> reversed(const std::vector<SentencePair>& bitext);

/// Bijective over non-punctuation tokens and strictly monotonic.
bool is_perfect(const std::vector<Link>& links, const std::vector<std::string>& source,
                const std::vector<std::string>& target);

/// Intersection of forward and reverse best links.
AlignmentSet align(const Ibm1Model& forward, const Ibm1Model& reverse, const SentencePair& pair);

std::string to_pharaoh(const std::vector<Link>& links);
std::vector<Link> parse_pharaoh(std::string_view line);
AlignmentSet classify(std::vector<Link> links, const std::vector<std::string>& source,
                      const std::vector<std::string>& target);

struct Hole {
  LayerName layer;
  int token;
  std::string reason;
};

struct Conflict {
  LayerName layer;
  int token;
  std::string existing;
  std::string projected;
};

struct ProjectionReport {
  std::vector<Hole> holes;
  std::vector<Conflict> conflicts;
};

/// Copies token layers from the English translation onto `target` across
/// the links. Human-flagged target tokens are never overwritten.
ProjectionReport project(const Translation& english, Translation& target, const AlignmentSet& alignment);

/// `layer<TAB>token_index<TAB>reason`
std::string hole_report_tsv(const ProjectionReport& report);

}  // namespace mb
