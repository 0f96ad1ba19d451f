#include "mb/hmm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

namespace mb {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double ratio(long num, long den) { return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0; }

}  // namespace

int TrigramHmm::tag_id(std::string_view tag) const {
  auto it = tag_index_.find(tag);
  return it == tag_index_.end() ? -1 : it->second;
}

double TrigramHmm::transition_logprob(int t1, int t2, int t3) const {
  auto bi = [&](int a, int b) {
    auto it = bigram_.find({a, b});
    return it == bigram_.end() ? 0L : it->second;
  };
  auto tri = trigram_.find({t1, t2, t3});
  long f123 = tri == trigram_.end() ? 0 : tri->second;
  // Context counts: every tag occurrence and every boundary context is
  // followed by exactly one successor (a tag or the sentence end).
  long f2 = t2 == boundary() ? sentences_ : unigram_[t2];
  long f12 = 0;
  if (t1 == boundary() && t2 == boundary())
    f12 = sentences_;
  else
    f12 = bi(t1, t2);
  double p1 = ratio(unigram_[t3], tokens_ + sentences_);
  double p2 = ratio(bi(t2, t3), f2);
  double p3 = ratio(f123, f12);
  return std::log(lambdas_[0] * p1 + lambdas_[1] * p2 + lambdas_[2] * p3);
}

const std::map<int, int>* TrigramHmm::word_counts(std::string_view word) const {
  auto it = lexicon_.find(word);
  if (it != lexicon_.end()) return &it->second;
  it = lexicon_.find(lower(word));
  return it == lexicon_.end() ? nullptr : &it->second;
}

bool TrigramHmm::known(std::string_view word) const { return word_counts(word) != nullptr; }

std::string TrigramHmm::suffix_key(std::string_view word, std::size_t len) const {
  bool upper = !word.empty() && std::isupper(static_cast<unsigned char>(word[0]));
  std::string_view tail = word.substr(word.size() - len);
  return (upper ? "U|" : "l|") + lower(tail);
}

std::vector<double> TrigramHmm::suffix_distribution(std::string_view word) const {
  const std::size_t T = tags_.size();
  std::vector<double> p(T);
  for (std::size_t t = 0; t < T; ++t) p[t] = ratio(unigram_[t], tokens_);
  std::size_t max_len = std::min<std::size_t>(kMaxSuffix, word.size());
  for (std::size_t len = 1; len <= max_len; ++len) {
    auto it = suffixes_.find(suffix_key(word, len));
    if (it == suffixes_.end()) break;  // longest observed suffix reached
    long total = 0;
    for (const auto& [t, c] : it->second) total += c;
    std::vector<double> next(T);
    for (std::size_t t = 0; t < T; ++t) {
      auto c = it->second.find(static_cast<int>(t));
      double ml = c == it->second.end() ? 0.0 : ratio(c->second, total);
      next[t] = (ml + theta_ * p[t]) / (1.0 + theta_);
    }
    p = std::move(next);
  }
  return p;
}

double TrigramHmm::emission_logprob(std::string_view word, int tag) const {
  if (const auto* counts = word_counts(word)) {
    auto it = counts->find(tag);
    if (it == counts->end()) return kNegInf;
    return std::log(ratio(it->second, unigram_[tag]));
  }
  // Bayes inversion of the suffix model; P(word) is shared by every tag at
  // this position and drops out of the argmax.
  auto dist = suffix_distribution(word);
  return std::log(dist[tag]) - std::log(ratio(unigram_[tag], tokens_));
}

std::vector<std::vector<double>> TrigramHmm::emission_table(
    const std::vector<std::string>& words, const std::vector<std::optional<int>>& fixed) const {
  const int T = static_cast<int>(tags_.size());
  std::vector<std::vector<double>> e(words.size(), std::vector<double>(T, kNegInf));
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (fixed[i]) {
      int t = *fixed[i];
      double v = emission_logprob(words[i], t);
      if (v == kNegInf) {
        auto dist = suffix_distribution(words[i]);
        v = std::log(dist[t]) - std::log(ratio(unigram_[t], tokens_));
      }
      e[i][t] = v;
      continue;
    }
    for (int t = 0; t < T; ++t) e[i][t] = emission_logprob(words[i], t);
  }
  return e;
}

TrigramHmm::Lattice TrigramHmm::viterbi(const std::vector<std::string>& words,
                                        const std::vector<std::optional<int>>& fixed) const {
  const int T = static_cast<int>(tags_.size());
  const int B = boundary();
  const int S = (T + 1) * T;  // states (a, b): a in tags + boundary, b in tags
  const std::size_t n = words.size();
  Lattice lat;
  if (n == 0) {
    lat.best = 0;
    return lat;
  }
  auto emis = emission_table(words, fixed);
  lat.delta.assign(n, std::vector<double>(S, kNegInf));
  lat.back.assign(n, std::vector<int>(S, -1));
  // rank[s]: position of the best prefix ending in state s in lexicographic
  // order, used to prefer the smallest tag sequence among equal scores.
  std::vector<long> rank(S, 0), next_rank(S, 0);

  for (int b = 0; b < T; ++b) {
    int s = B * T + b;
    lat.delta[0][s] = transition_logprob(B, B, b) + emis[0][b];
    rank[s] = b;
  }
  for (std::size_t i = 1; i < n; ++i) {
    std::vector<std::pair<std::pair<long, int>, int>> order;
    for (int a = 0; a < T; ++a) {
      for (int b = 0; b < T; ++b) {
        int s = a * T + b;
        if (emis[i][b] == kNegInf) continue;
        double best = kNegInf;
        int arg = -1;
        for (int p = 0; p <= T; ++p) {
          int prev = p * T + a;
          double d = lat.delta[i - 1][prev];
          if (d == kNegInf) continue;
          double v = d + transition_logprob(p, a, b) + emis[i][b];
          if (arg < 0 || v > best || (v == best && rank[prev] < rank[arg])) {
            best = v;
            arg = prev;
          }
        }
        if (arg < 0) continue;
        lat.delta[i][s] = best;
        lat.back[i][s] = arg;
        order.push_back({{rank[arg], b}, s});
      }
    }
    std::sort(order.begin(), order.end());
    std::fill(next_rank.begin(), next_rank.end(), 0);
    for (std::size_t r = 0; r < order.size(); ++r) next_rank[order[r].second] = static_cast<long>(r);
    rank.swap(next_rank);
  }

  int end_state = -1;
  for (int s = 0; s < S; ++s) {
    double d = lat.delta[n - 1][s];
    if (d == kNegInf) continue;
    double v = d + end_logprob(s / T, s % T);
    if (end_state < 0 || v > lat.best || (v == lat.best && rank[s] < rank[end_state])) {
      lat.best = v;
      end_state = s;
    }
  }
  if (end_state < 0) throw Error("no tag sequence has non-zero probability");
  lat.path.assign(n, 0);
  int s = end_state;
  for (std::size_t i = n; i-- > 0;) {
    lat.path[i] = s % T;
    s = lat.back[i][s];
  }
  return lat;
}

std::vector<std::string> TrigramHmm::tag(const std::vector<std::string>& words) const {
  return tag(words, std::vector<std::optional<std::string>>(words.size()));
}

std::vector<std::string> TrigramHmm::tag(const std::vector<std::string>& words,
                                         const std::vector<std::optional<std::string>>& fixed) const {
  if (fixed.size() != words.size()) throw Error("constraint vector length differs from sentence length");
  std::vector<std::optional<int>> ids(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!fixed[i]) continue;
    int id = tag_id(*fixed[i]);
    if (id >= 0) ids[i] = id;  // tags the model never saw cannot be forced
  }
  auto lat = viterbi(words, ids);
  std::vector<std::string> out;
  for (int t : lat.path) out.push_back(tags_[t]);
  for (std::size_t i = 0; i < words.size(); ++i)
    if (fixed[i]) out[i] = *fixed[i];
  return out;
}

std::vector<std::vector<ScoredTag>> TrigramHmm::kbest(const std::vector<std::string>& words,
                                                      std::size_t k) const {
  const int T = static_cast<int>(tags_.size());
  const std::size_t n = words.size();
  std::vector<std::vector<ScoredTag>> out(n);
  if (n == 0 || k == 0) return out;
  std::vector<std::optional<int>> none(n);
  auto lat = viterbi(words, none);
  auto emis = emission_table(words, none);
  const int S = (T + 1) * T;
  // beta[i][s]: best completion score after state s at position i
  std::vector<std::vector<double>> beta(n, std::vector<double>(S, kNegInf));
  for (int s = 0; s < S; ++s) beta[n - 1][s] = end_logprob(s / T, s % T);
  for (std::size_t i = n - 1; i-- > 0;) {
    for (int s = 0; s < S; ++s) {
      int a = s / T, b = s % T;
      double best = kNegInf;
      for (int c = 0; c < T; ++c) {
        if (emis[i + 1][c] == kNegInf) continue;
        double v = transition_logprob(a, b, c) + emis[i + 1][c] + beta[i + 1][b * T + c];
        best = std::max(best, v);
      }
      beta[i][s] = best;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> mm(T, kNegInf);
    for (int s = 0; s < S; ++s) {
      double d = lat.delta[i][s];
      if (d == kNegInf || beta[i][s] == kNegInf) continue;
      mm[s % T] = std::max(mm[s % T], d + beta[i][s]);
    }
    std::vector<ScoredTag> cands;
    int vit = lat.path[i];
    cands.push_back({tags_[vit], std::min(0.0, mm[vit] - lat.best)});
    std::vector<ScoredTag> rest;
    for (int t = 0; t < T; ++t)
      if (t != vit && mm[t] != kNegInf) rest.push_back({tags_[t], mm[t] - lat.best});
    std::stable_sort(rest.begin(), rest.end(), [](const ScoredTag& x, const ScoredTag& y) {
      return x.score > y.score;
    });
    for (auto& r : rest) {
      if (cands.size() >= k) break;
      cands.push_back(std::move(r));
    }
    out[i] = std::move(cands);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

void TrigramHmm::finalize() {
  const int B = boundary();
  long total = tokens_ + sentences_;
  std::array<double, 3> lam{0, 0, 0};
  for (const auto& [key, f123] : trigram_) {
    auto [t1, t2, t3] = key;
    long f12 = (t1 == B && t2 == B) ? sentences_ : bigram_.at({t1, t2});
    long f2 = t2 == B ? sentences_ : unigram_[t2];
    long f23 = bigram_.at({t2, t3});
    double c3 = f12 > 1 ? static_cast<double>(f123 - 1) / static_cast<double>(f12 - 1) : 0.0;
    double c2 = f2 > 1 ? static_cast<double>(f23 - 1) / static_cast<double>(f2 - 1) : 0.0;
    double c1 = total > 1 ? static_cast<double>(unigram_[t3] - 1) / static_cast<double>(total - 1) : 0.0;
    if (c3 >= c2 && c3 >= c1)
      lam[2] += static_cast<double>(f123);
    else if (c2 >= c1)
      lam[1] += static_cast<double>(f123);
    else
      lam[0] += static_cast<double>(f123);
  }
  // Keep every estimate strictly positive.
  constexpr double kFloor = 1e-6;
  double sum = lam[0] + lam[1] + lam[2];
  for (auto& l : lam) l = std::max(kFloor, sum > 0 ? l / sum : 1.0 / 3);
  sum = lam[0] + lam[1] + lam[2];
  for (auto& l : lam) l /= sum;
  lambdas_ = lam;

  const std::size_t T = tags_.size();
  double mean = 1.0 / static_cast<double>(T);
  double var = 0;
  for (std::size_t t = 0; t < T; ++t) {
    double p = ratio(unigram_[t], tokens_);
    var += (p - mean) * (p - mean);
  }
  theta_ = T > 1 ? std::sqrt(var / static_cast<double>(T - 1)) : 1.0;
  if (theta_ <= 0) theta_ = 1e-3;
}

TrigramHmm train_hmm(const std::vector<TaggedSentence>& sentences, const Inventory* tagset) {
  if (sentences.empty()) throw Error("tagger training set is empty");
  TrigramHmm m;
  std::set<std::string> tags;
  for (const auto& s : sentences) {
    if (s.words.size() != s.tags.size()) throw Error("sentence has different numbers of words and tags");
    for (const auto& t : s.tags) {
      if (tagset && !tagset->contains(t)) throw Error("unknown tag '" + t + "'");
      tags.insert(t);
    }
  }
  if (tags.empty()) throw Error("tagger training set has no tokens");
  m.tags_.assign(tags.begin(), tags.end());
  for (std::size_t i = 0; i < m.tags_.size(); ++i) m.tag_index_[m.tags_[i]] = static_cast<int>(i);
  const int B = m.boundary();
  m.unigram_.assign(m.tags_.size() + 1, 0);

  for (const auto& s : sentences) {
    ++m.sentences_;
    int p1 = B, p2 = B;
    for (std::size_t i = 0; i < s.words.size(); ++i) {
      int t = m.tag_id(s.tags[i]);
      ++m.tokens_;
      ++m.unigram_[t];
      ++m.bigram_[{p2, t}];
      ++m.trigram_[{p1, p2, t}];
      ++m.lexicon_[s.words[i]][t];
      const std::string& w = s.words[i];
      for (std::size_t len = 1; len <= std::min<std::size_t>(TrigramHmm::kMaxSuffix, w.size()); ++len)
        ++m.suffixes_[m.suffix_key(w, len)][t];
      p1 = p2;
      p2 = t;
    }
    ++m.unigram_[B];
    ++m.bigram_[{p2, B}];
    ++m.trigram_[{p1, p2, B}];
  }
  m.finalize();
  return m;
}

TrigramHmm train_semtagger(const std::vector<TaggedSentence>& sentences, const Inventory& tagset) {
  return train_hmm(sentences, &tagset);
}

std::vector<std::string> tag_semtags(const TrigramHmm& model, const std::vector<std::string>& tokens) {
  return model.tag(tokens);
}

// ---------------------------------------------------------------------------
// Serialization: counts only; probabilities are re-derived on load.

std::string TrigramHmm::serialize() const {
  std::ostringstream out;
  out << "mb-hmm\t1\n";
  out << "tags";
  for (const auto& t : tags_) out << '\t' << escape_cell(t);
  out << "\nsize\t" << sentences_ << '\t' << tokens_ << '\n';
  for (std::size_t t = 0; t < unigram_.size(); ++t) out << "U\t" << t << '\t' << unigram_[t] << '\n';
  for (const auto& [k, c] : bigram_) out << "B\t" << k.first << '\t' << k.second << '\t' << c << '\n';
  for (const auto& [k, c] : trigram_)
    out << "R\t" << k[0] << '\t' << k[1] << '\t' << k[2] << '\t' << c << '\n';
  for (const auto& [w, m] : lexicon_)
    for (const auto& [t, c] : m) out << "W\t" << escape_cell(w) << '\t' << t << '\t' << c << '\n';
  for (const auto& [w, m] : suffixes_)
    for (const auto& [t, c] : m) out << "X\t" << escape_cell(w) << '\t' << t << '\t' << c << '\n';
  return out.str();
}

TrigramHmm TrigramHmm::deserialize(std::string_view text) {
  auto lines = split(text, '\n');
  if (lines.size() < 3 || lines[0] != "mb-hmm\t1") throw Error("not an HMM model (version header)");
  TrigramHmm m;
  auto head = split(lines[1], '\t');
  if (head.empty() || head[0] != "tags") throw Error("HMM model: missing tag line");
  for (std::size_t i = 1; i < head.size(); ++i) {
    m.tags_.push_back(unescape_cell(head[i]));
    m.tag_index_[m.tags_.back()] = static_cast<int>(i - 1);
  }
  m.unigram_.assign(m.tags_.size() + 1, 0);
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto c = split(lines[i], '\t');
    const std::string& kind = c[0];
    if (kind == "size" && c.size() == 3) {
      m.sentences_ = std::stol(c[1]);
      m.tokens_ = std::stol(c[2]);
    } else if (kind == "U" && c.size() == 3) {
      m.unigram_.at(std::stoul(c[1])) = std::stol(c[2]);
    } else if (kind == "B" && c.size() == 4) {
      m.bigram_[{std::stoi(c[1]), std::stoi(c[2])}] = std::stol(c[3]);
    } else if (kind == "R" && c.size() == 5) {
      m.trigram_[{std::stoi(c[1]), std::stoi(c[2]), std::stoi(c[3])}] = std::stol(c[4]);
    } else if (kind == "W" && c.size() == 4) {
      m.lexicon_[unescape_cell(c[1])][std::stoi(c[2])] = std::stoi(c[3]);
    } else if (kind == "X" && c.size() == 4) {
      m.suffixes_[unescape_cell(c[1])][std::stoi(c[2])] = std::stoi(c[3]);
    } else {
      throw Error("HMM model line " + std::to_string(i) + " malformed");
    }
  }
  if (m.tags_.empty() || m.tokens_ == 0) throw Error("HMM model has no data");
  m.finalize();
  return m;
}

bool TrigramHmm::operator==(const TrigramHmm& o) const {
  return tags_ == o.tags_ && sentences_ == o.sentences_ && tokens_ == o.tokens_ &&
         unigram_ == o.unigram_ && bigram_ == o.bigram_ && trigram_ == o.trigram_ &&
         lexicon_ == o.lexicon_ && suffixes_ == o.suffixes_ && lambdas_ == o.lambdas_ &&
         theta_ == o.theta_;
}

}  // namespace mb
