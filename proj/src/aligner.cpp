#include "mb/aligner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>

namespace mb {

namespace {

constexpr double kTiny = 1e-300;

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

}  // namespace

double Ibm1Model::prob(std::string_view target, std::string_view source) const {
  auto s = t_.find(source);
  if (s == t_.end()) return 0.0;
  auto w = s->second.find(std::string(target));
  return w == s->second.end() ? 0.0 : w->second;
}

std::vector<int> Ibm1Model::best_sources(const std::vector<std::string>& source,
                                         const std::vector<std::string>& target) const {
  const long l = static_cast<long>(source.size());
  const long m = static_cast<long>(target.size());
  std::vector<int> out(target.size(), -1);
  for (long j = 0; j < m; ++j) {
    const auto& f = target[static_cast<std::size_t>(j)];
    int best = -1;
    double best_p = 0.0;
    long best_dist = 0;
    for (long i = 0; i < l; ++i) {
      double p = prob(f, source[static_cast<std::size_t>(i)]);
      if (p <= 0.0) continue;
      long dist = std::labs(i * m - j * l);
      if (best < 0 || p > best_p || (p == best_p && dist < best_dist)) {
        best = static_cast<int>(i);
        best_p = p;
        best_dist = dist;
      }
    }
    if (use_null_ && prob(f, kNull) > best_p) best = -1;
    out[static_cast<std::size_t>(j)] = best;
  }
  return out;
}

std::string Ibm1Model::serialize() const {
  std::string out = "mb-ibm1\t1\nnull\t" + std::string(use_null_ ? "1" : "0") + "\nhistory";
  for (double h : history_) out += "\t" + hexfloat(h);
  out += "\n";
  for (const auto& [s, row] : t_)
    for (const auto& [w, p] : row) out += "t\t" + escape_cell(s) + "\t" + escape_cell(w) + "\t" + hexfloat(p) + "\n";
  return out;
}

Ibm1Model Ibm1Model::deserialize(std::string_view text) {
  auto lines = split(text, '\n');
  if (lines.empty() || lines[0] != "mb-ibm1\t1") throw Error("not an aligner model (bad header)");
  Ibm1Model m;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto c = split(lines[i], '\t');
    if (c[0] == "null" && c.size() == 2) {
      m.use_null_ = c[1] == "1";
    } else if (c[0] == "history") {
      for (std::size_t k = 1; k < c.size(); ++k) m.history_.push_back(std::strtod(c[k].c_str(), nullptr));
    } else if (c[0] == "t" && c.size() == 4) {
      m.t_[unescape_cell(c[1])][unescape_cell(c[2])] = std::strtod(c[3].c_str(), nullptr);
    } else {
      throw Error("aligner model line " + std::to_string(i + 1) + " malformed");
    }
  }
  return m;
}

double corpus_log_likelihood(const Ibm1Model& model, const std::vector<SentencePair>& bitext) {
  double ll = 0.0;
  for (const auto& p : bitext) {
    const double norm = static_cast<double>(p.source.size() + (model.uses_null() ? 1 : 0));
    for (const auto& f : p.target) {
      double sum = model.uses_null() ? model.prob(f, Ibm1Model::kNull) : 0.0;
      for (const auto& e : p.source) sum += model.prob(f, e);
      ll += std::log(std::max(sum / std::max(norm, 1.0), kTiny));
    }
  }
  return ll;
}

Ibm1Model train_ibm1(const std::vector<SentencePair>& bitext, int iterations, bool use_null) {
  if (bitext.empty()) throw Error("cannot train an aligner on an empty bitext");
  if (iterations < 1) throw Error("aligner needs at least one iteration");
  Ibm1Model m;
  m.use_null_ = use_null;
  std::set<std::string> vocab;
  for (const auto& p : bitext) vocab.insert(p.target.begin(), p.target.end());
  const double uniform = vocab.empty() ? 0.0 : 1.0 / static_cast<double>(vocab.size());
  for (const auto& p : bitext)
    for (const auto& f : p.target) {
      for (const auto& e : p.source) m.t_[e][f] = uniform;
      if (use_null) m.t_[std::string(Ibm1Model::kNull)][f] = uniform;
    }
  m.history_.push_back(corpus_log_likelihood(m, bitext));
  for (int it = 0; it < iterations; ++it) {
    std::map<std::string, std::map<std::string, double>, std::less<>> counts;
    for (const auto& p : bitext) {
      for (const auto& f : p.target) {
        double denom = use_null ? m.prob(f, Ibm1Model::kNull) : 0.0;
        for (const auto& e : p.source) denom += m.prob(f, e);
        if (denom <= 0.0) continue;
        for (const auto& e : p.source) counts[e][f] += m.prob(f, e) / denom;
        if (use_null) counts[std::string(Ibm1Model::kNull)][f] += m.prob(f, Ibm1Model::kNull) / denom;
      }
    }
    for (auto& [e, row] : counts) {
      double total = 0.0;
      for (const auto& [f, c] : row) total += c;
      auto& out = m.t_[e];
      for (auto& [f, p] : out) p = 0.0;
      for (const auto& [f, c] : row) out[f] = c / total;
    }
    m.history_.push_back(corpus_log_likelihood(m, bitext));
  }
  return m;
}

std::vector<SentencePair> reversed(const std::vector<SentencePair>& bitext) {
  std::vector<SentencePair> out;
  out.reserve(bitext.size());
  for (const auto& p : bitext) out.push_back({p.target, p.source});
  return out;
}

bool is_perfect(const std::vector<Link>& links, const std::vector<std::string>& source,
                const std::vector<std::string>& target) {
  std::vector<int> deg_s(source.size(), 0), deg_t(target.size(), 0);
  for (const auto& [i, j] : links) {
    bool ps = is_punctuation(source.at(static_cast<std::size_t>(i)));
    bool pt = is_punctuation(target.at(static_cast<std::size_t>(j)));
    if (ps != pt) return false;
    if (!ps) {
      ++deg_s[static_cast<std::size_t>(i)];
      ++deg_t[static_cast<std::size_t>(j)];
    }
  }
  for (std::size_t i = 0; i < source.size(); ++i)
    if (!is_punctuation(source[i]) && deg_s[i] != 1) return false;
  for (std::size_t j = 0; j < target.size(); ++j)
    if (!is_punctuation(target[j]) && deg_t[j] != 1) return false;
  auto sorted = links;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 1; k < sorted.size(); ++k)
    if (sorted[k].first <= sorted[k - 1].first || sorted[k].second <= sorted[k - 1].second) return false;
  return true;
}

AlignmentSet classify(std::vector<Link> links, const std::vector<std::string>& source,
                      const std::vector<std::string>& target) {
  std::sort(links.begin(), links.end());
  links.erase(std::unique(links.begin(), links.end()), links.end());
  for (const auto& [i, j] : links)
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= source.size() ||
        static_cast<std::size_t>(j) >= target.size())
      throw Error("alignment link " + std::to_string(i) + "-" + std::to_string(j) + " out of range");
  AlignmentSet a;
  a.perfect = is_perfect(links, source, target);
  a.links = std::move(links);
  return a;
}

AlignmentSet align(const Ibm1Model& forward, const Ibm1Model& reverse, const SentencePair& pair) {
  auto fwd = forward.best_sources(pair.source, pair.target);  // target -> source
  auto rev = reverse.best_sources(pair.target, pair.source);  // source -> target
  std::vector<Link> links;
  for (std::size_t j = 0; j < fwd.size(); ++j) {
    int i = fwd[j];
    if (i >= 0 && rev[static_cast<std::size_t>(i)] == static_cast<int>(j)) links.emplace_back(i, static_cast<int>(j));
  }
  return classify(std::move(links), pair.source, pair.target);
}

std::string to_pharaoh(const std::vector<Link>& links) {
  std::string out;
  for (const auto& [i, j] : links) {
    if (!out.empty()) out += ' ';
    out += std::to_string(i) + "-" + std::to_string(j);
  }
  return out;
}

std::vector<Link> parse_pharaoh(std::string_view line) {
  std::vector<Link> out;
  for (const auto& item : split(line, ' ')) {
    if (item.empty()) continue;
    auto dash = item.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == item.size())
      throw Error("malformed alignment link '" + item + "'");
    try {
      std::size_t a = 0, b = 0;
      int i = std::stoi(item.substr(0, dash), &a);
      int j = std::stoi(item.substr(dash + 1), &b);
      if (a != dash || b != item.size() - dash - 1 || i < 0 || j < 0) throw Error("");
      out.emplace_back(i, j);
    } catch (const std::exception&) {
      throw Error("malformed alignment link '" + item + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

ProjectionReport project(const Translation& english, Translation& target, const AlignmentSet& alignment) {
  const std::size_t n_src = english.token_count();
  const std::size_t n_tgt = target.token_count();
  std::vector<int> tgt_of(n_src, -1), src_of(n_tgt, -1);
  for (const auto& [i, j] : alignment.links) {
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n_src || static_cast<std::size_t>(j) >= n_tgt)
      throw Error("alignment link " + std::to_string(i) + "-" + std::to_string(j) + " out of range");
    if (tgt_of[static_cast<std::size_t>(i)] >= 0 || src_of[static_cast<std::size_t>(j)] >= 0)
      throw Error("projection needs one-to-one links");
    tgt_of[static_cast<std::size_t>(i)] = j;
    src_of[static_cast<std::size_t>(j)] = i;
  }

  ProjectionReport report;
  for (LayerName name : kTokenLayers) {
    const Layer* src = english.layer(name);
    if (src && src->size() != n_src) src = nullptr;
    Layer& out = target.layers[name];
    if (out.size() != n_tgt) {
      out.values.assign(n_tgt, "");
      out.provenance.assign(n_tgt, Provenance::machine);
    }
    for (std::size_t j = 0; j < n_tgt; ++j) {
      std::optional<std::string> value;
      std::string reason;
      const int i = src_of[j];
      if (name == LayerName::cat && !alignment.perfect) {
        reason = "imperfect alignment";
      } else if (i < 0) {
        reason = "unaligned";
      } else if (!src) {
        reason = "no source layer";
      } else if (src->is_hole(static_cast<std::size_t>(i))) {
        reason = "source hole";
      } else {
        value = src->values[static_cast<std::size_t>(i)];
        if (name == LayerName::cor) {
          auto ant = parse_antecedent(*value);
          std::optional<int> mapped;
          if (ant && *ant >= 0 && static_cast<std::size_t>(*ant) < n_src) {
            int t = tgt_of[static_cast<std::size_t>(*ant)];
            if (t >= 0 && static_cast<std::size_t>(t) < j) mapped = t;
          }
          value = encode_antecedent(mapped);
        }
      }
      if (out.provenance[j] == Provenance::human) {
        if (value && *value != out.values[j]) report.conflicts.push_back({name, static_cast<int>(j), out.values[j], *value});
        continue;
      }
      if (value) {
        out.values[j] = *value;
      } else {
        out.values[j].clear();
        report.holes.push_back({name, static_cast<int>(j), reason});
      }
      out.provenance[j] = Provenance::machine;
    }
  }
  target.alignment = to_pharaoh(alignment.links);
  return report;
}

std::string hole_report_tsv(const ProjectionReport& report) {
  std::string out;
  for (const auto& h : report.holes)
    out += std::string(to_string(h.layer)) + "\t" + std::to_string(h.token) + "\t" + h.reason + "\n";
  return out;
}

}  // namespace mb
