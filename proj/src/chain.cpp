#include "mb/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace mb {

std::vector<std::string> role_feature_strings(const std::vector<RoleFeatures>& tokens, std::size_t i) {
  auto at = [&](long d) -> const RoleFeatures* {
    long j = static_cast<long>(i) + d;
    if (j < 0 || j >= static_cast<long>(tokens.size())) return nullptr;
    return &tokens[static_cast<std::size_t>(j)];
  };
  auto sem = [&](long d) { auto* t = at(d); return t ? t->semtag : std::string(d < 0 ? "<s>" : "</s>"); };
  auto sym = [&](long d) { auto* t = at(d); return t ? t->symbol : std::string(d < 0 ? "<s>" : "</s>"); };
  auto cat = [&](long d) { auto* t = at(d); return t ? t->category : std::string(d < 0 ? "<s>" : "</s>"); };

  std::vector<std::string> f;
  f.push_back("bias");
  for (long d = -2; d <= 2; ++d) {
    f.push_back("s" + std::to_string(d) + "=" + sem(d));
    f.push_back("c" + std::to_string(d) + "=" + cat(d));
  }
  for (long d = -1; d <= 1; ++d) f.push_back("y" + std::to_string(d) + "=" + sym(d));
  f.push_back("s0c0=" + sem(0) + "|" + cat(0));
  f.push_back("s0y0=" + sem(0) + "|" + sym(0));
  f.push_back("c-1c0c1=" + cat(-1) + "|" + cat(0) + "|" + cat(1));
  f.push_back("s-1s0=" + sem(-1) + "|" + sem(0));
  f.push_back("s0s1=" + sem(0) + "|" + sem(1));
  return f;
}

int ChainModel::label_id(std::string_view label) const {
  auto it = label_index_.find(label);
  return it == label_index_.end() ? -1 : it->second;
}

std::vector<int> ChainModel::feature_ids(const std::vector<std::string>& features) const {
  std::vector<int> ids;
  for (const auto& f : features) {
    auto it = feature_index_.find(f);
    if (it != feature_index_.end()) ids.push_back(it->second);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

double ChainModel::emission_score(const std::vector<int>& ids, int label) const {
  const std::size_t L = labels_.size();
  double s = 0;
  for (int f : ids) s += emission_[static_cast<std::size_t>(f) * L + static_cast<std::size_t>(label)];
  return s;
}

double ChainModel::transition_score(int prev, int label) const {
  return transition_[static_cast<std::size_t>(prev + 1) * labels_.size() + static_cast<std::size_t>(label)];
}

std::vector<int> ChainModel::viterbi(const std::vector<std::vector<int>>& feats,
                                     const std::vector<std::optional<int>>& fixed) const {
  const int L = static_cast<int>(labels_.size());
  const std::size_t n = feats.size();
  if (n == 0) return {};
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> emis(n, std::vector<double>(L));
  for (std::size_t i = 0; i < n; ++i)
    for (int y = 0; y < L; ++y) emis[i][y] = emission_score(feats[i], y);
  auto allowed = [&](std::size_t i, int y) { return !fixed[i] || *fixed[i] == y; };

  std::vector<std::vector<double>> delta(n, std::vector<double>(L, kNegInf));
  std::vector<std::vector<int>> back(n, std::vector<int>(L, -1));
  // rank[y]: lexicographic position of the best prefix ending in y
  std::vector<long> rank(L), next_rank(L);
  for (int y = 0; y < L; ++y) {
    if (allowed(0, y)) delta[0][y] = transition_score(-1, y) + emis[0][y];
    rank[y] = y;
  }
  for (std::size_t i = 1; i < n; ++i) {
    std::vector<std::pair<std::pair<long, int>, int>> order;
    for (int y = 0; y < L; ++y) {
      if (!allowed(i, y)) continue;
      double best = kNegInf;
      int arg = -1;
      for (int p = 0; p < L; ++p) {
        if (delta[i - 1][p] == kNegInf) continue;
        double v = delta[i - 1][p] + transition_score(p, y) + emis[i][y];
        if (arg < 0 || v > best || (v == best && rank[p] < rank[arg])) {
          best = v;
          arg = p;
        }
      }
      delta[i][y] = best;
      back[i][y] = arg;
      order.push_back({{rank[arg], y}, y});
    }
    std::sort(order.begin(), order.end());
    for (std::size_t r = 0; r < order.size(); ++r) next_rank[order[r].second] = static_cast<long>(r);
    rank.swap(next_rank);
  }
  int end = -1;
  for (int y = 0; y < L; ++y) {
    if (delta[n - 1][y] == kNegInf) continue;
    if (end < 0 || delta[n - 1][y] > delta[n - 1][end] ||
        (delta[n - 1][y] == delta[n - 1][end] && rank[y] < rank[end]))
      end = y;
  }
  std::vector<int> path(n);
  for (std::size_t i = n; i-- > 0;) {
    path[i] = end;
    end = back[i][end];
  }
  return path;
}

std::vector<std::string> ChainModel::decode_features(const std::vector<std::vector<std::string>>& features) const {
  std::vector<std::vector<int>> ids;
  for (const auto& f : features) ids.push_back(feature_ids(f));
  std::vector<std::string> out;
  for (int y : viterbi(ids, std::vector<std::optional<int>>(ids.size()))) out.push_back(labels_[y]);
  return out;
}

std::vector<std::string> ChainModel::decode(const std::vector<RoleFeatures>& tokens) const {
  return decode(tokens, std::vector<std::optional<std::string>>(tokens.size()));
}

std::vector<std::string> ChainModel::decode(const std::vector<RoleFeatures>& tokens,
                                            const std::vector<std::optional<std::string>>& fixed) const {
  std::vector<std::vector<int>> ids;
  for (std::size_t i = 0; i < tokens.size(); ++i) ids.push_back(feature_ids(role_feature_strings(tokens, i)));
  std::vector<std::optional<int>> fixed_ids(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (fixed[i] && label_id(*fixed[i]) >= 0) fixed_ids[i] = label_id(*fixed[i]);
  std::vector<std::string> out;
  for (int y : viterbi(ids, fixed_ids)) out.push_back(labels_[y]);
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (fixed[i]) out[i] = *fixed[i];
  return out;
}

ChainModel train_role_labeler(const std::vector<RoleSentence>& sentences, const Inventory& roles,
                              int max_epochs) {
  if (roles.empty()) throw Error("role inventory is empty");
  if (sentences.empty()) throw Error("role labeler training set is empty");
  ChainModel m;
  std::set<std::string> labels{std::string(kNoRole)};
  std::set<std::string> features;
  std::vector<std::vector<std::vector<std::string>>> feature_strings;
  for (const auto& s : sentences) {
    if (s.tokens.size() != s.roles.size()) throw Error("sentence has different numbers of tokens and roles");
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const auto& t = s.tokens[i];
      if (t.semtag.empty() || t.symbol.empty() || t.category.empty())
        throw Error("missing feature layer at token " + std::to_string(i));
      if (s.roles[i] != kNoRole && !roles.contains(s.roles[i]))
        throw Error("unknown role '" + s.roles[i] + "'");
      labels.insert(s.roles[i]);
    }
    feature_strings.emplace_back();
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      feature_strings.back().push_back(role_feature_strings(s.tokens, i));
      features.insert(feature_strings.back().back().begin(), feature_strings.back().back().end());
    }
  }
  m.labels_.assign(labels.begin(), labels.end());
  for (std::size_t i = 0; i < m.labels_.size(); ++i) m.label_index_[m.labels_[i]] = static_cast<int>(i);
  int fid = 0;
  for (const auto& f : features) m.feature_index_[f] = fid++;
  const std::size_t L = m.labels_.size();
  m.emission_.assign(static_cast<std::size_t>(fid) * L, 0.0);
  m.transition_.assign((L + 1) * L, 0.0);

  // Averaging via the accumulated-timestamp trick: avg = w - acc / c.
  std::vector<double> emission_acc(m.emission_.size(), 0.0), transition_acc(m.transition_.size(), 0.0);
  double c = 1;
  std::vector<std::vector<std::vector<int>>> ids;
  for (const auto& fs : feature_strings) {
    ids.emplace_back();
    for (const auto& f : fs) ids.back().push_back(m.feature_ids(f));
  }
  std::vector<std::vector<int>> gold;
  for (const auto& s : sentences) {
    gold.emplace_back();
    for (const auto& r : s.roles) gold.back().push_back(m.label_id(r));
  }

  auto bump = [&](std::vector<double>& w, std::vector<double>& acc, std::size_t k, double delta) {
    w[k] += delta;
    acc[k] += c * delta;
  };
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    int mistakes = 0;
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      std::vector<std::optional<int>> none(ids[s].size());
      auto pred = m.viterbi(ids[s], none);
      if (pred != gold[s]) {
        ++mistakes;
        for (std::size_t i = 0; i < pred.size(); ++i) {
          int gp = i == 0 ? -1 : gold[s][i - 1];
          int pp = i == 0 ? -1 : pred[i - 1];
          if (gold[s][i] == pred[i] && gp == pp) continue;
          for (int f : ids[s][i]) {
            bump(m.emission_, emission_acc, static_cast<std::size_t>(f) * L + gold[s][i], 1.0);
            bump(m.emission_, emission_acc, static_cast<std::size_t>(f) * L + pred[i], -1.0);
          }
          bump(m.transition_, transition_acc, static_cast<std::size_t>(gp + 1) * L + gold[s][i], 1.0);
          bump(m.transition_, transition_acc, static_cast<std::size_t>(pp + 1) * L + pred[i], -1.0);
        }
      }
      c += 1;
    }
    m.epochs_ = epoch + 1;
    if (mistakes == 0) break;
  }
  for (std::size_t k = 0; k < m.emission_.size(); ++k) m.emission_[k] -= emission_acc[k] / c;
  for (std::size_t k = 0; k < m.transition_.size(); ++k) m.transition_[k] -= transition_acc[k] / c;
  return m;
}

std::vector<std::string> tag_roles(const ChainModel& model, const std::vector<RoleFeatures>& tokens) {
  return model.decode(tokens);
}

// ---------------------------------------------------------------------------
// Serialization: weights as hex floats for bit-exact reload.

namespace {

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

}  // namespace

std::string ChainModel::serialize() const {
  std::ostringstream out;
  out << "mb-chain\t1\n";
  out << "labels";
  for (const auto& l : labels_) out << '\t' << escape_cell(l);
  out << "\nepochs\t" << epochs_ << '\n';
  const std::size_t L = labels_.size();
  for (std::size_t p = 0; p <= L; ++p) {
    out << "T\t" << static_cast<long>(p) - 1;
    for (std::size_t y = 0; y < L; ++y) out << '\t' << hexfloat(transition_[p * L + y]);
    out << '\n';
  }
  for (const auto& [f, id] : feature_index_) {
    out << "F\t" << escape_cell(f);
    for (std::size_t y = 0; y < L; ++y) out << '\t' << hexfloat(emission_[static_cast<std::size_t>(id) * L + y]);
    out << '\n';
  }
  return out.str();
}

ChainModel ChainModel::deserialize(std::string_view text) {
  auto lines = split(text, '\n');
  if (lines.size() < 3 || lines[0] != "mb-chain\t1") throw Error("not a chain model (version header)");
  ChainModel m;
  auto head = split(lines[1], '\t');
  if (head.empty() || head[0] != "labels") throw Error("chain model: missing label line");
  for (std::size_t i = 1; i < head.size(); ++i) {
    m.labels_.push_back(unescape_cell(head[i]));
    m.label_index_[m.labels_.back()] = static_cast<int>(i - 1);
  }
  const std::size_t L = m.labels_.size();
  m.transition_.assign((L + 1) * L, 0.0);
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto c = split(lines[i], '\t');
    if (c[0] == "epochs" && c.size() == 2) {
      m.epochs_ = std::stoi(c[1]);
      continue;
    }
    if (c.size() != L + 2) throw Error("chain model line " + std::to_string(i) + " malformed");
    std::vector<double> w;
    for (std::size_t y = 0; y < L; ++y) w.push_back(std::strtod(c[y + 2].c_str(), nullptr));
    if (c[0] == "T") {
      long p = std::stol(c[1]);
      std::copy(w.begin(), w.end(), m.transition_.begin() + (p + 1) * static_cast<long>(L));
    } else if (c[0] == "F") {
      rows.emplace_back(unescape_cell(c[1]), std::move(w));
    } else {
      throw Error("chain model line " + std::to_string(i) + " malformed");
    }
  }
  m.emission_.assign(rows.size() * L, 0.0);
  int id = 0;
  for (auto& [f, w] : rows) {
    m.feature_index_[f] = id;
    std::copy(w.begin(), w.end(), m.emission_.begin() + id * static_cast<long>(L));
    ++id;
  }
  return m;
}

}  // namespace mb
