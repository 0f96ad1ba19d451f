#include "mb/matcher.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <set>

namespace mb {

std::vector<std::string> clause_variables(const std::vector<Clause>& clauses) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto visit = [&](const std::string& f) {
    if (is_variable(f) && seen.insert(f).second) out.push_back(f);
  };
  for (const auto& c : clauses) {
    visit(c.box);
    for (const auto& a : c.args) visit(a);
  }
  return out;
}

Clause map_clause(const Clause& c, const std::map<std::string, std::string>& mapping) {
  auto m = [&](const std::string& f) {
    if (!is_variable(f)) return f;
    auto it = mapping.find(f);
    return it == mapping.end() ? "?" + f : it->second;
  };
  Clause out{m(c.box), c.op, {}};
  for (const auto& a : c.args) out.args.push_back(m(a));
  return out;
}

MatchResult score_counts(int matched, std::size_t size_a, std::size_t size_b) {
  MatchResult r;
  r.matched = matched;
  if (size_a == 0 && size_b == 0) {
    r.precision = r.recall = r.f_score = 1.0;
    return r;
  }
  r.precision = size_a ? static_cast<double>(matched) / static_cast<double>(size_a) : 0.0;
  r.recall = size_b ? static_cast<double>(matched) / static_cast<double>(size_b) : 0.0;
  r.f_score = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

namespace {

constexpr int kUnmapped = -1;
constexpr long kExactBudget = 200'000;

/// Clauses with variables replaced by indices, for fast scoring.
struct Encoded {
  std::vector<std::vector<int>> clauses;  // -2 - k encodes constant field id k; >= 0 a variable
};

class Search {
 public:
  Search(const std::vector<Clause>& a, const std::vector<Clause>& b) {
    a_ = dedupe(a);
    b_ = dedupe(b);
    vars_a_ = clause_variables(a_);
    vars_b_ = clause_variables(b_);
    for (std::size_t i = 0; i < vars_a_.size(); ++i) index_a_[vars_a_[i]] = static_cast<int>(i);
    for (std::size_t j = 0; j < vars_b_.size(); ++j) index_b_[vars_b_[j]] = static_cast<int>(j);
    enc_a_ = encode(a_, index_a_);
    enc_b_ = encode(b_, index_b_);
    targets_.resize(vars_a_.size());
    for (std::size_t i = 0; i < vars_a_.size(); ++i)
      for (std::size_t j = 0; j < vars_b_.size(); ++j)
        if (vars_a_[i][0] == vars_b_[j][0]) targets_[i].push_back(static_cast<int>(j));
    for (const auto& c : enc_b_.clauses) b_set_.insert(c);
  }

  std::size_t size_a() const { return a_.size(); }
  std::size_t size_b() const { return b_.size(); }

  int score(const std::vector<int>& m) const {
    int n = 0;
    std::vector<int> mapped;
    for (const auto& c : enc_a_.clauses) {
      mapped.clear();
      bool ok = true;
      for (int f : c) {
        if (f >= 0) {
          if (m[static_cast<std::size_t>(f)] == kUnmapped) {
            ok = false;
            break;
          }
          mapped.push_back(m[static_cast<std::size_t>(f)]);
        } else {
          mapped.push_back(f);
        }
      }
      if (ok && b_set_.count(mapped)) ++n;
    }
    return n;
  }

  /// Maps variables that co-occur in clauses agreeing on every constant field.
  std::vector<int> smart_start() const {
    std::vector<int> m(vars_a_.size(), kUnmapped);
    std::vector<bool> used(vars_b_.size(), false);
    for (std::size_t ia = 0; ia < a_.size(); ++ia) {
      const Clause& ca = a_[ia];
      if (ca.op == "REF" || !has_constant(ca)) continue;
      for (std::size_t ib = 0; ib < b_.size(); ++ib) {
        if (!compatible(enc_a_.clauses[ia], enc_b_.clauses[ib], m, used)) continue;
        const auto& fa = enc_a_.clauses[ia];
        const auto& fb = enc_b_.clauses[ib];
        for (std::size_t k = 0; k < fa.size(); ++k)
          if (fa[k] >= 0 && m[static_cast<std::size_t>(fa[k])] == kUnmapped) {
            m[static_cast<std::size_t>(fa[k])] = fb[k];
            used[static_cast<std::size_t>(fb[k])] = true;
          }
        break;
      }
    }
    fill_remaining(m, used, nullptr);
    return m;
  }

  std::vector<int> random_start(std::mt19937& rng) const {
    std::vector<int> m(vars_a_.size(), kUnmapped);
    std::vector<bool> used(vars_b_.size(), false);
    fill_remaining(m, used, &rng);
    return m;
  }

  /// Steepest-ascent over reassignments (including unmapping) and swaps.
  int climb(std::vector<int>& m) const {
    int best = score(m);
    while (true) {
      std::vector<int> best_m;
      int best_move = best;
      std::vector<int> owner(vars_b_.size(), kUnmapped);
      for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i] != kUnmapped) owner[static_cast<std::size_t>(m[i])] = static_cast<int>(i);
      for (std::size_t i = 0; i < m.size(); ++i) {
        std::vector<int> options = targets_[i];
        options.push_back(kUnmapped);
        for (int t : options) {
          if (t == m[i]) continue;
          std::vector<int> cand = m;
          if (t != kUnmapped && owner[static_cast<std::size_t>(t)] != kUnmapped)
            cand[static_cast<std::size_t>(owner[static_cast<std::size_t>(t)])] = m[i];  // swap
          cand[i] = t;
          int s = score(cand);
          if (s > best_move) {
            best_move = s;
            best_m = std::move(cand);
          }
        }
      }
      if (best_m.empty()) return best;
      m = std::move(best_m);
      best = best_move;
    }
  }

  /// Branch and bound over injective mappings. The bound counts clauses that
  /// still have a consistent counterpart in `b` under the partial mapping.
  /// Gives up after `budget` nodes; only mappings scoring above `best`
  /// replace `m`.
  int exact(std::vector<int>& m, int best, long budget) const {
    const std::size_t n = vars_a_.size();
    std::vector<std::vector<std::size_t>> candidates(enc_a_.clauses.size());
    const std::vector<int> none(n, kUnmapped);
    const std::vector<bool> free_b(vars_b_.size(), false);
    for (std::size_t k = 0; k < enc_a_.clauses.size(); ++k)
      for (std::size_t j = 0; j < enc_b_.clauses.size(); ++j)
        if (compatible(enc_a_.clauses[k], enc_b_.clauses[j], none, free_b)) candidates[k].push_back(j);

    std::vector<int> cur(n, kUnmapped);
    std::vector<int> owner(vars_b_.size(), kUnmapped);
    std::vector<bool> assigned(n, false);
    auto consistent = [&](const std::vector<int>& fa, const std::vector<int>& fb) {
      for (std::size_t p = 0; p < fa.size(); ++p) {
        if (fa[p] < 0) continue;
        const auto v = static_cast<std::size_t>(fa[p]);
        if (assigned[v]) {
          if (cur[v] != fb[p]) return false;
        } else if (owner[static_cast<std::size_t>(fb[p])] != kUnmapped) {
          return false;
        }
      }
      return true;
    };
    auto bound = [&] {
      int count = 0;
      for (std::size_t k = 0; k < candidates.size(); ++k)
        for (std::size_t j : candidates[k])
          if (consistent(enc_a_.clauses[k], enc_b_.clauses[j])) {
            ++count;
            break;
          }
      return count;
    };

    // Visit variables so each one shares as many clauses as possible with
    // those already placed.
    std::vector<std::vector<std::size_t>> clauses_of(n);
    for (std::size_t k = 0; k < enc_a_.clauses.size(); ++k)
      for (int f : enc_a_.clauses[k])
        if (f >= 0) clauses_of[static_cast<std::size_t>(f)].push_back(k);
    std::vector<std::size_t> order;
    std::vector<int> links(n, 0);
    std::vector<bool> placed(n, false);
    for (std::size_t step = 0; step < n; ++step) {
      std::size_t pick = n;
      for (std::size_t v = 0; v < n; ++v)
        if (!placed[v] && (pick == n || links[v] > links[pick] ||
                           (links[v] == links[pick] && clauses_of[v].size() > clauses_of[pick].size())))
          pick = v;
      placed[pick] = true;
      order.push_back(pick);
      for (std::size_t k : clauses_of[pick])
        for (int f : enc_a_.clauses[k])
          if (f >= 0) ++links[static_cast<std::size_t>(f)];
    }

    long nodes = 0;
    std::function<void(std::size_t)> go = [&](std::size_t depth) {
      if (++nodes > budget) return;
      const int b = bound();
      if (b <= best) return;
      if (depth == n) {
        best = b;
        m = cur;
        return;
      }
      const std::size_t v = order[depth];
      std::vector<std::pair<int, int>> options;  // (-bound, target)
      assigned[v] = true;
      auto options_for = [&](int t) {
        cur[v] = t;
        if (t != kUnmapped) owner[static_cast<std::size_t>(t)] = static_cast<int>(v);
        options.emplace_back(-bound(), t);
        if (t != kUnmapped) owner[static_cast<std::size_t>(t)] = kUnmapped;
      };
      for (int t : targets_[v])
        if (owner[static_cast<std::size_t>(t)] == kUnmapped) options_for(t);
      options_for(kUnmapped);
      std::stable_sort(options.begin(), options.end(),
                       [](const auto& x, const auto& y) { return x.first < y.first; });
      for (const auto& [neg, t] : options) {
        if (-neg <= best) break;
        cur[v] = t;
        if (t != kUnmapped) owner[static_cast<std::size_t>(t)] = static_cast<int>(v);
        go(depth + 1);
        if (t != kUnmapped) owner[static_cast<std::size_t>(t)] = kUnmapped;
        if (nodes > budget) break;
      }
      cur[v] = kUnmapped;
      assigned[v] = false;
    };
    go(0);
    return best;
  }

  std::map<std::string, std::string> named(const std::vector<int>& m) const {
    std::map<std::string, std::string> out;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i] != kUnmapped) out[vars_a_[i]] = vars_b_[static_cast<std::size_t>(m[i])];
    return out;
  }

 private:
  Encoded encode(const std::vector<Clause>& clauses, const std::map<std::string, int>& index) {
    Encoded e;
    auto field = [&](const std::string& f) {
      if (is_variable(f)) return index.at(f);
      auto [it, fresh] = constants_.emplace(f, static_cast<int>(constants_.size()));
      return -2 - it->second;
    };
    for (const auto& c : clauses) {
      std::vector<int> row{field(c.box), field("op:" + c.op)};
      for (const auto& a : c.args) row.push_back(field(a));
      e.clauses.push_back(std::move(row));
    }
    return e;
  }

  /// Drops repeated clauses, keeping first occurrences in order.
  static std::vector<Clause> dedupe(const std::vector<Clause>& clauses) {
    std::vector<Clause> out;
    std::set<Clause> seen;
    for (const auto& c : clauses)
      if (seen.insert(c).second) out.push_back(c);
    return out;
  }

  static bool has_constant(const Clause& c) {
    return std::any_of(c.args.begin(), c.args.end(), [](const std::string& a) { return !is_variable(a); });
  }

  bool compatible(const std::vector<int>& fa, const std::vector<int>& fb, const std::vector<int>& m,
                  const std::vector<bool>& used) const {
    if (fa.size() != fb.size()) return false;
    for (std::size_t k = 0; k < fa.size(); ++k) {
      if ((fa[k] < 0) != (fb[k] < 0)) return false;
      if (fa[k] < 0) {
        if (fa[k] != fb[k]) return false;
        continue;
      }
      if (vars_a_[static_cast<std::size_t>(fa[k])][0] != vars_b_[static_cast<std::size_t>(fb[k])][0]) return false;
      int cur = m[static_cast<std::size_t>(fa[k])];
      if (cur == kUnmapped ? used[static_cast<std::size_t>(fb[k])] : cur != fb[k]) return false;
    }
    return true;
  }

  void fill_remaining(std::vector<int>& m, std::vector<bool>& used, std::mt19937* rng) const {
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] != kUnmapped) continue;
      std::vector<int> free;
      for (int t : targets_[i])
        if (!used[static_cast<std::size_t>(t)]) free.push_back(t);
      if (free.empty()) continue;
      std::size_t pick = 0;
      if (rng) pick = std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(*rng);
      m[i] = free[pick];
      used[static_cast<std::size_t>(free[pick])] = true;
    }
  }

  std::vector<Clause> a_, b_;
  std::vector<std::string> vars_a_, vars_b_;
  std::map<std::string, int> index_a_, index_b_;
  std::map<std::string, int> constants_;
  Encoded enc_a_, enc_b_;
  std::vector<std::vector<int>> targets_;
  std::set<std::vector<int>> b_set_;
};

}  // namespace

MatchResult match(const std::vector<Clause>& a, const std::vector<Clause>& b, const MatchOptions& options) {
  if (options.restarts < 1) throw Error("matcher needs at least one restart");
  Search search(a, b);
  std::mt19937 rng(options.seed);
  std::vector<int> best_m = search.smart_start();
  int best = search.climb(best_m);
  for (int r = 0; r < options.restarts; ++r) {
    std::vector<int> m = search.random_start(rng);
    int s = search.climb(m);
    if (s > best) {
      best = s;
      best_m = std::move(m);
    }
  }
  best = search.exact(best_m, best, kExactBudget);
  MatchResult out = score_counts(best, search.size_a(), search.size_b());
  out.mapping = search.named(best_m);
  return out;
}

}  // namespace mb
