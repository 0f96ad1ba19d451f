#include "mb/ccg.hpp"

#include <cmath>
#include <map>

namespace mb {

std::string_view to_string(Combinator c) {
  switch (c) {
    case Combinator::LEX: return "lex";
    case Combinator::FA: return "FA";
    case Combinator::BA: return "BA";
    case Combinator::FC: return "FC";
    case Combinator::BC: return "BC";
    case Combinator::BCX: return "BCX";
    case Combinator::RP: return "RP";
    case Combinator::LP: return "LP";
  }
  return "?";
}

Combinator parse_combinator(std::string_view s) {
  for (Combinator c : {Combinator::LEX, Combinator::FA, Combinator::BA, Combinator::FC, Combinator::BC,
                       Combinator::BCX, Combinator::RP, Combinator::LP})
    if (to_string(c) == s) return c;
  throw Error("unknown combinator '" + std::string(s) + "'");
}

bool is_composition(Combinator c) {
  return c == Combinator::FC || c == Combinator::BC || c == Combinator::BCX;
}

CombinatorSet CombinatorSet::all() {
  CombinatorSet s(0);
  for (Combinator c : kBinaryCombinators) s = s.with(c);
  return s;
}

std::optional<Category> combine(Combinator rule, const Category& l, const Category& r) {
  const bool lf = !l.is_atomic() && l.slash() == Slash::fwd;
  const bool lb = !l.is_atomic() && l.slash() == Slash::bwd;
  const bool rf = !r.is_atomic() && r.slash() == Slash::fwd;
  const bool rb = !r.is_atomic() && r.slash() == Slash::bwd;
  switch (rule) {
    case Combinator::FA:
      if (lf && l.argument() == r) return l.result();
      break;
    case Combinator::BA:
      if (rb && r.argument() == l) return r.result();
      break;
    case Combinator::FC:
      if (lf && rf && l.argument() == r.result()) return Category::fwd(l.result(), r.argument());
      break;
    case Combinator::BC:
      if (lb && rb && r.argument() == l.result()) return Category::bwd(r.result(), l.argument());
      break;
    case Combinator::BCX:
      if (lf && rb && r.argument() == l.result()) return Category::fwd(r.result(), l.argument());
      break;
    case Combinator::RP:
      if (r.is("PUNCT")) return l;
      break;
    case Combinator::LP:
      if (l.is("PUNCT")) return r;
      break;
    case Combinator::LEX:
      break;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

std::int64_t ParseScore::quantize(double logprob) {
  if (!std::isfinite(logprob)) throw Error("leaf score must be finite");
  return std::llround(logprob * 1e9);
}

ParseScore ParseScore::operator+(const ParseScore& o) const {
  return {leaf + o.leaf, compositions + o.compositions, right_branching + o.right_branching};
}

bool ParseScore::better_than(const ParseScore& o) const {
  if (leaf != o.leaf) return leaf > o.leaf;
  if (compositions != o.compositions) return compositions < o.compositions;
  return right_branching > o.right_branching;
}

int Derivation::first_token() const { return is_leaf() ? token : children.front().first_token(); }
int Derivation::last_token() const { return is_leaf() ? token : children.back().last_token(); }

ParseScore Derivation::quality() const {
  if (is_leaf()) return {ParseScore::quantize(score), 0, 0};
  return children[0].quality() + children[1].quality() +
         ParseScore{0, is_composition(rule) ? 1 : 0, children[1].width()};
}

std::vector<const Derivation*> Derivation::leaves() const {
  if (is_leaf()) return {this};
  auto out = children[0].leaves();
  auto right = children[1].leaves();
  out.insert(out.end(), right.begin(), right.end());
  return out;
}

bool type_checks(const Derivation& d, CombinatorSet rules) {
  if (!d.category.valid()) return false;
  if (d.is_leaf()) return d.children.empty() && d.token >= 0;
  if (d.children.size() != 2 || !rules.contains(d.rule)) return false;
  const auto& l = d.children[0];
  const auto& r = d.children[1];
  if (!type_checks(l, rules) || !type_checks(r, rules)) return false;
  if (l.last_token() + 1 != r.first_token()) return false;
  auto c = combine(d.rule, l.category, r.category);
  return c && *c == d.category;
}

// ---------------------------------------------------------------------------

namespace {

struct Item {
  Category category;
  ParseScore score;
  Combinator rule = Combinator::LEX;
  int split = -1;  // end of the left child (exclusive)
  std::string left, right;
  double leaf_score = 0;
};

using Cell = std::map<std::string, Item>;

class Chart {
 public:
  explicit Chart(std::size_t n) : n_(n), cells_(n * (n + 1)) {}
  Cell& at(std::size_t i, std::size_t j) { return cells_[i * (n_ + 1) + j]; }

  Derivation build(std::size_t i, std::size_t j, const std::string& key) {
    const Item& it = at(i, j).at(key);
    Derivation d;
    d.rule = it.rule;
    d.category = it.category;
    if (it.rule == Combinator::LEX) {
      d.token = static_cast<int>(i);
      d.score = it.leaf_score;
      return d;
    }
    auto split = static_cast<std::size_t>(it.split);
    d.children.push_back(build(i, split, it.left));
    d.children.push_back(build(split, j, it.right));
    return d;
  }

 private:
  std::size_t n_;
  std::vector<Cell> cells_;
};

void offer(Cell& cell, Item item) {
  const std::string key = item.category.str();
  auto it = cell.find(key);
  if (it == cell.end())
    cell.emplace(key, std::move(item));
  else if (item.score.better_than(it->second.score))
    it->second = std::move(item);
}

const Item* best_item(const Cell& cell) {
  const Item* best = nullptr;
  for (const auto& [key, item] : cell)
    if (!best || item.score.better_than(best->score)) best = &item;
  return best;
}

}  // namespace

ParseResult parse(const std::vector<std::vector<ScoredCategory>>& candidates, const ParseOptions& options) {
  const std::size_t n = candidates.size();
  ParseResult result;
  if (n == 0) return result;
  Chart chart(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (candidates[i].empty()) throw Error("token " + std::to_string(i) + " has no candidate category");
    for (const auto& c : candidates[i]) {
      if (!c.category.valid()) throw Error("invalid category for token " + std::to_string(i));
      Item leaf;
      leaf.category = c.category;
      leaf.score = {ParseScore::quantize(c.score), 0, 0};
      leaf.leaf_score = c.score;
      offer(chart.at(i, i + 1), std::move(leaf));
    }
  }
  for (std::size_t width = 2; width <= n; ++width) {
    for (std::size_t i = 0; i + width <= n; ++i) {
      const std::size_t j = i + width;
      Cell& cell = chart.at(i, j);
      for (std::size_t k = i + 1; k < j; ++k) {
        for (const auto& [lk, left] : chart.at(i, k)) {
          for (const auto& [rk, right] : chart.at(k, j)) {
            for (Combinator rule : kBinaryCombinators) {
              if (!options.rules.contains(rule)) continue;
              auto cat = combine(rule, left.category, right.category);
              if (!cat) continue;
              Item item;
              item.category = *cat;
              item.score = left.score + right.score +
                           ParseScore{0, is_composition(rule) ? 1 : 0, static_cast<int>(j - k)};
              item.rule = rule;
              item.split = static_cast<int>(k);
              item.left = lk;
              item.right = rk;
              offer(cell, std::move(item));
            }
          }
        }
      }
    }
  }

  Cell& top = chart.at(0, n);
  if (auto s = top.find("S"); s != top.end()) {
    result.fragments.push_back(chart.build(0, n, "S"));
    result.complete = true;
    return result;
  }
  if (const Item* best = best_item(top)) {
    result.fragments.push_back(chart.build(0, n, best->category.str()));
    result.complete = true;
    return result;
  }

  // Fewest fragments, then best summed score.
  struct Cover {
    int fragments = -1;
    ParseScore score;
    std::size_t from = 0;
    std::string key;
  };
  std::vector<Cover> cover(n + 1);
  cover[0].fragments = 0;
  for (std::size_t j = 1; j <= n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (cover[i].fragments < 0) continue;
      const Item* best = best_item(chart.at(i, j));
      if (!best) continue;
      Cover c{cover[i].fragments + 1, cover[i].score + best->score, i, best->category.str()};
      Cover& cur = cover[j];
      if (cur.fragments < 0 || c.fragments < cur.fragments ||
          (c.fragments == cur.fragments && c.score.better_than(cur.score)))
        cur = std::move(c);
    }
  }
  for (std::size_t j = n; j > 0; j = cover[j].from)
    result.fragments.insert(result.fragments.begin(), chart.build(cover[j].from, j, cover[j].key));
  return result;
}

std::vector<std::vector<ScoredCategory>> assign_categories(const TrigramHmm& supertagger,
                                                           const std::vector<std::string>& tokens,
                                                           std::size_t k) {
  std::vector<std::vector<ScoredCategory>> out;
  out.reserve(tokens.size());
  for (const auto& list : supertagger.kbest(tokens, k)) {
    auto& row = out.emplace_back();
    for (const auto& st : list) row.push_back({parse_category(st.tag), st.score});
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string serialize_derivation(const Derivation& d) {
  if (d.is_leaf()) return "(lex " + std::to_string(d.token) + " " + d.category.str() + ")";
  return "(" + std::string(to_string(d.rule)) + " " + serialize_derivation(d.children[0]) + " " +
         serialize_derivation(d.children[1]) + ")";
}

namespace {

class DerivationReader {
 public:
  explicit DerivationReader(std::string_view text) : s_(text) {}

  Derivation read() {
    skip();
    expect('(');
    std::string head = word();
    Derivation d;
    d.rule = parse_combinator(head);
    if (d.rule == Combinator::LEX) {
      d.token = std::stoi(word());
      skip();
      std::size_t begin = pos_;
      int depth = 0;
      while (pos_ < s_.size() && !(s_[pos_] == ')' && depth == 0)) {
        if (s_[pos_] == '(') ++depth;
        if (s_[pos_] == ')') --depth;
        ++pos_;
      }
      d.category = parse_category(s_.substr(begin, pos_ - begin));
    } else {
      d.children.push_back(read());
      d.children.push_back(read());
      auto cat = combine(d.rule, d.children[0].category, d.children[1].category);
      if (!cat) throw Error("derivation: " + head + " does not apply at offset " + std::to_string(pos_));
      d.category = *cat;
    }
    skip();
    expect(')');
    return d;
  }

  void finish() {
    skip();
    if (pos_ != s_.size()) throw Error("derivation: trailing input");
  }

 private:
  void skip() {
    while (pos_ < s_.size() && s_[pos_] == ' ') ++pos_;
  }
  void expect(char c) {
    if (pos_ >= s_.size() || s_[pos_] != c)
      throw Error(std::string("derivation: expected '") + c + "' at offset " + std::to_string(pos_));
    ++pos_;
  }
  std::string word() {
    skip();
    std::size_t begin = pos_;
    while (pos_ < s_.size() && s_[pos_] != ' ' && s_[pos_] != '(' && s_[pos_] != ')') ++pos_;
    if (begin == pos_) throw Error("derivation: expected a word at offset " + std::to_string(pos_));
    return std::string(s_.substr(begin, pos_ - begin));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Derivation parse_derivation(std::string_view text) {
  DerivationReader reader(text);
  Derivation d = reader.read();
  reader.finish();
  return d;
}

}  // namespace mb
