#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mb {

/// Base error type for all meaning-bank failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Layer names

enum class LayerName { tok, sem, sym, sen, rol, cor, cat };

inline constexpr std::array<LayerName, 7> kAllLayers = {
    LayerName::tok, LayerName::sem, LayerName::sym, LayerName::sen,
    LayerName::rol, LayerName::cor, LayerName::cat};

/// Layers whose values are copied token-by-token across an alignment.
inline constexpr std::array<LayerName, 6> kTokenLayers = {
    LayerName::sem, LayerName::sym, LayerName::sen,
    LayerName::rol, LayerName::cor, LayerName::cat};

std::string_view to_string(LayerName name);
LayerName parse_layer_name(std::string_view s);  // throws Error

// ---------------------------------------------------------------------------
// Token

struct Token {
  std::string text;
  std::size_t start = 0;  // byte offsets into the raw text, [start, end)
  std::size_t end = 0;
  int sentence = 0;

  bool operator==(const Token&) const = default;
};

/// Single-cell form `start:end:sentence:text`.
std::string encode_token(const Token& t);
Token decode_token(std::string_view cell);

/// True when every character of the text is ASCII punctuation.
bool is_punctuation(std::string_view text);

// ---------------------------------------------------------------------------
// Null markers for optional per-token values

inline constexpr std::string_view kNoRole = "NONE";
inline constexpr std::string_view kNoAntecedent = "NONE";
inline constexpr std::string_view kNoSense = "-";

// ---------------------------------------------------------------------------
// Sense "pos.nn"

struct Sense {
  char pos = 'n';  // n, v, a, r
  int number = 1;

  std::string str() const;
  static Sense parse(std::string_view s);  // throws Error on malformed input
  bool operator==(const Sense&) const = default;
};

// ---------------------------------------------------------------------------
// Co-reference cell: antecedent token index or NONE

std::optional<int> parse_antecedent(std::string_view cell);
std::string encode_antecedent(std::optional<int> antecedent);

// ---------------------------------------------------------------------------
// CCG categories

enum class Slash { none, fwd, bwd };

struct CategoryNode;

/// Immutable CCG category term. Atoms are S, NP, N, PP and PUNCT.
class Category {
 public:
  Category() = default;

  static Category atom(std::string name);
  static Category fwd(const Category& result, const Category& arg);
  static Category bwd(const Category& result, const Category& arg);

  bool valid() const { return node_ != nullptr; }
  bool is_atomic() const;
  Slash slash() const;
  const std::string& name() const;
  const Category& result() const;
  const Category& argument() const;
  bool is(std::string_view atom_name) const;

  /// Canonical form: every complex sub-category parenthesised.
  const std::string& str() const;

  bool operator==(const Category& o) const;
  bool operator<(const Category& o) const { return str() < o.str(); }

 private:
  explicit Category(std::shared_ptr<const CategoryNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const CategoryNode> node_;
};

struct CategoryNode {
  Slash slash = Slash::none;
  std::string atom;
  Category result;
  Category arg;
  std::string text;
};

inline bool Category::is_atomic() const { return node_->slash == Slash::none; }
inline Slash Category::slash() const { return node_->slash; }
inline const std::string& Category::name() const { return node_->atom; }
inline const Category& Category::result() const { return node_->result; }
inline const Category& Category::argument() const { return node_->arg; }
inline const std::string& Category::str() const {
  static const std::string kInvalid;
  return node_ ? node_->text : kInvalid;
}
inline bool Category::is(std::string_view atom_name) const {
  return valid() && is_atomic() && node_->atom == atom_name;
}

inline const std::set<std::string, std::less<>> kAtomicCategories = {
    "S", "NP", "N", "PP", "PUNCT"};

/// Parses `/` and `\` left-associatively; parentheses group.
Category parse_category(std::string_view text);

// ---------------------------------------------------------------------------
// Inventories shipped as configuration

/// Tag -> description, loaded from a two-column TSV.
class Inventory {
 public:
  Inventory() = default;
  explicit Inventory(std::vector<std::pair<std::string, std::string>> entries);

  static Inventory load(const std::string& path);

  bool contains(std::string_view tag) const;
  const std::vector<std::string>& labels() const { return labels_; }
  std::string description(std::string_view tag) const;
  bool empty() const { return labels_.empty(); }

 private:
  std::vector<std::string> labels_;
  std::map<std::string, std::string, std::less<>> descriptions_;
};

inline constexpr std::array<std::string_view, 3> kComparisonOps = {"EQU", "TPR", "LES"};
bool is_comparison_op(std::string_view s);

/// lemma -> ordered sense list (first = default sense).
class SenseLexicon {
 public:
  static SenseLexicon load(const std::string& path);
  void add(const std::string& lemma, const Sense& sense);
  std::optional<Sense> first_sense(std::string_view lemma, char pos) const;
  const std::vector<Sense>* senses(std::string_view lemma) const;

 private:
  std::map<std::string, std::vector<Sense>, std::less<>> entries_;
};

// ---------------------------------------------------------------------------
// TSV helpers shared by every file format in the project

std::string escape_cell(std::string_view s);
std::string unescape_cell(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace mb
