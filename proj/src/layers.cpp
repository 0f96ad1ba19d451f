#include "mb/layers.hpp"

#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mb {

namespace {

constexpr std::array<std::string_view, 7> kLayerStrings = {"tok", "sem", "sym", "sen",
                                                           "rol", "cor", "cat"};

int parse_int(std::string_view s, const char* what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error(std::string("malformed ") + what + ": '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string_view to_string(LayerName name) { return kLayerStrings[static_cast<int>(name)]; }

LayerName parse_layer_name(std::string_view s) {
  for (std::size_t i = 0; i < kLayerStrings.size(); ++i)
    if (kLayerStrings[i] == s) return static_cast<LayerName>(i);
  throw Error("unknown layer name '" + std::string(s) + "'");
}

std::string encode_token(const Token& t) {
  return std::to_string(t.start) + ":" + std::to_string(t.end) + ":" +
         std::to_string(t.sentence) + ":" + t.text;
}

Token decode_token(std::string_view cell) {
  Token t;
  std::array<std::size_t, 3> colons{};
  std::size_t pos = 0;
  for (auto& c : colons) {
    c = cell.find(':', pos);
    if (c == std::string_view::npos) throw Error("malformed token cell '" + std::string(cell) + "'");
    pos = c + 1;
  }
  t.start = static_cast<std::size_t>(parse_int(cell.substr(0, colons[0]), "token start"));
  t.end = static_cast<std::size_t>(
      parse_int(cell.substr(colons[0] + 1, colons[1] - colons[0] - 1), "token end"));
  t.sentence = parse_int(cell.substr(colons[1] + 1, colons[2] - colons[1] - 1), "sentence index");
  t.text = std::string(cell.substr(colons[2] + 1));
  return t;
}

bool is_punctuation(std::string_view text) {
  if (text.empty()) return false;
  for (unsigned char c : text)
    if (!std::ispunct(c)) return false;
  return true;
}

// ---------------------------------------------------------------------------

std::string Sense::str() const {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%c.%02d", pos, number);
  return buf;
}

Sense Sense::parse(std::string_view s) {
  if (s.size() < 4 || s[1] != '.' || std::string_view("nvar").find(s[0]) == std::string_view::npos)
    throw Error("malformed sense '" + std::string(s) + "'");
  Sense out;
  out.pos = s[0];
  out.number = parse_int(s.substr(2), "sense number");
  if (s.size() != 4 || out.number < 1) throw Error("malformed sense '" + std::string(s) + "'");
  return out;
}

std::optional<int> parse_antecedent(std::string_view cell) {
  if (cell == kNoAntecedent || cell.empty()) return std::nullopt;
  return parse_int(cell, "antecedent index");
}

std::string encode_antecedent(std::optional<int> antecedent) {
  return antecedent ? std::to_string(*antecedent) : std::string(kNoAntecedent);
}

// ---------------------------------------------------------------------------
// Category

Category Category::atom(std::string name) {
  auto n = std::make_shared<CategoryNode>();
  n->atom = std::move(name);
  n->text = n->atom;
  return Category(std::move(n));
}

static std::string wrap(const Category& c) {
  return c.is_atomic() ? c.str() : "(" + c.str() + ")";
}

Category Category::fwd(const Category& result, const Category& arg) {
  auto n = std::make_shared<CategoryNode>();
  n->slash = Slash::fwd;
  n->result = result;
  n->arg = arg;
  n->text = wrap(result) + "/" + wrap(arg);
  return Category(std::move(n));
}

Category Category::bwd(const Category& result, const Category& arg) {
  auto n = std::make_shared<CategoryNode>();
  n->slash = Slash::bwd;
  n->result = result;
  n->arg = arg;
  n->text = wrap(result) + "\\" + wrap(arg);
  return Category(std::move(n));
}


bool Category::operator==(const Category& o) const {
  if (node_ == o.node_) return true;
  if (!node_ || !o.node_) return false;
  return node_->text == o.node_->text;
}

namespace {

class CategoryParser {
 public:
  explicit CategoryParser(std::string_view s) : s_(s) {}

  Category parse() {
    Category c = expr();
    if (pos_ != s_.size()) fail("trailing input");
    return c;
  }

 private:
  Category expr() {
    Category left = primary();
    while (pos_ < s_.size() && (s_[pos_] == '/' || s_[pos_] == '\\')) {
      char slash = s_[pos_++];
      Category right = primary();
      left = slash == '/' ? Category::fwd(left, right) : Category::bwd(left, right);
    }
    return left;
  }

  Category primary() {
    if (pos_ >= s_.size()) fail("unexpected end");
    if (s_[pos_] == '(') {
      ++pos_;
      Category inner = expr();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("missing ')'");
      ++pos_;
      return inner;
    }
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isupper(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected atomic category");
    std::string name(s_.substr(start, pos_ - start));
    if (!kAtomicCategories.contains(name)) fail("unknown atomic category " + name);
    return Category::atom(std::move(name));
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw Error("malformed category '" + std::string(s_) + "': " + why + " at " +
                std::to_string(pos_));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Category parse_category(std::string_view text) { return CategoryParser(text).parse(); }

// ---------------------------------------------------------------------------
// Inventories

Inventory::Inventory(std::vector<std::pair<std::string, std::string>> entries) {
  for (auto& [tag, desc] : entries) {
    if (descriptions_.contains(tag)) continue;
    labels_.push_back(tag);
    descriptions_.emplace(tag, desc);
  }
}

Inventory Inventory::load(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    entries.emplace_back(cols[0], cols.size() > 1 ? cols[1] : "");
  }
  return Inventory(std::move(entries));
}

bool Inventory::contains(std::string_view tag) const { return descriptions_.contains(tag); }

std::string Inventory::description(std::string_view tag) const {
  auto it = descriptions_.find(tag);
  return it == descriptions_.end() ? std::string() : it->second;
}

bool is_comparison_op(std::string_view s) {
  for (auto op : kComparisonOps)
    if (op == s) return true;
  return false;
}

SenseLexicon SenseLexicon::load(const std::string& path) {
  SenseLexicon lex;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() < 3) throw Error("senses file " + path + ": expected lemma, pos, senses");
    for (const auto& s : split(cols[2], ',')) lex.add(cols[0], Sense::parse(s));
  }
  return lex;
}

void SenseLexicon::add(const std::string& lemma, const Sense& sense) {
  entries_[lemma].push_back(sense);
}

std::optional<Sense> SenseLexicon::first_sense(std::string_view lemma, char pos) const {
  auto it = entries_.find(lemma);
  if (it == entries_.end()) return std::nullopt;
  for (const auto& s : it->second)
    if (s.pos == pos) return s;
  return std::nullopt;
}

const std::vector<Sense>* SenseLexicon::senses(std::string_view lemma) const {
  auto it = entries_.find(lemma);
  return it == entries_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// TSV helpers

std::string escape_cell(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_cell(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    switch (s[++i]) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: out += s[i];
    }
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto p = s.find(sep, start);
    if (p == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, p - start));
    start = p + 1;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace mb
