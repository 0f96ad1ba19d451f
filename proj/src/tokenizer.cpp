#include "mb/tokenizer.hpp"

#include <cctype>
#include <sstream>

namespace mb {

char to_char(CharLabel l) { return "STIO"[static_cast<int>(l)]; }

CharLabel parse_char_label(char c) {
  switch (c) {
    case 'S': return CharLabel::S;
    case 'T': return CharLabel::T;
    case 'I': return CharLabel::I;
    case 'O': return CharLabel::O;
  }
  throw Error(std::string("unknown character label '") + c + "'");
}

std::vector<CharLabel> parse_labels(std::string_view s) {
  std::vector<CharLabel> out;
  for (char c : s) out.push_back(parse_char_label(c));
  return out;
}

std::string labels_string(const std::vector<CharLabel>& labels) {
  std::string s;
  for (auto l : labels) s += to_char(l);
  return s;
}

namespace {

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

char char_class(int c) {
  if (c < 0) return 'B';
  if (c > 255) return 'E';
  unsigned char u = static_cast<unsigned char>(c);
  if (u >= 0x80) return 'a';
  if (std::isupper(u)) return 'A';
  if (std::isalpha(u)) return 'a';
  if (std::isdigit(u)) return '9';
  if (std::isspace(u)) return ' ';
  return '.';
}

int byte_at(std::string_view raw, long pos) {
  if (pos < 0) return -1;
  if (pos >= static_cast<long>(raw.size())) return 256;
  return static_cast<unsigned char>(raw[static_cast<std::size_t>(pos)]);
}

char exact(int c) {
  if (c < 0) return '\x02';
  if (c > 255) return '\x03';
  return static_cast<char>(c);
}

}  // namespace

std::vector<CharLabel> normalize_labels(std::string_view raw, std::vector<CharLabel> labels) {
  if (labels.size() != raw.size()) throw Error("label sequence length differs from text length");
  bool open = false;
  bool seen_token = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i > 0 && is_continuation(static_cast<unsigned char>(raw[i])))
      labels[i] = open ? CharLabel::I : CharLabel::O;
    if (labels[i] == CharLabel::I && !open) labels[i] = CharLabel::T;
    if (labels[i] == CharLabel::T && !seen_token) labels[i] = CharLabel::S;
    if (labels[i] != CharLabel::O) seen_token = true;
    open = labels[i] != CharLabel::O;
  }
  return labels;
}

std::vector<Token> decode_labels(std::string_view raw, const std::vector<CharLabel>& labels) {
  if (labels.size() != raw.size()) throw Error("label sequence length differs from text length");
  std::vector<Token> tokens;
  int sentence = 0;
  bool open = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    CharLabel l = labels[i];
    if (l == CharLabel::I && !open) l = CharLabel::T;
    if (l == CharLabel::S || l == CharLabel::T) {
      if (l == CharLabel::S && !tokens.empty()) ++sentence;
      Token t;
      t.start = i;
      t.end = i + 1;
      t.sentence = sentence;
      tokens.push_back(t);
      open = true;
    } else if (l == CharLabel::I) {
      tokens.back().end = i + 1;
    } else {
      open = false;
    }
  }
  for (auto& t : tokens) t.text = std::string(raw.substr(t.start, t.end - t.start));
  return tokens;
}

std::vector<CharLabel> labels_from_tokens(std::string_view raw, const std::vector<Token>& tokens) {
  std::vector<CharLabel> labels(raw.size(), CharLabel::O);
  int prev_sentence = -1;
  std::size_t prev_end = 0;
  for (const auto& t : tokens) {
    if (t.end > raw.size() || t.start >= t.end || t.start < prev_end)
      throw Error("token spans out of order or out of range");
    labels[t.start] = t.sentence != prev_sentence ? CharLabel::S : CharLabel::T;
    for (std::size_t i = t.start + 1; i < t.end; ++i) labels[i] = CharLabel::I;
    prev_sentence = t.sentence;
    prev_end = t.end;
  }
  return labels;
}

Segmentation rule_tokenize(std::string_view raw) {
  static constexpr std::string_view kLeading = "([{\"'";
  static constexpr std::string_view kTrailing = ".,!?;:)]}\"'";
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < raw.size()) {
    if (std::isspace(static_cast<unsigned char>(raw[i]))) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < raw.size() && !std::isspace(static_cast<unsigned char>(raw[end]))) ++end;
    std::size_t a = i, b = end;
    std::vector<Token> trailing;
    while (a < b && kLeading.find(raw[a]) != std::string_view::npos) {
      tokens.push_back(Token{std::string(1, raw[a]), a, a + 1, 0});
      ++a;
    }
    while (b > a && kTrailing.find(raw[b - 1]) != std::string_view::npos) {
      trailing.insert(trailing.begin(), Token{std::string(1, raw[b - 1]), b - 1, b, 0});
      --b;
    }
    if (a < b) tokens.push_back(Token{std::string(raw.substr(a, b - a)), a, b, 0});
    tokens.insert(tokens.end(), trailing.begin(), trailing.end());
    i = end;
  }
  int sentence = 0;
  for (std::size_t k = 1; k < tokens.size(); ++k) {
    const Token& prev = tokens[k - 1];
    bool ender = prev.text == "." || prev.text == "!" || prev.text == "?";
    bool gap = tokens[k].start > prev.end;
    // opening brackets and quotes before the capital belong to the new sentence
    std::size_t first = k;
    while (first + 1 < tokens.size() && kLeading.find(tokens[first].text[0]) != std::string_view::npos &&
           tokens[first + 1].start == tokens[first].end)
      ++first;
    if (ender && gap && std::isupper(static_cast<unsigned char>(tokens[first].text[0]))) ++sentence;
    tokens[k].sentence = sentence;
  }
  Segmentation seg;
  seg.labels = labels_from_tokens(raw, tokens);
  seg.tokens = std::move(tokens);
  return seg;
}

// ---------------------------------------------------------------------------
// Backoff window classifier

std::string TokenizerModel::context_key(std::string_view raw, std::size_t pos, int level) {
  long p = static_cast<long>(pos);
  std::string key;
  auto window = [&](int radius, bool exact_chars, bool exact_center) {
    for (int d = -radius; d <= radius; ++d) {
      int c = byte_at(raw, p + d);
      key += (exact_chars || (d == 0 && exact_center)) ? exact(c) : char_class(c);
    }
  };
  switch (level) {
    case 0: window(3, true, true); break;
    case 1: window(2, true, true); break;
    case 2: window(1, true, true); break;
    case 3: window(3, false, true); break;
    case 4: window(2, false, false); break;
    default: window(0, false, false); break;
  }
  return key;
}

bool TokenizerModel::empty() const { return tables_.back().empty(); }

CharLabel TokenizerModel::predict(std::string_view raw, std::size_t pos) const {
  for (int level = 0; level < kLevels; ++level) {
    auto it = tables_[level].find(context_key(raw, pos, level));
    if (it == tables_[level].end()) continue;
    const Counts& c = it->second;
    int best = 0;
    for (int l = 1; l < 4; ++l)
      if (c[l] > c[best]) best = l;  // strict: earlier label wins ties (S > T > I > O)
    return static_cast<CharLabel>(best);
  }
  return std::isspace(static_cast<unsigned char>(raw[pos])) ? CharLabel::O : CharLabel::I;
}

TokenizerModel train_tokenizer(const std::vector<std::pair<std::string, std::vector<CharLabel>>>& pairs) {
  if (pairs.empty()) throw Error("tokenizer training set is empty");
  TokenizerModel m;
  for (const auto& [raw, labels] : pairs) {
    if (raw.size() != labels.size())
      throw Error("label sequence length " + std::to_string(labels.size()) +
                  " differs from text length " + std::to_string(raw.size()));
    for (std::size_t i = 0; i < raw.size(); ++i)
      for (int level = 0; level < TokenizerModel::kLevels; ++level)
        ++m.tables_[level][TokenizerModel::context_key(raw, i, level)][static_cast<int>(labels[i])];
  }
  return m;
}

Segmentation tokenize(const TokenizerModel& model, std::string_view raw) {
  Segmentation seg;
  seg.labels.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) seg.labels.push_back(model.predict(raw, i));
  seg.labels = normalize_labels(raw, std::move(seg.labels));
  seg.tokens = decode_labels(raw, seg.labels);
  return seg;
}

std::string TokenizerModel::serialize() const {
  std::ostringstream out;
  out << "mb-tokenizer\t1\n";
  for (int level = 0; level < kLevels; ++level)
    for (const auto& [key, c] : tables_[level])
      out << level << '\t' << escape_cell(key) << '\t' << c[0] << '\t' << c[1] << '\t' << c[2] << '\t'
          << c[3] << '\n';
  return out.str();
}

TokenizerModel TokenizerModel::deserialize(std::string_view text) {
  auto lines = split(text, '\n');
  if (lines.empty() || lines[0] != "mb-tokenizer\t1") throw Error("not a tokenizer model (version header)");
  TokenizerModel m;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto cols = split(lines[i], '\t');
    if (cols.size() != 6) throw Error("tokenizer model line " + std::to_string(i) + " malformed");
    int level = std::stoi(cols[0]);
    if (level < 0 || level >= kLevels) throw Error("tokenizer model: bad level");
    Counts c{std::stoi(cols[2]), std::stoi(cols[3]), std::stoi(cols[4]), std::stoi(cols[5])};
    m.tables_[level][unescape_cell(cols[1])] = c;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Label files

std::string write_label_file(const std::vector<std::pair<std::string, std::vector<CharLabel>>>& texts) {
  std::string out;
  for (const auto& [raw, labels] : texts) {
    if (raw.size() != labels.size()) throw Error("label sequence length differs from text length");
    std::size_t i = 0;
    while (i < raw.size()) {
      std::size_t j = i + 1;
      while (j < raw.size() && is_continuation(static_cast<unsigned char>(raw[j]))) ++j;
      out += escape_cell(raw.substr(i, j - i));
      out += '\t';
      out += to_char(labels[i]);
      out += '\n';
      i = j;
    }
    out += '\n';
  }
  return out;
}

std::vector<std::pair<std::string, std::vector<CharLabel>>> read_label_file(std::string_view content) {
  std::vector<std::pair<std::string, std::vector<CharLabel>>> texts;
  std::string raw;
  std::vector<CharLabel> labels;
  auto flush = [&] {
    if (raw.empty()) return;
    texts.emplace_back(raw, normalize_labels(raw, labels));
    raw.clear();
    labels.clear();
  };
  for (const auto& line : split(content, '\n')) {
    if (line.empty()) {
      flush();
      continue;
    }
    auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab + 2 != line.size()) throw Error("malformed label line '" + line + "'");
    std::string ch = unescape_cell(line.substr(0, tab));
    CharLabel l = parse_char_label(line[tab + 1]);
    for (std::size_t k = 0; k < ch.size(); ++k) {
      raw += ch[k];
      labels.push_back(k == 0 ? l : (l == CharLabel::O ? CharLabel::O : CharLabel::I));
    }
  }
  flush();
  return texts;
}

}  // namespace mb
