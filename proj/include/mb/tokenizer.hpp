#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mb/layers.hpp"

namespace mb {

/// Per-character segmentation label: sentence-beginning, token-beginning,
/// inside-token, outside-token.
enum class CharLabel : unsigned char { S, T, I, O };

char to_char(CharLabel l);
CharLabel parse_char_label(char c);
std::vector<CharLabel> parse_labels(std::string_view s);  // e.g. "SIT"
std::string labels_string(const std::vector<CharLabel>& labels);

struct Segmentation {
  std::vector<CharLabel> labels;  // one per byte of the input
  std::vector<Token> tokens;
};

/// Total decoding: a token opens at S or T and extends over following I
/// bytes; an I with no open token is read as T. Sentence index increments
/// at every S after the first token.
std::vector<Token> decode_labels(std::string_view raw, const std::vector<CharLabel>& labels);

/// Applies the normalisations decode_labels assumes: I without an open token
/// becomes T, the first token label becomes S, UTF-8 continuation bytes
/// follow their lead byte.
std::vector<CharLabel> normalize_labels(std::string_view raw, std::vector<CharLabel> labels);

/// Gold labels for a known segmentation.
std::vector<CharLabel> labels_from_tokens(std::string_view raw, const std::vector<Token>& tokens);

/// Whitespace/punctuation rules used when no trained model is available.
Segmentation rule_tokenize(std::string_view raw);

class TokenizerModel {
 public:
  static constexpr int kWindow = 3;
  static constexpr int kLevels = 6;

  CharLabel predict(std::string_view raw, std::size_t pos) const;
  bool empty() const;

  std::string serialize() const;
  static TokenizerModel deserialize(std::string_view text);
  bool operator==(const TokenizerModel&) const = default;

 private:
  friend TokenizerModel train_tokenizer(const std::vector<std::pair<std::string, std::vector<CharLabel>>>&);
  using Counts = std::array<int, 4>;
  // One table per backoff level, indexed by the context key for that level.
  std::array<std::map<std::string, Counts>, kLevels> tables_;

  static std::string context_key(std::string_view raw, std::size_t pos, int level);
};

TokenizerModel train_tokenizer(const std::vector<std::pair<std::string, std::vector<CharLabel>>>& pairs);

Segmentation tokenize(const TokenizerModel& model, std::string_view raw);

/// Label files: one character per line, `char<TAB>label`; a blank line ends a text.
std::string write_label_file(const std::vector<std::pair<std::string, std::vector<CharLabel>>>& texts);
std::vector<std::pair<std::string, std::vector<CharLabel>>> read_label_file(std::string_view content);

}  // namespace mb
