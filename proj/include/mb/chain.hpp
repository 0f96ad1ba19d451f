#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mb/layers.hpp"

namespace mb {

/// Per-token inputs of the role labeler.
struct RoleFeatures {
  std::string semtag;
  std::string symbol;
  std::string category;
};

struct RoleSentence {
  std::vector<RoleFeatures> tokens;
  std::vector<std::string> roles;
};

/// Feature strings for token `i` over a window of two tokens either side.
std::vector<std::string> role_feature_strings(const std::vector<RoleFeatures>& tokens, std::size_t i);

/// First-order linear-chain model trained with averaged structured perceptron updates.
class ChainModel {
 public:
  /// Sorted; always contains NONE.
  const std::vector<std::string>& labels() const { return labels_; }
  int label_id(std::string_view label) const;

  /// Feature ids known to the model, sorted and deduplicated.
  std::vector<int> feature_ids(const std::vector<std::string>& features) const;
  double emission_score(const std::vector<int>& feature_ids, int label) const;
  double transition_score(int prev, int label) const;  // prev = -1 at sentence start

  std::vector<std::string> decode(const std::vector<RoleFeatures>& tokens) const;
  /// Decoding from precomputed per-token feature strings.
  std::vector<std::string> decode_features(const std::vector<std::vector<std::string>>& features) const;
  std::vector<std::string> decode(const std::vector<RoleFeatures>& tokens,
                                  const std::vector<std::optional<std::string>>& fixed) const;

  std::string serialize() const;
  static ChainModel deserialize(std::string_view text);
  bool operator==(const ChainModel&) const = default;

  int epochs_run() const { return epochs_; }

 private:
  friend ChainModel train_role_labeler(const std::vector<RoleSentence>&, const Inventory&, int);

  std::vector<int> viterbi(const std::vector<std::vector<int>>& feats,
                           const std::vector<std::optional<int>>& fixed) const;

  std::vector<std::string> labels_;
  std::map<std::string, int, std::less<>> label_index_;
  std::map<std::string, int, std::less<>> feature_index_;
  std::vector<double> emission_;    // feature * L + label
  std::vector<double> transition_;  // (prev + 1) * L + label
  int epochs_ = 0;
};

ChainModel train_role_labeler(const std::vector<RoleSentence>& sentences, const Inventory& roles,
                              int max_epochs = 30);

std::vector<std::string> tag_roles(const ChainModel& model, const std::vector<RoleFeatures>& tokens);

}  // namespace mb
