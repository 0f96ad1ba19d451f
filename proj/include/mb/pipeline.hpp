#pragma once

#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "mb/aligner.hpp"
#include "mb/ccg.hpp"
#include "mb/chain.hpp"
#include "mb/composer.hpp"
#include "mb/drs.hpp"
#include "mb/hmm.hpp"
#include "mb/layers.hpp"
#include "mb/store.hpp"
#include "mb/symboliser.hpp"
#include "mb/tokenizer.hpp"

namespace mb {

enum class Tool { tokenizer, semtagger, symboliser, supertagger, roles };

std::string_view to_string(Tool t);
Tool parse_tool(std::string_view s);

inline constexpr std::string_view kPivotLanguage = "en";

/// Inventories and templates shared by every language.
struct Resources {
  Inventory semtags;
  Inventory roles;
  SenseLexicon senses;
  TemplateRegistry templates;

  static Resources load(const std::string& data_dir);
};

struct LanguageModels {
  std::optional<TokenizerModel> tokenizer;
  std::optional<TrigramHmm> semtagger;
  std::optional<TrigramHmm> supertagger;
  std::optional<ChainModel> roles;
  SymbolTable symbols;
  LemmaLexicon lexicon;
};

/// A fully annotated training sentence.
struct AnnotatedSentence {
  std::string raw;
  std::vector<Token> tokens;
  std::map<LayerName, std::vector<std::string>> layers;
};

/// Blocks separated by blank lines: `# text = <raw>` then one row per token:
/// token, sem, sym, sen, rol, cor, cat.
std::vector<AnnotatedSentence> read_annotated(std::string_view text);
std::string write_annotated(const std::vector<AnnotatedSentence>& sentences);

/// Locates each token in `raw` left to right.
std::vector<Token> locate_tokens(std::string_view raw, const std::vector<std::string>& texts, int sentence = 0);

/// Trains every tool for which the sentences carry data.
LanguageModels train_language_models(const std::vector<AnnotatedSentence>& sentences, const Resources& res,
                                     LemmaLexicon lexicon);

/// One active model set per language; readers get immutable snapshots.
class ModelRegistry {
 public:
  std::shared_ptr<const LanguageModels> get(const std::string& lang) const;
  void set(const std::string& lang, std::shared_ptr<const LanguageModels> models);
  std::vector<std::string> languages() const;

  struct AlignerPair {
    Ibm1Model forward;  // t(target | english)
    Ibm1Model reverse;  // t(english | target)
  };
  std::shared_ptr<const AlignerPair> aligner(const std::string& lang) const;
  void set_aligner(const std::string& lang, std::shared_ptr<const AlignerPair> models);

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<const LanguageModels>> models_;
  std::map<std::string, std::shared_ptr<const AlignerPair>> aligners_;
};

struct PipelineOptions {
  std::string data_dir = MB_DATA_DIR;
  std::string models_dir;  // empty: models stay in memory
  bool rule_fallback = true;
  std::size_t supertag_k = 3;
};

struct ProcessResult {
  Translation translation;
  Drs drs;
  ProjectionReport projection;
  std::vector<std::string> warnings;
};

struct BootstrapReport {
  Tool tool = Tool::semtagger;
  std::string lang;
  std::size_t gold_translations = 0;
  std::size_t gold_tokens = 0;
  double old_accuracy = 0;
  double new_accuracy = 0;
  bool registered = false;
};

struct AddLanguageReport {
  std::string lang;
  std::size_t imported = 0;
  std::size_t bitext_pairs = 0;
  std::vector<std::pair<DocumentId, Conflict>> conflicts;
  std::vector<BootstrapReport> trained;
};

/// Throws when `value` is not admissible for the layer.
void validate_value(const Resources& res, LayerName layer, const std::string& value);

/// Annotation layers of a translation into per-sentence composition inputs.
std::vector<std::vector<LexicalInput>> lexical_inputs(const Translation& t);

class Pipeline {
 public:
  Pipeline(Corpus& corpus, PipelineOptions options = {});

  const Resources& resources() const { return resources_; }
  ModelRegistry& registry() { return registry_; }
  const ModelRegistry& registry() const { return registry_; }
  Corpus& corpus() { return corpus_; }
  const PipelineOptions& options() const { return options_; }

  /// Runs the tool chain and stores layers plus the document DRS.
  ProcessResult process(const DocumentId& id, const std::string& lang);
  /// Processes English first when needed, then every other translation.
  std::vector<ProcessResult> process_all(const DocumentId& id);

  /// Annotates machine positions of a translation in place without storing it.
  ProcessResult annotate(const Document& doc, const std::string& lang) const;
  /// Composes the document DRS from complete layers.
  Drs compose_translation(const Translation& t) const;

  BootstrapReport bootstrap(Tool tool, const std::string& lang);

  /// Imports `english ||| target` lines, retrains the aligner for the pair,
  /// reports gold conflicts and trains tools that now have gold data.
  AddLanguageReport add_language(const std::string& lang, std::string_view bitext);

  /// Retrains the aligner on every document holding both languages.
  std::size_t train_aligner(const std::string& lang, int iterations = 5);

 private:
  std::shared_ptr<const LanguageModels> models_for(const std::string& lang) const;
  void save_models(const std::string& lang, const LanguageModels& m) const;

  Corpus& corpus_;
  PipelineOptions options_;
  Resources resources_;
  ModelRegistry registry_;
  std::map<std::string, std::vector<AnnotatedSentence>> seed_data_;
};

}  // namespace mb
