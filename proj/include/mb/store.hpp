#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "mb/layers.hpp"

namespace mb {

/// `pp/dddd`: part in [0,99], doc in [0,9999].
struct DocumentId {
  int part = 0;
  int doc = 0;

  std::string str() const;
  static DocumentId parse(std::string_view s);
  auto operator<=>(const DocumentId&) const = default;
};

/// Optimistic-concurrency failure on a stale revision.
class RevisionConflict : public Error {
 public:
  using Error::Error;
};

enum class Provenance { machine, human };
enum class Status { bronze, silver, gold };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view s);
std::string_view to_string(Status s);
Status parse_status(std::string_view s);

/// gold iff non-empty and every flag human; bronze iff no flag human.
Status rollup(std::span<const Provenance> flags);

struct Layer {
  std::vector<std::string> values;
  std::vector<Provenance> provenance;

  std::size_t size() const { return values.size(); }
  Status status() const { return rollup(provenance); }
  bool is_hole(std::size_t i) const { return values[i].empty(); }
  std::size_t human_count() const;
  bool operator==(const Layer&) const = default;
};

struct Translation {
  std::string lang;
  std::string raw;
  std::map<LayerName, Layer> layers;
  std::string alignment;             // Pharaoh links against the English tokens
  std::vector<std::string> clauses;  // document DRS in clause form
  std::uint64_t revision = 0;

  std::size_t token_count() const;
  std::vector<Token> tokens() const;
  const Layer* layer(LayerName name) const;
  /// Translation-level tier: gold when all seven layers are gold, bronze
  /// when no layer has a human token, silver otherwise.
  Status status() const;
  bool complete() const;  // all seven layers present, right length, no holes
};

struct Document {
  DocumentId id;
  std::map<std::string, Translation> translations;

  const Translation* find(std::string_view lang) const;
};

/// Per-document writes are serialized; reads take a snapshot copy.
class Corpus {
 public:
  Corpus() = default;
  /// A corpus bound to a directory writes each mutated document through.
  explicit Corpus(std::string root);
  Corpus(const Corpus&) = delete;
  Corpus& operator=(const Corpus&) = delete;

  static std::unique_ptr<Corpus> load(const std::string& root);
  void save(const std::string& root) const;
  const std::string& root() const { return root_; }

  DocumentId add_document(const std::string& english_text,
                          const std::vector<std::pair<std::string, std::string>>& translations);
  /// Inserts a document under its existing id.
  void insert(Document doc);
  void add_translation(const DocumentId& id, const std::string& lang, const std::string& text);
  std::optional<DocumentId> find_english(const std::string& english_text) const;

  std::optional<Document> get(const DocumentId& id) const;
  std::vector<DocumentId> ids() const;
  std::size_t size() const;

  /// Replaces the whole layer. A machine flag over a currently-human token is
  /// rejected unless `force`. Setting `tok` redefines the token count and
  /// clears every other layer whose length no longer matches.
  Layer set_layer(const DocumentId& id, const std::string& lang, LayerName name,
                  std::vector<std::string> values, std::vector<Provenance> provenance,
                  bool force = false);

  /// Human correction of one token; returns the layer after the write.
  Layer correct_token(const DocumentId& id, const std::string& lang, LayerName name,
                      std::size_t index, const std::string& value,
                      std::optional<std::uint64_t> expected_revision = std::nullopt);

  /// Runs `fn` with exclusive access to one document; persists afterwards.
  void update(const DocumentId& id, const std::function<void(Document&)>& fn);

 private:
  struct Entry {
    Document doc;
    mutable std::mutex mu;
  };
  Entry& entry(const DocumentId& id) const;
  void persist(const Document& doc) const;

  std::string root_;
  mutable std::shared_mutex map_mu_;
  std::map<DocumentId, std::unique_ptr<Entry>> docs_;
};

/// Stable text hash used for part assignment (FNV-1a, 64 bit).
std::uint64_t text_hash(std::string_view text);
int part_for_text(std::string_view english_text);

/// Validates a layer against the translation's token count.
void check_layer(const Translation& t, LayerName name, const Layer& layer);

// ---------------------------------------------------------------------------
// On-disk layout: <root>/<pp>/<dddd>/<lang>.<layer>.tsv plus <lang>.raw.txt,
// <lang>.align.txt and <lang>.drs.txt.

void write_document(const std::string& root, const Document& doc);
Document read_document(const std::string& dir, const DocumentId& id);
std::string layer_to_tsv(const Layer& layer);
Layer layer_from_tsv(std::string_view tsv);

// ---------------------------------------------------------------------------
// Releases

struct ReleaseStats {
  std::string release;
  /// tier -> lang -> translation count
  std::map<Status, std::map<std::string, std::size_t>> counts;
};

struct ReleaseBundle {
  Status tier = Status::gold;
  std::vector<Document> documents;  // only translations meeting the tier
  ReleaseStats stats;
};

ReleaseBundle make_release(const Corpus& corpus, Status tier, const std::string& release_name);
/// Writes the tree plus stats.tsv into `out_dir`.
void write_release(const ReleaseBundle& bundle, const std::string& out_dir);
/// Exports `tier` from `corpus`; a `.tar` suffix on `out` writes a tarball.
ReleaseBundle export_release(const Corpus& corpus, Status tier, const std::string& out,
                             const std::string& release_name = "release");
/// Loads a release tree (or tarball) as an unbound corpus.
std::unique_ptr<Corpus> import_release(const std::string& path);

/// Long-format stats: `release<TAB>Quality<TAB>LANG<TAB>count` with thousands separators.
std::string stats_tsv(const ReleaseStats& stats);
/// Aligned release table: one row per tier, one column per language.
std::string format_release_table(const ReleaseStats& stats);
std::string thousands(std::size_t n);

void write_tar(const std::string& dir, const std::string& tar_path);
void extract_tar(const std::string& tar_path, const std::string& dir);

}  // namespace mb
