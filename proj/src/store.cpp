#include "mb/store.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace mb {

// ---------------------------------------------------------------------------
// Identifiers and enums

std::string DocumentId::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d/%04d", part, doc);
  return buf;
}

DocumentId DocumentId::parse(std::string_view s) {
  auto slash = s.find('/');
  if (slash == std::string_view::npos) throw Error("malformed document id '" + std::string(s) + "'");
  DocumentId id;
  auto parse_num = [&](std::string_view v, int& out) {
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || p != v.data() + v.size())
      throw Error("malformed document id '" + std::string(s) + "'");
  };
  parse_num(s.substr(0, slash), id.part);
  parse_num(s.substr(slash + 1), id.doc);
  if (id.part < 0 || id.part > 99 || id.doc < 0 || id.doc > 9999)
    throw Error("document id out of range '" + std::string(s) + "'");
  return id;
}

std::string_view to_string(Provenance p) { return p == Provenance::human ? "human" : "machine"; }

Provenance parse_provenance(std::string_view s) {
  if (s == "human") return Provenance::human;
  if (s == "machine") return Provenance::machine;
  throw Error("unknown provenance '" + std::string(s) + "'");
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::gold: return "gold";
    case Status::silver: return "silver";
    default: return "bronze";
  }
}

Status parse_status(std::string_view s) {
  if (s == "gold") return Status::gold;
  if (s == "silver") return Status::silver;
  if (s == "bronze") return Status::bronze;
  throw Error("unknown tier '" + std::string(s) + "'");
}

Status rollup(std::span<const Provenance> flags) {
  std::size_t human = std::count(flags.begin(), flags.end(), Provenance::human);
  if (human == 0) return Status::bronze;
  return human == flags.size() ? Status::gold : Status::silver;
}

std::size_t Layer::human_count() const {
  return static_cast<std::size_t>(std::count(provenance.begin(), provenance.end(), Provenance::human));
}

// ---------------------------------------------------------------------------
// Translation

std::size_t Translation::token_count() const {
  auto it = layers.find(LayerName::tok);
  return it == layers.end() ? 0 : it->second.size();
}

std::vector<Token> Translation::tokens() const {
  std::vector<Token> out;
  if (auto* l = layer(LayerName::tok))
    for (const auto& v : l->values) out.push_back(decode_token(v));
  return out;
}

const Layer* Translation::layer(LayerName name) const {
  auto it = layers.find(name);
  return it == layers.end() ? nullptr : &it->second;
}

Status Translation::status() const {
  bool all_gold = layers.size() == kAllLayers.size();
  bool any_human = false;
  for (const auto& [name, l] : layers) {
    Status s = l.status();
    all_gold = all_gold && s == Status::gold;
    any_human = any_human || s != Status::bronze;
  }
  if (all_gold) return Status::gold;
  return any_human ? Status::silver : Status::bronze;
}

bool Translation::complete() const {
  if (layers.size() != kAllLayers.size()) return false;
  std::size_t n = token_count();
  for (const auto& [name, l] : layers) {
    if (l.size() != n) return false;
    for (std::size_t i = 0; i < n; ++i)
      if (l.is_hole(i)) return false;
  }
  return true;
}

const Translation* Document::find(std::string_view lang) const {
  auto it = translations.find(std::string(lang));
  return it == translations.end() ? nullptr : &it->second;
}

void check_layer(const Translation& t, LayerName name, const Layer& layer) {
  if (layer.values.size() != layer.provenance.size())
    throw Error("layer " + std::string(to_string(name)) + ": values and provenance differ in length");
  if (name == LayerName::tok) {
    for (const auto& v : layer.values) decode_token(v);
    return;
  }
  if (layer.size() != t.token_count())
    throw Error("layer " + std::string(to_string(name)) + " has " + std::to_string(layer.size()) +
                " values but translation " + t.lang + " has " + std::to_string(t.token_count()) +
                " tokens");
}

// ---------------------------------------------------------------------------
// Part assignment

std::uint64_t text_hash(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

int part_for_text(std::string_view english_text) {
  return static_cast<int>(text_hash(english_text) % 100);
}

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(std::string root) : root_(std::move(root)) {}

Corpus::Entry& Corpus::entry(const DocumentId& id) const {
  std::shared_lock lock(map_mu_);
  auto it = docs_.find(id);
  if (it == docs_.end()) throw Error("no document " + id.str());
  return *it->second;
}

void Corpus::persist(const Document& doc) const {
  if (!root_.empty()) write_document(root_, doc);
}

DocumentId Corpus::add_document(const std::string& english_text,
                                const std::vector<std::pair<std::string, std::string>>& translations) {
  if (english_text.empty()) throw Error("empty English text");
  std::set<std::string> langs{"en"};
  for (const auto& [lang, text] : translations) {
    if (!langs.insert(lang).second) throw Error("duplicate language '" + lang + "'");
    if (text.empty()) throw Error("empty text for language '" + lang + "'");
  }

  Document doc;
  doc.id.part = part_for_text(english_text);
  auto add = [&](const std::string& lang, const std::string& text) {
    Translation t;
    t.lang = lang;
    t.raw = text;
    doc.translations.emplace(lang, std::move(t));
  };
  add("en", english_text);
  for (const auto& [lang, text] : translations) add(lang, text);

  std::unique_lock lock(map_mu_);
  int next = 0;
  for (auto it = docs_.lower_bound(DocumentId{doc.id.part, 0});
       it != docs_.end() && it->first.part == doc.id.part && it->first.doc == next; ++it)
    ++next;
  if (next > 9999) throw Error("part " + std::to_string(doc.id.part) + " is full");
  doc.id.doc = next;
  auto e = std::make_unique<Entry>();
  e->doc = std::move(doc);
  DocumentId id = e->doc.id;
  persist(e->doc);
  docs_.emplace(id, std::move(e));
  return id;
}

void Corpus::insert(Document doc) {
  std::unique_lock lock(map_mu_);
  if (docs_.contains(doc.id)) throw Error("document " + doc.id.str() + " already exists");
  auto e = std::make_unique<Entry>();
  e->doc = std::move(doc);
  persist(e->doc);
  DocumentId id = e->doc.id;
  docs_.emplace(id, std::move(e));
}

void Corpus::add_translation(const DocumentId& id, const std::string& lang, const std::string& text) {
  if (text.empty()) throw Error("empty text for language '" + lang + "'");
  update(id, [&](Document& d) {
    if (d.translations.contains(lang)) throw Error("duplicate language '" + lang + "'");
    Translation t;
    t.lang = lang;
    t.raw = text;
    d.translations.emplace(lang, std::move(t));
  });
}

std::optional<DocumentId> Corpus::find_english(const std::string& english_text) const {
  int part = part_for_text(english_text);
  std::shared_lock lock(map_mu_);
  for (auto it = docs_.lower_bound(DocumentId{part, 0}); it != docs_.end() && it->first.part == part;
       ++it) {
    std::lock_guard g(it->second->mu);
    auto* en = it->second->doc.find("en");
    if (en && en->raw == english_text) return it->first;
  }
  return std::nullopt;
}

std::optional<Document> Corpus::get(const DocumentId& id) const {
  std::shared_lock lock(map_mu_);
  auto it = docs_.find(id);
  if (it == docs_.end()) return std::nullopt;
  std::lock_guard g(it->second->mu);
  return it->second->doc;
}

std::vector<DocumentId> Corpus::ids() const {
  std::shared_lock lock(map_mu_);
  std::vector<DocumentId> out;
  for (const auto& [id, e] : docs_) out.push_back(id);
  return out;
}

std::size_t Corpus::size() const {
  std::shared_lock lock(map_mu_);
  return docs_.size();
}

void Corpus::update(const DocumentId& id, const std::function<void(Document&)>& fn) {
  Entry& e = entry(id);
  std::lock_guard g(e.mu);
  Document copy = e.doc;
  fn(copy);
  persist(copy);
  e.doc = std::move(copy);
}

Layer Corpus::set_layer(const DocumentId& id, const std::string& lang, LayerName name,
                        std::vector<std::string> values, std::vector<Provenance> provenance,
                        bool force) {
  Layer result;
  update(id, [&](Document& d) {
    auto it = d.translations.find(lang);
    if (it == d.translations.end()) throw Error("document " + id.str() + " has no " + lang);
    Translation& t = it->second;
    Layer next{std::move(values), std::move(provenance)};
    check_layer(t, name, next);

    if (const Layer* old = t.layer(name); old && old->size() == next.size() && !force) {
      for (std::size_t i = 0; i < next.size(); ++i)
        if (old->provenance[i] == Provenance::human && next.provenance[i] == Provenance::machine)
          throw Error("machine value would overwrite human token " + std::to_string(i) + " in " +
                      std::string(to_string(name)) + " layer of " + id.str() + "/" + lang);
    }

    if (name == LayerName::tok && next.size() != t.token_count()) {
      for (auto li = t.layers.begin(); li != t.layers.end();) {
        if (li->first == LayerName::tok) {
          ++li;
          continue;
        }
        if (li->second.human_count() > 0 && !force)
          throw Error("retokenising " + id.str() + "/" + lang + " would discard human tokens in " +
                      std::string(to_string(li->first)) + " layer");
        li = t.layers.erase(li);
      }
      t.clauses.clear();
    }
    t.layers[name] = next;
    ++t.revision;
    result = std::move(next);
  });
  return result;
}

Layer Corpus::correct_token(const DocumentId& id, const std::string& lang, LayerName name,
                            std::size_t index, const std::string& value,
                            std::optional<std::uint64_t> expected_revision) {
  if (name == LayerName::tok) throw Error("token layer cannot be corrected cell by cell");
  Layer result;
  update(id, [&](Document& d) {
    auto it = d.translations.find(lang);
    if (it == d.translations.end()) throw Error("document " + id.str() + " has no " + lang);
    Translation& t = it->second;
    if (expected_revision && *expected_revision != t.revision)
      throw RevisionConflict("revision conflict: expected " + std::to_string(*expected_revision) + ", have " +
                  std::to_string(t.revision));
    if (index >= t.token_count())
      throw Error("token index " + std::to_string(index) + " out of range");
    Layer& l = t.layers[name];
    if (l.size() != t.token_count()) {
      l.values.assign(t.token_count(), "");
      l.provenance.assign(t.token_count(), Provenance::machine);
    }
    l.values[index] = value;
    l.provenance[index] = Provenance::human;
    ++t.revision;
    result = l;
  });
  return result;
}

// ---------------------------------------------------------------------------
// Persistence

std::string layer_to_tsv(const Layer& layer) {
  std::string out;
  for (std::size_t i = 0; i < layer.size(); ++i) {
    out += std::to_string(i);
    out += '\t';
    out += escape_cell(layer.values[i]);
    out += '\t';
    out += to_string(layer.provenance[i]);
    out += '\n';
  }
  return out;
}

Layer layer_from_tsv(std::string_view tsv) {
  Layer l;
  std::size_t row = 0;
  for (const auto& line : split(tsv, '\n')) {
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3) throw Error("layer row " + std::to_string(row) + ": expected 3 columns");
    if (cols[0] != std::to_string(row))
      throw Error("layer row " + std::to_string(row) + ": token index " + cols[0] + " out of order");
    l.values.push_back(unescape_cell(cols[1]));
    l.provenance.push_back(parse_provenance(cols[2]));
    ++row;
  }
  return l;
}

namespace {

fs::path doc_dir(const std::string& root, const DocumentId& id) {
  char part[4], doc[8];
  std::snprintf(part, sizeof part, "%02d", id.part);
  std::snprintf(doc, sizeof doc, "%04d", id.doc);
  return fs::path(root) / part / doc;
}

bool is_digits(const std::string& s, std::size_t n) {
  return s.size() == n && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace

void write_document(const std::string& root, const Document& doc) {
  fs::path dir = doc_dir(root, doc.id);
  fs::remove_all(dir);
  fs::create_directories(dir);
  for (const auto& [lang, t] : doc.translations) {
    write_file((dir / (lang + ".raw.txt")).string(), t.raw);
    for (const auto& [name, layer] : t.layers)
      write_file((dir / (lang + "." + std::string(to_string(name)) + ".tsv")).string(),
                 layer_to_tsv(layer));
    if (!t.alignment.empty()) write_file((dir / (lang + ".align.txt")).string(), t.alignment + "\n");
    if (!t.clauses.empty()) write_file((dir / (lang + ".drs.txt")).string(), join_lines(t.clauses));
  }
}

Document read_document(const std::string& dir, const DocumentId& id) {
  Document doc;
  doc.id = id;
  std::vector<fs::path> files;
  for (const auto& f : fs::directory_iterator(dir))
    if (f.is_regular_file()) files.push_back(f.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    auto parts = split(p.filename().string(), '.');
    if (parts.size() != 3) continue;
    const std::string& lang = parts[0];
    const std::string& kind = parts[1];
    Translation& t = doc.translations[lang];
    t.lang = lang;
    std::string content = read_file(p.string());
    if (kind == "raw") {
      t.raw = content;
    } else if (kind == "align") {
      while (!content.empty() && content.back() == '\n') content.pop_back();
      t.alignment = content;
    } else if (kind == "drs") {
      for (auto& line : split(content, '\n'))
        if (!line.empty()) t.clauses.push_back(line);
    } else {
      t.layers[parse_layer_name(kind)] = layer_from_tsv(content);
    }
  }
  for (const auto& [lang, t] : doc.translations)
    for (const auto& [name, layer] : t.layers) check_layer(t, name, layer);
  return doc;
}

std::unique_ptr<Corpus> Corpus::load(const std::string& root) {
  auto corpus = std::make_unique<Corpus>(root);
  if (!fs::exists(root)) {
    fs::create_directories(root);
    return corpus;
  }
  for (const auto& part : fs::directory_iterator(root)) {
    if (!part.is_directory() || !is_digits(part.path().filename().string(), 2)) continue;
    for (const auto& d : fs::directory_iterator(part.path())) {
      if (!d.is_directory() || !is_digits(d.path().filename().string(), 4)) continue;
      DocumentId id{std::stoi(part.path().filename().string()), std::stoi(d.path().filename().string())};
      auto e = std::make_unique<Entry>();
      e->doc = read_document(d.path().string(), id);
      corpus->docs_.emplace(id, std::move(e));
    }
  }
  return corpus;
}

void Corpus::save(const std::string& root) const {
  for (const auto& id : ids())
    if (auto d = get(id)) write_document(root, *d);
}

// ---------------------------------------------------------------------------
// Releases

std::string thousands(std::size_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  int count = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (count > 0 && count % 3 == 0) out.insert(out.begin(), ',');
    out.insert(out.begin(), *it);
    ++count;
  }
  return out;
}

namespace {

std::string tier_title(Status s) {
  std::string t(to_string(s));
  t[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
  return t;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> stat_languages(const ReleaseStats& stats) {
  std::set<std::string> langs;
  for (const auto& [tier, per_lang] : stats.counts)
    for (const auto& [lang, n] : per_lang) langs.insert(lang);
  std::vector<std::string> out;
  if (langs.erase("en")) out.push_back("en");
  out.insert(out.end(), langs.begin(), langs.end());
  return out;
}

constexpr std::array<Status, 3> kTiersBestFirst = {Status::gold, Status::silver, Status::bronze};

}  // namespace

ReleaseBundle make_release(const Corpus& corpus, Status tier, const std::string& release_name) {
  ReleaseBundle bundle;
  bundle.tier = tier;
  bundle.stats.release = release_name;
  auto& counts = bundle.stats.counts[tier];
  for (const auto& id : corpus.ids()) {
    auto doc = corpus.get(id);
    if (!doc) continue;
    Document selected;
    selected.id = id;
    for (const auto& [lang, t] : doc->translations) {
      if (t.status() != tier) continue;
      selected.translations.emplace(lang, t);
      ++counts[lang];
    }
    if (!selected.translations.empty()) bundle.documents.push_back(std::move(selected));
  }
  return bundle;
}

std::string stats_tsv(const ReleaseStats& stats) {
  std::string out;
  auto langs = stat_languages(stats);
  for (Status tier : kTiersBestFirst) {
    auto it = stats.counts.find(tier);
    if (it == stats.counts.end()) continue;
    for (const auto& lang : langs) {
      auto c = it->second.find(lang);
      std::size_t n = c == it->second.end() ? 0 : c->second;
      out += stats.release + "\t" + tier_title(tier) + "\t" + upper(lang) + "\t" + thousands(n) + "\n";
    }
  }
  return out;
}

std::string format_release_table(const ReleaseStats& stats) {
  auto langs = stat_languages(stats);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Release", "Quality"};
  for (const auto& l : langs) header.push_back(upper(l));
  rows.push_back(header);
  bool first = true;
  for (Status tier : kTiersBestFirst) {
    auto it = stats.counts.find(tier);
    if (it == stats.counts.end()) continue;
    std::vector<std::string> row{first ? stats.release : "", tier_title(tier)};
    first = false;
    for (const auto& l : langs) {
      auto c = it->second.find(l);
      row.push_back(thousands(c == it->second.end() ? 0 : c->second));
    }
    rows.push_back(row);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::string cell = r[i];
      std::string pad(width[i] - cell.size(), ' ');
      // text columns left-aligned, counts right-aligned
      line += i < 2 ? cell + pad : pad + cell;
      if (i + 1 < r.size()) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

void write_release(const ReleaseBundle& bundle, const std::string& out_dir) {
  fs::remove_all(out_dir);
  fs::create_directories(out_dir);
  for (const auto& doc : bundle.documents) write_document(out_dir, doc);
  write_file((fs::path(out_dir) / "stats.tsv").string(), stats_tsv(bundle.stats));
}

namespace {

fs::path scratch_dir() {
  std::random_device rd;
  auto p = fs::temp_directory_path() / ("mb-release-" + std::to_string(rd()) + std::to_string(rd()));
  fs::create_directories(p);
  return p;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

ReleaseBundle export_release(const Corpus& corpus, Status tier, const std::string& out,
                             const std::string& release_name) {
  ReleaseBundle bundle = make_release(corpus, tier, release_name);
  if (ends_with(out, ".tar")) {
    fs::path tmp = scratch_dir();
    write_release(bundle, tmp.string());
    write_tar(tmp.string(), out);
    fs::remove_all(tmp);
  } else {
    write_release(bundle, out);
  }
  return bundle;
}

std::unique_ptr<Corpus> import_release(const std::string& path) {
  std::unique_ptr<Corpus> bound;
  if (ends_with(path, ".tar")) {
    fs::path tmp = scratch_dir();
    extract_tar(path, tmp.string());
    bound = Corpus::load(tmp.string());
    fs::remove_all(tmp);
  } else {
    if (!fs::is_directory(path)) throw Error("no release at " + path);
    bound = Corpus::load(path);
  }
  // Re-home the documents in an unbound corpus so edits never touch the release.
  auto corpus = std::make_unique<Corpus>();
  for (const auto& id : bound->ids()) corpus->insert(*bound->get(id));
  return corpus;
}

// ---------------------------------------------------------------------------
// Tar (ustar, deterministic: sorted entries, zero mtime)

namespace {

void put_octal(char* field, std::size_t width, std::uint64_t value) {
  std::snprintf(field, width, "%0*llo", static_cast<int>(width - 1), static_cast<unsigned long long>(value));
}

void tar_header(std::string& out, const std::string& name, std::uint64_t size, char type) {
  if (name.size() >= 100) throw Error("tar entry name too long: " + name);
  char h[512];
  std::memset(h, 0, sizeof h);
  std::memcpy(h, name.data(), name.size());
  put_octal(h + 100, 8, type == '5' ? 0755 : 0644);
  put_octal(h + 108, 8, 0);
  put_octal(h + 116, 8, 0);
  put_octal(h + 124, 12, size);
  put_octal(h + 136, 12, 0);
  std::memset(h + 148, ' ', 8);
  h[156] = type;
  std::memcpy(h + 257, "ustar", 6);
  std::memcpy(h + 263, "00", 2);
  unsigned sum = 0;
  for (unsigned char c : h) sum += c;
  std::snprintf(h + 148, 8, "%06o", sum);
  h[155] = ' ';
  out.append(h, sizeof h);
}

}  // namespace

void write_tar(const std::string& dir, const std::string& tar_path) {
  std::vector<fs::path> entries;
  for (const auto& e : fs::recursive_directory_iterator(dir)) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());
  std::string out;
  for (const auto& p : entries) {
    std::string rel = fs::relative(p, dir).generic_string();
    if (fs::is_directory(p)) {
      tar_header(out, rel + "/", 0, '5');
      continue;
    }
    std::string content = read_file(p.string());
    tar_header(out, rel, content.size(), '0');
    out += content;
    out.append((512 - content.size() % 512) % 512, '\0');
  }
  out.append(1024, '\0');
  write_file(tar_path, out);
}

void extract_tar(const std::string& tar_path, const std::string& dir) {
  std::string data = read_file(tar_path);
  std::size_t pos = 0;
  while (pos + 512 <= data.size()) {
    const char* h = data.data() + pos;
    if (h[0] == '\0') break;
    std::string name(h, strnlen(h, 100));
    if (name.find("..") != std::string::npos) throw Error("unsafe tar entry " + name);
    std::uint64_t size = std::strtoull(std::string(h + 124, 12).c_str(), nullptr, 8);
    char type = h[156];
    pos += 512;
    fs::path target = fs::path(dir) / name;
    if (type == '5') {
      fs::create_directories(target);
    } else {
      if (pos + size > data.size()) throw Error("truncated tar " + tar_path);
      write_file(target.string(), std::string_view(data).substr(pos, size));
      pos += (size + 511) / 512 * 512;
    }
  }
}

}  // namespace mb
