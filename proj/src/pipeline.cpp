#include "mb/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <mutex>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace mb {

std::string_view to_string(Tool t) {
  switch (t) {
    case Tool::tokenizer: return "tokenizer";
    case Tool::semtagger: return "semtagger";
    case Tool::symboliser: return "symboliser";
    case Tool::supertagger: return "supertagger";
    case Tool::roles: return "roles";
  }
  return "?";
}

Tool parse_tool(std::string_view s) {
  for (Tool t : {Tool::tokenizer, Tool::semtagger, Tool::symboliser, Tool::supertagger, Tool::roles})
    if (to_string(t) == s) return t;
  throw Error("unknown tool '" + std::string(s) + "'");
}

Resources Resources::load(const std::string& data_dir) {
  Resources r;
  r.semtags = Inventory::load(data_dir + "/semtags.tsv");
  r.roles = Inventory::load(data_dir + "/roles.tsv");
  r.senses = SenseLexicon::load(data_dir + "/senses.tsv");
  r.templates = TemplateRegistry::load(data_dir + "/templates.tsv");
  return r;
}

void validate_value(const Resources& res, LayerName layer, const std::string& value) {
  if (value.empty()) throw Error("empty value for layer " + std::string(to_string(layer)));
  if (value.find_first_of("\t\n") != std::string::npos) throw Error("value contains a tab or newline");
  switch (layer) {
    case LayerName::tok: throw Error("token layer cannot be corrected cell by cell");
    case LayerName::sem:
      if (!res.semtags.contains(value)) throw Error("unknown semantic tag '" + value + "'");
      break;
    case LayerName::rol:
      if (value != kNoRole && !res.roles.contains(value)) throw Error("unknown role '" + value + "'");
      break;
    case LayerName::sen:
      if (value != kNoSense) Sense::parse(value);
      break;
    case LayerName::cor: parse_antecedent(value); break;
    case LayerName::cat: parse_category(value); break;
    case LayerName::sym: break;
  }
}

// ---------------------------------------------------------------------------
// Annotated text files

namespace {

constexpr LayerName kColumnLayers[] = {LayerName::sem, LayerName::sym, LayerName::sen,
                                       LayerName::rol, LayerName::cor, LayerName::cat};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::vector<Token> locate_tokens(std::string_view raw, const std::vector<std::string>& texts, int sentence) {
  std::vector<Token> out;
  std::size_t pos = 0;
  for (const auto& text : texts) {
    std::size_t at = raw.find(text, pos);
    if (text.empty() || at == std::string_view::npos)
      throw Error("token '" + text + "' not found in \"" + std::string(raw) + "\"");
    out.push_back({text, at, at + text.size(), sentence});
    pos = at + text.size();
  }
  return out;
}

std::vector<AnnotatedSentence> read_annotated(std::string_view text) {
  std::vector<AnnotatedSentence> out;
  std::vector<std::vector<std::string>> rows;
  std::string raw;
  std::size_t line_no = 0;
  auto flush = [&]() {
    if (rows.empty()) {
      if (!raw.empty()) throw Error("annotated block without tokens near line " + std::to_string(line_no));
      return;
    }
    const std::size_t cols = rows.front().size();
    std::vector<std::string> texts;
    for (const auto& r : rows) {
      if (r.size() != cols) throw Error("inconsistent column count near line " + std::to_string(line_no));
      texts.push_back(r[0]);
    }
    AnnotatedSentence s;
    s.raw = raw.empty() ? [&] {
      std::string joined;
      for (const auto& t : texts) joined += (joined.empty() ? "" : " ") + t;
      return joined;
    }() : raw;
    s.tokens = locate_tokens(s.raw, texts);
    for (std::size_t c = 1; c < cols && c <= std::size(kColumnLayers); ++c) {
      auto& layer = s.layers[kColumnLayers[c - 1]];
      for (const auto& r : rows) layer.push_back(r[c] == "_" ? std::string() : r[c]);
    }
    out.push_back(std::move(s));
    rows.clear();
    raw.clear();
  };
  for (const auto& line : split(text, '\n')) {
    ++line_no;
    if (line.empty()) {
      flush();
    } else if (line.starts_with("# text = ")) {
      raw = line.substr(9);
    } else if (line[0] == '#') {
      continue;
    } else {
      rows.push_back(split(line, '\t'));
    }
  }
  flush();
  return out;
}

std::string write_annotated(const std::vector<AnnotatedSentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    out += "# text = " + s.raw + "\n";
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out += s.tokens[i].text;
      for (LayerName l : kColumnLayers) {
        auto it = s.layers.find(l);
        if (it == s.layers.end()) break;
        out += "\t" + (it->second[i].empty() ? std::string("_") : it->second[i]);
      }
      out += "\n";
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

namespace {

/// Token index ranges [begin, end) of each sentence.
std::vector<std::pair<std::size_t, std::size_t>> sentence_spans(const std::vector<Token>& tokens) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i == 0 || tokens[i].sentence != tokens[i - 1].sentence) out.emplace_back(i, i);
    out.back().second = i + 1;
  }
  return out;
}

const std::vector<std::string>* complete_layer(const AnnotatedSentence& s, LayerName name) {
  auto it = s.layers.find(name);
  if (it == s.layers.end() || it->second.size() != s.tokens.size()) return nullptr;
  for (const auto& v : it->second)
    if (v.empty()) return nullptr;
  return &it->second;
}

std::vector<std::string> slice(const std::vector<std::string>& v, std::size_t b, std::size_t e) {
  return {v.begin() + static_cast<std::ptrdiff_t>(b), v.begin() + static_cast<std::ptrdiff_t>(e)};
}

std::vector<std::string> token_texts(const std::vector<Token>& tokens, std::size_t b, std::size_t e) {
  std::vector<std::string> out;
  for (std::size_t i = b; i < e; ++i) out.push_back(tokens[i].text);
  return out;
}

std::vector<TaggedSentence> tagged(const std::vector<AnnotatedSentence>& data, LayerName layer) {
  std::vector<TaggedSentence> out;
  for (const auto& s : data) {
    const auto* tags = complete_layer(s, layer);
    if (!tags) continue;
    for (auto [b, e] : sentence_spans(s.tokens)) out.push_back({token_texts(s.tokens, b, e), slice(*tags, b, e)});
  }
  return out;
}

std::vector<RoleSentence> role_data(const std::vector<AnnotatedSentence>& data) {
  std::vector<RoleSentence> out;
  for (const auto& s : data) {
    const auto* sem = complete_layer(s, LayerName::sem);
    const auto* sym = complete_layer(s, LayerName::sym);
    const auto* cat = complete_layer(s, LayerName::cat);
    const auto* rol = complete_layer(s, LayerName::rol);
    if (!sem || !sym || !cat || !rol) continue;
    for (auto [b, e] : sentence_spans(s.tokens)) {
      RoleSentence r;
      for (std::size_t i = b; i < e; ++i) r.tokens.push_back({(*sem)[i], (*sym)[i], (*cat)[i]});
      r.roles = slice(*rol, b, e);
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::vector<CharLabel>>> tokenizer_data(const std::vector<AnnotatedSentence>& data) {
  std::vector<std::pair<std::string, std::vector<CharLabel>>> out;
  for (const auto& s : data)
    if (!s.tokens.empty()) out.emplace_back(s.raw, labels_from_tokens(s.raw, s.tokens));
  return out;
}

std::vector<SymbolTriple> symbol_data(const std::vector<AnnotatedSentence>& data, const LemmaLexicon& lexicon) {
  std::vector<SymbolTriple> out;
  for (const auto& s : data) {
    const auto* sem = complete_layer(s, LayerName::sem);
    const auto* sym = complete_layer(s, LayerName::sym);
    if (!sem || !sym) continue;
    for (std::size_t i = 0; i < s.tokens.size(); ++i)
      out.push_back({lexicon.lemmatize(s.tokens[i].text, is_name_tag((*sem)[i])), (*sem)[i], (*sym)[i]});
  }
  return out;
}

void validate_categories(const std::vector<TaggedSentence>& data) {
  for (const auto& s : data)
    for (const auto& c : s.tags) parse_category(c);
}

}  // namespace

LanguageModels train_language_models(const std::vector<AnnotatedSentence>& sentences, const Resources& res,
                                     LemmaLexicon lexicon) {
  LanguageModels m;
  m.lexicon = std::move(lexicon);
  if (auto tok = tokenizer_data(sentences); !tok.empty()) m.tokenizer = train_tokenizer(tok);
  if (auto sem = tagged(sentences, LayerName::sem); !sem.empty()) m.semtagger = train_semtagger(sem, res.semtags);
  if (auto cat = tagged(sentences, LayerName::cat); !cat.empty()) {
    validate_categories(cat);
    m.supertagger = train_hmm(cat);
  }
  if (auto rol = role_data(sentences); !rol.empty()) m.roles = train_role_labeler(rol, res.roles);
  m.symbols = learn_symbol_table(symbol_data(sentences, m.lexicon));
  return m;
}

// ---------------------------------------------------------------------------
// Registry

std::shared_ptr<const LanguageModels> ModelRegistry::get(const std::string& lang) const {
  std::shared_lock g(mu_);
  auto it = models_.find(lang);
  return it == models_.end() ? nullptr : it->second;
}

void ModelRegistry::set(const std::string& lang, std::shared_ptr<const LanguageModels> models) {
  std::unique_lock g(mu_);
  models_[lang] = std::move(models);
}

std::vector<std::string> ModelRegistry::languages() const {
  std::shared_lock g(mu_);
  std::vector<std::string> out;
  for (const auto& [lang, m] : models_) out.push_back(lang);
  return out;
}

std::shared_ptr<const ModelRegistry::AlignerPair> ModelRegistry::aligner(const std::string& lang) const {
  std::shared_lock g(mu_);
  auto it = aligners_.find(lang);
  return it == aligners_.end() ? nullptr : it->second;
}

void ModelRegistry::set_aligner(const std::string& lang, std::shared_ptr<const AlignerPair> models) {
  std::unique_lock g(mu_);
  aligners_[lang] = std::move(models);
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

std::string model_path(const std::string& dir, const std::string& lang, std::string_view what) {
  return dir + "/" + lang + "." + std::string(what);
}

template <typename T>
std::optional<T> load_optional(const std::string& path) {
  if (!fs::exists(path)) return std::nullopt;
  return T::deserialize(read_file(path));
}

std::vector<SentencePair> pairs_from_tokens(const std::vector<Token>& en, const std::vector<Token>& tgt) {
  auto se = sentence_spans(en);
  auto st = sentence_spans(tgt);
  auto words = [](const std::vector<Token>& toks, std::size_t b, std::size_t e) {
    std::vector<std::string> out;
    for (std::size_t i = b; i < e; ++i) out.push_back(lower(toks[i].text));
    return out;
  };
  std::vector<SentencePair> out;
  if (se.size() == st.size()) {
    for (std::size_t k = 0; k < se.size(); ++k)
      out.push_back({words(en, se[k].first, se[k].second), words(tgt, st[k].first, st[k].second)});
  } else {
    out.push_back({words(en, 0, en.size()), words(tgt, 0, tgt.size())});
  }
  return out;
}

std::vector<std::string> texts_of(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

AnnotatedSentence annotated_from(const Translation& t) {
  AnnotatedSentence s;
  s.raw = t.raw;
  s.tokens = t.tokens();
  for (LayerName l : kColumnLayers)
    if (const Layer* layer = t.layer(l); layer && layer->size() == s.tokens.size()) s.layers[l] = layer->values;
  return s;
}

Layer& ensure_layer(Translation& t, LayerName name, std::size_t n) {
  Layer& l = t.layers[name];
  if (l.size() != n) {
    l.values.assign(n, "");
    l.provenance.assign(n, Provenance::machine);
  }
  return l;
}

std::string sense_for(const SenseLexicon& senses, const std::string& symbol, const std::string& category) {
  if (category.empty()) return std::string(kNoSense);
  Category c = parse_category(category);
  if (c.is("PUNCT")) return std::string(kNoSense);
  if (auto s = senses.first_sense(symbol, default_sense(c).pos)) return s->str();
  return std::string(kNoSense);
}

}  // namespace

Pipeline::Pipeline(Corpus& corpus, PipelineOptions options)
    : corpus_(corpus), options_(std::move(options)), resources_(Resources::load(options_.data_dir)) {
  const std::string demo = options_.data_dir + "/demo";
  if (!options_.models_dir.empty()) fs::create_directories(options_.models_dir);
  std::vector<std::string> langs;
  if (fs::is_directory(demo))
    for (const auto& entry : fs::directory_iterator(demo))
      if (entry.path().extension() == ".conll") langs.push_back(entry.path().stem().string());
  std::sort(langs.begin(), langs.end());
  for (const auto& lang : langs) {
    seed_data_[lang] = read_annotated(read_file(demo + "/" + lang + ".conll"));
    const std::string lex_path = options_.data_dir + "/lexicon." + lang + ".tsv";
    LemmaLexicon lexicon = fs::exists(lex_path) ? LemmaLexicon::load(lex_path, lang == kPivotLanguage)
                                                : LemmaLexicon(lang == kPivotLanguage);
    LanguageModels m = train_language_models(seed_data_[lang], resources_, lexicon);
    if (!options_.models_dir.empty()) {
      const auto& dir = options_.models_dir;
      if (auto t = load_optional<TokenizerModel>(model_path(dir, lang, "tokenizer.model"))) m.tokenizer = t;
      if (auto t = load_optional<TrigramHmm>(model_path(dir, lang, "semtagger.model"))) m.semtagger = t;
      if (auto t = load_optional<TrigramHmm>(model_path(dir, lang, "supertagger.model"))) m.supertagger = t;
      if (auto t = load_optional<ChainModel>(model_path(dir, lang, "roles.model"))) m.roles = t;
      if (auto t = load_optional<SymbolTable>(model_path(dir, lang, "symbols.tsv"))) m.symbols = *t;
    }
    registry_.set(lang, std::make_shared<const LanguageModels>(std::move(m)));
  }
}

std::shared_ptr<const LanguageModels> Pipeline::models_for(const std::string& lang) const {
  return registry_.get(lang);
}

void Pipeline::save_models(const std::string& lang, const LanguageModels& m) const {
  if (options_.models_dir.empty()) return;
  const auto& dir = options_.models_dir;
  if (m.tokenizer) write_file(model_path(dir, lang, "tokenizer.model"), m.tokenizer->serialize());
  if (m.semtagger) write_file(model_path(dir, lang, "semtagger.model"), m.semtagger->serialize());
  if (m.supertagger) write_file(model_path(dir, lang, "supertagger.model"), m.supertagger->serialize());
  if (m.roles) write_file(model_path(dir, lang, "roles.model"), m.roles->serialize());
  write_file(model_path(dir, lang, "symbols.tsv"), m.symbols.serialize());
}

std::vector<std::vector<LexicalInput>> lexical_inputs(const Translation& t) {
  const auto tokens = t.tokens();
  auto value = [&](LayerName name, std::size_t i) -> std::string {
    const Layer* l = t.layer(name);
    return l && l->size() == tokens.size() ? l->values[i] : std::string();
  };
  std::vector<std::vector<LexicalInput>> out;
  for (auto [b, e] : sentence_spans(tokens)) {
    auto& sentence = out.emplace_back();
    for (std::size_t i = b; i < e; ++i) {
      LexicalInput in;
      in.index = static_cast<int>(i);
      in.token = tokens[i].text;
      std::string cat = value(LayerName::cat, i);
      if (cat.empty()) throw Error("token " + std::to_string(i) + " has no category");
      in.category = parse_category(cat);
      in.semtag = value(LayerName::sem, i);
      in.symbol = value(LayerName::sym, i);
      std::string sen = value(LayerName::sen, i);
      if (!sen.empty() && sen != kNoSense) in.sense = Sense::parse(sen);
      std::string rol = value(LayerName::rol, i);
      in.role = rol.empty() ? std::string(kNoRole) : rol;
      sentence.push_back(std::move(in));
    }
  }
  return out;
}

Drs Pipeline::compose_translation(const Translation& t) const {
  NameSupply names;
  std::vector<Composition> parts;
  for (const auto& inputs : lexical_inputs(t)) {
    std::vector<std::vector<ScoredCategory>> candidates;
    for (const auto& in : inputs) candidates.push_back({{in.category, 0.0}});
    parts.push_back(compose(parse(candidates), inputs, resources_.templates, names));
  }
  std::map<int, int> links;
  if (const Layer* cor = t.layer(LayerName::cor); cor && cor->size() == t.token_count())
    for (std::size_t i = 0; i < cor->size(); ++i)
      if (auto a = parse_antecedent(cor->values[i])) links[static_cast<int>(i)] = *a;
  resolve_coreference(parts, links);
  std::vector<Drs> sentences;
  for (auto& p : parts) sentences.push_back(std::move(p.drs));
  return merge_document(sentences);
}

ProcessResult Pipeline::annotate(const Document& doc, const std::string& lang) const {
  const Translation* source = doc.find(lang);
  if (!source) throw Error("document " + doc.id.str() + " has no '" + lang + "' translation");
  ProcessResult result;
  Translation& t = result.translation;
  t = *source;
  auto models = models_for(lang);

  // Tokens: recomputed unless a human correction pins the current segmentation.
  bool pinned = false;
  for (const auto& [name, layer] : t.layers)
    if (layer.human_count() > 0) pinned = true;
  if (!pinned || !t.layer(LayerName::tok)) {
    Segmentation seg;
    if (models && models->tokenizer)
      seg = tokenize(*models->tokenizer, t.raw);
    else if (options_.rule_fallback)
      seg = rule_tokenize(t.raw);
    else
      throw Error("no tokenizer model for '" + lang + "'");
    Layer tok;
    for (const auto& token : seg.tokens) {
      tok.values.push_back(encode_token(token));
      tok.provenance.push_back(Provenance::machine);
    }
    const Layer* old = t.layer(LayerName::tok);
    if (!old || old->values != tok.values) {
      t.layers.clear();
      t.layers[LayerName::tok] = std::move(tok);
    }
  }
  const auto tokens = t.tokens();
  const std::size_t n = tokens.size();

  if (lang == kPivotLanguage) {
    for (LayerName name : kTokenLayers) {
      Layer& l = ensure_layer(t, name, n);
      for (std::size_t i = 0; i < n; ++i)
        if (l.provenance[i] == Provenance::machine) l.values[i].clear();
    }
  } else {
    const Translation* en = doc.find(kPivotLanguage);
    if (!en || !en->layer(LayerName::tok)) throw Error("document " + doc.id.str() + " has no English source to project from");
    const auto en_tokens = en->tokens();
    AlignmentSet alignment;
    if (!t.alignment.empty()) {
      alignment = classify(parse_pharaoh(t.alignment), texts_of(en_tokens), texts_of(tokens));
    } else if (auto al = registry_.aligner(lang)) {
      std::vector<Link> links;
      auto se = sentence_spans(en_tokens);
      auto st = sentence_spans(tokens);
      auto pairs = pairs_from_tokens(en_tokens, tokens);
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const std::size_t off_s = se.size() == st.size() ? se[k].first : 0;
        const std::size_t off_t = se.size() == st.size() ? st[k].first : 0;
        for (auto [i, j] : align(al->forward, al->reverse, pairs[k]).links)
          links.emplace_back(i + static_cast<int>(off_s), j + static_cast<int>(off_t));
      }
      alignment = classify(std::move(links), texts_of(en_tokens), texts_of(tokens));
    } else {
      alignment = classify({}, texts_of(en_tokens), texts_of(tokens));
      result.warnings.push_back("no alignment available for '" + lang + "'");
    }
    result.projection = project(*en, t, alignment);
    // projection does not persist the alignment we induced; keep imported ones verbatim
    if (source->alignment.empty()) t.alignment = to_pharaoh(alignment.links);
  }

  for (LayerName name : kTokenLayers) ensure_layer(t, name, n);
  Layer& sem = t.layers[LayerName::sem];
  Layer& sym = t.layers[LayerName::sym];
  Layer& sen = t.layers[LayerName::sen];
  Layer& rol = t.layers[LayerName::rol];
  Layer& cor = t.layers[LayerName::cor];
  Layer& cat = t.layers[LayerName::cat];

  for (auto [b, e] : sentence_spans(tokens)) {
    const auto words = token_texts(tokens, b, e);
    auto fixed_of = [&](const Layer& l) {
      std::vector<std::optional<std::string>> fixed;
      for (std::size_t i = b; i < e; ++i)
        fixed.push_back(l.is_hole(i) ? std::nullopt : std::optional<std::string>(l.values[i]));
      return fixed;
    };
    auto has_holes = [&](const Layer& l) {
      for (std::size_t i = b; i < e; ++i)
        if (l.is_hole(i)) return true;
      return false;
    };

    if (has_holes(sem)) {
      if (models && models->semtagger) {
        auto tags = models->semtagger->tag(words, fixed_of(sem));
        for (std::size_t i = b; i < e; ++i)
          if (sem.is_hole(i)) sem.values[i] = tags[i - b];
      } else {
        result.warnings.push_back("no semtagger for '" + lang + "'");
      }
    }
    for (std::size_t i = b; i < e; ++i)
      if (sym.is_hole(i)) {
        sym.values[i] = models ? symbolise(models->symbols, models->lexicon, tokens[i].text, sem.values[i]).symbol
                               : lower(tokens[i].text);
      }
    if (has_holes(cat)) {
      if (models && models->supertagger) {
        auto candidates = assign_categories(*models->supertagger, words, options_.supertag_k);
        for (std::size_t i = b; i < e; ++i)
          if (!cat.is_hole(i)) candidates[i - b] = {{parse_category(cat.values[i]), 0.0}};
        ParseResult parsed = parse(candidates);
        if (!parsed.complete) result.warnings.push_back("sentence at token " + std::to_string(b) + " has no complete parse");
        for (const auto& fragment : parsed.fragments)
          for (const Derivation* leaf : fragment.leaves()) {
            std::size_t i = b + static_cast<std::size_t>(leaf->token);
            if (cat.is_hole(i)) cat.values[i] = leaf->category.str();
          }
      } else {
        result.warnings.push_back("no supertagger for '" + lang + "'");
      }
    }
    for (std::size_t i = b; i < e; ++i)
      if (sen.is_hole(i)) sen.values[i] = sense_for(resources_.senses, sym.values[i], cat.values[i]);
    if (has_holes(rol)) {
      bool features = true;
      std::vector<RoleFeatures> feats;
      for (std::size_t i = b; i < e; ++i) {
        feats.push_back({sem.values[i], sym.values[i], cat.values[i]});
        if (sem.is_hole(i) || sym.is_hole(i) || cat.is_hole(i)) features = false;
      }
      if (models && models->roles && features) {
        auto roles = models->roles->decode(feats, fixed_of(rol));
        for (std::size_t i = b; i < e; ++i)
          if (rol.is_hole(i)) rol.values[i] = roles[i - b];
      } else {
        for (std::size_t i = b; i < e; ++i)
          if (rol.is_hole(i)) rol.values[i] = std::string(kNoRole);
      }
    }
    for (std::size_t i = b; i < e; ++i)
      if (cor.is_hole(i)) cor.values[i] = std::string(kNoAntecedent);
  }

  t.clauses.clear();
  if (t.complete()) {
    result.drs = compose_translation(t);
    for (const auto& c : to_clauses(result.drs)) t.clauses.push_back(c.str());
  } else {
    result.warnings.push_back("translation '" + lang + "' has holes; no DRS composed");
  }
  return result;
}

ProcessResult Pipeline::process(const DocumentId& id, const std::string& lang) {
  auto doc = corpus_.get(id);
  if (!doc) throw Error("no document " + id.str());
  if (lang != kPivotLanguage) {
    const Translation* en = doc->find(kPivotLanguage);
    if (!en) throw Error("document " + id.str() + " has no English source to project from");
    if (!en->complete()) {
      process(id, std::string(kPivotLanguage));
      doc = corpus_.get(id);
    }
  }
  ProcessResult result = annotate(*doc, lang);
  corpus_.update(id, [&](Document& d) {
    Translation& cur = d.translations.at(lang);
    Translation next = result.translation;
    // A correction may have landed while annotating; human cells win.
    if (cur.token_count() == next.token_count())
      for (auto& [name, layer] : next.layers) {
        const Layer* old = cur.layer(name);
        if (!old || old->size() != layer.size()) continue;
        for (std::size_t i = 0; i < layer.size(); ++i)
          if (old->provenance[i] == Provenance::human) {
            layer.values[i] = old->values[i];
            layer.provenance[i] = Provenance::human;
          }
      }
    next.revision = cur.revision + 1;
    cur = std::move(next);
    result.translation = cur;
  });
  return result;
}

std::vector<ProcessResult> Pipeline::process_all(const DocumentId& id) {
  auto doc = corpus_.get(id);
  if (!doc) throw Error("no document " + id.str());
  std::vector<ProcessResult> out;
  if (doc->find(kPivotLanguage)) out.push_back(process(id, std::string(kPivotLanguage)));
  for (const auto& [lang, t] : doc->translations)
    if (lang != kPivotLanguage) out.push_back(process(id, lang));
  return out;
}

// ---------------------------------------------------------------------------
// Bootstrap

namespace {

bool gold_for(const Translation& t, Tool tool) {
  auto gold = [&](LayerName n) {
    const Layer* l = t.layer(n);
    return l && l->size() == t.token_count() && l->size() > 0 && l->status() == Status::gold;
  };
  switch (tool) {
    case Tool::tokenizer: return gold(LayerName::tok);
    case Tool::semtagger: return gold(LayerName::sem);
    case Tool::symboliser: return gold(LayerName::sym) && t.layer(LayerName::sem);
    case Tool::supertagger: return gold(LayerName::cat);
    case Tool::roles:
      return gold(LayerName::rol) && t.layer(LayerName::sem) && t.layer(LayerName::sym) && t.layer(LayerName::cat);
  }
  return false;
}

struct Accuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double value() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

Accuracy evaluate(const LanguageModels* m, Tool tool, const std::vector<AnnotatedSentence>& gold) {
  Accuracy acc;
  for (const auto& s : gold) {
    const std::size_t n = s.tokens.size();
    if (tool == Tool::tokenizer) {
      acc.total += n;
      if (!m || !m->tokenizer) continue;
      auto predicted = tokenize(*m->tokenizer, s.raw).tokens;
      std::set<std::pair<std::size_t, std::size_t>> spans;
      for (const auto& t : predicted) spans.emplace(t.start, t.end);
      for (const auto& t : s.tokens) acc.correct += spans.count({t.start, t.end});
      continue;
    }
    const auto layer_of = [&](LayerName l) -> const std::vector<std::string>& { return s.layers.at(l); };
    for (auto [b, e] : sentence_spans(s.tokens)) {
      const auto words = token_texts(s.tokens, b, e);
      std::vector<std::string> predicted, expected;
      switch (tool) {
        case Tool::semtagger:
          expected = slice(layer_of(LayerName::sem), b, e);
          if (m && m->semtagger) predicted = m->semtagger->tag(words);
          break;
        case Tool::supertagger:
          expected = slice(layer_of(LayerName::cat), b, e);
          if (m && m->supertagger) predicted = m->supertagger->tag(words);
          break;
        case Tool::roles: {
          expected = slice(layer_of(LayerName::rol), b, e);
          std::vector<RoleFeatures> feats;
          for (std::size_t i = b; i < e; ++i)
            feats.push_back({layer_of(LayerName::sem)[i], layer_of(LayerName::sym)[i], layer_of(LayerName::cat)[i]});
          if (m && m->roles) predicted = m->roles->decode(feats);
          break;
        }
        case Tool::symboliser:
          expected = slice(layer_of(LayerName::sym), b, e);
          if (m)
            for (std::size_t i = b; i < e; ++i)
              predicted.push_back(symbolise(m->symbols, m->lexicon, s.tokens[i].text, layer_of(LayerName::sem)[i]).symbol);
          break;
        case Tool::tokenizer:
          break;
      }
      acc.total += expected.size();
      for (std::size_t i = 0; i < predicted.size() && i < expected.size(); ++i) acc.correct += predicted[i] == expected[i];
    }
  }
  return acc;
}

}  // namespace

BootstrapReport Pipeline::bootstrap(Tool tool, const std::string& lang) {
  BootstrapReport report;
  report.tool = tool;
  report.lang = lang;
  std::vector<AnnotatedSentence> gold;
  for (const auto& id : corpus_.ids()) {
    auto doc = corpus_.get(id);
    const Translation* t = doc ? doc->find(lang) : nullptr;
    if (!t || !gold_for(*t, tool)) continue;
    gold.push_back(annotated_from(*t));
    ++report.gold_translations;
    report.gold_tokens += t->token_count();
  }
  if (gold.empty()) throw Error("no gold " + std::string(to_string(tool)) + " data for '" + lang + "'");

  auto current = models_for(lang);
  std::vector<AnnotatedSentence> training = seed_data_.count(lang) ? seed_data_.at(lang) : std::vector<AnnotatedSentence>{};
  training.insert(training.end(), gold.begin(), gold.end());

  LanguageModels next;
  if (current) {
    next = *current;
  } else {
    const std::string lex_path = options_.data_dir + "/lexicon." + lang + ".tsv";
    next.lexicon = fs::exists(lex_path) ? LemmaLexicon::load(lex_path, lang == kPivotLanguage)
                                        : LemmaLexicon(lang == kPivotLanguage);
  }
  switch (tool) {
    case Tool::tokenizer: next.tokenizer = train_tokenizer(tokenizer_data(training)); break;
    case Tool::semtagger: next.semtagger = train_semtagger(tagged(training, LayerName::sem), resources_.semtags); break;
    case Tool::supertagger: {
      auto data = tagged(training, LayerName::cat);
      validate_categories(data);
      next.supertagger = train_hmm(data);
      break;
    }
    case Tool::roles: next.roles = train_role_labeler(role_data(training), resources_.roles); break;
    case Tool::symboliser: next.symbols = learn_symbol_table(symbol_data(training, next.lexicon)); break;
  }
  report.old_accuracy = evaluate(current.get(), tool, gold).value();
  report.new_accuracy = evaluate(&next, tool, gold).value();
  if (report.new_accuracy >= report.old_accuracy) {
    save_models(lang, next);
    registry_.set(lang, std::make_shared<const LanguageModels>(std::move(next)));
    report.registered = true;
  }
  return report;
}

// ---------------------------------------------------------------------------
// New languages

std::size_t Pipeline::train_aligner(const std::string& lang, int iterations) {
  std::vector<SentencePair> pairs;
  auto tokens_of = [&](const Translation& t, const std::string& l) {
    if (t.layer(LayerName::tok)) return t.tokens();
    auto m = models_for(l);
    return (m && m->tokenizer ? tokenize(*m->tokenizer, t.raw) : rule_tokenize(t.raw)).tokens;
  };
  for (const auto& id : corpus_.ids()) {
    auto doc = corpus_.get(id);
    const Translation* en = doc->find(kPivotLanguage);
    const Translation* tgt = doc->find(lang);
    if (!en || !tgt) continue;
    auto p = pairs_from_tokens(tokens_of(*en, std::string(kPivotLanguage)), tokens_of(*tgt, lang));
    pairs.insert(pairs.end(), p.begin(), p.end());
  }
  if (pairs.empty()) throw Error("no English-" + lang + " bitext in the corpus");
  auto models = std::make_shared<ModelRegistry::AlignerPair>();
  models->forward = train_ibm1(pairs, iterations);
  models->reverse = train_ibm1(reversed(pairs), iterations);
  if (!options_.models_dir.empty()) {
    write_file(model_path(options_.models_dir, lang, "align.fwd.model"), models->forward.serialize());
    write_file(model_path(options_.models_dir, lang, "align.rev.model"), models->reverse.serialize());
  }
  registry_.set_aligner(lang, std::move(models));
  return pairs.size();
}

AddLanguageReport Pipeline::add_language(const std::string& lang, std::string_view bitext) {
  if (lang == kPivotLanguage) throw Error("English is the pivot language");
  AddLanguageReport report;
  report.lang = lang;
  std::size_t line_no = 0;
  for (const auto& line : split(bitext, '\n')) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto sep = line.find(" ||| ");
    if (sep == std::string::npos) throw Error("bitext line " + std::to_string(line_no) + ": expected 'english ||| " + lang + "'");
    std::string en = line.substr(0, sep);
    std::string tgt = line.substr(sep + 5);
    if (auto id = corpus_.find_english(en)) {
      auto doc = corpus_.get(*id);
      if (!doc->find(lang)) corpus_.add_translation(*id, lang, tgt);
    } else {
      corpus_.add_document(en, {{lang, tgt}});
    }
    ++report.imported;
  }
  report.bitext_pairs = train_aligner(lang);
  for (const auto& id : corpus_.ids()) {
    auto doc = corpus_.get(id);
    const Translation* t = doc->find(lang);
    const Translation* en = doc->find(kPivotLanguage);
    if (!t || !en || !en->layer(LayerName::tok)) continue;
    bool human = false;
    for (const auto& [name, layer] : t->layers) human |= layer.human_count() > 0;
    if (!human) continue;
    for (const auto& c : annotate(*doc, lang).projection.conflicts) report.conflicts.emplace_back(id, c);
  }
  for (Tool tool : {Tool::tokenizer, Tool::supertagger}) {
    try {
      report.trained.push_back(bootstrap(tool, lang));
    } catch (const Error&) {
      // no gold data for this tool yet
    }
  }
  return report;
}

}  // namespace mb
