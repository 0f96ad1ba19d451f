// One PASS/FAIL line per acceptance criterion; exit status 1 when any fails.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "mb/pipeline.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mb;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail << what;
    else detail << "; " << what;
    pass = false;
  }
};

std::vector<Clause> clauses_of(const Translation& t) {
  std::vector<Clause> out;
  for (const auto& c : t.clauses) out.push_back(Clause::parse(c));
  return out;
}

bool all_layers_complete(const Translation& t) {
  if (!t.complete()) return false;
  for (LayerName name : kAllLayers)
    if (!t.layer(name) || t.layer(name)->size() != t.token_count()) return false;
  return true;
}

// ---------------------------------------------------------------------------

void english_end_to_end(Outcome& out) {
  Corpus corpus;
  Pipeline pipeline(corpus);
  auto id = corpus.add_document(support::kNobelEn, {});
  auto r = pipeline.process(id, "en");
  const Translation& t = r.translation;
  out.require(all_layers_complete(t), "layers incomplete");
  out.require(well_formed(r.drs), "DRS not well formed");
  auto clauses = clauses_of(t);
  auto has = [&](auto pred) { return std::any_of(clauses.begin(), clauses.end(), pred); };
  out.require(has([](const Clause& c) { return c.op == "Named"; }), "no Named condition");
  std::string event;
  for (const auto& c : clauses)
    if (c.args.size() == 2 && c.args[0] == "\"v.01\"") event = c.args[1];
  out.require(!event.empty(), "no verb concept");
  out.require(has([&](const Clause& c) { return c.op == "Agent" && c.args[0] == event; }), "no Agent role");
  out.require(has([&](const Clause& c) { return c.op == "Theme" && c.args[0] == event; }), "no Theme role");
  out.require(has([](const Clause& c) { return is_comparison_op(c.op) && c.args.back() == "\"1866\""; }),
              "no comparison with 1866");
  out.require(match(clauses, clauses).f_score == 1.0, "self-score below 1");
  out.require(clauses_text(clauses) == read_file(support::kGoldenDir + "/nobel.en.clauses"), "differs from golden DRS");
}

void bijective_projection(Outcome& out) {
  Corpus corpus;
  Pipeline pipeline(corpus);
  auto id = corpus.add_document(support::kApplesEn, {{"it", support::kApplesIt}});
  corpus.update(id, [](Document& d) { d.translations.at("it").alignment = support::kApplesItAlignment; });
  auto en = pipeline.process(id, "en");
  auto it = pipeline.process(id, "it");
  out.require(it.projection.holes.empty(), std::to_string(it.projection.holes.size()) + " holes");
  out.require(all_layers_complete(it.translation), "Italian layers incomplete");
  auto m = match(clauses_of(it.translation), clauses_of(en.translation));
  out.require(m.f_score == 1.0, "f = " + std::to_string(m.f_score));
}

void crossing_projection(Outcome& out) {
  Corpus corpus;
  Pipeline pipeline(corpus);
  auto id = corpus.add_document(support::kNobelEn, {{"nl", support::kNobelNl}});
  corpus.update(id, [](Document& d) { d.translations.at("nl").alignment = support::kNobelNlAlignment; });
  auto en = pipeline.process(id, "en");
  auto nl = pipeline.process(id, "nl");
  std::set<int> cat_holes;
  for (const auto& h : nl.projection.holes)
    if (h.layer == LayerName::cat) cat_holes.insert(h.token);
  out.require(cat_holes.size() == nl.translation.token_count(), "cat layer was projected");
  out.require(all_layers_complete(nl.translation), "Dutch layers not filled");
  auto m = match(clauses_of(nl.translation), clauses_of(en.translation));
  out.require(m.f_score == 1.0, "f = " + std::to_string(m.f_score));
}

void symboliser_example(Outcome& out) {
  Corpus corpus;
  Pipeline pipeline(corpus);
  auto models = pipeline.registry().get("en");
  out.require(models != nullptr, "no English models");
  if (!models) return;
  auto s = symbolise(models->symbols, models->lexicon, "eight", "QUC");
  out.require(s.symbol == "8", "got '" + s.symbol + "'");
}

void oracle_equivalence(Outcome& out) {
  oracle::Rng rng(2024);
  int hmm_bad = 0, super_bad = 0, role_bad = 0, cky_bad = 0, match_bad = 0;

  TrigramHmm semtagger = train_hmm(oracle::random_tagged_corpus(rng, {"CON", "EPS", "PER", "QUC", "REL"}, 10, 60, 6));
  for (int i = 0; i < 200; ++i) {
    auto words = oracle::random_words(rng, 10, static_cast<std::size_t>(oracle::uniform(rng, 1, 6)));
    hmm_bad += semtagger.tag(words) != oracle::brute_force_hmm(semtagger, words);
  }
  TrigramHmm supertagger =
      train_hmm(oracle::random_tagged_corpus(rng, {"(S\\NP)/NP", "NP", "NP/N", "N", "PUNCT"}, 10, 60, 6));
  for (int i = 0; i < 200; ++i) {
    auto words = oracle::random_words(rng, 10, static_cast<std::size_t>(oracle::uniform(rng, 1, 6)));
    super_bad += supertagger.tag(words) != oracle::brute_force_hmm(supertagger, words);
  }
  ChainModel roles = train_role_labeler(oracle::random_role_corpus(rng, 80, 6),
                                        Inventory({{"Agent", ""}, {"Theme", ""}, {"Time", ""}}));
  for (int i = 0; i < 200; ++i) {
    auto tokens = oracle::random_role_tokens(rng, static_cast<std::size_t>(oracle::uniform(rng, 1, 6)));
    role_bad += roles.decode(tokens) != oracle::brute_force_chain(roles, tokens);
  }
  for (int i = 0; i < 100; ++i) {
    auto cands = oracle::random_candidates(rng, static_cast<std::size_t>(oracle::uniform(rng, 1, 5)));
    auto expected = oracle::best_complete(cands);
    auto got = parse(cands);
    if (expected)
      cky_bad += !(got.complete && got.fragments.size() == 1 && got.fragments[0].quality() == *expected);
    else
      cky_bad += got.complete;
  }
  for (int i = 0; i < 100; ++i) {
    auto a = oracle::random_clause_set(rng, 6);
    auto b = oracle::random_clause_set(rng, 6);
    match_bad += match(a, b).matched != oracle::brute_force_match(a, b);
  }
  out.require(hmm_bad == 0, std::to_string(hmm_bad) + " semtag mismatches");
  out.require(super_bad == 0, std::to_string(super_bad) + " supertag mismatches");
  out.require(role_bad == 0, std::to_string(role_bad) + " role mismatches");
  out.require(cky_bad == 0, std::to_string(cky_bad) + " CKY mismatches");
  out.require(match_bad == 0, std::to_string(match_bad) + " matcher mismatches");
}

void ibm1_properties(Outcome& out) {
  oracle::Rng rng(7);
  for (int corpus = 0; corpus < 10; ++corpus) {
    std::vector<SentencePair> bitext;
    for (int s = 0; s < 20; ++s) {
      SentencePair p;
      int n = oracle::uniform(rng, 1, 6);
      for (int i = 0; i < n; ++i) {
        int w = oracle::uniform(rng, 0, 9);
        p.source.push_back("e" + std::to_string(w));
        p.target.push_back("f" + std::to_string((w * 3 + oracle::uniform(rng, 0, 1)) % 10));
      }
      if (oracle::uniform(rng, 0, 1)) std::reverse(p.target.begin(), p.target.end());
      bitext.push_back(p);
    }
    for (bool use_null : {true, false}) {
      auto ll = train_ibm1(bitext, 5, use_null).log_likelihood();
      for (std::size_t k = 1; k < ll.size(); ++k)
        out.require(ll[k] >= ll[k - 1] - 1e-9, "likelihood decreased in bitext " + std::to_string(corpus));
    }
  }

  std::vector<SentencePair> copy;
  for (int s = 0; s < 50; ++s) {
    SentencePair p;
    int n = oracle::uniform(rng, 2, 8);
    for (int i = 0; i < n; ++i) p.source.push_back("w" + std::to_string(oracle::uniform(rng, 0, 30)));
    p.target = p.source;
    copy.push_back(p);
  }
  Ibm1Model fwd = train_ibm1(copy, 5), rev = train_ibm1(reversed(copy), 5);
  std::size_t identity = 0, total = 0;
  for (const auto& p : copy) {
    for (const auto& [i, j] : align(fwd, rev, p).links) identity += i == j;
    total += p.source.size();
  }
  const double rate = static_cast<double>(identity) / static_cast<double>(total);
  out.require(rate >= 0.95, "identity links " + std::to_string(rate));
}

std::vector<Clause> renamed(const std::vector<Clause>& clauses, const std::map<std::string, std::string>& m) {
  std::vector<Clause> out = clauses;
  for (auto& c : out) {
    if (auto it = m.find(c.box); it != m.end()) c.box = it->second;
    for (auto& a : c.args)
      if (auto it = m.find(a); it != m.end()) a = it->second;
  }
  return out;
}

void matcher_invariants(Outcome& out) {
  oracle::Rng rng(11);
  int self = 0, rename = 0, permute = 0, determinism = 0;
  for (int i = 0; i < 50; ++i) {
    Drs d = oracle::random_drs(rng);
    if (d.conditions.empty() && d.referents.empty()) d.referents.push_back("x1");
    auto a = to_clauses(d);
    auto b = to_clauses(oracle::random_drs(rng));
    self += match(a, a).f_score != 1.0;
    rename += std::abs(match(renamed(a, oracle::random_renaming(rng, a)), b).f_score - match(a, b).f_score) > 1e-12;
    auto shuffled = a;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    permute += std::abs(match(shuffled, b).f_score - match(a, b).f_score) > 1e-12;
    auto r1 = match(a, b), r2 = match(a, b);
    determinism += !(r1.matched == r2.matched && r1.mapping == r2.mapping);
  }
  out.require(self == 0, std::to_string(self) + " self-scores below 1");
  out.require(rename == 0, std::to_string(rename) + " renaming changes");
  out.require(permute == 0, std::to_string(permute) + " permutation changes");
  out.require(determinism == 0, std::to_string(determinism) + " nondeterministic runs");
}

/// Word-tag pairs where one ambiguous word is resolved by the previous tag.
std::vector<TaggedSentence> synthetic_tagged(oracle::Rng& rng, int sentences) {
  const std::vector<std::pair<std::string, std::string>> lexicon = {
      {"tom", "PER"}, {"anna", "PER"}, {"the", "DEF"}, {"a", "IND"}, {"ate", "EPS"}, {"saw", "EPS"},
      {"apple", "CON"}, {"dog", "CON"}, {"eight", "QUC"}, {"in", "REL"}, {".", "NIL"}};
  std::vector<TaggedSentence> out;
  for (int s = 0; s < sentences; ++s) {
    TaggedSentence ts;
    int n = oracle::uniform(rng, 3, 8);
    for (int i = 0; i < n; ++i) {
      if (!ts.tags.empty() && (ts.tags.back() == "DEF" || ts.tags.back() == "PER") && oracle::uniform(rng, 0, 2) == 0) {
        // "walk" is a noun after a determiner and a verb after a name
        ts.words.push_back("walk");
        ts.tags.push_back(ts.tags.back() == "DEF" ? "CON" : "EPS");
        continue;
      }
      const auto& [w, t] = oracle::pick(rng, lexicon);
      ts.words.push_back(w);
      ts.tags.push_back(t);
    }
    out.push_back(std::move(ts));
  }
  return out;
}

/// Roles determined by semantic tag and symbol, with no label noise.
std::vector<RoleSentence> synthetic_roles(oracle::Rng& rng, int sentences) {
  std::vector<RoleSentence> out;
  for (int s = 0; s < sentences; ++s) {
    RoleSentence r;
    r.tokens = oracle::random_role_tokens(rng, static_cast<std::size_t>(oracle::uniform(rng, 2, 8)));
    for (const auto& t : r.tokens) {
      std::string role = "NONE";
      if (t.semtag == "PER") role = t.symbol == "s0" ? "Theme" : "Agent";
      else if (t.semtag == "CON") role = "Theme";
      else if (t.semtag == "YOC") role = "Time";
      r.roles.push_back(role);
    }
    out.push_back(std::move(r));
  }
  return out;
}

void memorization(Outcome& out) {
  oracle::Rng rng(13);

  std::vector<std::pair<std::string, std::vector<CharLabel>>> texts;
  std::vector<std::vector<Token>> gold_tokens;
  for (int i = 0; i < 100; ++i) {
    auto [raw, tokens] = oracle::random_segmented(rng);
    texts.emplace_back(raw, labels_from_tokens(raw, tokens));
    gold_tokens.push_back(tokens);
  }
  TokenizerModel tokenizer = train_tokenizer(texts);
  std::size_t hit = 0, total = 0;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto predicted = tokenize(tokenizer, texts[i].first).tokens;
    for (const auto& t : gold_tokens[i]) hit += std::count(predicted.begin(), predicted.end(), t);
    total += gold_tokens[i].size();
  }
  const double tok_acc = static_cast<double>(hit) / static_cast<double>(total);

  auto tagged = synthetic_tagged(rng, 100);
  TrigramHmm hmm = train_hmm(tagged);
  hit = total = 0;
  for (const auto& s : tagged) {
    auto got = hmm.tag(s.words);
    for (std::size_t i = 0; i < got.size(); ++i) hit += got[i] == s.tags[i];
    total += got.size();
  }
  const double sem_acc = static_cast<double>(hit) / static_cast<double>(total);

  auto role_data = synthetic_roles(rng, 100);
  ChainModel roles = train_role_labeler(role_data, Inventory({{"Agent", ""}, {"Theme", ""}, {"Time", ""}}));
  hit = total = 0;
  for (const auto& s : role_data) {
    auto got = roles.decode(s.tokens);
    for (std::size_t i = 0; i < got.size(); ++i) hit += got[i] == s.roles[i];
    total += got.size();
  }
  const double role_acc = static_cast<double>(hit) / static_cast<double>(total);

  out.require(tok_acc >= 0.99, "tokenizer " + std::to_string(tok_acc));
  out.require(sem_acc >= 0.99, "semantic tagger " + std::to_string(sem_acc));
  out.require(role_acc >= 0.99, "role labeler " + std::to_string(role_acc));
}

/// Relative path -> contents for every file under `root`.
std::map<std::string, std::string> tree_bytes(const std::string& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).string()] = read_file(e.path().string());
  return out;
}

Status expected_rollup(const std::vector<Provenance>& flags) {
  auto humans = std::count(flags.begin(), flags.end(), Provenance::human);
  if (humans == 0) return Status::bronze;
  return static_cast<std::size_t>(humans) == flags.size() ? Status::gold : Status::silver;
}

void store_round_trip(Outcome& out) {
  support::TempDir dir;
  Corpus corpus;
  Pipeline pipeline(corpus);
  const std::vector<std::pair<std::string, std::string>> texts = {
      {support::kNobelEn, support::kNobelNl}, {support::kApplesEn, ""}, {"Tom slept.", ""}, {"Anna saw a dog.", ""}};
  for (std::size_t i = 0; i < texts.size(); ++i) {
    std::vector<std::pair<std::string, std::string>> tr;
    if (!texts[i].second.empty()) tr.emplace_back("nl", texts[i].second);
    auto id = corpus.add_document(texts[i].first, tr);
    pipeline.process_all(id);
    if (i == 1) corpus.correct_token(id, "en", LayerName::sym, 0, "tom");
    if (i == 2) {
      auto doc = corpus.get(id);
      for (LayerName name : kAllLayers) {
        const Layer* l = doc->find("en")->layer(name);
        corpus.set_layer(id, "en", name, l->values, std::vector<Provenance>(l->size(), Provenance::human), true);
      }
    }
  }
  for (Status tier : {Status::gold, Status::silver, Status::bronze}) {
    const std::string name(to_string(tier));
    for (const std::string suffix : {"", ".tar"}) {
      const std::string first = dir.str(name + "-a" + suffix), second = dir.str(name + "-b" + suffix);
      export_release(corpus, tier, first, "1.0");
      auto imported = import_release(first);
      export_release(*imported, tier, second, "1.0");
      if (suffix.empty()) {
        out.require(tree_bytes(first) == tree_bytes(second), name + " release trees differ");
      } else {
        out.require(read_file(first) == read_file(second), name + " tarballs differ");
      }
    }
  }

  oracle::Rng rng(17);
  int wrong = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<Provenance> flags(static_cast<std::size_t>(oracle::uniform(rng, 0, 10)));
    for (auto& f : flags) f = oracle::uniform(rng, 0, 1) ? Provenance::human : Provenance::machine;
    wrong += rollup(flags) != expected_rollup(flags);
  }
  out.require(wrong == 0, std::to_string(wrong) + " rollup mismatches");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, void (*)(Outcome&)>> criteria = {
      {"english-end-to-end", english_end_to_end},
      {"bijective-projection", bijective_projection},
      {"crossing-projection", crossing_projection},
      {"symboliser-example", symboliser_example},
      {"oracle-equivalence", oracle_equivalence},
      {"ibm1-properties", ibm1_properties},
      {"matcher-invariants", matcher_invariants},
      {"memorization-floors", memorization},
      {"store-round-trip", store_round_trip},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome out;
    try {
      check(out);
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (out.pass ? "PASS " : "FAIL ") << name;
    if (!out.pass) std::cout << ": " << out.detail.str();
    std::cout << std::endl;
    failures += !out.pass;
  }
  return failures == 0 ? 0 : 1;
}
