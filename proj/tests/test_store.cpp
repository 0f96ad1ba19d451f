#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "mb/store.hpp"
#include "support.hpp"

using namespace mb;

namespace {

Status expected_status(const std::vector<Provenance>& flags) {
  const auto humans = std::count(flags.begin(), flags.end(), Provenance::human);
  if (humans == 0) return Status::bronze;
  if (static_cast<std::size_t>(humans) == flags.size()) return Status::gold;
  return Status::silver;
}

DocumentId sample_document(Corpus& corpus, const std::string& en, const std::string& nl) {
  auto id = corpus.add_document(en, {{"nl", nl}});
  corpus.set_layer(id, "en", LayerName::tok, {encode_token({"Hi", 0, 2, 0}), encode_token({".", 2, 3, 0})},
                   {Provenance::machine, Provenance::machine});
  return id;
}

void fill_layers(Corpus& corpus, const DocumentId& id, const std::string& lang, Provenance p) {
  auto doc = corpus.get(id);
  const std::size_t n = doc->find(lang)->token_count();
  for (LayerName name : kTokenLayers)
    corpus.set_layer(id, lang, name, std::vector<std::string>(n, name == LayerName::cat ? "NP" : "v"),
                     std::vector<Provenance>(n, p), true);
}

std::string bytes(const std::string& path) { return read_file(path); }

}  // namespace

TEST_CASE("document ids render as part/doc and reject malformed text") {
  CHECK(DocumentId{7, 42}.str() == "07/0042");
  CHECK(DocumentId::parse("07/0042") == DocumentId{7, 42});
  CHECK(DocumentId::parse("7/42") == DocumentId{7, 42});
  CHECK_THROWS_AS(DocumentId::parse("07/x"), Error);
  CHECK_THROWS_AS(DocumentId::parse("100/0001"), Error);
  CHECK_THROWS_AS(DocumentId::parse("01-0001"), Error);
}

TEST_CASE("parts are a stable function of the English text and spread over all parts") {
  CHECK(part_for_text("Alfred Nobel invented dynamite in 1866.") ==
        part_for_text("Alfred Nobel invented dynamite in 1866."));
  std::set<int> parts;
  for (int i = 0; i < 2000; ++i) {
    int p = part_for_text("sentence number " + std::to_string(i));
    CHECK(p >= 0);
    CHECK(p < 100);
    parts.insert(p);
  }
  CHECK(parts.size() == 100);
}

TEST_CASE("adding a document stores every translation under a fresh id") {
  Corpus corpus;
  auto id = corpus.add_document(support::kNobelEn, {{"nl", support::kNobelNl}});
  auto doc = corpus.get(id);
  REQUIRE(doc);
  CHECK(doc->find("en")->raw == support::kNobelEn);
  CHECK(doc->find("nl")->raw == support::kNobelNl);
  CHECK(id.part == part_for_text(support::kNobelEn));
  auto second = corpus.add_document("Another text.", {});
  CHECK(second != id);
  CHECK(corpus.find_english(support::kNobelEn) == id);
  CHECK_THROWS_AS(corpus.add_translation(id, "nl", "dubbel"), Error);
}

TEST_CASE("status rollup follows the tier definitions on random flags") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Provenance> flags(static_cast<std::size_t>(rng() % 8));
    for (auto& f : flags) f = rng() % 2 ? Provenance::human : Provenance::machine;
    INFO("trial " << trial);
    CHECK(rollup(flags) == expected_status(flags));
  }
}

TEST_CASE("translation status aggregates its layers") {
  Corpus corpus;
  auto doc_id = sample_document(corpus, "Hi.", "Hoi.");
  fill_layers(corpus, doc_id, "en", Provenance::machine);
  CHECK(corpus.get(doc_id)->find("en")->status() == Status::bronze);
  corpus.correct_token(doc_id, "en", LayerName::sem, 0, "PER");
  CHECK(corpus.get(doc_id)->find("en")->status() == Status::silver);
  corpus.set_layer(doc_id, "en", LayerName::tok, corpus.get(doc_id)->find("en")->layer(LayerName::tok)->values,
                   {Provenance::human, Provenance::human});
  fill_layers(corpus, doc_id, "en", Provenance::human);
  CHECK(corpus.get(doc_id)->find("en")->status() == Status::gold);
}

TEST_CASE("human cells are protected and revisions detect stale writes") {
  Corpus corpus;
  auto id = sample_document(corpus, "Hi.", "Hoi.");
  fill_layers(corpus, id, "en", Provenance::machine);
  auto rev = corpus.get(id)->find("en")->revision;
  corpus.correct_token(id, "en", LayerName::sem, 1, "NIL", rev);
  CHECK(corpus.get(id)->find("en")->revision == rev + 1);
  CHECK_THROWS_AS(corpus.correct_token(id, "en", LayerName::sem, 0, "PER", rev), RevisionConflict);
  CHECK_THROWS_AS(corpus.correct_token(id, "en", LayerName::tok, 0, "x"), Error);
  CHECK_THROWS_AS(corpus.correct_token(id, "en", LayerName::sem, 9, "PER"), Error);
  CHECK_THROWS_AS(corpus.set_layer(id, "en", LayerName::sem, {"PER", "PER"}, {Provenance::machine, Provenance::machine}),
                  Error);
  const auto doc = corpus.get(id);
  const Layer* sem = doc->find("en")->layer(LayerName::sem);
  CHECK(sem->values[1] == "NIL");
  CHECK(sem->provenance[1] == Provenance::human);
  CHECK_THROWS_AS(corpus.set_layer(id, "en", LayerName::sem, {"PER"}, {Provenance::machine}), Error);
}

TEST_CASE("a bound corpus writes through and reloads identically") {
  support::TempDir dir;
  {
    Corpus corpus(dir.str("corpus"));
    auto id = sample_document(corpus, "Hi.", "Hoi.");
    fill_layers(corpus, id, "en", Provenance::machine);
    corpus.correct_token(id, "en", LayerName::sym, 0, "tab\there");
    corpus.update(id, [](Document& d) {
      d.translations.at("en").clauses = {"b1 REF x1", "b1 Named x1 \"hi\""};
      d.translations.at("nl").alignment = "0-0";
    });
  }
  auto reloaded = Corpus::load(dir.str("corpus"));
  auto id = *reloaded->find_english("Hi.");
  auto doc = reloaded->get(id);
  REQUIRE(doc);
  const Translation& en = *doc->find("en");
  CHECK(en.layer(LayerName::sym)->values[0] == "tab\there");
  CHECK(en.layer(LayerName::sym)->provenance[0] == Provenance::human);
  CHECK(en.clauses.size() == 2);
  CHECK(doc->find("nl")->alignment == "0-0");
  CHECK(doc->find("nl")->raw == "Hoi.");
  CHECK(en.revision == reloaded->get(id)->find("en")->revision);
}

TEST_CASE("layer files reject malformed rows") {
  CHECK_THROWS_AS(layer_from_tsv("0\tPER\n"), Error);
  CHECK_THROWS_AS(layer_from_tsv("1\tPER\tmachine\n"), Error);
  CHECK_THROWS_AS(layer_from_tsv("0\tPER\tmaybe\n"), Error);
  Layer l = layer_from_tsv("0\tPER\thuman\n1\t\tmachine\n");
  CHECK(l.values == std::vector<std::string>{"PER", ""});
  CHECK(layer_to_tsv(l) == "0\tPER\thuman\n1\t\tmachine\n");
}

TEST_CASE("releases carry exactly the requested tier and round trip byte for byte") {
  support::TempDir dir;
  Corpus corpus;
  for (int i = 0; i < 6; ++i) {
    std::string text = "Doc " + std::to_string(i) + ".";
    auto id = corpus.add_document(text, {{"nl", "Doc nl " + std::to_string(i) + "."}});
    corpus.set_layer(id, "en", LayerName::tok, {encode_token({"Doc", 0, 3, 0})},
                     {i % 3 == 0 ? Provenance::human : Provenance::machine});
    fill_layers(corpus, id, "en", i % 3 == 0 ? Provenance::human : Provenance::machine);
    if (i % 3 == 1) corpus.correct_token(id, "en", LayerName::sem, 0, "CON");
  }
  auto gold = make_release(corpus, Status::gold, "r1");
  for (const auto& d : gold.documents)
    for (const auto& [lang, t] : d.translations) CHECK(t.status() == Status::gold);
  CHECK(gold.stats.counts.at(Status::gold).at("en") == 2);
  auto silver = make_release(corpus, Status::silver, "r1");
  CHECK(silver.stats.counts.at(Status::silver).at("en") == 2);

  for (Status tier : {Status::gold, Status::silver, Status::bronze}) {
    const std::string first = dir.str(std::string(to_string(tier)) + "-1.tar");
    const std::string second = dir.str(std::string(to_string(tier)) + "-2.tar");
    export_release(corpus, tier, first, "r1");
    auto imported = import_release(first);
    export_release(*imported, tier, second, "r1");
    CHECK(bytes(first) == bytes(second));
  }

  const std::string tree = dir.str("tree");
  export_release(corpus, Status::gold, tree, "r1");
  CHECK(std::filesystem::exists(tree + "/stats.tsv"));
  auto imported = import_release(tree);
  CHECK(imported->size() == gold.documents.size());
}

TEST_CASE("release statistics use thousands separators") {
  CHECK(thousands(0) == "0");
  CHECK(thousands(999) == "999");
  CHECK(thousands(1000) == "1,000");
  CHECK(thousands(1234567) == "1,234,567");
  ReleaseStats s;
  s.release = "1.0.0";
  s.counts[Status::gold]["en"] = 1200;
  CHECK(stats_tsv(s) == "1.0.0\tGold\tEN\t1,200\n");
}
