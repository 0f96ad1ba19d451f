#include <iostream>

#include <CLI11.hpp>

#include "mb/matcher.hpp"
#include "mb/pipeline.hpp"
#include "mb/server.hpp"

namespace {

void print_translation(const mb::Translation& t) {
  std::cout << "# " << t.lang << " revision " << t.revision << " status " << mb::to_string(t.status()) << "\n";
  const auto tokens = t.tokens();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::cout << i << '\t' << tokens[i].text;
    for (mb::LayerName name : mb::kTokenLayers) {
      const mb::Layer* l = t.layer(name);
      std::cout << '\t' << (l && l->size() == tokens.size() && !l->values[i].empty() ? l->values[i] : "_");
    }
    std::cout << '\n';
  }
  for (const auto& c : t.clauses) std::cout << c << '\n';
}

void print_report(const mb::BootstrapReport& r) {
  std::cout << mb::to_string(r.tool) << '\t' << r.lang << "\tgold_translations=" << r.gold_translations
            << "\tgold_tokens=" << r.gold_tokens << "\told=" << r.old_accuracy << "\tnew=" << r.new_accuracy
            << '\t' << (r.registered ? "registered" : "kept previous model") << '\n';
}

std::vector<mb::Clause> read_clauses(const std::string& path) { return mb::parse_clause_lines(mb::read_file(path)); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel meaning bank engine"};
  app.require_subcommand(1);
  std::string corpus_dir = "corpus";
  mb::PipelineOptions options;
  bool no_fallback = false;
  app.add_option("--corpus", corpus_dir, "Corpus directory")->capture_default_str();
  app.add_option("--data", options.data_dir, "Inventories, templates and demo data")->capture_default_str();
  app.add_option("--models", options.models_dir, "Directory for trained models");
  app.add_flag("--no-rule-fallback", no_fallback, "Fail when a language has no tokenizer model");

  std::string id_text, lang;
  auto* process = app.add_subcommand("process", "Annotate a document and compose its DRS");
  process->add_option("id", id_text, "part/doc")->required();
  process->add_option("--lang", lang, "Only this translation");

  auto* project = app.add_subcommand("project", "Project English layers onto a translation");
  project->add_option("id", id_text, "part/doc")->required();
  project->add_option("--lang", lang)->required();

  std::string file_a, file_b;
  mb::MatchOptions match_options;
  auto* match = app.add_subcommand("match", "Score two clause files");
  match->add_option("a", file_a)->required()->check(CLI::ExistingFile);
  match->add_option("b", file_b)->required()->check(CLI::ExistingFile);
  match->add_option("--restarts", match_options.restarts)->capture_default_str();
  match->add_option("--seed", match_options.seed)->capture_default_str();

  std::string tool;
  auto* train = app.add_subcommand("train", "Retrain a tool on gold layers");
  train->add_option("tool", tool)->required();
  train->add_option("--lang", lang)->required();

  std::string tier = "gold", out_dir, release = "release";
  auto* export_cmd = app.add_subcommand("export", "Write a release of one tier");
  export_cmd->add_option("--tier", tier)->capture_default_str();
  export_cmd->add_option("--out", out_dir, "Directory, or a .tar path")->required();
  export_cmd->add_option("--name", release)->capture_default_str();

  std::string bind = "127.0.0.1:8080";
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--bind", bind)->capture_default_str();

  std::string bitext;
  auto* add_lang = app.add_subcommand("add-lang", "Import a bitext with English for a new language");
  add_lang->add_option("lang", lang)->required();
  add_lang->add_option("--bitext", bitext)->required()->check(CLI::ExistingFile);

  std::string english;
  std::vector<std::string> translations;
  auto* add = app.add_subcommand("add", "Add a document");
  add->add_option("english", english)->required();
  add->add_option("--translation", translations, "lang=text");

  CLI11_PARSE(app, argc, argv);
  options.rule_fallback = !no_fallback;

  try {
    auto corpus = mb::Corpus::load(corpus_dir);

    if (*match) {
      auto r = mb::match(read_clauses(file_a), read_clauses(file_b), match_options);
      std::cout << r.precision << ' ' << r.recall << ' ' << r.f_score << '\n';
      for (const auto& [a, b] : r.mapping) std::cout << a << ' ' << b << '\n';
      return 0;
    }
    if (*export_cmd) {
      auto bundle = mb::export_release(*corpus, mb::parse_status(tier), out_dir, release);
      std::cout << mb::format_release_table(bundle.stats);
      return 0;
    }
    if (*add) {
      std::vector<std::pair<std::string, std::string>> pairs;
      for (const auto& t : translations) {
        auto eq = t.find('=');
        if (eq == std::string::npos || eq == 0) throw mb::Error("translation must be lang=text");
        pairs.emplace_back(t.substr(0, eq), t.substr(eq + 1));
      }
      std::cout << corpus->add_document(english, pairs).str() << '\n';
      return 0;
    }

    mb::Pipeline pipeline(*corpus, options);
    if (*process) {
      auto id = mb::DocumentId::parse(id_text);
      std::vector<mb::ProcessResult> results;
      if (lang.empty())
        results = pipeline.process_all(id);
      else
        results.push_back(pipeline.process(id, lang));
      for (const auto& r : results) {
        for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
        print_translation(r.translation);
      }
    } else if (*project) {
      auto r = pipeline.process(mb::DocumentId::parse(id_text), lang);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      for (const auto& c : r.projection.conflicts)
        std::cerr << "conflict: " << mb::to_string(c.layer) << ' ' << c.token << ' ' << c.existing << " vs "
                  << c.projected << '\n';
      std::cout << mb::hole_report_tsv(r.projection);
    } else if (*train) {
      print_report(pipeline.bootstrap(mb::parse_tool(tool), lang));
    } else if (*add_lang) {
      auto r = pipeline.add_language(lang, mb::read_file(bitext));
      std::cout << "imported " << r.imported << " pairs; aligner trained on " << r.bitext_pairs << " sentence pairs\n";
      for (const auto& [id, c] : r.conflicts)
        std::cout << "conflict\t" << id.str() << '\t' << mb::to_string(c.layer) << '\t' << c.token << '\t'
                  << c.existing << '\t' << c.projected << '\n';
      for (const auto& t : r.trained) print_report(t);
    } else if (*serve) {
      auto [host, port] = mb::parse_bind_address(bind);
      mb::ApiServer server(pipeline);
      int bound = server.bind(host, port);
      std::cerr << "listening on " << host << ':' << bound << '\n';
      server.listen();
    }
  } catch (const std::exception& e) {
    std::cerr << "mb: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
