#include "mb/server.hpp"

#include <atomic>
#include <charconv>
#include <mutex>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mb/matcher.hpp"

namespace mb {

using nlohmann::json;

namespace {

struct HttpError : Error {
  HttpError(int status, const std::string& what) : Error(what), status(status) {}
  int status;
};

int to_int(const std::string& s, std::string_view what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw HttpError(400, "bad " + std::string(what) + " '" + s + "'");
  return v;
}

DocumentId doc_id(const httplib::Request& req) {
  DocumentId id{to_int(req.matches[1], "part"), to_int(req.matches[2], "doc")};
  if (id.part < 0 || id.part > 99 || id.doc < 0 || id.doc > 9999) throw HttpError(400, "bad document id");
  return id;
}

json layer_json(const Layer& l) {
  json prov = json::array();
  for (auto p : l.provenance) prov.push_back(to_string(p));
  return {{"values", l.values}, {"provenance", prov}, {"status", to_string(l.status())}};
}

std::vector<Clause> parse_clauses(const std::vector<std::string>& lines) {
  std::vector<Clause> out;
  for (const auto& l : lines) out.push_back(Clause::parse(l));
  return out;
}

/// Score of a translation's DRS against the English one, when both exist.
json match_json(const Document& doc, const Translation& t) {
  const Translation* en = doc.find(kPivotLanguage);
  if (t.lang == kPivotLanguage || !en || en->clauses.empty() || t.clauses.empty()) return nullptr;
  MatchResult r = match(parse_clauses(t.clauses), parse_clauses(en->clauses));
  return {{"precision", r.precision}, {"recall", r.recall}, {"f", r.f_score}, {"matched", r.matched}};
}

json translation_json(const Document& doc, const Translation& t) {
  json tokens = json::array();
  const bool has_tokens = t.layer(LayerName::tok) != nullptr;
  if (has_tokens)
    for (const auto& tok : t.tokens())
      tokens.push_back({{"text", tok.text}, {"start", tok.start}, {"end", tok.end}, {"sentence", tok.sentence}});
  json layers = json::object();
  for (LayerName name : kAllLayers) {
    const Layer* l = t.layer(name);
    layers[std::string(to_string(name))] = l ? layer_json(*l) : layer_json(Layer{});
  }
  return {{"id", doc.id.str()},       {"part", doc.id.part},          {"doc", doc.id.doc},
          {"lang", t.lang},           {"raw", t.raw},                 {"revision", t.revision},
          {"status", to_string(t.status())}, {"complete", t.complete()}, {"tokens", tokens},
          {"layers", layers},         {"alignment", t.alignment},     {"clauses", t.clauses},
          {"match", match_json(doc, t)}};
}

json inventory_json(const Inventory& inv) {
  json out = json::array();
  for (const auto& tag : inv.labels()) out.push_back({{"tag", tag}, {"description", inv.description(tag)}});
  return out;
}

json report_json(const BootstrapReport& r) {
  return {{"tool", to_string(r.tool)},         {"lang", r.lang},
          {"gold_translations", r.gold_translations}, {"gold_tokens", r.gold_tokens},
          {"old_accuracy", r.old_accuracy},    {"new_accuracy", r.new_accuracy},
          {"registered", r.registered}};
}

struct Job {
  std::string id;
  Tool tool;
  std::string lang;
  std::string state = "queued";  // queued, running, done, failed
  json report;
  std::string error;
};

}  // namespace

std::pair<std::string, int> parse_bind_address(std::string_view address) {
  auto colon = address.rfind(':');
  if (colon == std::string_view::npos || colon == 0) throw Error("bind address must be host:port");
  std::string port(address.substr(colon + 1));
  int p = 0;
  auto [end, ec] = std::from_chars(port.data(), port.data() + port.size(), p);
  if (ec != std::errc() || end != port.data() + port.size() || p < 0 || p > 65535)
    throw Error("bad port '" + port + "'");
  return {std::string(address.substr(0, colon)), p};
}

struct ApiServer::Impl {
  Pipeline& pipeline;
  httplib::Server http;
  std::thread listener;
  std::mutex jobs_mu;
  std::map<std::string, Job> jobs;
  std::vector<std::thread> workers;
  std::atomic<int> next_job{1};
  bool bound = false;

  explicit Impl(Pipeline& p) : pipeline(p) { routes(); }

  ~Impl() {
    http.stop();
    if (listener.joinable()) listener.join();
    for (auto& w : workers)
      if (w.joinable()) w.join();
  }

  template <typename F>
  httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        json body = f(req, res);
        if (!body.is_null()) res.set_content(body.dump(), "application/json");
      } catch (const HttpError& e) {
        res.status = e.status;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      } catch (const RevisionConflict& e) {
        res.status = 409;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      } catch (const json::exception& e) {
        res.status = 400;
        res.set_content(json{{"error", std::string("bad request body: ") + e.what()}}.dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      }
    };
  }

  Document load(const DocumentId& id) {
    auto doc = pipeline.corpus().get(id);
    if (!doc) throw HttpError(404, "no document " + id.str());
    return *doc;
  }

  const Translation& find(const Document& doc, const std::string& lang) {
    const Translation* t = doc.find(lang);
    if (!t) throw HttpError(404, "document " + doc.id.str() + " has no '" + lang + "' translation");
    return *t;
  }

  void routes() {
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"}});

    http.Get("/api/config", guarded([this](const httplib::Request&, httplib::Response&) -> json {
      const auto& res = pipeline.resources();
      json langs = pipeline.registry().languages();
      std::set<std::string> cats;
      for (const auto& lang : pipeline.registry().languages())
        if (auto m = pipeline.registry().get(lang); m && m->supertagger)
          cats.insert(m->supertagger->tags().begin(), m->supertagger->tags().end());
      json tools = json::array();
      for (Tool t : {Tool::tokenizer, Tool::semtagger, Tool::symboliser, Tool::supertagger, Tool::roles})
        tools.push_back(to_string(t));
      json layers = json::array();
      for (LayerName l : kAllLayers) layers.push_back(to_string(l));
      return {{"semtags", inventory_json(res.semtags)},
              {"roles", inventory_json(res.roles)},
              {"categories", cats},
              {"languages", langs},
              {"tools", tools},
              {"layers", layers},
              {"no_role", kNoRole},
              {"no_sense", kNoSense},
              {"no_antecedent", kNoAntecedent}};
    }));

    http.Get("/api/docs", guarded([this](const httplib::Request& req, httplib::Response&) -> json {
      std::optional<int> part;
      std::optional<Status> status;
      std::optional<std::string> lang;
      if (req.has_param("part") && !req.get_param_value("part").empty())
        part = to_int(req.get_param_value("part"), "part");
      if (req.has_param("status") && !req.get_param_value("status").empty())
        status = parse_status(req.get_param_value("status"));
      if (req.has_param("lang") && !req.get_param_value("lang").empty()) lang = req.get_param_value("lang");
      json out = json::array();
      for (const auto& id : pipeline.corpus().ids()) {
        if (part && id.part != *part) continue;
        auto doc = pipeline.corpus().get(id);
        if (!doc) continue;
        json translations = json::array();
        for (const auto& [l, t] : doc->translations) {
          if (lang && l != *lang) continue;
          if (status && t.status() != *status) continue;
          translations.push_back({{"lang", l},
                                  {"status", to_string(t.status())},
                                  {"revision", t.revision},
                                  {"tokens", t.layer(LayerName::tok) ? t.token_count() : 0},
                                  {"raw", t.raw}});
        }
        if (translations.empty()) continue;
        out.push_back({{"id", id.str()}, {"part", id.part}, {"doc", id.doc}, {"translations", translations}});
      }
      return {{"documents", out}};
    }));

    http.Get(R"(/api/doc/(\d+)/(\d+)/([A-Za-z_-]+))",
             guarded([this](const httplib::Request& req, httplib::Response&) -> json {
               Document doc = load(doc_id(req));
               return translation_json(doc, find(doc, req.matches[3]));
             }));

    http.Get(R"(/api/doc/(\d+)/(\d+)/([A-Za-z_-]+)/drs)",
             guarded([this](const httplib::Request& req, httplib::Response&) -> json {
               Document doc = load(doc_id(req));
               const Translation& t = find(doc, req.matches[3]);
               return {{"id", doc.id.str()},
                       {"lang", t.lang},
                       {"revision", t.revision},
                       {"clauses", t.clauses},
                       {"match", match_json(doc, t)}};
             }));

    http.Put(R"(/api/doc/(\d+)/(\d+)/([A-Za-z_-]+)/layer/([a-z]+))",
             guarded([this](const httplib::Request& req, httplib::Response&) -> json {
               const DocumentId id = doc_id(req);
               const std::string lang = req.matches[3];
               Document doc = load(id);
               const Translation& t = find(doc, lang);
               LayerName name;
               try {
                 name = parse_layer_name(req.matches[4].str());
               } catch (const Error& e) {
                 throw HttpError(404, e.what());
               }
               json body = json::parse(req.body);
               if (!body.contains("index") || !body.contains("value")) throw HttpError(400, "body needs index and value");
               const auto index = body.at("index").get<long long>();
               const auto value = body.at("value").get<std::string>();
               if (index < 0 || static_cast<std::size_t>(index) >= t.token_count())
                 throw HttpError(400, "token index " + std::to_string(index) + " out of range");
               validate_value(pipeline.resources(), name, value);
               std::optional<std::uint64_t> revision;
               if (body.contains("revision") && !body.at("revision").is_null())
                 revision = body.at("revision").get<std::uint64_t>();
               pipeline.corpus().correct_token(id, lang, name, static_cast<std::size_t>(index), value, revision);
               Document after = load(id);
               return translation_json(after, find(after, lang));
             }));

    http.Post(R"(/api/doc/(\d+)/(\d+)/reprocess)",
              guarded([this](const httplib::Request& req, httplib::Response&) -> json {
                const DocumentId id = doc_id(req);
                load(id);
                std::optional<std::string> lang;
                if (!req.body.empty()) {
                  json body = json::parse(req.body);
                  if (body.contains("lang")) lang = body.at("lang").get<std::string>();
                }
                std::vector<ProcessResult> results;
                if (lang)
                  results.push_back(pipeline.process(id, *lang));
                else
                  results = pipeline.process_all(id);
                json out = json::array();
                for (const auto& r : results)
                  out.push_back({{"lang", r.translation.lang},
                                 {"revision", r.translation.revision},
                                 {"status", to_string(r.translation.status())},
                                 {"holes", r.projection.holes.size()},
                                 {"conflicts", r.projection.conflicts.size()},
                                 {"warnings", r.warnings}});
                return {{"id", id.str()}, {"results", out}};
              }));

    http.Post(R"(/api/train/([a-z]+)/([A-Za-z_-]+))",
              guarded([this](const httplib::Request& req, httplib::Response& res) -> json {
                Tool tool;
                try {
                  tool = parse_tool(req.matches[1].str());
                } catch (const Error& e) {
                  throw HttpError(404, e.what());
                }
                Job job;
                job.id = std::to_string(next_job++);
                job.tool = tool;
                job.lang = req.matches[2];
                {
                  std::lock_guard g(jobs_mu);
                  jobs[job.id] = job;
                  workers.emplace_back([this, id = job.id, tool, lang = job.lang] { run_job(id, tool, lang); });
                }
                res.status = 202;
                return {{"id", job.id}, {"state", "queued"}};
              }));

    http.Get(R"(/api/jobs/(\d+))", guarded([this](const httplib::Request& req, httplib::Response&) -> json {
               std::lock_guard g(jobs_mu);
               auto it = jobs.find(req.matches[1]);
               if (it == jobs.end()) throw HttpError(404, "no job " + req.matches[1].str());
               const Job& j = it->second;
               json out = {{"id", j.id}, {"tool", to_string(j.tool)}, {"lang", j.lang}, {"state", j.state}};
               if (j.state == "done") out["report"] = j.report;
               if (j.state == "failed") out["error"] = j.error;
               return out;
             }));
  }

  void run_job(const std::string& id, Tool tool, const std::string& lang) {
    set_state(id, "running", nullptr, "");
    try {
      BootstrapReport r = pipeline.bootstrap(tool, lang);
      set_state(id, "done", report_json(r), "");
    } catch (const std::exception& e) {
      set_state(id, "failed", nullptr, e.what());
    }
  }

  void set_state(const std::string& id, const std::string& state, json report, const std::string& error) {
    std::lock_guard g(jobs_mu);
    Job& j = jobs.at(id);
    j.state = state;
    j.report = std::move(report);
    j.error = error;
  }
};

ApiServer::ApiServer(Pipeline& pipeline) : impl_(std::make_unique<Impl>(pipeline)) {}

ApiServer::~ApiServer() = default;

int ApiServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->http.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
  } else if (!impl_->http.bind_to_port(host, port)) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return bound;
}

void ApiServer::listen() {
  if (!impl_->bound) throw Error("server is not bound");
  impl_->http.listen_after_bind();
}

void ApiServer::start() {
  if (!impl_->bound) throw Error("server is not bound");
  impl_->listener = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
}

void ApiServer::stop() {
  impl_->http.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
}

}  // namespace mb
