#include "creepdb/app/cli.hpp"

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "creepdb/app/http.hpp"
#include "creepdb/corpus/expand.hpp"
#include "creepdb/error.hpp"
#include "creepdb/formula/units.hpp"
#include "creepdb/pipeline/pipeline.hpp"
#include "creepdb/screening/metrics.hpp"
#include "creepdb/skills/backend.hpp"

namespace creepdb::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Accepts a manifest file, a directory holding manifest.jsonl, or a path
/// whose ".jsonl" extension was left out.
std::string resolve_manifest(const std::string& path) {
  fs::path p(path);
  if (fs::is_directory(p)) return (p / "manifest.jsonl").string();
  if (!fs::exists(p) && fs::exists(path + ".jsonl")) return path + ".jsonl";
  return path;
}

std::string resolve_backend(const std::string& spec) {
  const std::string prefix = "scripted:";
  if (spec.rfind(prefix, 0) != 0) return spec;
  std::string path = spec.substr(prefix.size());
  if (!fs::exists(path) && fs::exists(path + ".json")) path += ".json";
  return prefix + path;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Precondition, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::Precondition, "cannot write " + path);
  f << content;
}

struct FilterFlags {
  std::string material, category;
  std::optional<double> t_min, t_max, s_min, s_max;
  std::vector<std::string> verdicts;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--material", material, "case-insensitive material substring");
    cmd->add_option("--category", category, "material category");
    cmd->add_option("--t-min-K", t_min, "minimum temperature (K)");
    cmd->add_option("--t-max-K", t_max, "maximum temperature (K)");
    cmd->add_option("--s-min-MPa", s_min, "minimum stress (MPa)");
    cmd->add_option("--s-max-MPa", s_max, "maximum stress (MPa)");
    cmd->add_option("--verdict", verdicts, "verdict (repeatable)");
  }

  store::RecordFilter filter() const {
    QueryParams p;
    if (!material.empty()) p.emplace("material", material);
    if (!category.empty()) p.emplace("category", category);
    auto num = [&](const char* k, const std::optional<double>& v) {
      if (v) p.emplace(k, format_number(*v));
    };
    num("t_min_K", t_min);
    num("t_max_K", t_max);
    num("s_min_MPa", s_min);
    num("s_max_MPa", s_max);
    for (const auto& v : verdicts) p.emplace("verdict", v);
    return filter_from_params(p);
  }

  static std::string format_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  }
};

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Creep literature mining: ingest, screen, extract, validate and serve records"};
  app.name("creepdb");
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::string config_path;
  app.add_option("--config", config_path, "pipeline configuration file (else $CREEPDB_CONFIG)");

  std::string corpus, backend_spec, db_path = "creepdb.sqlite", query, out_path, doc, entry_path;
  bool strict = false, as_json = false, expand = false, no_screen = false, no_store = false;
  std::optional<std::size_t> max_in_flight;
  FilterFlags filters;

  auto corpus_opt = [&](CLI::App* c, bool required) {
    auto* o = c->add_option("--corpus", corpus, "manifest file or corpus directory");
    if (required) o->required();
  };
  auto backend_opt = [&](CLI::App* c) {
    c->add_option("--backend", backend_spec, "echo, scripted:<replies.json> or an http(s) URL");
  };

  auto* ingest = app.add_subcommand("ingest", "load a manifest and list its documents");
  corpus_opt(ingest, true);
  ingest->add_flag("--json", as_json, "print JSON");

  auto* search = app.add_subcommand("search", "boolean search over the corpus");
  corpus_opt(search, true);
  search->add_option("--query", query, "boolean query, or natural language with --expand")->required();
  search->add_flag("--expand", expand, "expand a natural-language query through the backend");
  backend_opt(search);

  auto* screen = app.add_subcommand("screen", "screen every document, writing a decisions CSV");
  corpus_opt(screen, true);
  backend_opt(screen);
  screen->add_option("--out", out_path, "decisions CSV (default stdout)");
  screen->add_flag("--strict", strict, "exit 1 if any document fails");

  auto* extract = app.add_subcommand("extract", "extract one document into a candidate entry");
  corpus_opt(extract, true);
  backend_opt(extract);
  extract->add_option("--doc", doc, "document id")->required();

  auto* validate = app.add_subcommand("validate", "validate a candidate entry");
  validate->add_option("--entry", entry_path, "candidate entry JSON file");
  corpus_opt(validate, false);
  backend_opt(validate);
  validate->add_option("--doc", doc, "document id to extract and validate");

  auto* run = app.add_subcommand("run", "run the full pipeline into a database");
  corpus_opt(run, true);
  backend_opt(run);
  run->add_option("--db", db_path, "SQLite database path");
  run->add_option("--query", query, "natural-language collection query");
  run->add_option("--max-in-flight", max_in_flight, "documents processed concurrently");
  run->add_flag("--no-screen", no_screen, "skip screening");
  run->add_flag("--no-store", no_store, "dry run: validate without storing");
  run->add_flag("--strict", strict, "exit 1 if any document fails");
  run->add_flag("--json", as_json, "print the report as JSON");
  run->add_option("--report", out_path, "also write the JSON report to this file");

  std::string decisions_path, truth_path;
  auto* eval = app.add_subcommand("eval", "screening metrics against a truth table");
  eval->add_option("--decisions", decisions_path, "decisions CSV")->required();
  eval->add_option("--truth", truth_path, "truth CSV")->required();
  eval->add_flag("--json", as_json, "print JSON");

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "serve the record API");
  serve->add_option("--db", db_path, "SQLite database path");
  serve->add_option("--host", host, "listen address");
  serve->add_option("--port", port, "listen port (0 picks one)");

  std::string format = "csv", export_dir;
  auto* exp = app.add_subcommand("export", "export records");
  exp->add_option("--db", db_path, "SQLite database path");
  exp->add_option("--format", format, "csv or data")->check(CLI::IsMember({"csv", "data"}));
  exp->add_option("--out", out_path, "output file (default stdout)");
  exp->add_option("--dir", export_dir, "write records.csv plus one curve CSV per record here");
  filters.add_to(exp);

  auto* stats = app.add_subcommand("stats", "category shares and condition histograms");
  stats->add_option("--db", db_path, "SQLite database path");
  filters.add_to(stats);

  auto* units = app.add_subcommand("units", "print the unit vocabulary table");
  auto* catalog = app.add_subcommand("catalog", "print the model catalog");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    std::optional<std::string> cfg_path;
    if (!config_path.empty()) cfg_path = config_path;
    auto config = pipeline::resolve_config(cfg_path);
    if (!backend_spec.empty()) config.backend = resolve_backend(backend_spec);
    auto make_backend = [&] { return skills::make_backend(config.backend, config.backend_timeout_s); };
    auto load_index = [&] { return corpus::ingest_manifest(resolve_manifest(corpus)); };

    if (*ingest) {
      auto index = load_index();
      if (as_json) {
        json docs = json::array();
        for (const auto& [id, e] : index.entries())
          docs.push_back({{"id", id}, {"doi", e.doi}, {"title", e.title},
                          {"pages", e.bundle->pages.size()}, {"figures", e.bundle->figures.size()}});
        out << json{{"documents", docs}}.dump(2) << "\n";
      } else {
        out << index.size() << " documents\n";
        for (const auto& [id, e] : index.entries()) out << id << "\t" << e.doi << "\t" << e.title << "\n";
      }
      return kExitOk;
    }

    if (*search) {
      auto index = load_index();
      corpus::BooleanQuery q = corpus::parse_query("x");
      if (expand) {
        auto backend = make_backend();
        auto personas = skills::default_personas(config.max_retries, config.instructions);
        q = corpus::expand_query(query, *backend, personas.navigator, config.lenient_query);
      } else {
        q = corpus::parse_query(query);
      }
      out << "query: " << q.str() << "\n";
      for (const auto& id : corpus::search_index(index, q)) out << id << "\n";
      return kExitOk;
    }

    if (*screen) {
      auto index = load_index();
      auto backend = make_backend();
      auto catalog_models = pipeline::load_catalog(config);
      pipeline::PipelineContext ctx(index, config, *backend, nullptr, catalog_models);
      std::vector<screening::ScreeningDecision> decisions;
      bool failed = false;
      for (const auto& id : index.ids()) {
        try {
          decisions.push_back(pipeline::screen_document(ctx, id));
        } catch (const Error& e) {
          err << id << ": " << e.what() << "\n";
          failed = true;
        }
      }
      write_output(out_path, screening::decisions_to_csv(decisions), out);
      return failed && strict ? kExitDocumentFailure : kExitOk;
    }

    auto extract_one = [&](pipeline::PipelineContext& ctx) { return pipeline::extract_candidate(ctx, doc); };

    if (*extract) {
      auto index = load_index();
      auto backend = make_backend();
      auto catalog_models = pipeline::load_catalog(config);
      pipeline::PipelineContext ctx(index, config, *backend, nullptr, catalog_models);
      out << extract_one(ctx).to_json().dump(2) << "\n";
      return kExitOk;
    }

    if (*validate) {
      validator::CandidateEntry entry;
      if (!entry_path.empty()) {
        entry = validator::CandidateEntry::from_json(json::parse(read_file(entry_path)));
      } else if (!corpus.empty() && !doc.empty()) {
        auto index = load_index();
        auto backend = make_backend();
        auto catalog_models = pipeline::load_catalog(config);
        pipeline::PipelineContext ctx(index, config, *backend, nullptr, catalog_models);
        entry = extract_one(ctx);
      } else {
        err << "validate needs --entry, or --corpus with --doc\n";
        return kExitUsage;
      }
      out << validator::validate_entry(entry, config.thresholds).to_json().dump(2) << "\n";
      return kExitOk;
    }

    if (*run) {
      if (!query.empty()) config.query = query;
      if (max_in_flight) config.max_in_flight = *max_in_flight;
      if (no_screen) config.screen_enabled = false;
      if (no_store) config.store_enabled = false;
      config.check();
      auto index = load_index();
      auto backend = make_backend();
      auto catalog_models = pipeline::load_catalog(config);
      store::Store db(db_path);
      auto report = pipeline::run_pipeline(index, config, *backend, db, catalog_models);
      if (as_json)
        out << report.to_json().dump(2) << "\n";
      else
        out << report.summary();
      if (!out_path.empty()) write_output(out_path, report.to_json().dump(2) + "\n", out);
      bool failed = std::any_of(report.traces.begin(), report.traces.end(),
                                [](const auto& t) { return t.terminal == "failed"; });
      return failed && strict ? kExitDocumentFailure : kExitOk;
    }

    if (*eval) {
      auto c = screening::confusion(screening::load_decisions_csv(decisions_path),
                                    screening::load_truth_csv(truth_path));
      if (as_json)
        out << screening::metrics_json(c).dump(2) << "\n";
      else
        out << screening::metrics_text(c);
      return kExitOk;
    }

    if (*serve) {
      store::Store db(db_path);
      HttpServer server(db);
      int bound = server.bind(host, port);
      out << "serving " << db_path << " on http://" << host << ":" << bound << "\n" << std::flush;
      g_server = &server;
      auto prev_int = std::signal(SIGINT, on_signal);
      auto prev_term = std::signal(SIGTERM, on_signal);
      server.listen();
      std::signal(SIGINT, prev_int);
      std::signal(SIGTERM, prev_term);
      g_server = nullptr;
      return kExitOk;
    }

    if (*exp) {
      if (!fs::exists(db_path)) fail(ErrorCode::StoreUnavailable, "no database at " + db_path);
      store::Store db(db_path);
      auto filter = filters.filter();
      if (!export_dir.empty()) {
        db.export_csv_files(filter, export_dir);
        return kExitOk;
      }
      if (format == "csv")
        write_output(out_path, db.export_csv(filter), out);
      else
        write_output(out_path, db.export_data(filter).dump(2) + "\n", out);
      return kExitOk;
    }

    if (*stats) {
      if (!fs::exists(db_path)) fail(ErrorCode::StoreUnavailable, "no database at " + db_path);
      store::Store db(db_path);
      out << db.stats(filters.filter()).to_json().dump(2) << "\n";
      return kExitOk;
    }

    if (*units) {
      out << formula::unit_table_json().dump(2) << "\n";
      return kExitOk;
    }

    if (*catalog) {
      out << pipeline::load_catalog(config).to_json().dump(2) << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "creepdb: " << e.what() << "\n";
    return kExitFatal;
  } catch (const std::exception& e) {
    err << "creepdb: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitUsage;
}

int cli_run(const std::vector<std::string>& args) { return cli_run(args, std::cout, std::cerr); }

}  // namespace creepdb::app
