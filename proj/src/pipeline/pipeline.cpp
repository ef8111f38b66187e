#include "creepdb/pipeline/pipeline.hpp"

#include <atomic>
#include <cstdio>
#include <thread>

#include "creepdb/corpus/expand.hpp"
#include "creepdb/digitizer/digitizer.hpp"
#include "creepdb/error.hpp"
#include "creepdb/formula/units.hpp"
#include "creepdb/screening/screen.hpp"
#include "creepdb/text.hpp"

namespace creepdb::pipeline {

using nlohmann::json;
namespace tool = skills::tool;

// ---------------------------------------------------------------------------
// Report

json DocumentTrace::to_json() const {
  json ev = json::array();
  for (const auto& e : events) ev.push_back({{"stage", e.stage}, {"outcome", e.outcome}, {"detail", e.detail}});
  json j{{"bundle_id", bundle_id}, {"doi", doi}, {"terminal", terminal}, {"events", ev}};
  if (!error_code.empty()) j["error"] = error_code;
  j["record_id"] = record_id ? json(*record_id) : json(nullptr);
  return j;
}

bool PipelineReport::funnel_holds() const {
  return stored <= validated_valid && validated_valid <= extracted && extracted <= screened_pass &&
         screened_pass <= collected;
}

json PipelineReport::to_json() const {
  json traces_json = json::array();
  for (const auto& t : traces) traces_json.push_back(t.to_json());
  json tools = json::object();
  for (const auto& [skill, names] : executed_tools) tools[skill] = names;
  return {{"counts",
           {{"collected", collected},
            {"screened_pass", screened_pass},
            {"screened_fail", screened_fail},
            {"extracted", extracted},
            {"validated_valid", validated_valid},
            {"validated_flagged", validated_flagged},
            {"validated_rejected", validated_rejected},
            {"stored", stored}}},
          {"traces", traces_json},
          {"executed_tools", tools},
          {"duration_s", duration_s}};
}

std::string PipelineReport::summary() const {
  std::string out;
  auto line = [&](const char* name, std::size_t v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-20s %zu\n", name, v);
    out += buf;
  };
  line("collected", collected);
  line("screened_pass", screened_pass);
  line("screened_fail", screened_fail);
  line("extracted", extracted);
  line("validated_valid", validated_valid);
  line("validated_flagged", validated_flagged);
  line("validated_rejected", validated_rejected);
  line("stored", stored);
  for (const auto& t : traces) {
    out += "  " + t.bundle_id + "  " + t.terminal;
    if (!t.error_code.empty()) out += " (" + t.error_code + ")";
    if (t.record_id) out += " record " + std::to_string(*t.record_id);
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Candidate construction

namespace {

double canonical_value(const json& nwu) {
  return formula::standardize(nwu.at("value").get<double>(), nwu.at("unit").get<std::string>()).value;
}

std::string unit_or_one(const std::string& u) { return u.empty() ? "1" : u; }

bool contains_ci(const std::string& hay, const std::string& needle) {
  return !needle.empty() && ascii_lower(hay).find(ascii_lower(needle)) != std::string::npos;
}

}  // namespace

json digitize_figure(const corpus::DocumentBundle& bundle, const json& figure, bool monotone, int tolerance,
                     std::size_t min_pixels) {
  namespace dg = digitizer;
  const std::string figure_id = figure.at("figure_id").get<std::string>();
  const auto* asset = bundle.figure(figure_id);
  if (!asset) fail(ErrorCode::NotFound, "bundle " + bundle.id + " has no figure " + figure_id);

  auto anchors = [](const json& axis) {
    std::vector<dg::Anchor> out;
    for (const auto& a : axis.at("anchors")) out.push_back({a.at("pixel").get<double>(), a.at("value").get<double>()});
    return out;
  };
  const auto& xa = figure.at("x_axis");
  const auto& ya = figure.at("y_axis");
  auto cal = dg::calibrate_axes(anchors(xa), dg::axis_scale_from_string(xa.at("scale").get<std::string>()),
                                anchors(ya), dg::axis_scale_from_string(ya.at("scale").get<std::string>()));

  std::vector<dg::SeriesKey> keys;
  std::vector<std::string> labels;
  for (const auto& s : figure.at("series")) {
    keys.push_back({s.at("label").get<std::string>(), dg::parse_color(s.at("color").get<std::string>())});
    labels.push_back(keys.back().label);
  }
  dg::ExtractOptions options;
  options.tolerance = tolerance;
  options.min_pixels = min_pixels;
  // Stroke pixels beyond the lowest anchors would map to negative time.
  {
    auto xs = anchors(xa), ys = anchors(ya);
    auto px = [](const std::vector<dg::Anchor>& v, bool want_min) {
      double best = v.front().pixel;
      for (const auto& a : v) best = want_min ? std::min(best, a.pixel) : std::max(best, a.pixel);
      return static_cast<int>(std::lround(best));
    };
    options.region = dg::PixelBox{px(xs, true), 0, asset->image.width() - 1, px(ys, false)};
  }
  auto traces = dg::extract_series(asset->image, cal, keys, options);

  const dg::SeriesTrace* chosen = nullptr;
  if (figure.contains("target") && figure["target"].is_string()) {
    chosen = &dg::select_target_series(traces, labels, figure["target"].get<std::string>());
  } else {
    if (traces.size() != 1)
      fail(ErrorCode::AmbiguousTarget, "figure " + figure_id + " has several series and no target condition");
    chosen = &traces.front();
  }

  dg::SeriesTrace trace = *chosen;
  std::size_t flags = 0;
  if (monotone) {
    auto [cleaned, fl] = dg::enforce_monotonicity(trace, dg::default_monotonicity_tolerance(cal));
    trace = std::move(cleaned);
    flags = fl.size();
  }

  const std::string xu = unit_or_one(xa.at("unit").get<std::string>());
  const std::string yu = unit_or_one(ya.at("unit").get<std::string>());
  std::vector<double> times, strains;
  for (const auto& p : trace.points) {
    times.push_back(formula::standardize(p.x, xu).value);
    strains.push_back(formula::standardize(p.y, yu).value);
  }
  return {{"figure_id", figure_id}, {"series_key", trace.series_key},  {"quality", trace.quality},
          {"calibration", cal.to_json()}, {"x_unit", xu},            {"y_unit", yu},
          {"monotonicity_flags", flags}, {"times_s", times},         {"strains", strains}};
}

validator::CandidateEntry build_candidate(const corpus::DocumentBundle& bundle, const json& ext,
                                          const models::Catalog& catalog, const json& digitized) {
  validator::CandidateEntry e;
  e.bundle_id = bundle.id;
  e.doi = bundle.doi;
  e.material = ext.at("material").get<std::string>();
  e.category = ext.at("category").get<std::string>();
  e.temperature_K = canonical_value(ext.at("temperature"));
  e.stress_MPa = canonical_value(ext.at("stress"));

  if (ext.contains("model")) {
    if (const auto* m = catalog.find(ext["model"].get<std::string>())) e.model = *m;
  }
  if (ext.contains("equation"))
    e.equation = ext["equation"].get<std::string>();
  else if (e.model)
    e.equation = e.model->equation().str();

  for (const auto& s : ext.value("symbols", json::array())) {
    try {
      e.symbols.push_back(formula::SymbolBinding::make(s.at("name").get<std::string>(),
                                                       formula::role_from_string(s.at("role").get<std::string>()),
                                                       unit_or_one(s.at("unit").get<std::string>())));
    } catch (const Error&) {
      // An unknown unit leaves the symbol unbound; the integrity leg reports it.
    }
  }

  // Dimensionless values first: they may be exponents inside other units.
  std::map<std::string, double> exponents;
  const auto params = ext.value("params", json::array());
  for (const auto& p : params) {
    const auto& v = p.at("value");
    if (formula::unit_dimension(unit_or_one(v.at("unit").get<std::string>())).dimensionless())
      exponents[p.at("name").get<std::string>()] = v.at("value").get<double>();
  }
  for (const auto& p : params) {
    const auto& v = p.at("value");
    validator::TextParam tp;
    tp.name = p.at("name").get<std::string>();
    tp.value = v.at("value").get<double>();
    tp.unit = unit_or_one(v.at("unit").get<std::string>());
    tp.canonical = formula::standardize(tp.value, tp.unit, exponents).value;
    e.text_params.push_back(tp);
  }

  if (!digitized.is_null()) {
    validator::CreepCurve c;
    c.times = digitized.at("times_s").get<std::vector<double>>();
    c.strains = digitized.at("strains").get<std::vector<double>>();
    c.monotonicity_flags = digitized.value("monotonicity_flags", std::size_t{0});
    c.source = {{"figure_id", digitized.at("figure_id")},
                {"series_key", digitized.at("series_key")},
                {"quality", digitized.at("quality")},
                {"calibration", digitized.at("calibration")}};
    e.curve = std::move(c);
    e.figure_id = digitized.at("figure_id").get<std::string>();
  }

  for (const auto& ev : ext.value("evidence", json::array())) e.text_locations.push_back(ev.get<std::string>());
  for (std::size_t i = 0; i < bundle.pages.size(); ++i)
    if (contains_ci(bundle.pages[i], e.material)) e.text_locations.push_back("page " + std::to_string(i + 1));
  return e;
}

store::PaperRow paper_of(const corpus::DocumentBundle& bundle) {
  return {bundle.doi, bundle.title, bundle.authors, bundle.year, bundle.source_path};
}

store::CreepRecord make_record(const validator::CandidateEntry& entry, const json& report) {
  store::CreepRecord r;
  r.doi = entry.doi;
  r.material = entry.material;
  r.category = entry.category;
  r.temperature_K = entry.temperature_K;
  r.stress_MPa = entry.stress_MPa;
  r.verdict = report.at("label").get<std::string>();
  r.figure_id = entry.figure_id;
  r.text_locations = entry.text_locations;
  r.report = report;
  r.report["bundle_id"] = entry.bundle_id;

  auto unit_for = [&](const std::string& name, const std::string& fallback) {
    if (entry.model)
      if (const auto* b = entry.model->equation().find(name)) return b->unit;
    return fallback;
  };
  if (entry.model) {
    r.model_name = entry.model->name();
    r.model = entry.model->to_json();
  } else {
    r.model_name = "custom";
    json syms = json::array();
    for (const auto& s : entry.symbols)
      syms.push_back({{"name", s.name}, {"role", formula::to_string(s.role)}, {"unit", s.unit}});
    r.model = {{"equation", entry.equation ? json(*entry.equation) : json(nullptr)}, {"symbols", syms}};
  }

  const auto& cm = report.at("cross_modal");
  if (cm.is_object()) {
    r.params_source = cm.at("params_source").get<std::string>();
    for (const auto& [name, value] : cm.at("params").items())
      r.params.push_back({name, value.get<double>(), unit_for(name, "")});
    if (!cm.at("r2").is_null()) r.r2 = cm.at("r2").get<double>();
  } else {
    r.params_source = "text";
    std::map<std::string, store::RecordParam> sorted;
    for (const auto& p : entry.text_params)
      sorted[p.name] = {p.name, p.canonical,
                        unit_for(p.name, formula::standardize(p.value, p.unit).unit)};
    for (auto& [_, p] : sorted) r.params.push_back(p);
  }
  if (entry.curve)
    for (std::size_t i = 0; i < entry.curve->size(); ++i)
      r.curve.push_back({entry.curve->times[i], entry.curve->strains[i]});
  return r;
}

// ---------------------------------------------------------------------------
// Context and stages

PipelineContext::PipelineContext(const corpus::CorpusIndex& index, const PipelineConfig& config,
                                 skills::ReasoningBackend& backend, store::Store* store,
                                 const models::Catalog& catalog, skills::ExecutionLog* log)
    : index_(index),
      config_(config),
      backend_(backend),
      store_(store),
      catalog_(catalog),
      personas_(skills::default_personas(config.max_retries, config.instructions)),
      log_(log ? log : &own_log_) {
  config.check();
  tools_.add(tool::kCorpusSearch, [this](const json& args) {
    auto q = corpus::parse_query(args.at("query").get<std::string>());
    return json{{"ids", corpus::search_index(index_, q)}};
  });
  tools_.add(tool::kReadFullText, [this](const json& args) {
    const auto& b = index_.bundle(args.at("doc_id").get<std::string>());
    if (args.contains("page")) {
      auto page = args["page"].get<std::size_t>();
      require(page >= 1 && page <= b.pages.size(), "page out of range");
      return json{{"text", b.pages[page - 1]}};
    }
    return json{{"text", b.full_text()}};
  });
  tools_.add(tool::kDigitizeFigure, [this](const json& args) {
    const auto& b = index_.bundle(args.at("doc_id").get<std::string>());
    return digitize_figure(b, args.at("figure"), args.value("monotone", true), config_.digitizer_tolerance,
                           config_.digitizer_min_pixels);
  });
  tools_.add(tool::kPhysicsValidation, [this](const json& args) {
    auto entry = validator::CandidateEntry::from_json(args.at("entry"));
    return validator::validate_entry(entry, config_.thresholds).to_json();
  });
  tools_.add(tool::kStoreInsert, [this](const json& args) {
    require(store_ != nullptr, "no store attached to this run");
    store_->ensure_paper(store::PaperRow::from_json(args.at("paper")));
    auto id = store_->insert_record(store::CreepRecord::from_json(args.at("record")));
    return json{{"record_id", id}};
  });
  for (const auto* s : {&personas_.navigator, &personas_.filter, &personas_.parser, &personas_.guardrail,
                        &personas_.serializer})
    skills::check_tools_registered(*s, tools_);
}

std::vector<std::string> collect(const PipelineContext& ctx) {
  const auto& cfg = ctx.config();
  if (!cfg.query) return ctx.index().ids();
  const auto& nav = ctx.personas().navigator;
  auto q = corpus::expand_query(*cfg.query, ctx.backend(), nav, cfg.lenient_query, &ctx.tools(), &ctx.log());
  auto found = skills::run_scoped_tool(nav, "query:" + *cfg.query, tool::kCorpusSearch, {{"query", q.str()}},
                                       ctx.tools(), &ctx.log());
  return found.at("ids").get<std::vector<std::string>>();
}

screening::ScreeningDecision screen_document(const PipelineContext& ctx, const std::string& id) {
  return screening::screen(ctx.index().bundle(id), ctx.backend(), ctx.personas().filter, &ctx.tools(), &ctx.log());
}

validator::CandidateEntry extract_candidate(const PipelineContext& ctx, const std::string& id) {
  const auto& bundle = ctx.index().bundle(id);
  const auto& parser = ctx.personas().parser;
  json figures = json::array();
  for (const auto& f : bundle.figures)
    figures.push_back({{"figure_id", f.figure_id},
                       {"caption", f.caption},
                       {"width", f.image.width()},
                       {"height", f.image.height()}});
  json context{{"doc_id", id}, {"title", bundle.title}, {"text", bundle.full_text()}, {"figures", figures}};
  auto outcome = skills::invoke_skill(parser, id, context, ctx.backend(), &ctx.tools(), &ctx.log());
  const auto& ext = outcome.value;

  json digitized = nullptr;
  if (ext.contains("figure")) {
    bool monotone = true;
    if (ext.contains("model"))
      if (const auto* m = ctx.catalog().find(ext["model"].get<std::string>()))
        monotone = m->kind() != models::ModelKind::Ode;
    digitized = skills::run_scoped_tool(parser, id, tool::kDigitizeFigure,
                                        {{"doc_id", id}, {"figure", ext["figure"]}, {"monotone", monotone}},
                                        ctx.tools(), &ctx.log());
  }
  return build_candidate(bundle, ext, ctx.catalog(), digitized);
}

json validate_candidate(const PipelineContext& ctx, const validator::CandidateEntry& entry) {
  return skills::run_scoped_tool(ctx.personas().guardrail, entry.bundle_id, tool::kPhysicsValidation,
                                 {{"entry", entry.to_json()}}, ctx.tools(), &ctx.log());
}

models::Catalog load_catalog(const PipelineConfig& config) {
  if (config.catalog_path) return models::Catalog::load(*config.catalog_path);
  return models::builtin_catalog();
}

// ---------------------------------------------------------------------------
// Run

namespace {

struct DocState {
  DocumentTrace trace;
  bool screened_pass = false;
  std::optional<validator::CandidateEntry> entry;
  json report;
  std::string verdict;  // Valid, Valid-TextOnly, Flagged, Rejected
};

void fail_doc(DocState& st, const std::string& stage, const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  if (err && err->code() == ErrorCode::StoreUnavailable) throw;
  st.trace.terminal = "failed";
  st.trace.error_code = err ? std::string(to_string(err->code())) : "Internal";
  st.trace.events.push_back({stage, "error", e.what()});
}

void process_document(const PipelineContext& ctx, DocState& st) {
  const std::string id = st.trace.bundle_id;
  try {
    if (ctx.config().screen_enabled) {
      auto d = screen_document(ctx, id);
      st.screened_pass = d.pass();
      st.trace.events.push_back({"screening", d.pass() ? "pass" : "fail", d.rationale()});
      if (!d.pass()) {
        st.trace.terminal = "rejected-at-screening";
        return;
      }
    } else {
      st.screened_pass = true;
      st.trace.events.push_back({"screening", "pass", "screening disabled"});
    }
  } catch (const std::exception& e) {
    fail_doc(st, "screening", e);
    return;
  }
  try {
    st.entry = extract_candidate(ctx, id);
    st.trace.events.push_back(
        {"extraction", "pass",
         st.entry->curve ? "curve with " + std::to_string(st.entry->curve->size()) + " points" : "text only"});
  } catch (const std::exception& e) {
    fail_doc(st, "extraction", e);
    return;
  }
  try {
    st.report = validate_candidate(ctx, *st.entry);
    st.verdict = st.report.at("label").get<std::string>();
    std::string detail;
    for (const auto& r : st.report.at("reasons")) detail += (detail.empty() ? "" : ", ") + r.get<std::string>();
    const auto& cm = st.report.at("cross_modal");
    if (cm.is_object() && !cm.at("r2").is_null()) {
      detail += (detail.empty() ? "" : "; ") + std::string("r2=") + format_double(cm.at("r2").get<double>());
    }
    st.trace.events.push_back({"validation", st.verdict, detail});
  } catch (const std::exception& e) {
    st.entry.reset();
    fail_doc(st, "validation", e);
  }
}

}  // namespace

PipelineReport run_pipeline(const corpus::CorpusIndex& index, const PipelineConfig& config,
                            skills::ReasoningBackend& backend, store::Store& store,
                            const models::Catalog& catalog, skills::ExecutionLog* log) {
  auto start = std::chrono::steady_clock::now();
  PipelineContext ctx(index, config, backend, &store, catalog, log);
  PipelineReport report;

  std::vector<std::string> ids = collect(ctx);
  report.collected = ids.size();
  std::vector<DocState> states(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    states[i].trace.bundle_id = ids[i];
    states[i].trace.doi = index.bundle(ids[i]).doi;
    states[i].trace.events.push_back({"collection", "pass", config.query ? "matched query" : "all documents"});
  }

  // Stages 2-4 run concurrently; a worker error other than a per-document
  // failure is re-thrown after the pool drains.
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < states.size(); i = next++) {
      try {
        process_document(ctx, states[i]);
      } catch (...) {
        std::lock_guard lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };
  std::size_t n_workers = std::min(config.max_in_flight, std::max<std::size_t>(states.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (fatal) std::rethrow_exception(fatal);

  // Stage 5 in collection order so record ids are reproducible.
  const auto& serializer = ctx.personas().serializer;
  for (auto& st : states) {
    if (st.screened_pass) ++report.screened_pass;
    if (!st.screened_pass && st.trace.terminal == "rejected-at-screening") ++report.screened_fail;
    if (!st.entry) {
      report.traces.push_back(std::move(st.trace));
      continue;
    }
    ++report.extracted;
    if (st.verdict == "Rejected") {
      ++report.validated_rejected;
      st.trace.terminal = "rejected-at-validation";
      if (config.store_enabled) {
        store::RejectedEntry rej{0, st.entry->bundle_id, st.entry->doi, "validation",
                                 st.report.at("reasons").get<std::vector<std::string>>(),
                                 {{"entry", st.entry->to_json()}, {"report", st.report}}};
        store.insert_rejected(rej);
      }
      report.traces.push_back(std::move(st.trace));
      continue;
    }
    bool valid = st.verdict != "Flagged";
    ++(valid ? report.validated_valid : report.validated_flagged);
    if (!config.store_enabled) {
      st.trace.terminal = "not-stored";
      st.trace.events.push_back({"storage", "skipped", "storage disabled"});
      report.traces.push_back(std::move(st.trace));
      continue;
    }
    try {
      auto rec = make_record(*st.entry, st.report);
      json args{{"paper", paper_of(index.bundle(st.trace.bundle_id)).to_json()}, {"record", rec.to_json()}};
      auto out = skills::run_scoped_tool(serializer, st.trace.bundle_id, tool::kStoreInsert, args, ctx.tools(),
                                         &ctx.log());
      st.trace.record_id = out.at("record_id").get<std::int64_t>();
      st.trace.events.push_back({"storage", "pass", "record " + std::to_string(*st.trace.record_id)});
      if (valid) {
        ++report.stored;
        st.trace.terminal = "stored";
      } else {
        st.trace.terminal = "flagged";
      }
    } catch (const std::exception& e) {
      fail_doc(st, "storage", e);
    }
    report.traces.push_back(std::move(st.trace));
  }

  report.executed_tools = ctx.log().executed_by_skill();
  report.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace creepdb::pipeline
