#include <pybind11/pybind11.h>
#include <pybind11/iostream.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "creepdb/app/cli.hpp"
#include "creepdb/error.hpp"
#include "creepdb/formula/equation.hpp"
#include "creepdb/formula/expression.hpp"
#include "creepdb/formula/units.hpp"
#include "creepdb/models/catalog.hpp"
#include "creepdb/models/model.hpp"
#include "creepdb/pipeline/pipeline.hpp"
#include "creepdb/screening/metrics.hpp"
#include "creepdb/skills/backend.hpp"
#include "creepdb/store/store.hpp"
#include "creepdb/validator/validator.hpp"

namespace py = pybind11;
using namespace creepdb;
using nlohmann::json;

namespace {

store::RecordFilter filter_from_json(const std::string& text) {
  auto j = json::parse(text.empty() ? "{}" : text);
  store::RecordFilter f;
  for (const auto& [k, v] : j.items()) {
    if (v.is_null()) continue;
    if (k == "material") f.material = v.get<std::string>();
    else if (k == "category") f.category = v.get<std::string>();
    else if (k == "t_min_K") f.t_min_K = v.get<double>();
    else if (k == "t_max_K") f.t_max_K = v.get<double>();
    else if (k == "s_min_MPa") f.s_min_MPa = v.get<double>();
    else if (k == "s_max_MPa") f.s_max_MPa = v.get<double>();
    else if (k == "verdict") f.verdicts = v.get<std::set<std::string>>();
    else fail(ErrorCode::Precondition, "unknown filter field '" + k + "'");
  }
  f.check();
  return f;
}

std::string run_pipeline_json(const std::string& manifest, const std::string& db_path,
                              const std::optional<std::string>& config_path,
                              const std::optional<std::string>& backend) {
  auto config = pipeline::resolve_config(config_path);
  if (backend) config.backend = *backend;
  auto index = corpus::ingest_manifest(manifest);
  auto be = skills::make_backend(config.backend, config.backend_timeout_s);
  store::Store db(db_path);
  auto catalog = pipeline::load_catalog(config);
  return pipeline::run_pipeline(index, config, *be, db, catalog).to_json().dump();
}

}  // namespace

PYBIND11_MODULE(_creepdb, m) {
  m.doc() = "Native core of creepdb";

  static py::exception<Error> error_type(m, "NativeError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::tuple args = py::make_tuple(std::string(to_string(e.code())), e.detail());
      PyErr_SetObject(error_type.ptr(), args.ptr());
    }
  });

  m.def("render_formula", [](const std::string& text) { return formula::render(formula::parse_expression(text)); },
        py::arg("text"));
  m.def(
      "check_homogeneity",
      [](const std::string& equation, const std::vector<std::tuple<std::string, std::string, std::string>>& symbols) {
        std::vector<formula::SymbolBinding> bindings;
        for (const auto& [name, role, unit] : symbols)
          bindings.push_back(formula::SymbolBinding::make(name, formula::role_from_string(role), unit));
        return formula::check_homogeneity(formula::make_equation(equation, bindings)).to_json().dump();
      },
      py::arg("equation"), py::arg("symbols"));
  m.def(
      "standardize",
      [](double value, const std::string& unit) {
        auto q = formula::standardize(value, unit);
        return std::make_pair(q.value, q.unit);
      },
      py::arg("value"), py::arg("unit"));
  m.def("unit_table", [] { return formula::unit_table_json().dump(); });

  m.def("catalog", [] { return models::builtin_catalog().to_json().dump(); });
  m.def(
      "evaluate_model",
      [](const std::string& name, const std::map<std::string, double>& params,
         const std::map<std::string, double>& conditions, const std::vector<double>& times) {
        models::Values p(params.begin(), params.end()), c(conditions.begin(), conditions.end());
        return models::evaluate(models::builtin_catalog().at(name), p, c, times);
      },
      py::arg("name"), py::arg("params"), py::arg("conditions"), py::arg("times"));
  m.def(
      "fit_model",
      [](const std::string& name, const std::vector<double>& times, const std::vector<double>& strains,
         const std::map<std::string, double>& conditions, const std::map<std::string, double>& init,
         const std::map<std::string, double>& fixed) {
        models::Values c(conditions.begin(), conditions.end()), i(init.begin(), init.end()),
            f(fixed.begin(), fixed.end());
        auto r = models::fit_parameters(models::builtin_catalog().at(name), times, strains, c, i, f);
        return json{{"params", r.params}, {"fitted", r.fitted}, {"rss", r.rss},
                    {"converged", r.converged}, {"iterations", r.iterations}}
            .dump();
      },
      py::arg("name"), py::arg("times"), py::arg("strains"), py::arg("conditions"), py::arg("init"),
      py::arg("fixed") = std::map<std::string, double>{});
  m.def("r_squared", [](const std::vector<double>& obs, const std::vector<double>& pred) {
    return models::r_squared(obs, pred);
  });

  m.def(
      "screening_metrics",
      [](std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn) {
        screening::ConfusionCounts c;
        c.tp = tp;
        c.fp = fp;
        c.fn = fn;
        c.tn = tn;
        return screening::metrics_json(c).dump();
      },
      py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));

  m.def("validate_entry", [](const std::string& entry) {
    return validator::validate_entry(validator::CandidateEntry::from_json(json::parse(entry))).to_json().dump();
  });

  m.def("run_pipeline", &run_pipeline_json, py::arg("manifest"), py::arg("db"),
        py::arg("config") = std::nullopt, py::arg("backend") = std::nullopt,
        py::call_guard<py::gil_scoped_release>());

  py::class_<store::Store>(m, "Store")
      .def(py::init<const std::string&>(), py::arg("path"))
      .def("query",
           [](const store::Store& s, const std::string& filter) {
             json out = json::array();
             for (const auto& r : s.query(filter_from_json(filter))) out.push_back(r.to_json(false));
             return out.dump();
           })
      .def("record",
           [](const store::Store& s, std::int64_t id) -> std::optional<std::string> {
             auto r = s.record(id);
             if (!r) return std::nullopt;
             return r->to_json(true).dump();
           })
      .def("paper",
           [](const store::Store& s, const std::string& doi) -> std::optional<std::string> {
             auto p = s.paper(doi);
             if (!p) return std::nullopt;
             return p->to_json().dump();
           })
      .def("record_count", &store::Store::record_count)
      .def("export_csv", [](const store::Store& s, const std::string& filter) {
        return s.export_csv(filter_from_json(filter));
      })
      .def("export_data", [](const store::Store& s, const std::string& filter) {
        return s.export_data(filter_from_json(filter)).dump();
      })
      .def("stats", [](const store::Store& s, const std::string& filter) {
        return s.stats(filter_from_json(filter)).to_json().dump();
      })
      .def("review", [](store::Store& s, std::int64_t id, const std::string& action, const std::string& note) {
        return s.review(id, store::review_action_from_string(action), note).to_json(false).dump();
      });

  m.def(
      "cli_run", [](const std::vector<std::string>& args) { return app::cli_run(args); }, py::arg("args"),
      py::call_guard<py::scoped_ostream_redirect, py::scoped_estream_redirect>());
}
