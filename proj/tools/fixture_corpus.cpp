#include "fixture_corpus.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "creepdb/digitizer/digitizer.hpp"
#include "creepdb/error.hpp"
#include "creepdb/models/catalog.hpp"

namespace creepdb::fixtures {

using nlohmann::json;
namespace dg = digitizer;
namespace fs = std::filesystem;

namespace {

constexpr dg::Rgb kBlue{31, 119, 180};
constexpr dg::Rgb kRed{214, 39, 40};
constexpr dg::Rgb kGreen{44, 160, 44};

std::string png_bytes(const dg::RasterImage& image) {
  auto tmp = fs::temp_directory_path() / ("creepdb_fixture_" + std::to_string(::getpid()) + ".png");
  dg::write_png(image, tmp.string());
  std::ifstream in(tmp, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  fs::remove(tmp);
  return bytes;
}

std::vector<dg::Point> sample(const models::ConstitutiveModel& model, const models::Values& params,
                              const models::Values& conditions, double t_end_s, double x_scale,
                              double y_scale, int n) {
  std::vector<double> times;
  for (int i = 0; i < n; ++i) times.push_back(t_end_s * i / (n - 1));
  auto strains = models::evaluate(model, params, conditions, times);
  std::vector<dg::Point> out;
  for (int i = 0; i < n; ++i) out.push_back({times[i] / x_scale, strains[i] / y_scale});
  return out;
}

json axis_json(const std::vector<dg::Anchor>& anchors, const std::string& unit) {
  json a = json::array();
  for (const auto& an : anchors) a.push_back({{"pixel", an.pixel}, {"value", an.value}});
  return {{"scale", "linear"}, {"unit", unit}, {"anchors", a}};
}

json symbols_of(const models::ConstitutiveModel& m) {
  json s = json::array();
  for (const auto& b : m.equation().bindings)
    s.push_back({{"name", b.name}, {"role", formula::to_string(b.role)}, {"unit", b.unit}});
  return s;
}

json param(const std::string& name, double value, const std::string& unit) {
  return {{"name", name}, {"value", {{"value", value}, {"unit", unit}}}};
}

std::string screening_reply(bool data, bool eq, const std::string& rationale) {
  return json{{"has_data", data}, {"has_equation", eq}, {"rationale", rationale}}.dump();
}

struct Doc {
  std::string id;
  json manifest;
  json replies;
};

}  // namespace

std::map<std::string, std::string> generate_fixture_corpus() {
  const auto& cat = models::builtin_catalog();
  std::map<std::string, std::string> files;
  std::vector<Doc> docs;

  auto add_page = [&](const std::string& id, int n, const std::string& text) {
    std::string rel = "pages/" + id + "_p" + std::to_string(n) + ".txt";
    files[rel] = text;
    return rel;
  };
  auto add_figure = [&](const std::string& id, const dg::SyntheticPlotSpec& spec) {
    auto plot = dg::render_synthetic_plot(spec);
    files["figures/" + id + "_fig1.png"] = png_bytes(plot.image);
    return plot;
  };
  auto manifest = [](const std::string& id, const std::string& doi, const std::string& title,
                     std::vector<std::string> authors, int year, std::vector<std::string> pages,
                     const std::string& caption) {
    json j{{"id", id}, {"doi", doi}, {"title", title}, {"authors", authors}, {"year", year}, {"pages", pages}};
    if (!caption.empty())
      j["figures"] = {{{"id", "fig1"}, {"image_path", "figures/" + id + "_fig1.png"}, {"caption", caption}}};
    return j;
  };

  // d1: martensitic steel, two stress levels in one figure; only 31.6 MPa is
  // the reported condition.
  {
    const auto& m = cat.at("norton_bailey");
    const double n = 3.0, mm = 0.35, A_h = 5.6e-8;
    const double A_s = A_h / std::pow(3600.0, mm);
    dg::SyntheticPlotSpec spec;
    spec.x = {0, 1000, dg::AxisScale::Linear, {0, 200, 400, 600, 800, 1000}};
    spec.y = {0, 10, dg::AxisScale::Linear, {0, 2, 4, 6, 8, 10}};
    spec.gridlines = true;
    for (auto [sigma, color] : {std::pair{52.7, kRed}, std::pair{31.6, kBlue}}) {
      char label[32];
      std::snprintf(label, sizeof label, "sigma = %.1f MPa", sigma);
      spec.series.push_back({label, color,
                             sample(m, {{"A", A_s}, {"n", n}, {"m", mm}}, {{"sigma", sigma}}, 1000 * 3600.0, 3600.0,
                                    0.01, 400)});
    }
    auto plot = add_figure("d1", spec);
    std::vector<std::string> pages{
        add_page("d1", 1,
                 "Creep behaviour of the martensitic stainless steel X46Cr13\n\n"
                 "Uniaxial tensile creep tests were carried out on X46Cr13 specimens at T = 600 C\n"
                 "under constant engineering stresses of 52.7 MPa and 31.6 MPa. Elongation was\n"
                 "recorded with a capacitive extensometer for up to 1000 h.\n"),
        add_page("d1", 2,
                 "Primary creep follows the time-hardening Norton-Bailey relation\n\n"
                 "    eps = A * sigma^n * t^m\n\n"
                 "with A = 5.6e-8 MPa^-n h^-m, n = 3 and m = 0.35 fitted to the 31.6 MPa test.\n"
                 "Figure 1 compares the measured strain-time curves at both stress levels.\n")};
    json ext{{"material", "X46Cr13"},
             {"category", "steel_iron"},
             {"temperature", "600 degC"},
             {"stress", "31.6 MPa"},
             {"equation", "eps = A*sigma^n*t^m"},
             {"model", "norton_bailey"},
             {"symbols", symbols_of(m)},
             {"params", {param("A", A_h, "MPa^-n*h^-m"), param("n", n, "1"), param("m", mm, "1")}},
             {"figure",
              {{"figure_id", "fig1"},
               {"x_axis", axis_json(plot.x_anchors, "h")},
               {"y_axis", axis_json(plot.y_anchors, "%")},
               {"series", {{{"label", "sigma = 52.7 MPa"}, {"color", "#d62728"}},
                           {{"label", "sigma = 31.6 MPa"}, {"color", "#1f77b4"}}}},
               {"target", "sigma = 31.6 MPa"}}},
             {"evidence", {"page 2: Norton-Bailey parameters"}}};
    json tool_call{{"tool_call", {{"name", "read_full_text"}, {"arguments", {{"doc_id", "d1"}, {"page", 2}}}}}};
    docs.push_back({"d1",
                    manifest("d1", "10.5555/creepdb.fixture.001", "Creep behaviour of X46Cr13 at 600 C",
                             {"K. Example", "L. Sample"}, 2019, pages,
                             "Creep strain versus time of X46Cr13 at 600 C for two stresses."),
                    {{"Domain Filter", {screening_reply(true, true, "creep curves and a Norton-Bailey law")}},
                     {"MultiModal Parser", {tool_call.dump(), ext.dump()}}}});
  }

  // d2: nickel superalloy, theta projection with rates given per hour.
  {
    const auto& m = cat.at("theta_projection");
    models::Values p{{"theta1", 0.01}, {"theta2", 0.036 / 3600}, {"theta3", 0.002}, {"theta4", 0.0072 / 3600}};
    dg::SyntheticPlotSpec spec;
    spec.x = {0, 300, dg::AxisScale::Linear, {0, 50, 100, 150, 200, 250, 300}};
    spec.y = {0, 3, dg::AxisScale::Linear, {0, 0.5, 1, 1.5, 2, 2.5, 3}};
    spec.series.push_back({"950 C / 300 MPa", kGreen, sample(m, p, {}, 300 * 3600.0, 3600.0, 0.01, 400)});
    auto plot = add_figure("d2", spec);
    std::vector<std::string> pages{
        add_page("d2", 1,
                 "Tertiary creep of the single-crystal superalloy CMSX-4\n\n"
                 "Tests at 950 C and 300 MPa ran to 300 h. The full curve is represented by the\n"
                 "theta projection eps = theta1*(1 - exp(-theta2*t)) + theta3*(exp(theta4*t) - 1)\n"
                 "with theta1 = 0.01, theta2 = 0.036 1/h, theta3 = 0.002 and theta4 = 0.0072 1/h.\n")};
    json ext{{"material", "CMSX-4"},
             {"category", "nickel_alloy"},
             {"temperature", "950 degC"},
             {"stress", "300 MPa"},
             {"equation", "eps = theta1*(1 - exp(-theta2*t)) + theta3*(exp(theta4*t) - 1)"},
             {"model", "theta_projection"},
             {"symbols", symbols_of(m)},
             {"params",
              {param("theta1", 0.01, "1"), param("theta2", 0.036, "1/h"), param("theta3", 0.002, "1"),
               param("theta4", 0.0072, "1/h")}},
             {"figure",
              {{"figure_id", "fig1"},
               {"x_axis", axis_json(plot.x_anchors, "h")},
               {"y_axis", axis_json(plot.y_anchors, "%")},
               {"series", {{{"label", "950 C / 300 MPa"}, {"color", "#2ca02c"}}}}}}};
    docs.push_back({"d2",
                    manifest("d2", "10.5555/creepdb.fixture.002", "Tertiary creep of CMSX-4 at 950 C",
                             {"M. Placeholder"}, 2021, pages, "Creep curve of CMSX-4 at 950 C and 300 MPa."),
                    {{"Domain Filter", {screening_reply(true, true, "measured curve and theta projection")}},
                     // The first answer is prose; the retry carries the schema feedback.
                     {"MultiModal Parser", {"The alloy is CMSX-4 and it creeps.", ext.dump()}}}});
  }

  // d3: metallic glass AMAG-183 whose deformation follows a Duffing oscillator.
  {
    const auto& m = cat.at("duffing");
    models::Values p{{"delta", 0.1743}, {"alpha", -1.1669}, {"beta", 1.7579}, {"gamma", 0.3036},
                     {"omega", 1.9885}, {"scale", 0.01},    {"offset", 0.0374}};
    auto truth = sample(m, p, {}, 41.19, 1.0, 0.01, 1200);
    double lo = 1e9, hi = -1e9;
    for (const auto& q : truth) {
      lo = std::min(lo, q.y);
      hi = std::max(hi, q.y);
    }
    double y0 = std::floor(lo * 2) / 2, y1 = std::ceil(hi * 2) / 2;
    std::vector<double> yticks;
    for (double v = y0; v <= y1 + 1e-9; v += 0.5) yticks.push_back(v);
    dg::SyntheticPlotSpec spec;
    spec.x = {0, 45, dg::AxisScale::Linear, {0, 10, 20, 30, 40}};
    spec.y = {y0, y1, dg::AxisScale::Linear, yticks};
    spec.series.push_back({"AMAG-183", kBlue, truth, 2.0});
    auto plot = add_figure("d3", spec);
    std::vector<std::string> pages{
        add_page("d3", 1,
                 "Oscillatory creep deformation of the amorphous alloy AMAG-183\n\n"
                 "Under a 1.2 GPa load at room temperature (25 C) the deformation-time response shows\n"
                 "damped oscillations. We model the normalised displacement x with the Duffing equation\n"
                 "x'' + delta x' + alpha x + beta x^3 = gamma cos(omega t), deformation = scale*x + offset,\n"
                 "delta = 0.1743 1/s, alpha = -1.1669 s^-2, beta = 1.7579 s^-2, gamma = 0.3036 s^-2,\n"
                 "omega = 1.9885 rad/s, scale = 0.01 and offset = 0.0374.\n")};
    json params = json::array();
    const std::map<std::string, std::string> units{{"delta", "1/s"}, {"alpha", "s^-2"}, {"beta", "s^-2"},
                                                   {"gamma", "s^-2"}, {"omega", "1/s"},  {"scale", "1"},
                                                   {"offset", "1"}};
    for (const auto& name : m.parameters()) params.push_back(param(name, p.at(name), units.at(name)));
    json ext{{"material", "AMAG-183"},
             {"category", "metallic_glass"},
             {"temperature", "25 degC"},
             {"stress", "1.2 GPa"},
             {"equation", m.equation().str()},
             {"model", "duffing"},
             {"symbols", symbols_of(m)},
             {"params", params},
             {"figure",
              {{"figure_id", "fig1"},
               {"x_axis", axis_json(plot.x_anchors, "s")},
               {"y_axis", axis_json(plot.y_anchors, "%")},
               {"series", {{{"label", "AMAG-183"}, {"color", "#1f77b4"}}}}}}};
    docs.push_back({"d3",
                    manifest("d3", "10.5555/creepdb.fixture.003", "Oscillatory creep of AMAG-183 metallic glass",
                             {"N. Hypothetical", "O. Instance"}, 2023, pages,
                             "Deformation-time trajectory of AMAG-183 with the Duffing reconstruction."),
                    {{"Domain Filter", {screening_reply(true, true, "deformation-time data and a Duffing model")}},
                     {"MultiModal Parser", {ext.dump()}}}});
  }

  // d4: polymer, logarithmic creep; the rate constant b is not reported.
  {
    const auto& m = cat.at("logarithmic");
    models::Values p{{"eps0", 0.005}, {"a", 0.004}, {"b", 1e-3}};
    dg::SyntheticPlotSpec spec;
    spec.x = {0, 100, dg::AxisScale::Linear, {0, 20, 40, 60, 80, 100}};
    spec.y = {0, 3, dg::AxisScale::Linear, {0, 1, 2, 3}};
    spec.series.push_back({"HDPE 5 MPa", kRed, sample(m, p, {}, 100 * 3600.0, 3600.0, 0.01, 400)});
    auto plot = add_figure("d4", spec);
    std::vector<std::string> pages{
        add_page("d4", 1,
                 "Long-term creep of high-density polyethylene pipe grade HDPE\n\n"
                 "At 23 C and 5 MPa the strain grows logarithmically, eps = eps0 + a*ln(1 + b*t), with an\n"
                 "instantaneous strain eps0 = 0.5 % and a = 0.4 %. The rate constant b is not reported.\n")};
    json ext{{"material", "HDPE"},
             {"category", "polymer"},
             {"temperature", "23 degC"},
             {"stress", "5 MPa"},
             {"equation", "eps = eps0 + a*ln(1 + b*t)"},
             {"model", "logarithmic"},
             {"symbols", symbols_of(m)},
             {"params", {param("eps0", 0.5, "%"), param("a", 0.4, "%")}},
             {"figure",
              {{"figure_id", "fig1"},
               {"x_axis", axis_json(plot.x_anchors, "h")},
               {"y_axis", axis_json(plot.y_anchors, "%")},
               {"series", {{{"label", "HDPE 5 MPa"}, {"color", "rgb(214, 39, 40)"}}}}}}};
    docs.push_back({"d4",
                    manifest("d4", "10.5555/creepdb.fixture.004", "Logarithmic creep of HDPE pipe grade",
                             {"P. Dummy"}, 2018, pages, "Creep strain of HDPE at 23 C and 5 MPa."),
                    // Relaxed syntax: bare keys and a trailing comma.
                    {{"Domain Filter", {"{has_data: true, has_equation: true, rationale: logarithmic creep law,}"}},
                     {"MultiModal Parser", {ext.dump()}}}});
  }

  // d5: polycrystalline ice, Norton law. The printed A is 25% below the value
  // that generated the curve, so the cross-modal check lands in review.
  {
    const auto& m = cat.at("norton");
    const double A_true = 6.8e8, A_text = 5.1e8, n = 3.0, Q = 78.0;
    dg::SyntheticPlotSpec spec;
    spec.x = {0, 500, dg::AxisScale::Linear, {0, 100, 200, 300, 400, 500}};
    spec.y = {0, 6, dg::AxisScale::Linear, {0, 1, 2, 3, 4, 5, 6}};
    spec.series.push_back({"-10 C, 0.5 MPa", kBlue,
                           sample(m, {{"A", A_true}, {"n", n}, {"Q", Q * 1000}}, {{"sigma", 0.5}, {"T", 263.15}},
                                  500 * 3600.0, 3600.0, 0.01, 200)});
    auto plot = add_figure("d5", spec);
    std::vector<std::string> pages{
        add_page("d5", 1,
                 "Secondary creep of polycrystalline ice\n\n"
                 "Ice samples were loaded at 0.5 MPa and -10 C. The steady strain rate obeys the\n"
                 "Norton law d(eps)/d(t) = A*sigma^n*exp(-Q/(R*T)) with A = 5.1e8 MPa^-3 s^-1, n = 3\n"
                 "and Q = 78 kJ/mol.\n")};
    json ext{{"material", "polycrystalline ice"},
             {"category", "ice"},
             {"temperature", "-10 degC"},
             {"stress", "0.5 MPa"},
             {"equation", "d(eps)/d(t) = A*sigma^n*exp(-Q/(R*T))"},
             {"model", "norton"},
             {"symbols", symbols_of(m)},
             {"params", {param("A", A_text, "MPa^-n*s^-1"), param("n", n, "1"), param("Q", Q, "kJ/mol")}},
             {"figure",
              {{"figure_id", "fig1"},
               {"x_axis", axis_json(plot.x_anchors, "h")},
               {"y_axis", axis_json(plot.y_anchors, "%")},
               {"series", {{{"label", "-10 C, 0.5 MPa"}, {"color", "#1f77b4"}}}}}}};
    docs.push_back({"d5",
                    manifest("d5", "10.5555/creepdb.fixture.005", "Secondary creep of polycrystalline ice",
                             {"Q. Standin"}, 2020, pages, "Creep strain of ice at -10 C and 0.5 MPa."),
                    {{"Domain Filter", {screening_reply(true, true, "ice creep test and Norton law")}},
                     {"MultiModal Parser", {ext.dump()}}}});
  }

  // d6: unrelated transport study.
  {
    std::vector<std::string> pages{
        add_page("d6", 1,
                 "Thermal conductivity of exfoliated graphene flakes\n\n"
                 "Raman thermometry gives in-plane conductivities between 1500 and 2500 W/(m K) at room\n"
                 "temperature. No mechanical loading was applied.\n")};
    docs.push_back({"d6",
                    manifest("d6", "10.5555/creepdb.fixture.006", "Thermal conductivity of graphene flakes",
                             {"R. Filler"}, 2017, pages, ""),
                    {{"Domain Filter",
                      {screening_reply(false, false, "thermal transport study without mechanical testing")}}}});
  }

  std::string manifest_text;
  json responses = json::object();
  std::string truth = "bundle_id,relevant\n";
  for (const auto& d : docs) {
    manifest_text += d.manifest.dump() + "\n";
    responses[d.id] = d.replies;
    truth += d.id + "," + (d.id == "d6" ? "0" : "1") + "\n";
  }
  responses["query:creep of steels and superalloys"] = {
      {"Bibliographic Navigator", {json{{"query", "creep AND (steel OR superalloy OR Ni-based)"}}.dump()}}};
  files["manifest.jsonl"] = manifest_text;
  files["replies.json"] = json{{"version", 1}, {"responses", responses}}.dump(2) + "\n";
  files["screening_truth.csv"] = truth;
  files["config.json"] = json{{"version", 1},
                              {"scripted_fixture", "replies.json"},
                              {"max_in_flight", 3},
                              {"max_retries", 2}}
                             .dump(2) +
                         "\n";
  return files;
}

void write_fixture_corpus(const std::string& dir) {
  for (const auto& [rel, content] : generate_fixture_corpus()) {
    fs::path p = fs::path(dir) / rel;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) fail(ErrorCode::ImageIo, "cannot write " + p.string());
    out << content;
  }
}

}  // namespace creepdb::fixtures
