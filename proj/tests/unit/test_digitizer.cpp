#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "creepdb/error.hpp"
#include "support/synthetic.hpp"

using namespace creepdb;
using namespace creepdb::digitizer;
using testsupport::calibration_of;
using testsupport::keys_of;
using testsupport::options_for;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Precondition;
}

SyntheticSeries curve(std::string label, Rgb color, double level) {
  SyntheticSeries s;
  s.label = std::move(label);
  s.color = color;
  for (int i = 0; i <= 200; ++i) {
    double t = 10.0 * i;
    s.truth.push_back({t, level * std::pow(t / 2000.0, 0.4)});
  }
  return s;
}

SyntheticPlotSpec two_stress_plot() {
  SyntheticPlotSpec spec;
  spec.x = {0.0, 2000.0, AxisScale::Linear, {}};
  spec.y = {0.0, 0.05, AxisScale::Linear, {}};
  spec.series = {curve("52.7 MPa", {214, 39, 40}, 0.04), curve("31.6 MPa", {31, 119, 180}, 0.02)};
  spec.gridlines = true;
  return spec;
}

}  // namespace

TEST_CASE("calibration examples") {
  auto x = calibrate_axis({{100, 0.0}, {900, 1000.0}}, AxisScale::Linear);
  CHECK(x.to_data(500) == doctest::Approx(500.0));
  auto y = calibrate_axis({{900, 1.0}, {100, 100.0}}, AxisScale::Log10);
  CHECK(y.to_data(500) == doctest::Approx(10.0));
  auto cal = calibrate_axes({{100, 0.0}, {900, 1000.0}}, AxisScale::Linear, {{900, 1.0}, {100, 100.0}},
                            AxisScale::Log10);
  auto p = pixel_to_data(cal, 500, 500);
  CHECK(p.x == doctest::Approx(500.0));
  CHECK(p.y == doctest::Approx(10.0));
  CHECK(code_of([] { calibrate_axis({{100, 0.0}, {100, 10.0}}, AxisScale::Linear); }) ==
        ErrorCode::DegenerateAnchors);
  CHECK(code_of([] { calibrate_axis({{100, 0.0}}, AxisScale::Linear); }) == ErrorCode::DegenerateAnchors);
  CHECK(code_of([] { calibrate_axis({{100, 0.0}, {200, 10.0}}, AxisScale::Log10); }) ==
        ErrorCode::NonPositiveLogAnchor);
  CHECK(code_of([] { calibrate_axis({{100, 0.0}, {200, 10.0}, {300, 5.0}}, AxisScale::Linear); }) ==
        ErrorCode::DegenerateAnchors);
  for (double r : x.residuals) CHECK(std::abs(r) < 1e-9);
}

TEST_CASE("calibration is invertible over the plot interior") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto spec = testsupport::random_plot(1000 + trial, false);
    auto rendered = render_synthetic_plot(spec);
    auto cal = calibration_of(spec, rendered);
    for (int i = 0; i < 200; ++i) {
      double px = spec.plot.left + u(rng) * (spec.plot.right - spec.plot.left);
      double py = spec.plot.top + u(rng) * (spec.plot.bottom - spec.plot.top);
      auto d = pixel_to_data(cal, px, py);
      auto back = data_to_pixel(cal, d.x, d.y);
      CHECK(std::abs(back.x - px) < 0.5);
      CHECK(std::abs(back.y - py) < 0.5);
    }
  }
}

TEST_CASE("renderer examples") {
  SyntheticPlotSpec one;
  one.x = {0.0, 2000.0, AxisScale::Linear, {}};
  one.y = {0.0, 0.05, AxisScale::Linear, {}};
  one.series = {curve("a", {31, 119, 180}, 0.03)};
  auto r = render_synthetic_plot(one);
  std::size_t count = 0;
  for (int y = 0; y < r.image.height(); ++y)
    for (int x = 0; x < r.image.width(); ++x)
      if (r.image.at(x, y) == one.series[0].color) {
        ++count;
        CHECK(x > one.plot.left);
        CHECK(x <= one.plot.right);
        CHECK(y >= one.plot.top);
        CHECK(y < one.plot.bottom);
      }
  CHECK(count > 0);

  auto two = two_stress_plot();
  auto r2 = render_synthetic_plot(two);
  std::set<int> owners;
  for (int y = 0; y < r2.image.height(); ++y)
    for (int x = 0; x < r2.image.width(); ++x) {
      Rgb c = r2.image.at(x, y);
      bool a = channel_distance(c, two.series[0].color) <= 30;
      bool b = channel_distance(c, two.series[1].color) <= 30;
      CHECK_FALSE((a && b));
      if (a || b) owners.insert(r2.owner_at(x, y));
    }
  CHECK(owners == std::set<int>{0, 1});

  SyntheticPlotSpec logy = one;
  logy.y = {1e-4, 1e-1, AxisScale::Log10, {}};
  for (auto& p : logy.series[0].truth) p.y = 1e-3 + p.y;
  auto r3 = render_synthetic_plot(logy);
  REQUIRE(r3.y_anchors.size() == 4);
  double gap = r3.y_anchors[0].pixel - r3.y_anchors[1].pixel;
  for (std::size_t i = 1; i + 1 < r3.y_anchors.size(); ++i)
    CHECK(std::abs((r3.y_anchors[i].pixel - r3.y_anchors[i + 1].pixel) - gap) <= 1.0);

  auto bad = one;
  bad.series.push_back(curve("b", {35, 120, 175}, 0.02));
  CHECK(code_of([&] { render_synthetic_plot(bad); }) == ErrorCode::Precondition);
}

TEST_CASE("single-series round trip stays within 1% everywhere") {
  SyntheticPlotSpec spec;
  spec.x = {0.0, 2000.0, AxisScale::Linear, {}};
  spec.y = {0.0, 0.05, AxisScale::Linear, {}};
  spec.series = {curve("a", {31, 119, 180}, 0.03)};
  auto r = render_synthetic_plot(spec);
  auto traces = extract_series(r.image, calibration_of(spec, r), keys_of(spec), options_for(spec));
  REQUIRE(traces.size() == 1);
  CHECK(traces[0].quality > 0.9);
  CHECK(testsupport::max_relative_error(traces[0], spec.series[0].truth, spec) < 0.01);
}

TEST_CASE("round trip over random plots") {
  for (bool jitter : {false, true}) {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      auto spec = testsupport::random_plot(seed, jitter);
      auto r = render_synthetic_plot(spec);
      auto traces = extract_series(r.image, calibration_of(spec, r), keys_of(spec), options_for(spec));
      for (std::size_t k = 0; k < traces.size(); ++k) {
        CAPTURE(seed);
        CAPTURE(k);
        // Series hidden behind later ones may be partially lost; single-series
        // plots must meet the bound outright.
        if (spec.series.size() == 1)
          CHECK(testsupport::mean_relative_error(traces[k], spec.series[k].truth, spec) <
                (jitter ? 0.02 : 0.01));
        for (const auto& px : traces[k].pixel_points) CHECK(r.owner_at(px.x, px.y) == int(k));
      }
    }
  }
}

TEST_CASE("two-stress plot: the target series is isolated") {
  auto spec = two_stress_plot();
  auto r = render_synthetic_plot(spec);
  auto traces = extract_series(r.image, calibration_of(spec, r), keys_of(spec), options_for(spec));
  const auto& target = select_target_series(traces, {"52.7 MPa", "31.6 MPa"}, "σ = 31.6 MPa");
  CHECK(target.series_key == "31.6 MPa");
  for (const auto& px : target.pixel_points) CHECK(r.owner_at(px.x, px.y) == 1);
  CHECK(testsupport::max_relative_error(target, spec.series[1].truth, spec) < 0.01);
  CHECK(testsupport::mean_relative_error(target, spec.series[0].truth, spec) > 0.1);
}

TEST_CASE("missing series key") {
  auto spec = two_stress_plot();
  auto r = render_synthetic_plot(spec);
  CHECK(code_of([&] {
          extract_series(r.image, calibration_of(spec, r), {{"green", {44, 160, 44}}}, options_for(spec));
        }) == ErrorCode::SeriesNotFound);
}

TEST_CASE("select_target_series") {
  std::vector<SeriesTrace> two(2);
  two[0].series_key = "a";
  two[1].series_key = "b";
  CHECK(select_target_series(two, {"52.7 MPa", "31.6 MPa"}, "31.6 MPa").series_key == "b");
  std::vector<SeriesTrace> one(1);
  one[0].series_key = "hot";
  CHECK(select_target_series(one, {"600 C"}, "873.15 K").series_key == "hot");
  CHECK(code_of([&] { select_target_series(two, {"10 MPa", "10 MPa"}, "10 MPa"); }) ==
        ErrorCode::AmbiguousTarget);
  CHECK(code_of([&] { select_target_series(two, {"10 MPa", "20 MPa"}, "30 MPa"); }) ==
        ErrorCode::AmbiguousTarget);
  CHECK(select_target_series(two, {"1 ksi", "20 MPa"}, "6.894757293 MPa").series_key == "a");
}

TEST_CASE("enforce_monotonicity") {
  SeriesTrace t;
  t.points = {{0, 0.10}, {1, 0.05}, {2, 0.20}};
  auto [clean, flags] = enforce_monotonicity(t, 0.01);
  CHECK(clean.points == std::vector<Point>{{0, 0.10}, {2, 0.20}});
  CHECK(flags.size() == 1);
  CHECK(flags[0].index == 1);

  SeriesTrace mono;
  mono.points = {{0, 0.0}, {1, 0.1}, {2, 0.1}, {3, 0.3}};
  auto [same, none] = enforce_monotonicity(mono, 0.01);
  CHECK(same.points == mono.points);
  CHECK(none.empty());

  SeriesTrace dup;
  dup.points = {{0, 0.0}, {1, 0.1}, {1, 0.3}, {2, 0.4}};
  CHECK(enforce_monotonicity(dup, 0.0).first.points == std::vector<Point>{{0, 0.0}, {1, 0.2}, {2, 0.4}});

  SeriesTrace down;
  for (int i = 0; i < 20; ++i) down.points.push_back({double(i), 1.0 - 0.05 * i + 0.01 * (i % 2)});
  CHECK(code_of([&] { enforce_monotonicity(down, 0.001); }) == ErrorCode::EmptyAfterCleaning);

  std::mt19937 rng(11);
  std::normal_distribution<double> n(0.0, 0.01);
  for (int trial = 0; trial < 200; ++trial) {
    SeriesTrace r;
    double x = 0.0;
    for (int i = 0; i < 30; ++i) {
      x += (i % 7 == 3) ? 0.0 : 1.0;
      r.points.push_back({x, 0.01 * i + n(rng)});
    }
    try {
      auto once = enforce_monotonicity(r, 0.005).first;
      auto twice = enforce_monotonicity(once, 0.005);
      CHECK(twice.first.points == once.points);
      CHECK(twice.second.empty());
      for (std::size_t i = 1; i < once.points.size(); ++i) {
        CHECK(once.points[i].x > once.points[i - 1].x);
        CHECK(once.points[i].y >= once.points[i - 1].y - 0.005);
      }
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyAfterCleaning);
    }
  }
}

TEST_CASE("PNG round trip and trace CSV") {
  auto spec = two_stress_plot();
  auto r = render_synthetic_plot(spec);
  auto path = std::filesystem::temp_directory_path() / "creepdb_test_plot.png";
  write_png(r.image, path.string());
  CHECK(read_png(path.string()) == r.image);
  std::filesystem::remove(path);
  CHECK(code_of([] { read_png("/nonexistent/plot.png"); }) == ErrorCode::ImageIo);

  SeriesTrace t;
  t.series_key = "31.6 MPa";
  t.points = {{0, 0.0}, {3600, 0.0125}};
  auto cal = calibration_of(spec, r);
  auto csv = trace_to_csv(t, cal);
  CHECK(csv.rfind("# series=31.6 MPa;", 0) == 0);
  CHECK(csv.find("\ntime_s,strain\n0,0\n3600,0.0125\n") != std::string::npos);
  CHECK(default_monotonicity_tolerance(cal) == doctest::Approx(0.00025));
}
