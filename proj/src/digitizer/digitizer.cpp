#include "creepdb/digitizer/digitizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "creepdb/error.hpp"
#include "creepdb/formula/units.hpp"

namespace creepdb::digitizer {

std::string_view to_string(AxisScale s) { return s == AxisScale::Log10 ? "log10" : "linear"; }

AxisScale axis_scale_from_string(std::string_view s) {
  if (s == "linear") return AxisScale::Linear;
  if (s == "log10" || s == "log") return AxisScale::Log10;
  fail(ErrorCode::Precondition, "unknown axis scale '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Calibration

double AxisFit::to_data(double pixel) const {
  double u = a * pixel + b;
  return scale == AxisScale::Log10 ? std::pow(10.0, u) : u;
}

double AxisFit::to_pixel(double value) const {
  double u = scale == AxisScale::Log10 ? std::log10(value) : value;
  return (u - b) / a;
}

AxisFit calibrate_axis(std::vector<Anchor> anchors, AxisScale scale) {
  if (anchors.size() < 2) fail(ErrorCode::DegenerateAnchors, "an axis needs at least 2 anchors");
  std::sort(anchors.begin(), anchors.end(),
            [](const Anchor& l, const Anchor& r) { return l.pixel < r.pixel; });
  for (std::size_t i = 1; i < anchors.size(); ++i)
    if (anchors[i].pixel == anchors[i - 1].pixel)
      fail(ErrorCode::DegenerateAnchors, "two anchors share pixel " + std::to_string(anchors[i].pixel));
  if (scale == AxisScale::Log10)
    for (const auto& an : anchors)
      if (!(an.value > 0.0))
        fail(ErrorCode::NonPositiveLogAnchor, "log axis anchor value " + std::to_string(an.value));
  const bool increasing = anchors[1].value > anchors[0].value;
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    bool ok = increasing ? anchors[i].value > anchors[i - 1].value
                         : anchors[i].value < anchors[i - 1].value;
    if (!ok) fail(ErrorCode::DegenerateAnchors, "anchor values are not strictly monotone in pixel");
  }

  AxisFit fit;
  fit.scale = scale;
  const double n = static_cast<double>(anchors.size());
  double sp = 0, su = 0, spp = 0, spu = 0;
  for (const auto& an : anchors) {
    double u = scale == AxisScale::Log10 ? std::log10(an.value) : an.value;
    sp += an.pixel;
    su += u;
    spp += an.pixel * an.pixel;
    spu += an.pixel * u;
  }
  double mp = sp / n, mu = su / n;
  double var = spp / n - mp * mp;
  fit.a = (spu / n - mp * mu) / var;
  fit.b = mu - fit.a * mp;
  fit.anchors = std::move(anchors);
  for (const auto& an : fit.anchors) fit.residuals.push_back(fit.to_pixel(an.value) - an.pixel);
  return fit;
}

AxisCalibration calibrate_axes(std::vector<Anchor> x_anchors, AxisScale x_scale,
                               std::vector<Anchor> y_anchors, AxisScale y_scale) {
  return {calibrate_axis(std::move(x_anchors), x_scale), calibrate_axis(std::move(y_anchors), y_scale)};
}

namespace {
nlohmann::json axis_json(const AxisFit& f) {
  nlohmann::json anchors = nlohmann::json::array();
  for (const auto& an : f.anchors) anchors.push_back({an.pixel, an.value});
  return {{"scale", to_string(f.scale)}, {"a", f.a}, {"b", f.b}, {"anchors", anchors},
          {"residuals", f.residuals}};
}
}  // namespace

nlohmann::json AxisCalibration::to_json() const { return {{"x", axis_json(x)}, {"y", axis_json(y)}}; }

Point pixel_to_data(const AxisCalibration& cal, double px, double py) {
  return {cal.x.to_data(px), cal.y.to_data(py)};
}

Point data_to_pixel(const AxisCalibration& cal, double x, double y) {
  return {cal.x.to_pixel(x), cal.y.to_pixel(y)};
}

// ---------------------------------------------------------------------------
// Synthetic rendering

void SyntheticPlotSpec::check() const {
  require(!series.empty(), "a synthetic plot needs at least one series");
  require(width > 0 && height > 0, "image dimensions must be positive");
  require(plot.left >= 0 && plot.right < width && plot.top >= 0 && plot.bottom < height &&
              plot.left < plot.right && plot.top < plot.bottom,
          "plot box outside the image");
  for (const auto* axis : {&x, &y}) {
    require(axis->max > axis->min, "axis range must be increasing");
    if (axis->scale == AxisScale::Log10) require(axis->min > 0.0, "log axis must be positive");
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t j = i + 1; j < series.size(); ++j)
      require(channel_distance(series[i].color, series[j].color) >= kMinSeriesColorDistance,
              "series colors " + std::to_string(i) + " and " + std::to_string(j) +
                  " are not distinguishable");
    for (const Rgb c : {kAxisColor, kGridColor, background})
      require(channel_distance(series[i].color, c) >= kMinSeriesColorDistance,
              "series color too close to axis, grid or background");
  }
}

std::vector<double> default_ticks(const SyntheticAxis& axis) {
  if (!axis.ticks.empty()) return axis.ticks;
  std::vector<double> ticks;
  if (axis.scale == AxisScale::Log10) {
    for (int e = static_cast<int>(std::ceil(std::log10(axis.min) - 1e-9));
         e <= static_cast<int>(std::floor(std::log10(axis.max) + 1e-9)); ++e)
      ticks.push_back(std::pow(10.0, e));
  } else {
    for (int i = 0; i <= 4; ++i) ticks.push_back(axis.min + (axis.max - axis.min) * i / 4.0);
  }
  return ticks;
}

namespace {

double axis_unit(const SyntheticAxis& axis, double v) {
  return axis.scale == AxisScale::Log10 ? std::log10(v) : v;
}

// Exact data -> pixel map of the renderer.
double to_px(const SyntheticAxis& axis, double v, double p0, double p1) {
  double u0 = axis_unit(axis, axis.min), u1 = axis_unit(axis, axis.max);
  return p0 + (axis_unit(axis, v) - u0) / (u1 - u0) * (p1 - p0);
}

}  // namespace

RenderedPlot render_synthetic_plot(const SyntheticPlotSpec& spec) {
  spec.check();
  RenderedPlot out;
  out.image = RasterImage(spec.width, spec.height, spec.background);
  out.owner.assign(static_cast<std::size_t>(spec.width) * spec.height, -1);
  const PixelBox& box = spec.plot;
  auto xpx = [&](double v) { return to_px(spec.x, v, box.left, box.right); };
  auto ypx = [&](double v) { return to_px(spec.y, v, box.bottom, box.top); };

  const auto xticks = default_ticks(spec.x);
  const auto yticks = default_ticks(spec.y);
  for (double t : xticks) {
    int p = static_cast<int>(std::lround(xpx(t)));
    out.x_anchors.push_back({double(p), t});
    if (spec.gridlines && p > box.left)
      for (int y = box.top; y < box.bottom; ++y) out.image.set(p, y, kGridColor);
    for (int y = box.bottom + 1; y <= box.bottom + 6; ++y) out.image.set(p, y, kAxisColor);
  }
  for (double t : yticks) {
    int p = static_cast<int>(std::lround(ypx(t)));
    out.y_anchors.push_back({double(p), t});
    if (spec.gridlines && p < box.bottom)
      for (int x = box.left + 1; x <= box.right; ++x) out.image.set(x, p, kGridColor);
    for (int x = box.left - 6; x <= box.left - 1; ++x) out.image.set(x, p, kAxisColor);
  }
  for (int y = box.top; y <= box.bottom; ++y) out.image.set(box.left, y, kAxisColor);
  for (int x = box.left; x <= box.right; ++x) out.image.set(x, box.bottom, kAxisColor);

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> jitter(-spec.jitter, spec.jitter);
  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const auto& s = spec.series[si];
    std::vector<Point> path;
    for (const auto& p : s.truth) {
      Point q{xpx(p.x), ypx(p.y)};
      if (spec.jitter > 0.0) {
        q.x += jitter(rng);
        q.y += jitter(rng);
      }
      path.push_back(q);
    }
    const double r = s.line_width / 2.0;
    const int reach = static_cast<int>(std::ceil(r));
    auto stamp = [&](double cx, double cy) {
      int ix = static_cast<int>(std::lround(cx)), iy = static_cast<int>(std::lround(cy));
      for (int y = iy - reach; y <= iy + reach; ++y)
        for (int x = ix - reach; x <= ix + reach; ++x) {
          if (x <= box.left || x > box.right || y < box.top || y >= box.bottom) continue;
          if ((x - cx) * (x - cx) + (y - cy) * (y - cy) > r * r) continue;
          out.image.set(x, y, s.color);
          out.owner[static_cast<std::size_t>(y) * spec.width + x] = static_cast<int>(si);
        }
    };
    if (path.size() == 1) stamp(path[0].x, path[0].y);
    for (std::size_t i = 1; i < path.size(); ++i) {
      double dx = path[i].x - path[i - 1].x, dy = path[i].y - path[i - 1].y;
      int samples = std::max(1, static_cast<int>(std::ceil(std::hypot(dx, dy) / 0.25)));
      for (int k = (i == 1 ? 0 : 1); k <= samples; ++k) {
        double f = double(k) / samples;
        stamp(path[i - 1].x + f * dx, path[i - 1].y + f * dy);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Extraction

std::vector<SeriesTrace> extract_series(const RasterImage& image, const AxisCalibration& cal,
                                        const std::vector<SeriesKey>& keys,
                                        const ExtractOptions& options) {
  require(!keys.empty(), "at least one series key is required");
  PixelBox region = options.region.value_or(PixelBox{0, 0, image.width() - 1, image.height() - 1});
  region.left = std::max(region.left, 0);
  region.top = std::max(region.top, 0);
  region.right = std::min(region.right, image.width() - 1);
  region.bottom = std::min(region.bottom, image.height() - 1);

  std::vector<SeriesTrace> traces;
  for (const auto& key : keys) {
    auto in_mask = [&](int x, int y) {
      Rgb c = image.at(x, y);
      int d = channel_distance(c, key.color);
      if (d > options.tolerance) return false;
      for (Rgb s : options.suppress) {
        int ds = channel_distance(c, s);
        if (ds <= options.tolerance && ds < d) return false;
      }
      return true;
    };

    std::size_t mask_count = 0;
    std::vector<std::vector<std::pair<int, int>>> runs_by_column;  // per column: [start, end]
    for (int x = region.left; x <= region.right; ++x) {
      std::vector<std::pair<int, int>> runs;
      int start = -1;
      for (int y = region.top; y <= region.bottom; ++y) {
        bool m = in_mask(x, y);
        if (m) ++mask_count;
        if (m && start < 0) start = y;
        if (!m && start >= 0) {
          runs.emplace_back(start, y - 1);
          start = -1;
        }
      }
      if (start >= 0) runs.emplace_back(start, region.bottom);
      runs_by_column.push_back(std::move(runs));
    }
    if (mask_count < options.min_pixels)
      fail(ErrorCode::SeriesNotFound, "series '" + key.label + "' has " + std::to_string(mask_count) +
                                          " matching pixels");

    SeriesTrace trace;
    trace.series_key = key.label;
    std::optional<double> previous;
    std::size_t found = 0;
    for (int x = region.left; x <= region.right; ++x) {
      const auto& runs = runs_by_column[static_cast<std::size_t>(x - region.left)];
      if (runs.empty()) continue;
      std::size_t best = 0;
      for (std::size_t i = 1; i < runs.size(); ++i) {
        double ci = 0.5 * (runs[i].first + runs[i].second);
        double cb = 0.5 * (runs[best].first + runs[best].second);
        bool better = previous
                          ? std::abs(ci - *previous) < std::abs(cb - *previous)
                          : (runs[i].second - runs[i].first) > (runs[best].second - runs[best].first);
        if (better) best = i;
      }
      double centroid = 0.5 * (runs[best].first + runs[best].second);
      previous = centroid;
      ++found;
      trace.points.push_back(pixel_to_data(cal, x, centroid));
      trace.pixel_points.push_back({x, static_cast<int>(std::floor(centroid))});
    }
    trace.quality = static_cast<double>(found) / (region.right - region.left + 1);

    // Calibrations whose x decreases with pixel produce reversed traces.
    if (trace.points.size() > 1 && trace.points.front().x > trace.points.back().x) {
      std::reverse(trace.points.begin(), trace.points.end());
      std::reverse(trace.pixel_points.begin(), trace.pixel_points.end());
    }
    traces.push_back(std::move(trace));
  }
  return traces;
}

const SeriesTrace& select_target_series(const std::vector<SeriesTrace>& traces,
                                        const std::vector<std::string>& labels,
                                        const std::string& target) {
  require(traces.size() == labels.size(), "one label per trace is required");
  auto canonical = [](const std::string& text) -> std::optional<formula::Quantity> {
    try {
      auto q = formula::parse_quantity(text);
      return formula::standardize(q.value, q.unit);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  auto want = canonical(target);
  if (!want) fail(ErrorCode::AmbiguousTarget, "target condition '" + target + "' is not a quantity");
  std::vector<std::size_t> matches;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto q = canonical(labels[i]);
    if (!q || q->unit != want->unit) continue;
    double scale = std::max({std::abs(q->value), std::abs(want->value), 1e-300});
    if (std::abs(q->value - want->value) <= 1e-9 * scale) matches.push_back(i);
  }
  if (matches.size() != 1)
    fail(ErrorCode::AmbiguousTarget, std::to_string(matches.size()) + " series match '" + target + "'");
  return traces[matches.front()];
}

std::pair<SeriesTrace, std::vector<MonotonicityFlag>> enforce_monotonicity(const SeriesTrace& trace,
                                                                            double tolerance) {
  require(tolerance >= 0.0, "tolerance must be non-negative");
  for (std::size_t i = 1; i < trace.points.size(); ++i)
    require(trace.points[i].x >= trace.points[i - 1].x, "trace points must be ordered by x");
  const bool has_pixels = trace.pixel_points.size() == trace.points.size();

  // Collapse duplicate x values.
  struct Group {
    std::size_t first;
    Point point;
  };
  std::vector<Group> groups;
  for (std::size_t i = 0; i < trace.points.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < trace.points.size() && trace.points[j].x == trace.points[i].x) sum += trace.points[j++].y;
    groups.push_back({i, {trace.points[i].x, sum / double(j - i)}});
    i = j;
  }

  SeriesTrace out;
  out.series_key = trace.series_key;
  out.quality = trace.quality;
  std::vector<MonotonicityFlag> flags;
  double running_max = -std::numeric_limits<double>::infinity();
  for (const auto& g : groups) {
    if (g.point.y < running_max - tolerance) {
      flags.push_back({g.first, g.point, "below running maximum by more than tolerance"});
      continue;
    }
    running_max = std::max(running_max, g.point.y);
    out.points.push_back(g.point);
    if (has_pixels) out.pixel_points.push_back(trace.pixel_points[g.first]);
  }
  if (!groups.empty() && 2 * flags.size() > groups.size())
    fail(ErrorCode::EmptyAfterCleaning, std::to_string(flags.size()) + " of " +
                                            std::to_string(groups.size()) + " points violate monotonicity");
  return {std::move(out), std::move(flags)};
}

double default_monotonicity_tolerance(const AxisCalibration& cal) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& an : cal.y.anchors) {
    lo = std::min(lo, an.value);
    hi = std::max(hi, an.value);
  }
  return 0.005 * (hi - lo);
}

std::string trace_to_csv(const SeriesTrace& trace, const AxisCalibration& cal) {
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof buf, "x=%s a=%.12g b=%.12g; y=%s a=%.12g b=%.12g; quality=%.6f",
                std::string(to_string(cal.x.scale)).c_str(), cal.x.a, cal.x.b,
                std::string(to_string(cal.y.scale)).c_str(), cal.y.a, cal.y.b, trace.quality);
  os << "# series=" << trace.series_key << "; " << buf << "\n";
  os << "time_s,strain\n";
  for (const auto& p : trace.points) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", p.x, p.y);
    os << buf;
  }
  return os.str();
}

}  // namespace creepdb::digitizer
