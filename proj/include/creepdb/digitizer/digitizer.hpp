#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "creepdb/digitizer/image.hpp"

namespace creepdb::digitizer {

enum class AxisScale { Linear, Log10 };
std::string_view to_string(AxisScale s);
AxisScale axis_scale_from_string(std::string_view s);

struct Anchor {
  double pixel = 0.0;
  double value = 0.0;
};

/// One calibrated axis: u = a*pixel + b where u is the value (linear) or
/// log10 of the value (log axes).
struct AxisFit {
  AxisScale scale = AxisScale::Linear;
  std::vector<Anchor> anchors;
  double a = 1.0;
  double b = 0.0;
  std::vector<double> residuals;  // per anchor, in pixels

  double to_data(double pixel) const;
  double to_pixel(double value) const;
};

struct AxisCalibration {
  AxisFit x;
  AxisFit y;
  nlohmann::json to_json() const;
};

/// Throws DegenerateAnchors (fewer than 2 anchors, coincident pixels, non
/// monotone anchors) and NonPositiveLogAnchor.
AxisFit calibrate_axis(std::vector<Anchor> anchors, AxisScale scale);
AxisCalibration calibrate_axes(std::vector<Anchor> x_anchors, AxisScale x_scale,
                               std::vector<Anchor> y_anchors, AxisScale y_scale);

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

Point pixel_to_data(const AxisCalibration& cal, double px, double py);
Point data_to_pixel(const AxisCalibration& cal, double x, double y);

// ---------------------------------------------------------------------------
// Synthetic plots

struct PixelBox {
  int left = 0, top = 0, right = 0, bottom = 0;  // inclusive
};

struct SyntheticAxis {
  double min = 0.0;
  double max = 1.0;
  AxisScale scale = AxisScale::Linear;
  /// Tick values; empty means 5 even ticks (linear) or one per decade (log).
  std::vector<double> ticks;
};

struct SyntheticSeries {
  std::string label;
  Rgb color;
  std::vector<Point> truth;  // data units, ordered by x
  double line_width = 3.0;
};

struct SyntheticPlotSpec {
  int width = 800;
  int height = 600;
  PixelBox plot{90, 30, 770, 530};
  SyntheticAxis x;
  SyntheticAxis y;
  std::vector<SyntheticSeries> series;
  bool gridlines = false;
  Rgb background{255, 255, 255};
  double jitter = 0.0;  // pixel amplitude of vertex displacement
  std::uint64_t seed = 1;

  /// Checks sizes, ranges and color separation; throws Precondition.
  void check() const;
};

inline constexpr Rgb kAxisColor{0, 0, 0};
inline constexpr Rgb kGridColor{220, 220, 220};
/// Minimum channel distance between series colors in a synthetic spec.
inline constexpr int kMinSeriesColorDistance = 61;

struct RenderedPlot {
  RasterImage image;
  std::vector<Anchor> x_anchors;
  std::vector<Anchor> y_anchors;
  /// Index of the series that last painted each pixel, -1 elsewhere.
  std::vector<int> owner;
  int owner_at(int x, int y) const { return owner[static_cast<std::size_t>(y) * image.width() + x]; }
};

RenderedPlot render_synthetic_plot(const SyntheticPlotSpec& spec);

/// Default ticks for an axis (used when none are given).
std::vector<double> default_ticks(const SyntheticAxis& axis);

// ---------------------------------------------------------------------------
// Extraction

struct SeriesKey {
  std::string label;
  Rgb color;
};

struct PixelPoint {
  int x = 0;
  int y = 0;
};

struct SeriesTrace {
  std::string series_key;
  std::vector<Point> points;
  std::vector<PixelPoint> pixel_points;
  double quality = 0.0;
};

struct ExtractOptions {
  int tolerance = 30;
  std::size_t min_pixels = 20;
  std::vector<Rgb> suppress{kAxisColor, kGridColor};
  /// Restrict the search to this box; whole image when absent.
  std::optional<PixelBox> region;
};

/// Throws SeriesNotFound when a key's mask holds fewer than min_pixels.
std::vector<SeriesTrace> extract_series(const RasterImage& image, const AxisCalibration& cal,
                                        const std::vector<SeriesKey>& keys,
                                        const ExtractOptions& options = {});

/// Picks the trace whose label states the same quantity as `target` after
/// unit standardization. Throws AmbiguousTarget on zero or several matches.
const SeriesTrace& select_target_series(const std::vector<SeriesTrace>& traces,
                                        const std::vector<std::string>& labels,
                                        const std::string& target);

struct MonotonicityFlag {
  std::size_t index = 0;  // position in the input trace
  Point point;
  std::string reason;
};

/// Collapses duplicate x to the mean y and drops points lying more than
/// `tolerance` below the running maximum. Throws EmptyAfterCleaning when
/// more than half of the points are dropped.
std::pair<SeriesTrace, std::vector<MonotonicityFlag>> enforce_monotonicity(
    const SeriesTrace& trace, double tolerance);

/// Default tolerance: 0.5% of the y span covered by the anchors.
double default_monotonicity_tolerance(const AxisCalibration& cal);

/// Two columns (time_s, strain) after a header comment with calibration data.
std::string trace_to_csv(const SeriesTrace& trace, const AxisCalibration& cal);

}  // namespace creepdb::digitizer
