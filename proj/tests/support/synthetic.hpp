// Helpers shared by the digitizer unit tests and the acceptance binary.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "creepdb/digitizer/digitizer.hpp"

namespace testsupport {

namespace dg = creepdb::digitizer;

inline const std::vector<dg::Rgb>& palette() {
  static const std::vector<dg::Rgb> colors{
      {31, 119, 180}, {214, 39, 40}, {44, 160, 44}, {255, 127, 14}, {148, 103, 189}};
  return colors;
}

/// Truth value at x by linear interpolation in axis units (log10 on log axes),
/// which is how the renderer joins vertices.
inline double truth_at(const std::vector<dg::Point>& truth, double x, dg::AxisScale xs, dg::AxisScale ys) {
  auto ux = [&](double v) { return xs == dg::AxisScale::Log10 ? std::log10(v) : v; };
  auto uy = [&](double v) { return ys == dg::AxisScale::Log10 ? std::log10(v) : v; };
  auto it = std::lower_bound(truth.begin(), truth.end(), x,
                             [](const dg::Point& p, double v) { return p.x < v; });
  if (it == truth.begin()) return truth.front().y;
  if (it == truth.end()) return truth.back().y;
  const auto& b = *it;
  const auto& a = *(it - 1);
  double f = (ux(x) - ux(a.x)) / (ux(b.x) - ux(a.x));
  double u = uy(a.y) + f * (uy(b.y) - uy(a.y));
  return ys == dg::AxisScale::Log10 ? std::pow(10.0, u) : u;
}

/// Mean absolute relative error of a trace against its truth: relative to
/// the axis span on linear y axes and to the true value on log axes.
inline double mean_relative_error(const dg::SeriesTrace& trace, const std::vector<dg::Point>& truth,
                                  const dg::SyntheticPlotSpec& spec) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& p : trace.points) {
    if (p.x < truth.front().x || p.x > truth.back().x) continue;
    double yt = truth_at(truth, p.x, spec.x.scale, spec.y.scale);
    double denom = spec.y.scale == dg::AxisScale::Log10 ? std::abs(yt) : spec.y.max - spec.y.min;
    sum += std::abs(p.y - yt) / denom;
    ++n;
  }
  return n == 0 ? 1.0 : sum / double(n);
}

inline double max_relative_error(const dg::SeriesTrace& trace, const std::vector<dg::Point>& truth,
                                 const dg::SyntheticPlotSpec& spec) {
  double worst = 0.0;
  for (const auto& p : trace.points) {
    if (p.x < truth.front().x || p.x > truth.back().x) continue;
    double yt = truth_at(truth, p.x, spec.x.scale, spec.y.scale);
    double denom = spec.y.scale == dg::AxisScale::Log10 ? std::abs(yt) : spec.y.max - spec.y.min;
    worst = std::max(worst, std::abs(p.y - yt) / denom);
  }
  return worst;
}

/// Random creep-like plot with 1-4 monotone series.
inline dg::SyntheticPlotSpec random_plot(std::uint64_t seed, bool jitter) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  dg::SyntheticPlotSpec spec;
  spec.seed = seed;
  spec.jitter = jitter ? 1.0 : 0.0;
  spec.gridlines = u(rng) < 0.5;

  const bool xlog = u(rng) < 0.3;
  const bool ylog = u(rng) < 0.4;
  if (xlog) {
    spec.x = {1.0, std::pow(10.0, 2 + int(u(rng) * 3)), dg::AxisScale::Log10, {}};
  } else {
    const double spans[] = {100.0, 500.0, 1000.0, 3600.0, 10000.0};
    spec.x = {0.0, spans[int(u(rng) * 5)], dg::AxisScale::Linear, {}};
  }
  if (ylog) {
    spec.y = {1e-4, 1e-1, dg::AxisScale::Log10, {}};
  } else {
    const double spans[] = {0.01, 0.05, 0.2, 1.0, 5.0};
    spec.y = {0.0, spans[int(u(rng) * 5)], dg::AxisScale::Linear, {}};
  }

  const int nseries = 1 + int(u(rng) * 4);
  std::vector<int> colors{0, 1, 2, 3, 4};
  std::shuffle(colors.begin(), colors.end(), rng);
  for (int k = 0; k < nseries; ++k) {
    dg::SyntheticSeries s;
    s.label = "series " + std::to_string(k);
    s.color = palette()[colors[k]];
    s.line_width = 2.0 + 2.0 * u(rng);
    // level separates the series vertically; shape varies the curvature.
    const double level = (k + 1.0) / (nseries + 0.5) * (0.85 + 0.1 * u(rng));
    const double m = 0.3 + 0.6 * u(rng);
    const int samples = 300;
    for (int i = 0; i < samples; ++i) {
      double f = double(i) / (samples - 1);
      double x = xlog ? spec.x.min * std::pow(spec.x.max / spec.x.min, f) : spec.x.min + f * (spec.x.max - spec.x.min);
      double g = level * (0.15 + 0.85 * std::pow(std::max(f, 1e-6), m));
      double y = ylog ? spec.y.min * std::pow(spec.y.max / spec.y.min, 0.05 + 0.9 * g)
                      : spec.y.min + g * (spec.y.max - spec.y.min);
      s.truth.push_back({x, y});
    }
    spec.series.push_back(std::move(s));
  }
  return spec;
}

inline dg::AxisCalibration calibration_of(const dg::SyntheticPlotSpec& spec, const dg::RenderedPlot& r) {
  return dg::calibrate_axes(r.x_anchors, spec.x.scale, r.y_anchors, spec.y.scale);
}

inline std::vector<dg::SeriesKey> keys_of(const dg::SyntheticPlotSpec& spec) {
  std::vector<dg::SeriesKey> keys;
  for (const auto& s : spec.series) keys.push_back({s.label, s.color});
  return keys;
}

inline dg::ExtractOptions options_for(const dg::SyntheticPlotSpec& spec) {
  dg::ExtractOptions o;
  o.region = dg::PixelBox{spec.plot.left + 1, spec.plot.top, spec.plot.right, spec.plot.bottom - 1};
  return o;
}

}  // namespace testsupport
