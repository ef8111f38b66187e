#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace creepdb::digitizer {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Largest per-channel difference.
int channel_distance(Rgb a, Rgb b);

/// Accepts "#rrggbb", "rrggbb" and "rgb(r, g, b)". Throws Precondition.
Rgb parse_color(std::string_view text);
std::string to_hex(Rgb c);

/// 8-bit RGB raster, row-major, origin at the top-left.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, Rgb fill = {255, 255, 255});

  int width() const { return width_; }
  int height() const { return height_; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  const std::vector<std::uint8_t>& bytes() const { return data_; }
  std::vector<std::uint8_t>& bytes() { return data_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Throws ImageIo on unreadable or non-PNG input.
RasterImage read_png(const std::string& path);
void write_png(const RasterImage& image, const std::string& path);

}  // namespace creepdb::digitizer
