#include "creepdb/digitizer/image.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include <png.h>

#include "creepdb/error.hpp"

namespace creepdb::digitizer {

int channel_distance(Rgb a, Rgb b) {
  int dr = std::abs(int(a.r) - int(b.r));
  int dg = std::abs(int(a.g) - int(b.g));
  int db = std::abs(int(a.b) - int(b.b));
  return std::max(dr, std::max(dg, db));
}

Rgb parse_color(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  auto hex = [&](std::string_view h) -> Rgb {
    require(h.size() == 6 && h.find_first_not_of("0123456789abcdef") == std::string_view::npos,
            "color '" + std::string(text) + "' is not #rrggbb");
    auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(std::stoi(std::string(h.substr(i, 2)), nullptr, 16)); };
    return {byte(0), byte(2), byte(4)};
  };
  if (s.rfind("rgb(", 0) == 0 && s.back() == ')') {
    int v[3];
    char tail = 0;
    require(std::sscanf(s.c_str(), "rgb(%d,%d,%d%c", &v[0], &v[1], &v[2], &tail) == 4 && tail == ')',
            "color '" + std::string(text) + "' is not rgb(r, g, b)");
    for (int c : v) require(c >= 0 && c <= 255, "color channel out of range in '" + std::string(text) + "'");
    return {static_cast<std::uint8_t>(v[0]), static_cast<std::uint8_t>(v[1]), static_cast<std::uint8_t>(v[2])};
  }
  return hex(s[0] == '#' ? std::string_view(s).substr(1) : std::string_view(s));
}

std::string to_hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

RasterImage::RasterImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  require(width > 0 && height > 0, "image dimensions must be positive");
  data_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

Rgb RasterImage::at(int x, int y) const {
  std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  return {data_[i], data_[i + 1], data_[i + 2]};
}

void RasterImage::set(int x, int y, Rgb c) {
  if (!contains(x, y)) return;
  std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  data_[i] = c.r;
  data_[i + 1] = c.g;
  data_[i + 2] = c.b;
}

RasterImage read_png(const std::string& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    fail(ErrorCode::ImageIo, "cannot read PNG " + path + ": " + img.message);
  img.format = PNG_FORMAT_RGB;
  RasterImage out(static_cast<int>(img.width), static_cast<int>(img.height));
  if (!png_image_finish_read(&img, nullptr, out.bytes().data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    fail(ErrorCode::ImageIo, "cannot decode PNG " + path + ": " + msg);
  }
  return out;
}

void write_png(const RasterImage& image, const std::string& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, image.bytes().data(), 0, nullptr))
    fail(ErrorCode::ImageIo, "cannot write PNG " + path + ": " + img.message);
}

}  // namespace creepdb::digitizer
