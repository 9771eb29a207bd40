#pragma once

// Netpbm graymaps: P2 (ASCII) and P5 (binary), maxval 255.

#include <cctype>
#include <string>
#include <string_view>

#include "fpv/error.hpp"
#include "fpv/orientation.hpp"
#include "fpv/text.hpp"

namespace fpv {

namespace detail {

class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(std::string_view bytes) : s_(bytes) {}

  std::string_view token() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return s_.substr(start, pos_ - start);
  }

  int integer(const char* what) {
    auto v = text::parse_int<int>(token());
    if (!v) throw Error(Errc::MalformedHeader, std::string("bad PGM ") + what);
    return *v;
  }

  // Binary rasters start after exactly one whitespace byte.
  std::size_t raster_offset() const { return pos_ + 1; }

 private:
  void skip_space_and_comments() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline GrayImage read_pgm(std::string_view bytes) {
  detail::PgmHeaderReader rd(bytes);
  const auto magic = rd.token();
  if (magic != "P2" && magic != "P5") throw Error(Errc::MalformedHeader, "expected P2 or P5 graymap");
  const int w = rd.integer("width");
  const int h = rd.integer("height");
  const int maxval = rd.integer("maxval");
  if (w <= 0 || h <= 0) throw Error(Errc::MalformedHeader, "non-positive PGM dimensions");
  if (maxval != 255) throw Error(Errc::MalformedHeader, "only maxval 255 is supported");

  GrayImage img(w, h);
  if (magic == "P5") {
    const std::size_t off = rd.raster_offset();
    if (off > bytes.size() || bytes.size() - off < img.pixels.size())
      throw Error(Errc::MalformedLine, "truncated P5 raster");
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(bytes[off + i]);
  } else {
    for (auto& p : img.pixels) {
      auto v = text::parse_int<int>(rd.token());
      if (!v || *v < 0 || *v > 255) throw Error(Errc::MalformedLine, "bad P2 sample");
      p = static_cast<std::uint8_t>(*v);
    }
  }
  return img;
}

inline std::string write_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width) + ' ' + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

}  // namespace fpv
