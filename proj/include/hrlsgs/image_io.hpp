#pragma once

// Image containers and the two on-disk formats: the portable anymap family
// (P2/P3/P5/P6, 8 or 16 bit) and a raw float32 format
//
//   u32 height | u32 width | height*width f32, row-major, all little-endian
//
// which is also the exchange format of the external denoiser hook.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hrlsgs/errors.hpp"

namespace hrlsgs {

/// Channel-planar image with intensities in [0, 1] after ingestion.
struct ImageBuffer {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  std::vector<double> data;

  ImageBuffer() = default;
  ImageBuffer(std::size_t h, std::size_t w, std::size_t c = 1, double fill = 0.0)
      : height(h), width(w), channels(c), data(h * w * c, fill) {}

  std::size_t pixels() const noexcept { return height * width; }
  std::span<double> channel(std::size_t c) noexcept { return {data.data() + c * pixels(), pixels()}; }
  std::span<const double> channel(std::size_t c) const noexcept { return {data.data() + c * pixels(), pixels()}; }
  double& at(std::size_t r, std::size_t col, std::size_t c = 0) noexcept { return data[c * pixels() + r * width + col]; }
  double at(std::size_t r, std::size_t col, std::size_t c = 0) const noexcept {
    return data[c * pixels() + r * width + col];
  }
};

namespace detail {

inline void skip_pnm_space(std::istream& is) {
  for (;;) {
    int ch = is.peek();
    if (ch == '#') {
      std::string dummy;
      std::getline(is, dummy);
    } else if (std::isspace(ch)) {
      is.get();
    } else {
      return;
    }
  }
}

inline std::size_t read_pnm_int(std::istream& is) {
  skip_pnm_space(is);
  long v = -1;
  is >> v;
  if (!is || v < 0) throw ConfigError("read_pnm: malformed header");
  return static_cast<std::size_t>(v);
}

inline void put_u32le(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32le(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw ConfigError("raw image: truncated file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace detail

/// Read P2/P3/P5/P6 and map samples to [0, 1] by the declared maxval.
inline ImageBuffer read_pnm(std::istream& is) {
  std::string magic(2, '\0');
  if (!is.read(magic.data(), 2)) throw ConfigError("read_pnm: empty stream");
  const bool ascii = magic == "P2" || magic == "P3";
  const bool binary = magic == "P5" || magic == "P6";
  if (!ascii && !binary) throw ConfigError("read_pnm: unsupported magic '" + magic + "'");
  const std::size_t channels = (magic == "P3" || magic == "P6") ? 3 : 1;
  const std::size_t w = detail::read_pnm_int(is);
  const std::size_t h = detail::read_pnm_int(is);
  const std::size_t maxval = detail::read_pnm_int(is);
  if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) throw ConfigError("read_pnm: bad dimensions or maxval");
  is.get();  // single whitespace before the raster

  ImageBuffer img(h, w, channels);
  const double scale = 1.0 / static_cast<double>(maxval);
  const bool wide = maxval > 255;
  for (std::size_t p = 0; p < h * w; ++p) {
    for (std::size_t c = 0; c < channels; ++c) {
      std::size_t v = 0;
      if (ascii) {
        v = detail::read_pnm_int(is);
      } else if (wide) {
        unsigned char b[2];
        if (!is.read(reinterpret_cast<char*>(b), 2)) throw ConfigError("read_pnm: truncated raster");
        v = (static_cast<std::size_t>(b[0]) << 8) | b[1];
      } else {
        const int ch = is.get();
        if (ch == EOF) throw ConfigError("read_pnm: truncated raster");
        v = static_cast<std::size_t>(ch);
      }
      if (v > maxval) throw ConfigError("read_pnm: sample exceeds maxval");
      img.data[c * h * w + p] = static_cast<double>(v) * scale;
    }
  }
  return img;
}

inline ImageBuffer read_pnm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("read_pnm: cannot open " + path.string());
  return read_pnm(is);
}

/// Binary P5/P6; values are divided by `peak`, clamped to [0, 1] and quantized to `maxval`.
inline void write_pnm(std::ostream& os, const ImageBuffer& img, double peak = 1.0, unsigned maxval = 65535) {
  if (img.channels != 1 && img.channels != 3) throw ParameterError("write_pnm: need 1 or 3 channels");
  if (maxval == 0 || maxval > 65535) throw ParameterError("write_pnm: maxval out of range");
  os << (img.channels == 3 ? "P6" : "P5") << "\n" << img.width << " " << img.height << "\n" << maxval << "\n";
  const std::size_t n = img.pixels();
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t c = 0; c < img.channels; ++c) {
      double v = img.data[c * n + p] / peak;
      if (!(v > 0.0)) v = 0.0;
      if (v > 1.0) v = 1.0;
      const auto q = static_cast<unsigned>(std::lround(v * maxval));
      if (maxval > 255) {
        os.put(static_cast<char>(q >> 8));
        os.put(static_cast<char>(q & 0xFF));
      } else {
        os.put(static_cast<char>(q));
      }
    }
  }
}

inline void write_pnm(const std::filesystem::path& path, const ImageBuffer& img, double peak = 1.0,
                      unsigned maxval = 65535) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("write_pnm: cannot open " + path.string());
  write_pnm(os, img, peak, maxval);
}

/// Single-channel image in the raw float32 exchange format.
inline void write_raw_float(std::ostream& os, std::size_t height, std::size_t width, std::span<const double> values) {
  if (values.size() != height * width) throw ParameterError("write_raw_float: size mismatch");
  detail::put_u32le(os, static_cast<std::uint32_t>(height));
  detail::put_u32le(os, static_cast<std::uint32_t>(width));
  for (double v : values) detail::put_u32le(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

inline void write_raw_float(const std::filesystem::path& path, std::size_t height, std::size_t width,
                            std::span<const double> values) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("write_raw_float: cannot open " + path.string());
  write_raw_float(os, height, width, values);
}

inline ImageBuffer read_raw_float(std::istream& is) {
  const std::uint32_t h = detail::get_u32le(is);
  const std::uint32_t w = detail::get_u32le(is);
  ImageBuffer img(h, w, 1);
  for (double& v : img.data) v = static_cast<double>(std::bit_cast<float>(detail::get_u32le(is)));
  return img;
}

inline ImageBuffer read_raw_float(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("read_raw_float: cannot open " + path.string());
  return read_raw_float(is);
}

}  // namespace hrlsgs
