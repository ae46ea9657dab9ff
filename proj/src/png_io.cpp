#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstring>
#include <string>

#include "plidar/kitti_io.hpp"

namespace plidar {
namespace {

struct ReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

struct PngFailure {
  std::jmp_buf jump;
  std::string message;
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* failure = static_cast<PngFailure*>(png_get_error_ptr(png));
  failure->message = msg;
  std::longjmp(failure->jump, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

void read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes.size()) {
    png_error(png, "unexpected end of data");
  }
  std::memcpy(out, cursor->bytes.data() + cursor->offset, length);
  cursor->offset += length;
}

void write_to_memory(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void flush_noop(png_structp) {}

enum class Layout { Gray16, Rgb8 };

struct Decoded {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rows;  // tightly packed, PNG byte order
};

// libpng unwinds with longjmp, so no object with a non-trivial destructor may
// be created between setjmp and the last libpng call.
Decoded decode(std::span<const std::uint8_t> bytes, Layout layout) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::NotPng, "missing PNG signature");
  }
  PngFailure failure;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &failure, on_png_error,
                                           on_png_warning);
  if (!png) throw Error(ErrorCode::Io, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::Io, "png_create_info_struct failed");
  }

  ReadCursor cursor{bytes, 0};
  Decoded out;
  int bit_depth = 0;
  int color_type = 0;
  bool wrong_depth = false;
  bool wrong_channels = false;
  std::vector<png_bytep> row_ptrs;

  if (setjmp(failure.jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::NotPng, failure.message);
  }
  png_set_read_fn(png, &cursor, read_from_memory);
  png_read_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  bit_depth = png_get_bit_depth(png, info);
  color_type = png_get_color_type(png, info);

  if (layout == Layout::Gray16) {
    wrong_depth = bit_depth != 16;
    wrong_channels = color_type != PNG_COLOR_TYPE_GRAY;
  } else {
    if (color_type == PNG_COLOR_TYPE_PALETTE) {
      if (png_get_valid(png, info, PNG_INFO_tRNS)) {
        wrong_channels = true;
      } else {
        png_set_palette_to_rgb(png);
        color_type = PNG_COLOR_TYPE_RGB;
        bit_depth = 8;
      }
    }
    wrong_depth = bit_depth != 8;
    wrong_channels = wrong_channels || color_type != PNG_COLOR_TYPE_RGB;
  }

  if (!wrong_depth && !wrong_channels) {
    png_set_interlace_handling(png);
    png_read_update_info(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    out.rows.resize(stride * static_cast<std::size_t>(out.height));
    row_ptrs.resize(static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y) row_ptrs[y] = out.rows.data() + stride * y;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);

  if (wrong_depth) {
    throw Error(ErrorCode::WrongBitDepth, "got " + std::to_string(bit_depth) + "-bit PNG");
  }
  if (wrong_channels) {
    throw Error(ErrorCode::WrongChannelCount, "unexpected PNG color type " + std::to_string(color_type));
  }
  return out;
}

std::vector<std::uint8_t> encode(int width, int height, Layout layout,
                                 std::span<const std::uint8_t> rows) {
  std::vector<std::uint8_t> out;
  PngFailure failure;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &failure, on_png_error,
                                            on_png_warning);
  if (!png) throw Error(ErrorCode::Io, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::Io, "png_create_info_struct failed");
  }
  const std::size_t stride =
      static_cast<std::size_t>(width) * (layout == Layout::Gray16 ? 2 : 3);
  std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    row_ptrs[y] = const_cast<png_bytep>(rows.data() + stride * y);
  }

  if (setjmp(failure.jump)) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io, "PNG encode failed: " + failure.message);
  }
  png_set_write_fn(png, &out, write_to_memory, flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               layout == Layout::Gray16 ? 16 : 8,
               layout == Layout::Gray16 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

ScalarRaster read_gray16(std::span<const std::uint8_t> bytes, RasterSemantics semantics,
                         double scale) {
  Decoded d = decode(bytes, Layout::Gray16);
  std::vector<float> values(static_cast<std::size_t>(d.width) * d.height);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const unsigned raw = (unsigned{d.rows[2 * i]} << 8) | d.rows[2 * i + 1];
    values[i] = static_cast<float>(raw / scale);
  }
  return ScalarRaster::make(d.width, d.height, semantics, std::move(values));
}

std::vector<std::uint8_t> write_gray16(const ScalarRaster& raster, double scale) {
  if (raster.values.size() != static_cast<std::size_t>(raster.width) * raster.height) {
    throw Error(ErrorCode::LengthMismatch, "raster values do not match width x height");
  }
  std::vector<std::uint8_t> rows(raster.values.size() * 2);
  for (std::size_t i = 0; i < raster.values.size(); ++i) {
    double v = raster.values[i];
    if (!std::isfinite(v) || v < 0) v = 0;
    const auto raw = static_cast<unsigned>(std::min(65535.0, std::round(v * scale)));
    rows[2 * i] = static_cast<std::uint8_t>(raw >> 8);
    rows[2 * i + 1] = static_cast<std::uint8_t>(raw & 0xff);
  }
  return encode(raster.width, raster.height, Layout::Gray16, rows);
}

}  // namespace

ScalarRaster read_depth_png(std::span<const std::uint8_t> bytes) {
  return read_gray16(bytes, RasterSemantics::DepthMeters, 256.0);
}

std::vector<std::uint8_t> write_depth_png(const ScalarRaster& depth) {
  return write_gray16(depth, 256.0);
}

ScalarRaster read_confidence_png(std::span<const std::uint8_t> bytes) {
  return read_gray16(bytes, RasterSemantics::Confidence01, 65535.0);
}

std::vector<std::uint8_t> write_confidence_png(const ScalarRaster& confidence) {
  return write_gray16(confidence, 65535.0);
}

RgbImage read_rgb_png(std::span<const std::uint8_t> bytes) {
  Decoded d = decode(bytes, Layout::Rgb8);
  return RgbImage{d.width, d.height, std::move(d.rows)};
}

std::vector<std::uint8_t> write_rgb_png(const RgbImage& image) {
  if (image.rgb.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw Error(ErrorCode::WrongChannelCount, "expected 3 interleaved channels");
  }
  return encode(image.width, image.height, Layout::Rgb8, image.rgb);
}

}  // namespace plidar
