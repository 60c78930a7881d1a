#include "panmap/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <stdexcept>
#include <vector>

namespace panmap {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::string& path, const char* what) {
  throw std::runtime_error(path + ": " + what);
}

void write_png(const std::string& path, int width, int height, int bit_depth,
               int color_type, const std::vector<png_bytep>& rows) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) fail(path, "cannot open for writing");

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(path, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(path, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(path, "png write error");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // host is little-endian
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

}  // namespace

void write_png_gray16(const Image<uint16_t>& image, const std::string& path) {
  std::vector<png_bytep> rows(image.height());
  for (int y = 0; y < image.height(); ++y)
    rows[y] = reinterpret_cast<png_bytep>(
        const_cast<uint16_t*>(&image.at(0, y)));
  write_png(path, image.width(), image.height(), 16, PNG_COLOR_TYPE_GRAY, rows);
}

Image<uint16_t> read_png_gray16(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) fail(path, "cannot open");

  PngReader r;
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) fail(path, "png_create_read_struct failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) fail(path, "png_create_info_struct failed");
  if (setjmp(png_jmpbuf(r.png))) fail(path, "png decode error");

  png_init_io(r.png, file.get());
  png_read_info(r.png, r.info);
  if (png_get_color_type(r.png, r.info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(r.png, r.info) != 16)
    fail(path, "expected 16-bit grayscale PNG");
  png_set_swap(r.png);

  Image<uint16_t> image(png_get_image_width(r.png, r.info),
                        png_get_image_height(r.png, r.info));
  std::vector<png_bytep> rows(image.height());
  for (int y = 0; y < image.height(); ++y)
    rows[y] = reinterpret_cast<png_bytep>(&image.at(0, y));
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
  return image;
}

void write_png_rgb8(const ColorImage& image, const std::string& path) {
  std::vector<png_bytep> rows(image.height());
  for (int y = 0; y < image.height(); ++y)
    rows[y] = reinterpret_cast<png_bytep>(const_cast<Rgb8*>(&image.at(0, y)));
  write_png(path, image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB, rows);
}

ColorImage read_png_rgb8(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) fail(path, "cannot open");

  PngReader r;
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) fail(path, "png_create_read_struct failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) fail(path, "png_create_info_struct failed");
  if (setjmp(png_jmpbuf(r.png))) fail(path, "png decode error");

  png_init_io(r.png, file.get());
  png_read_info(r.png, r.info);
  if (png_get_color_type(r.png, r.info) != PNG_COLOR_TYPE_RGB ||
      png_get_bit_depth(r.png, r.info) != 8)
    fail(path, "expected 8-bit RGB PNG");

  ColorImage image(png_get_image_width(r.png, r.info),
                   png_get_image_height(r.png, r.info));
  std::vector<png_bytep> rows(image.height());
  for (int y = 0; y < image.height(); ++y)
    rows[y] = reinterpret_cast<png_bytep>(&image.at(0, y));
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
  return image;
}

}  // namespace panmap
