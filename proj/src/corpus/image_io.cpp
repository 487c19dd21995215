#include "tablatex/corpus/image_io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include "tablatex/error.hpp"

namespace tablatex::corpus {

namespace {

[[noreturn]] void decode_error(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::DecodeError, path + ": " + what);
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

float luminance(float r, float g, float b) { return 0.299f * r + 0.587f * g + 0.114f * b; }

GrayImage decode_png(const std::string& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) decode_error(path, img.message);
  img.format = PNG_FORMAT_RGBA;
  if (img.width == 0 || img.height == 0) {
    png_image_free(&img);
    throw Error(ErrorKind::EmptyImage, path + " has no pixels");
  }
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    decode_error(path, msg);
  }
  GrayImage out(static_cast<int>(img.width), static_cast<int>(img.height));
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const png_byte* p = &buf[i * 4];
    const float a = p[3] / 255.0f;
    const float lum = luminance(p[0] / 255.0f, p[1] / 255.0f, p[2] / 255.0f);
    out.pixels[i] = std::clamp(a * lum + (1.0f - a), 0.0f, 1.0f);
  }
  return out;
}

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_fail(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

GrayImage decode_jpeg(const std::string& path) {
  File f(std::fopen(path.c_str(), "rb"));
  if (!f) decode_error(path, "cannot open");
  jpeg_decompress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_fail;
  std::vector<unsigned char> pixels;
  int w = 0, h = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    decode_error(path, err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  w = static_cast<int>(cinfo.output_width);
  h = static_cast<int>(cinfo.output_height);
  pixels.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = &pixels[static_cast<std::size_t>(cinfo.output_scanline) * static_cast<std::size_t>(w) * 3];
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  if (w == 0 || h == 0) throw Error(ErrorKind::EmptyImage, path + " has no pixels");
  GrayImage out(w, h);
  for (std::size_t i = 0; i < out.pixels.size(); ++i)
    out.pixels[i] = luminance(pixels[i * 3] / 255.0f, pixels[i * 3 + 1] / 255.0f, pixels[i * 3 + 2] / 255.0f);
  return out;
}

}  // namespace

GrayImage decode_image(const std::string& path) {
  unsigned char sig[8] = {0};
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) decode_error(path, "cannot open");
    in.read(reinterpret_cast<char*>(sig), 8);
    if (in.gcount() == 0) throw Error(ErrorKind::EmptyImage, path + " is empty");
  }
  static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (std::memcmp(sig, png_sig, 8) == 0) return decode_png(path);
  if (sig[0] == 0xFF && sig[1] == 0xD8) return decode_jpeg(path);
  decode_error(path, "not a PNG or JPEG file");
}

TableImage load_external_image(const std::string& path, AspectMode mode, int side) {
  return fit_to_square(decode_image(path), mode, side);
}

void write_png(const std::string& path, const GrayImage& image) {
  if (image.width <= 0 || image.height <= 0) throw Error(ErrorKind::EmptyImage, "cannot write an empty image");
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buf(image.pixels.size());
  for (std::size_t i = 0; i < buf.size(); ++i)
    buf[i] = static_cast<png_byte>(std::lround(std::clamp(image.pixels[i], 0.0f, 1.0f) * 255.0f));
  if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr))
    throw Error(ErrorKind::DecodeError, path + ": " + img.message);
}

void write_png(const std::string& path, const TableImage& image) {
  GrayImage g;
  g.width = image.width;
  g.height = image.height;
  g.pixels = image.pixels;
  write_png(path, g);
}

}  // namespace tablatex::corpus
