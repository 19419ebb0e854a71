#include "patchvote/codec.hpp"

#include <jpeglib.h>
#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <vector>

namespace patchvote {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& reason) {
  throw std::runtime_error("cannot decode '" + path + "': " + reason);
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Raster decode_png(const std::string& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    fail(path, image.message);

  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    fail(path, "16-bit PNG not supported (expected 8-bit samples)");
  }
  if (image.format & PNG_FORMAT_FLAG_ALPHA) {
    png_image_free(&image);
    fail(path, "alpha channel not supported (expected RGB or grayscale)");
  }

  image.format = PNG_FORMAT_RGB;  // grayscale/palette expand to RGB
  Raster out(int(image.width), int(image.height));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    fail(path, msg);
  }
  return out;
}

// libjpeg reports errors through longjmp; trampoline them into exceptions.
struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_trampoline(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// The setjmp-protected bodies live in helpers whose locals are never
// modified after setjmp; longjmp leaves modified automatic objects
// indeterminate, and GCC warns about any candidate.
bool decode_jpeg_body(jpeg_decompress_struct* cinfo, JpegErrorMgr* err,
                      std::FILE* file, Raster* out) {
  if (setjmp(err->jump)) return false;
  jpeg_create_decompress(cinfo);
  jpeg_stdio_src(cinfo, file);
  jpeg_read_header(cinfo, TRUE);
  cinfo->out_color_space = JCS_RGB;  // grayscale expands to RGB
  jpeg_start_decompress(cinfo);

  *out = Raster(int(cinfo->output_width), int(cinfo->output_height));
  while (cinfo->output_scanline < cinfo->output_height) {
    JSAMPROW row = out->at(0, int(cinfo->output_scanline));
    jpeg_read_scanlines(cinfo, &row, 1);
  }
  jpeg_finish_decompress(cinfo);
  return true;
}

Raster decode_jpeg(const std::string& path, std::FILE* file) {
  Raster out;
  jpeg_decompress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_trampoline;
  bool ok = decode_jpeg_body(&cinfo, &err, file, &out);
  jpeg_destroy_decompress(&cinfo);
  if (!ok) fail(path, err.message);
  return out;
}

}  // namespace

Raster decode_image(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) fail(path, "cannot open file");

  unsigned char magic[8] = {};
  size_t got = std::fread(magic, 1, sizeof(magic), file.get());
  static const unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G',
                                           '\r', '\n', 0x1a, '\n'};
  if (got >= 8 && std::memcmp(magic, kPngSig, 8) == 0) {
    file.reset();
    return decode_png(path);
  }
  if (got >= 3 && magic[0] == 0xff && magic[1] == 0xd8 && magic[2] == 0xff) {
    std::rewind(file.get());
    return decode_jpeg(path, file.get());
  }
  fail(path, "not a PNG or JPEG file");
}

void write_png(const std::string& path, const Raster& raster) {
  if (raster.empty())
    throw std::runtime_error("cannot write empty raster to '" + path + "'");
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = png_uint_32(raster.width);
  image.height = png_uint_32(raster.height);
  image.format = PNG_FORMAT_RGB;
  // FAST trades file size for encode speed; the flag also pins the filter
  // and zlib strategy, keeping output byte-stable.
  image.flags = PNG_IMAGE_FLAG_FAST;
  if (!png_image_write_to_file(&image, path.c_str(), 0, raster.pixels.data(),
                               0, nullptr))
    throw std::runtime_error("cannot write '" + path + "': " + image.message);
}

namespace {

bool encode_jpeg_body(jpeg_compress_struct* cinfo, JpegErrorMgr* err,
                      std::FILE* file, const Raster& raster, uint8_t* row_copy,
                      int quality) {
  if (setjmp(err->jump)) return false;
  jpeg_create_compress(cinfo);
  jpeg_stdio_dest(cinfo, file);
  cinfo->image_width = JDIMENSION(raster.width);
  cinfo->image_height = JDIMENSION(raster.height);
  cinfo->input_components = Raster::kChannels;
  cinfo->in_color_space = JCS_RGB;
  jpeg_set_defaults(cinfo);
  jpeg_set_quality(cinfo, quality, TRUE);
  jpeg_start_compress(cinfo, TRUE);
  size_t row_bytes = size_t(raster.width) * Raster::kChannels;
  while (cinfo->next_scanline < cinfo->image_height) {
    std::memcpy(row_copy, raster.at(0, int(cinfo->next_scanline)), row_bytes);
    JSAMPROW row = row_copy;
    jpeg_write_scanlines(cinfo, &row, 1);
  }
  jpeg_finish_compress(cinfo);
  return true;
}

}  // namespace

void write_jpeg(const std::string& path, const Raster& raster, int quality) {
  if (quality < 1 || quality > 100)
    throw std::invalid_argument("jpeg quality must be in 1..100, got " +
                                std::to_string(quality));
  if (raster.empty())
    throw std::runtime_error("cannot write empty raster to '" + path + "'");
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw std::runtime_error("cannot write '" + path + "'");
  std::vector<uint8_t> row_copy(size_t(raster.width) * Raster::kChannels);

  jpeg_compress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_trampoline;
  bool ok = encode_jpeg_body(&cinfo, &err, file.get(), raster, row_copy.data(),
                             quality);
  jpeg_destroy_compress(&cinfo);
  if (!ok) throw std::runtime_error("cannot write '" + path + "': " + err.message);
}

}  // namespace patchvote
