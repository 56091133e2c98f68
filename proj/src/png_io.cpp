#include "uosam/png_io.hpp"

#include <cstdio>
#include <memory>
#include <vector>

#include <png.h>

namespace uosam::png_io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open(const std::filesystem::path& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode));
  if (!f) fail(ErrorCode::Io, "cannot open " + path.string());
  return f;
}

[[noreturn]] void png_error_handler(png_structp, png_const_charp message) { throw Error(ErrorCode::Io, message); }
void png_warning_handler(png_structp, png_const_charp) {}

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : file_(open(path, "rb")), path_(path) {
    std::uint8_t sig[8];
    if (std::fread(sig, 1, 8, file_.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
      fail(ErrorCode::Io, path.string() + " is not a PNG file");
    }
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
    info_ = png_create_info_struct(png_);
    png_init_io(png_, file_.get());
    png_set_sig_bytes(png_, 8);
    png_read_info(png_, info_);
  }
  ~Reader() { png_destroy_read_struct(&png_, &info_, nullptr); }
  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  png_structp png() { return png_; }
  png_infop info() { return info_; }
  const std::filesystem::path& path() const { return path_; }

  std::vector<std::uint8_t> read_rows(int width, int height, int channels) {
    png_read_update_info(png_, info_);
    const auto rowbytes = png_get_rowbytes(png_, info_);
    if (rowbytes != static_cast<std::size_t>(width) * channels) {
      fail(ErrorCode::Io, path_.string() + ": unexpected row layout");
    }
    std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * height * channels);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = data.data() + static_cast<std::size_t>(y) * rowbytes;
    png_read_image(png_, rows.data());
    png_read_end(png_, nullptr);
    return data;
  }

 private:
  File file_;
  std::filesystem::path path_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

void write_png(const std::filesystem::path& path, int width, int height, int color_type, int channels,
               const std::uint8_t* data) {
  File file = open(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_write_struct(png, info); }
  } guard{&png, &info};
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(data + static_cast<std::size_t>(y) * width * channels));
  }
  png_write_end(png, nullptr);
}

}  // namespace

LabelMap read_label_map(const std::filesystem::path& path, ClassId ignore_id) {
  Reader reader(path);
  const int width = static_cast<int>(png_get_image_width(reader.png(), reader.info()));
  const int height = static_cast<int>(png_get_image_height(reader.png(), reader.info()));
  const int color = png_get_color_type(reader.png(), reader.info());
  const int depth = png_get_bit_depth(reader.png(), reader.info());
  if ((color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_PALETTE) || depth > 8) {
    fail(ErrorCode::Io, path.string() + ": label maps must be single-channel 8-bit PNGs");
  }
  if (depth < 8) png_set_packing(reader.png());
  auto data = reader.read_rows(width, height, 1);
  return LabelMap(width, height, std::move(data), ignore_id);
}

void write_label_map(const std::filesystem::path& path, const LabelMap& map) {
  write_png(path, map.width(), map.height(), PNG_COLOR_TYPE_GRAY, 1, map.labels().data());
}

Image read_image(const std::filesystem::path& path) {
  Reader reader(path);
  png_structp png = reader.png();
  png_infop info = reader.info();
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  auto data = reader.read_rows(width, height, 3);
  return Image(width, height, std::move(data));
}

void write_image(const std::filesystem::path& path, const Image& image) {
  write_png(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, 3, image.data().data());
}

}  // namespace uosam::png_io
