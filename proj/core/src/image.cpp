#include "unseg/image.hpp"

#include <png.h>

#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "unseg/error.hpp"

namespace unseg {
namespace fs = std::filesystem;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(Errc::io, "cannot open: " + path.string());
  return f;
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

bool has_png_signature(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open: " + path.string());
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

// ---- PNG --------------------------------------------------------------------

struct PngDecoded {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;
};

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<std::string*>(png_get_error_ptr(png));
  if (buf) *buf = msg;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

// Reads an 8-bit PNG. With want_rgb, grayscale and palette images are
// expanded to three channels; otherwise only single-channel input is allowed
// and palette indices are returned as-is.
PngDecoded decode_png(const fs::path& path, bool want_rgb, bool header_only) {
  auto file = open_file(path, "rb");
  std::string error_message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error_message,
                                           png_error_handler, png_warning_handler);
  if (!png) throw Error(Errc::io, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(Errc::io, "libpng init failed");
  }
  PngDecoded out;
  std::vector<png_bytep> rows;
  auto reject = [&](Errc code, const std::string& why) {
    png_destroy_read_struct(&png, &info, nullptr);
    return Error(code, path.string() + ": " + why);
  };
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(Errc::bad_format, path.string() + ": " + error_message);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (header_only) {
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
  }
  if (!want_rgb) {
    if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_PALETTE) {
      throw reject(Errc::channels,
                   "expected a single-channel image, got color type " +
                       std::to_string(color));
    }
    if (depth != 8) {
      throw reject(Errc::bit_depth,
                   "expected bit depth 8, got " + std::to_string(depth));
    }
    out.channels = 1;
  } else {
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
      png_set_gray_to_rgb(png);
    }
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    out.channels = 3;
  }
  png_read_update_info(png, info);
  const auto rowbytes = png_get_rowbytes(png, info);
  if (rowbytes != static_cast<std::size_t>(out.width) * out.channels) {
    throw reject(Errc::bad_format, "unexpected row layout");
  }
  out.pixels.resize(rowbytes * out.height);
  rows.resize(out.height);
  for (int y = 0; y < out.height; ++y) rows[y] = out.pixels.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void encode_png(const fs::path& path, int width, int height, int channels,
                const std::uint8_t* pixels) {
  auto file = open_file(path, "wb");
  std::string error_message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error_message,
                                            png_error_handler, png_warning_handler);
  if (!png) throw Error(Errc::io, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(Errc::io, "libpng init failed");
  }
  std::vector<png_bytep> rows(height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::io, path.string() + ": " + error_message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(pixels + static_cast<std::size_t>(y) * width * channels);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// ---- PNM --------------------------------------------------------------------

struct PnmHeader {
  char kind = 0;  // '5' or '6'
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::streamoff data_offset = 0;
};

PnmHeader read_pnm_header(std::istream& in, const fs::path& path) {
  auto fail = [&](const std::string& why) {
    return Error(Errc::bad_format, path.string() + ": " + why);
  };
  char p = 0;
  PnmHeader h;
  in.get(p);
  in.get(h.kind);
  if (p != 'P') throw fail("not a PNM file");
  if (h.kind == '2' || h.kind == '3') throw fail("ASCII PNM is not supported");
  if (h.kind != '5' && h.kind != '6') throw fail("unsupported PNM kind");
  auto next_int = [&]() {
    int c = in.peek();
    while (c != EOF) {
      if (std::isspace(c)) {
        in.get();
      } else if (c == '#') {
        std::string comment;
        std::getline(in, comment);
      } else {
        break;
      }
      c = in.peek();
    }
    int v = -1;
    if (!(in >> v)) throw fail("malformed header");
    return v;
  };
  h.width = next_int();
  h.height = next_int();
  h.maxval = next_int();
  in.get();  // single whitespace before the raster
  if (h.width <= 0 || h.height <= 0) throw fail("non-positive dimensions");
  if (h.maxval <= 0 || h.maxval > 65535) throw fail("invalid maxval");
  h.data_offset = in.tellg();
  return h;
}

std::vector<std::uint8_t> read_pnm_raster(const fs::path& path, char want_kind,
                                          int& width, int& height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open: " + path.string());
  const auto h = read_pnm_header(in, path);
  if (h.maxval > 255) {
    throw Error(Errc::bit_depth, path.string() + ": expected 8-bit PNM (maxval <= 255)");
  }
  if (h.kind != want_kind) {
    throw Error(Errc::channels, path.string() + ": wrong PNM channel layout");
  }
  const int channels = h.kind == '5' ? 1 : 3;
  std::vector<std::uint8_t> data(static_cast<std::size_t>(h.width) * h.height * channels);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (static_cast<std::size_t>(in.gcount()) != data.size()) {
    throw Error(Errc::truncated, path.string() + ": PNM raster truncated");
  }
  width = h.width;
  height = h.height;
  return data;
}

void write_pnm(const fs::path& path, char kind, int width, int height,
               const std::vector<std::uint8_t>& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open for writing: " + path.string());
  out << 'P' << kind << '\n' << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(Errc::io, "write failed: " + path.string());
}

struct Gray8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;
};

Gray8 read_gray8(const fs::path& path) {
  Gray8 g;
  if (has_png_signature(path)) {
    auto d = decode_png(path, false, false);
    g.width = d.width;
    g.height = d.height;
    g.values = std::move(d.pixels);
    return g;
  }
  std::ifstream probe(path, std::ios::binary);
  char head[2] = {};
  probe.read(head, 2);
  if (head[0] == 'P' && head[1] == '6') {
    throw Error(Errc::channels, path.string() + ": expected a single-channel image");
  }
  g.values = read_pnm_raster(path, '5', g.width, g.height);
  return g;
}

void write_gray8(const fs::path& path, int width, int height,
                 const std::vector<std::uint8_t>& values) {
  if (values.size() != static_cast<std::size_t>(width) * height) {
    throw Error(Errc::invalid_argument, "image buffer does not match dimensions");
  }
  const auto ext = lower_extension(path);
  if (ext == ".png") {
    encode_png(path, width, height, 1, values.data());
  } else if (ext == ".pgm") {
    write_pnm(path, '5', width, height, values);
  } else {
    throw Error(Errc::invalid_argument,
                "unsupported mask extension '" + ext + "' (use .png or .pgm)");
  }
}

}  // namespace

LabelMask::LabelMask(int w, int h, std::uint8_t fill)
    : width(w), height(h), labels(static_cast<std::size_t>(w) * h, fill) {}

LabelMask read_mask(const fs::path& path) {
  auto g = read_gray8(path);
  LabelMask m;
  m.width = g.width;
  m.height = g.height;
  m.labels = std::move(g.values);
  return m;
}

void write_mask(const LabelMask& mask, const fs::path& path) {
  write_gray8(path, mask.width, mask.height, mask.labels);
}

SaliencyMap read_saliency(const fs::path& path) {
  auto g = read_gray8(path);
  return SaliencyMap{g.width, g.height, std::move(g.values)};
}

void write_saliency(const SaliencyMap& map, const fs::path& path) {
  write_gray8(path, map.width, map.height, map.values);
}

RgbImage read_rgb(const fs::path& path) {
  RgbImage img;
  if (has_png_signature(path)) {
    auto d = decode_png(path, true, false);
    img.width = d.width;
    img.height = d.height;
    img.pixels = std::move(d.pixels);
    return img;
  }
  std::ifstream probe(path, std::ios::binary);
  char head[2] = {};
  probe.read(head, 2);
  if (head[0] == 'P' && head[1] == '5') {
    auto gray = read_pnm_raster(path, '5', img.width, img.height);
    img.pixels.reserve(gray.size() * 3);
    for (auto v : gray) img.pixels.insert(img.pixels.end(), {v, v, v});
    return img;
  }
  img.pixels = read_pnm_raster(path, '6', img.width, img.height);
  return img;
}

void write_rgb_png(const RgbImage& image, const fs::path& path) {
  if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw Error(Errc::invalid_argument, "RGB buffer does not match dimensions");
  }
  encode_png(path, image.width, image.height, 3, image.pixels.data());
}

ImageSize read_image_size(const fs::path& path) {
  if (has_png_signature(path)) {
    auto d = decode_png(path, true, true);
    return {d.width, d.height};
  }
  std::ifstream in(path, std::ios::binary);
  const auto h = read_pnm_header(in, path);
  return {h.width, h.height};
}

LabelMask resize_nearest(const LabelMask& mask, int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(Errc::invalid_argument, "resize target must be positive");
  }
  if (width == mask.width && height == mask.height) return mask;
  LabelMask out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = static_cast<int>((static_cast<std::int64_t>(2 * y + 1) * mask.height) /
                                    (2 * static_cast<std::int64_t>(height)));
    for (int x = 0; x < width; ++x) {
      const int sx = static_cast<int>((static_cast<std::int64_t>(2 * x + 1) * mask.width) /
                                      (2 * static_cast<std::int64_t>(width)));
      out.at(x, y) = mask.at(sx, sy);
    }
  }
  return out;
}

}  // namespace unseg
