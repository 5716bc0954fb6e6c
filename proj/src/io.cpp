#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "canpr/error.hpp"
#include "canpr/imgcore.hpp"

namespace canpr {

namespace fs = std::filesystem;

std::uint8_t to_byte(double v) noexcept {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

namespace {

struct PngImageGuard {
  png_image* image;
  ~PngImageGuard() { png_image_free(image); }
};

[[noreturn]] void io_error(const std::string& what, const fs::path& path) {
  throw Error(ErrorKind::Io, what + ": " + path.string());
}

}  // namespace

ImageF load_png(const fs::path& path) {
  if (!fs::exists(path)) io_error("no such file", path);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  PngImageGuard guard{&image};
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw Error(ErrorKind::UnsupportedFormat,
                "cannot decode PNG " + path.string() + " (" + image.message + ")");
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    throw Error(ErrorKind::UnsupportedFormat,
                "16-bit PNG is not supported: " + path.string());
  }
  image.format = PNG_FORMAT_RGBA;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    throw Error(ErrorKind::UnsupportedFormat,
                "cannot decode PNG " + path.string() + " (" + image.message + ")");
  }
  const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
  ImageF out(w, h, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const png_byte* px = &buf[(static_cast<std::size_t>(y) * w + x) * 4];
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = px[c] / 255.0;
    }
  }
  return out;
}

void save_png(const ImageF& img, const fs::path& path) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw_invalid("save_png supports 1 or 3 channels, got " + std::to_string(img.channels()));
  }
  const int w = img.width(), h = img.height(), nc = img.channels();
  std::vector<png_byte> buf(static_cast<std::size_t>(w) * h * nc);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < nc; ++c)
        buf[(static_cast<std::size_t>(y) * w + x) * nc + c] = to_byte(img.at(x, y, c));

  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = nc == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  PngImageGuard guard{&image};
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buf.data(), 0, nullptr)) {
    io_error(std::string("cannot write PNG (") + image.message + ")", path);
  }
}

namespace {

void write_pgm_bytes(int w, int h, const std::vector<std::uint8_t>& bytes, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_error("cannot open for writing", path);
  out << "P5\n" << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) io_error("write failed", path);
}

}  // namespace

void save_pgm(const BinaryMask& mask, const fs::path& path) {
  std::vector<std::uint8_t> bytes(mask.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask[i] ? 255 : 0;
  write_pgm_bytes(mask.width(), mask.height(), bytes, path);
}

void save_pgm(const ImageF& gray, const fs::path& path) {
  if (gray.channels() != 1) throw_invalid("save_pgm expects a single-channel image");
  std::vector<std::uint8_t> bytes(gray.plane_size());
  auto src = gray.plane(0);
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(src[i]);
  write_pgm_bytes(gray.width(), gray.height(), bytes, path);
}

BinaryMask load_pgm_mask(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error("cannot open", path);
  auto next_token = [&]() {
    std::string tok;
    while (tok.empty()) {
      int ch = in.get();
      if (ch == EOF) break;
      if (ch == '#') {
        std::string ignored;
        std::getline(in, ignored);
      } else if (!std::isspace(ch)) {
        tok.push_back(static_cast<char>(ch));
        while (in && !std::isspace(in.peek()) && in.peek() != EOF) tok.push_back(static_cast<char>(in.get()));
      }
    }
    return tok;
  };
  if (next_token() != "P5") throw Error(ErrorKind::UnsupportedFormat, "not a binary PGM: " + path.string());
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw Error(ErrorKind::UnsupportedFormat, "malformed PGM header: " + path.string());
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw Error(ErrorKind::UnsupportedFormat, "unsupported PGM header: " + path.string());
  }
  in.get();  // single whitespace after maxval
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) io_error("truncated PGM", path);
  BinaryMask mask(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) mask.set(x, y, bytes[static_cast<std::size_t>(y) * w + x] != 0);
  return mask;
}

}  // namespace canpr
