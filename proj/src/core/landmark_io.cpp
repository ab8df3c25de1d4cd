#include "ragmem/landmark_io.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

#include "ragmem/error.hpp"

namespace ragmem {

namespace {

constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

struct PngImage {
  png_image image{};
  PngImage() {
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Skips whitespace and '#' comments between PBM header tokens.
class PbmTokenizer {
 public:
  explicit PbmTokenizer(std::string_view text) : text_(text) {}

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    if (start == pos_) throw Error(ErrorCode::Io, "malformed PBM header");
    return std::stoul(std::string(text_.substr(start, pos_ - start)));
  }

  // P1 pixels may be packed without separators ("0110").
  int bit() {
    skip_space();
    if (pos_ >= text_.size()) throw Error(ErrorCode::Io, "truncated PBM data");
    const char c = text_[pos_++];
    if (c == '0') return 0;
    if (c == '1') return 1;
    throw Error(ErrorCode::Io, "invalid PBM pixel");
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

LandmarkMask decode_png(std::span<const std::uint8_t> bytes) {
  PngImage png;
  if (!png_image_begin_read_from_memory(&png.image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::Io, std::string("PNG decode failed: ") + png.image.message);
  }
  png.image.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> gray(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, gray.data(), 0, nullptr)) {
    throw Error(ErrorCode::Io, std::string("PNG decode failed: ") + png.image.message);
  }
  for (auto& g : gray) g = g >= 128 ? 1 : 0;
  return LandmarkMask(png.image.width, png.image.height, std::move(gray));
}

std::string encode_gray_png(std::size_t width, std::size_t height,
                            std::span<const std::uint8_t> gray) {
  if (gray.size() != width * height) {
    throw Error(ErrorCode::ShapeMismatch, "gray buffer does not match image size");
  }
  PngImage png;
  png.image.width = static_cast<png_uint_32>(width);
  png.image.height = static_cast<png_uint_32>(height);
  png.image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(png.image, size, 0, gray.data(), 0, nullptr)) {
    throw Error(ErrorCode::Io, std::string("PNG encode failed: ") + png.image.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&png.image, out.data(), &size, 0, gray.data(), 0,
                                 nullptr)) {
    throw Error(ErrorCode::Io, std::string("PNG encode failed: ") + png.image.message);
  }
  out.resize(size);
  return out;
}

std::string encode_png(const LandmarkMask& mask) {
  std::vector<std::uint8_t> gray(mask.bits().begin(), mask.bits().end());
  for (auto& g : gray) g = g ? 255 : 0;
  return encode_gray_png(mask.width(), mask.height(), gray);
}

LandmarkMask decode_pbm(std::string_view text) {
  if (text.size() < 2 || text[0] != 'P' || (text[1] != '1' && text[1] != '4')) {
    throw Error(ErrorCode::Io, "not a PBM file");
  }
  const bool raw = text[1] == '4';
  PbmTokenizer tok(text.substr(2));
  const std::size_t width = tok.number();
  const std::size_t height = tok.number();
  if (width == 0 || height == 0) throw Error(ErrorCode::Io, "PBM has zero size");
  std::vector<std::uint8_t> bits(width * height);
  if (raw) {
    // Exactly one whitespace byte separates the header from packed rows.
    tok.advance(1);
    const std::size_t stride = (width + 7) / 8;
    const std::size_t offset = 2 + tok.pos();
    if (text.size() < offset + stride * height) {
      throw Error(ErrorCode::Io, "truncated PBM data");
    }
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const auto byte = static_cast<std::uint8_t>(text[offset + y * stride + x / 8]);
        bits[y * width + x] = (byte >> (7 - x % 8)) & 1;
      }
    }
  } else {
    for (auto& b : bits) b = static_cast<std::uint8_t>(tok.bit());
  }
  return LandmarkMask(width, height, std::move(bits));
}

std::string encode_pbm(const LandmarkMask& mask) {
  std::ostringstream out;
  out << "P1\n" << mask.width() << ' ' << mask.height() << '\n';
  for (std::size_t y = 0; y < mask.height(); ++y) {
    // Plain PBM lines should stay under 70 characters.
    for (std::size_t x = 0; x < mask.width(); ++x) {
      out << (mask.at(x, y) ? '1' : '0');
      if ((x + 1) % 64 == 0 && x + 1 < mask.width()) out << '\n';
    }
    out << '\n';
  }
  return out.str();
}

LandmarkMask decode_mask(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '1' || bytes[1] == '4')) {
    return decode_pbm(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                       bytes.size()));
  }
  throw Error(ErrorCode::Io, "unrecognized mask format");
}

LandmarkMask read_mask(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  try {
    return decode_mask(std::span(reinterpret_cast<const std::uint8_t*>(data.data()),
                                 data.size()));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_mask(const LandmarkMask& mask, const std::filesystem::path& path,
                MaskFormat format) {
  const std::string data = format == MaskFormat::Png ? encode_png(mask) : encode_pbm(mask);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

void write_mask(const LandmarkMask& mask, const std::filesystem::path& path) {
  write_mask(mask, path, path.extension() == ".pbm" ? MaskFormat::Pbm : MaskFormat::Png);
}

}  // namespace ragmem
