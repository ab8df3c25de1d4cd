#include "ragmem/landmark.hpp"

#include <algorithm>
#include <string>

#include "ragmem/error.hpp"

namespace ragmem {

LandmarkMask::LandmarkMask(std::size_t width, std::size_t height)
    : LandmarkMask(width, height, std::vector<std::uint8_t>(width * height, 0)) {}

LandmarkMask::LandmarkMask(std::size_t width, std::size_t height,
                           std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::ShapeMismatch, "landmark mask must have positive size");
  }
  if (bits_.size() != width * height) {
    throw Error(ErrorCode::ShapeMismatch,
                "landmark bits length " + std::to_string(bits_.size()) +
                    " does not match " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  for (auto& b : bits_) b = b ? 1 : 0;
}

void LandmarkMask::fill_rect(std::size_t x0, std::size_t y0, std::size_t x1,
                             std::size_t y1, bool on) {
  x1 = std::min(x1, width_);
  y1 = std::min(y1, height_);
  for (std::size_t y = y0; y < y1; ++y) {
    for (std::size_t x = x0; x < x1; ++x) set(x, y, on);
  }
}

std::size_t LandmarkMask::foreground_count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::optional<BoundingBox> LandmarkMask::bounding_box() const {
  BoundingBox box{width_, height_, 0, 0};
  bool any = false;
  for (std::size_t y = 0; y < height_; ++y) {
    for (std::size_t x = 0; x < width_; ++x) {
      if (!at(x, y)) continue;
      any = true;
      box.x0 = std::min(box.x0, x);
      box.y0 = std::min(box.y0, y);
      box.x1 = std::max(box.x1, x + 1);
      box.y1 = std::max(box.y1, y + 1);
    }
  }
  if (!any) return std::nullopt;
  return box;
}

LandmarkMask LandmarkMask::crop(const BoundingBox& box) const {
  if (box.x1 > width_ || box.y1 > height_ || box.x0 >= box.x1 || box.y0 >= box.y1) {
    throw Error(ErrorCode::ShapeMismatch, "crop box outside mask");
  }
  LandmarkMask out(box.width(), box.height());
  for (std::size_t y = 0; y < out.height_; ++y) {
    for (std::size_t x = 0; x < out.width_; ++x) {
      out.set(x, y, at(box.x0 + x, box.y0 + y));
    }
  }
  return out;
}

LandmarkMask LandmarkMask::resized(std::size_t width, std::size_t height) const {
  LandmarkMask out(width, height);
  for (std::size_t y = 0; y < height; ++y) {
    const std::size_t sy = std::min(height_ - 1, (2 * y + 1) * height_ / (2 * height));
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t sx = std::min(width_ - 1, (2 * x + 1) * width_ / (2 * width));
      out.set(x, y, at(sx, sy));
    }
  }
  return out;
}

}  // namespace ragmem
