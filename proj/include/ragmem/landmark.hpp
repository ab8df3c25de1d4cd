#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ragmem {

/// Default silhouette resolution of the generation pipeline.
inline constexpr std::size_t kDefaultLandmarkSide = 768;

/// Axis-aligned box in pixel coordinates, half-open: [x0, x1) x [y0, y1).
struct BoundingBox {
  std::size_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  std::size_t width() const noexcept { return x1 - x0; }
  std::size_t height() const noexcept { return y1 - y0; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Binary silhouette raster, row-major, one byte (0/1) per pixel.
class LandmarkMask {
 public:
  /// All-background mask. Throws ShapeMismatch for a zero dimension.
  LandmarkMask(std::size_t width, std::size_t height);
  /// Any nonzero byte counts as foreground.
  LandmarkMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> bits);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool at(std::size_t x, std::size_t y) const { return bits_[y * width_ + x] != 0; }
  void set(std::size_t x, std::size_t y, bool on) { bits_[y * width_ + x] = on ? 1 : 0; }
  /// Sets every pixel of [x0,x1) x [y0,y1), clipped to the raster.
  void fill_rect(std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1,
                 bool on = true);

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::size_t foreground_count() const noexcept;
  bool empty() const noexcept { return foreground_count() == 0; }
  bool same_shape(const LandmarkMask& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// Tight box around the foreground; nullopt for an empty mask.
  std::optional<BoundingBox> bounding_box() const;
  LandmarkMask crop(const BoundingBox& box) const;
  /// Nearest-neighbour resample: source pixel floor((x + 0.5) * w / W).
  LandmarkMask resized(std::size_t width, std::size_t height) const;

  friend bool operator==(const LandmarkMask&, const LandmarkMask&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> bits_;
};

}  // namespace ragmem
