#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ragmem {

inline constexpr std::size_t kDefaultEmbeddingDim = 768;
inline constexpr double kZeroNormThreshold = 1e-12;

/// Unit-length structure embedding. Immutable once constructed; every
/// similarity in the engine is cosine, so ingest always lands on the sphere.
class StructureEmbedding {
 public:
  /// Scales `values` to unit L2 norm. Throws ZeroVector / NonFinite.
  static StructureEmbedding normalize(std::span<const double> values);
  static StructureEmbedding normalize(std::span<const float> values);

  /// Adopts an already-normalized vector without rescaling it, so that
  /// float32-quantized rows survive a load/save cycle bit-for-bit.
  /// Throws NonFinite, or ZeroVector if the norm is off by more than `tolerance`.
  static StructureEmbedding from_unit(std::vector<double> values,
                                      double tolerance = 1e-6);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Rounds every component through float32 (storage precision).
  StructureEmbedding quantized() const;

  friend bool operator==(const StructureEmbedding&,
                         const StructureEmbedding&) = default;

 private:
  explicit StructureEmbedding(std::vector<double> values)
      : values_(std::move(values)) {}

  std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

/// Free-function spelling of StructureEmbedding::normalize.
inline StructureEmbedding normalize(std::span<const double> values) {
  return StructureEmbedding::normalize(values);
}

/// f_img followed by f_attr. Throws DimMismatch when either length differs
/// from the expected one.
std::vector<double> concat_features(std::span<const double> image_features,
                                    std::span<const double> attribute_features,
                                    std::size_t image_dim = 768,
                                    std::size_t attribute_dim = 320);

}  // namespace ragmem
