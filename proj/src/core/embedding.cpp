#include "ragmem/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ragmem/error.hpp"

namespace ragmem {

namespace {

void require_finite(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::NonFinite,
                  "embedding component " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace

StructureEmbedding StructureEmbedding::normalize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::ZeroVector, "embedding is empty");
  require_finite(values);
  const double n = l2_norm(values);
  if (!(n > kZeroNormThreshold)) {
    throw Error(ErrorCode::ZeroVector, "cannot normalize a zero-length vector");
  }
  std::vector<double> out(values.begin(), values.end());
  for (auto& x : out) x /= n;
  return StructureEmbedding(std::move(out));
}

StructureEmbedding StructureEmbedding::normalize(std::span<const float> values) {
  std::vector<double> widened(values.begin(), values.end());
  return normalize(std::span<const double>(widened));
}

StructureEmbedding StructureEmbedding::from_unit(std::vector<double> values,
                                                 double tolerance) {
  if (values.empty()) throw Error(ErrorCode::ZeroVector, "embedding is empty");
  require_finite(values);
  const double n = l2_norm(values);
  if (std::abs(n - 1.0) > tolerance) {
    throw Error(ErrorCode::ValidationFailed,
                "embedding norm " + std::to_string(n) + " is not unit");
  }
  return StructureEmbedding(std::move(values));
}

StructureEmbedding StructureEmbedding::quantized() const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<double>(static_cast<float>(values_[i]));
  }
  return StructureEmbedding(std::move(out));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimMismatch, "dot product of vectors with dims " +
                                            std::to_string(a.size()) + " and " +
                                            std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> v) {
  // Two-pass scaled norm; avoids overflow on huge raw feature vectors.
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double x : v) {
    const double y = x / scale;
    s += y * y;
  }
  return scale * std::sqrt(s);
}

std::vector<double> concat_features(std::span<const double> image_features,
                                    std::span<const double> attribute_features,
                                    std::size_t image_dim,
                                    std::size_t attribute_dim) {
  if (image_features.size() != image_dim ||
      attribute_features.size() != attribute_dim) {
    throw Error(ErrorCode::DimMismatch,
                "expected feature lengths (" + std::to_string(image_dim) + ", " +
                    std::to_string(attribute_dim) + "), got (" +
                    std::to_string(image_features.size()) + ", " +
                    std::to_string(attribute_features.size()) + ")");
  }
  std::vector<double> out;
  out.reserve(image_dim + attribute_dim);
  out.insert(out.end(), image_features.begin(), image_features.end());
  out.insert(out.end(), attribute_features.begin(), attribute_features.end());
  return out;
}

}  // namespace ragmem
