#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ragmem {

inline constexpr std::size_t kEncodedAttributeCount = 10;
inline constexpr std::size_t kAttributeCodeDim = 32;
inline constexpr std::size_t kAttributeFeatureDim = kEncodedAttributeCount * kAttributeCodeDim;

struct AttributeSpec {
  std::string_view key;
  std::vector<std::string_view> vocabulary;
};

/// The ten encoded garment attributes, in concatenation order.
const std::array<AttributeSpec, kEncodedAttributeCount>& encoded_attributes();
/// Metadata-only attributes (print, surface_texture, age, gender).
const std::vector<AttributeSpec>& metadata_attributes();

/// Validated garment attributes. Values are trimmed and must match their
/// vocabulary exactly.
class AttributeSet {
 public:
  /// Throws MissingAttribute if an encoded key is absent, UnknownValue for
  /// out-of-vocabulary values or unknown keys.
  static AttributeSet from_map(const std::map<std::string, std::string>& values);
  static AttributeSet from_json(const nlohmann::json& j);

  /// Encoded value by position in `encoded_attributes()`.
  const std::string& value(std::size_t index) const { return encoded_[index]; }
  const std::string& value(std::string_view key) const;
  const std::string& category() const { return encoded_[0]; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  nlohmann::json to_json() const;

  friend bool operator==(const AttributeSet&, const AttributeSet&) = default;

 private:
  std::array<std::string, kEncodedAttributeCount> encoded_;
  std::map<std::string, std::string> metadata_;
};

/// Fixed, seeded lookup table (attribute, value) -> unit 32-vector.
class AttributeCodebook {
 public:
  /// Each code is 32 draws uniform in [-1, 1] from a per-entry mt19937_64
  /// stream, then L2-normalized. Same seed, same table, on every platform.
  explicit AttributeCodebook(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }
  /// Throws UnknownValue.
  std::span<const double> code(std::size_t attribute, std::string_view value) const;

  nlohmann::json to_json() const;
  /// Throws ValidationFailed if the table is incomplete or misshaped.
  static AttributeCodebook from_json(const nlohmann::json& j);

 private:
  AttributeCodebook() = default;

  std::uint64_t seed_ = 0;
  std::array<std::map<std::string, std::vector<double>, std::less<>>,
             kEncodedAttributeCount>
      codes_;
};

/// Concatenation of the ten code vectors, length 320.
std::vector<double> encode_attributes(const AttributeSet& attrs,
                                      const AttributeCodebook& codebook);

}  // namespace ragmem
