#include "ragmem/attributes.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ragmem/error.hpp"

namespace ragmem {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

bool in_vocabulary(const AttributeSpec& spec, std::string_view value) {
  return std::find(spec.vocabulary.begin(), spec.vocabulary.end(), value) !=
         spec.vocabulary.end();
}

// FNV-1a, then splitmix64 finalizer: one independent stream per table entry.
std::uint64_t entry_seed(std::uint64_t seed, std::string_view key, std::string_view value) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  feed(key);
  h ^= 0xff;
  h *= 0x100000001b3ULL;
  feed(value);
  std::uint64_t z = seed ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<double> make_code(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> code(kAttributeCodeDim);
  double norm2 = 0.0;
  for (auto& c : code) {
    // 53 high bits -> [0,1) -> [-1,1); bit-exact unlike uniform_real_distribution.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    c = 2.0 * u - 1.0;
    norm2 += c * c;
  }
  const double n = std::sqrt(norm2);
  for (auto& c : code) c /= n;
  return code;
}

}  // namespace

const std::array<AttributeSpec, kEncodedAttributeCount>& encoded_attributes() {
  static const std::array<AttributeSpec, kEncodedAttributeCount> specs = {{
      {"category",
       {"T-shirt", "Hoodie", "Shirt", "Polo", "Tank", "Vest", "Swimsuit", "Sweater",
        "Innerwear", "Windbreaker", "Down Jacket", "Jacket", "Suit", "Waistcoat", "Shawl",
        "Dress", "Skirt", "Knitted Coat", "Leather Short Coat", "Leather Long Coat",
        "Denim Jacket", "Robe", "Loungewear Top", "Loungewear Dress", "Sports Jacket",
        "Knitted Cardigan", "Leather Jacket"}},
      {"fit", {"Loose", "Regular", "Slim"}},
      {"collar",
       {"Suit", "Shirt", "Notched", "Rounded", "Ruffled", "Naval", "Hooded", "Polo",
        "V-neck", "Square", "Round", "Strapless", "One-shoulder", "Off-shoulder",
        "Neckline", "Stand-up", "Baseball"}},
      {"sleeve_length", {"Sleeveless", "Short", "Mid", "Long", "Extra Long"}},
      {"fabric",
       {"Gauze", "Tweed", "Fur", "Chiffon", "Denim", "PVC", "Micro-Suede", "Fleece",
        "Corduroy", "Knit", "Lace", "Synthetic", "Stretch", "Linen", "Wool", "Silk",
        "Knitting", "Leather", "Velvet", "Fur Blend", "Coated", "Mixed", "Special Fabric"}},
      {"length", {"Extra Short", "Short", "Medium", "Long", "Extra Long", "Uncertain"}},
      {"with_inner_wear", {"Yes", "No"}},
      {"sleeves_rolled_up", {"Yes", "No"}},
      {"top_open", {"Yes", "No"}},
      {"top_tuck_in", {"Yes", "No"}},
  }};
  return specs;
}

const std::vector<AttributeSpec>& metadata_attributes() {
  static const std::vector<AttributeSpec> specs = {
      {"print",
       {"Floral", "Animal", "Skull", "Character", "Paisley", "Baroque", "Traditional",
        "Cartoon", "Artistic", "Tech", "Hand-painted", "Striped", "Plaid", "Heart",
        "Polka Dot", "Star", "Tie-dye", "Camouflage", "Linear", "Text", "Logo",
        "Geometric", "Color Block", "Mixed", "3D Floral", "Solid Color", "Nature Scene",
        "Objects"}},
      {"surface_texture",
       {"Layered", "Tied", "Slit", "Cutout", "Ruched", "Pleated", "Spliced", "Ruffle",
        "Contrast Stitching", "Quilted", "Gathered", "Applique", "Overlay",
        "Hand Decorated", "Beaded", "Washed", "Dyed", "Distressed", "Frayed", "Printed",
        "Splatter", "Foil", "Rhinestone", "Flocked", "Embroidered", "Edge Decoration",
        "Embossed", "Punched", "Knit Rib", "No Craft"}},
      {"age", {"Adult", "Child"}},
      {"gender", {"Female", "Male"}},
  };
  return specs;
}

AttributeSet AttributeSet::from_map(const std::map<std::string, std::string>& values) {
  AttributeSet out;
  const auto& encoded = encoded_attributes();
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    const auto it = values.find(std::string(encoded[i].key));
    if (it == values.end()) {
      throw Error(ErrorCode::MissingAttribute,
                  "missing attribute '" + std::string(encoded[i].key) + "'");
    }
    std::string v = trim(it->second);
    if (!in_vocabulary(encoded[i], v)) {
      throw Error(ErrorCode::UnknownValue, "unknown value '" + v + "' for attribute '" +
                                               std::string(encoded[i].key) + "'");
    }
    out.encoded_[i] = std::move(v);
  }
  for (const auto& [key, raw] : values) {
    const bool is_encoded =
        std::any_of(encoded.begin(), encoded.end(),
                    [&key](const AttributeSpec& s) { return s.key == key; });
    if (is_encoded) continue;
    const auto& meta = metadata_attributes();
    const auto spec = std::find_if(meta.begin(), meta.end(),
                                   [&key](const AttributeSpec& s) { return s.key == key; });
    if (spec == meta.end()) {
      throw Error(ErrorCode::UnknownValue, "unknown attribute '" + key + "'");
    }
    std::string v = trim(raw);
    if (!in_vocabulary(*spec, v)) {
      throw Error(ErrorCode::UnknownValue,
                  "unknown value '" + v + "' for attribute '" + key + "'");
    }
    out.metadata_[key] = std::move(v);
  }
  return out;
}

AttributeSet AttributeSet::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::UnknownValue, "attributes must be an object");
  std::map<std::string, std::string> values;
  for (const auto& [key, v] : j.items()) {
    if (!v.is_string()) {
      throw Error(ErrorCode::UnknownValue, "attribute '" + key + "' must be a string");
    }
    values[key] = v.get<std::string>();
  }
  return from_map(values);
}

const std::string& AttributeSet::value(std::string_view key) const {
  const auto& encoded = encoded_attributes();
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (encoded[i].key == key) return encoded_[i];
  }
  const auto it = metadata_.find(std::string(key));
  if (it == metadata_.end()) {
    throw Error(ErrorCode::MissingAttribute, "attribute '" + std::string(key) + "' not set");
  }
  return it->second;
}

nlohmann::json AttributeSet::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  const auto& encoded = encoded_attributes();
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    j[std::string(encoded[i].key)] = encoded_[i];
  }
  for (const auto& [k, v] : metadata_) j[k] = v;
  return j;
}

AttributeCodebook::AttributeCodebook(std::uint64_t seed) : seed_(seed) {
  const auto& encoded = encoded_attributes();
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    for (const auto value : encoded[i].vocabulary) {
      codes_[i].emplace(std::string(value),
                        make_code(entry_seed(seed, encoded[i].key, value)));
    }
  }
}

std::span<const double> AttributeCodebook::code(std::size_t attribute,
                                                std::string_view value) const {
  if (attribute >= kEncodedAttributeCount) {
    throw Error(ErrorCode::UnknownValue, "attribute index out of range");
  }
  const auto it = codes_[attribute].find(value);
  if (it == codes_[attribute].end()) {
    throw Error(ErrorCode::UnknownValue,
                "no code for " + std::string(encoded_attributes()[attribute].key) + "='" +
                    std::string(value) + "'");
  }
  return it->second;
}

nlohmann::json AttributeCodebook::to_json() const {
  nlohmann::json codes = nlohmann::json::object();
  const auto& encoded = encoded_attributes();
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    auto& table = codes[std::string(encoded[i].key)];
    table = nlohmann::json::object();
    for (const auto& [value, code] : codes_[i]) table[value] = code;
  }
  return {{"seed", seed_}, {"code_dim", kAttributeCodeDim}, {"codes", std::move(codes)}};
}

AttributeCodebook AttributeCodebook::from_json(const nlohmann::json& j) {
  try {
    AttributeCodebook book;
    book.seed_ = j.at("seed").get<std::uint64_t>();
    if (j.at("code_dim").get<std::size_t>() != kAttributeCodeDim) {
      throw Error(ErrorCode::ValidationFailed, "codebook code_dim must be 32");
    }
    const auto& codes = j.at("codes");
    const auto& encoded = encoded_attributes();
    for (std::size_t i = 0; i < encoded.size(); ++i) {
      const auto& table = codes.at(std::string(encoded[i].key));
      for (const auto value : encoded[i].vocabulary) {
        auto code = table.at(std::string(value)).get<std::vector<double>>();
        if (code.size() != kAttributeCodeDim) {
          throw Error(ErrorCode::ValidationFailed,
                      "code for " + std::string(value) + " has wrong length");
        }
        book.codes_[i].emplace(std::string(value), std::move(code));
      }
      if (table.size() != encoded[i].vocabulary.size()) {
        throw Error(ErrorCode::ValidationFailed,
                    "codebook table '" + std::string(encoded[i].key) +
                        "' has entries outside the vocabulary");
      }
    }
    return book;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ValidationFailed, std::string("malformed codebook: ") + e.what());
  }
}

std::vector<double> encode_attributes(const AttributeSet& attrs,
                                      const AttributeCodebook& codebook) {
  std::vector<double> out;
  out.reserve(kAttributeFeatureDim);
  for (std::size_t i = 0; i < kEncodedAttributeCount; ++i) {
    const auto code = codebook.code(i, attrs.value(i));
    out.insert(out.end(), code.begin(), code.end());
  }
  return out;
}

}  // namespace ragmem
