#pragma once

#include <optional>
#include <string>

#include "ragmem/attributes.hpp"
#include "ragmem/embedding.hpp"
#include "ragmem/landmark.hpp"

namespace ragmem {

/// One (embedding, landmark) entry of the memory database.
struct MemoryRecord {
  std::string id;
  StructureEmbedding embedding;
  LandmarkMask landmark;
  std::string category;
  std::optional<AttributeSet> attributes;
  std::optional<std::string> source;

  friend bool operator==(const MemoryRecord&, const MemoryRecord&) = default;
};

}  // namespace ragmem
