#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ragmem/record.hpp"

namespace ragmem {

struct Neighbor {
  std::string id;
  double similarity = 0.0;
  std::size_t rank = 0;   // 1-based
  std::size_t index = 0;  // row in the database
};

/// Cosine similarity of two unit embeddings, clamped to [-1, 1].
double cosine_similarity(const StructureEmbedding& a, const StructureEmbedding& b);

/// Embedding-landmark memory with an exact cosine scan.
///
/// Embeddings are quantized to float32 on insert; the record keeps the
/// quantized values so that index row i and records[i].embedding agree
/// exactly. Similarities are accumulated in double.
///
/// Copying is cheap: records are shared immutable nodes, only the float
/// index is duplicated.
class MemoryDatabase {
 public:
  explicit MemoryDatabase(std::size_t dim = kDefaultEmbeddingDim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  std::uint64_t version() const noexcept { return version_; }
  void set_version(std::uint64_t v) noexcept { version_ = v; }

  /// Throws DuplicateId, DimMismatch, InvalidArgument (empty id) or
  /// EmptyMask (landmark without foreground).
  const std::string& insert(MemoryRecord record);

  const MemoryRecord& record(std::size_t index) const { return *records_.at(index); }
  const MemoryRecord* find(std::string_view id) const;
  std::optional<std::size_t> index_of(std::string_view id) const;
  bool contains(std::string_view id) const { return index_of(id).has_value(); }

  std::span<const float> row(std::size_t index) const;
  /// Row-major count x dim float32 matrix.
  std::span<const float> matrix() const noexcept { return index_; }

  /// Exact top-k by cosine similarity, descending, ties by ascending id.
  /// Throws EmptyDatabase, KTooLarge, InvalidArgument (k == 0), DimMismatch.
  std::vector<Neighbor> knn(const StructureEmbedding& query, std::size_t k) const;

  /// Checks the serving invariants; throws ValidationFailed.
  void validate() const;

 private:
  std::size_t dim_;
  std::vector<std::shared_ptr<const MemoryRecord>> records_;
  std::vector<float> index_;
  std::unordered_map<std::string, std::size_t> ids_;
  std::uint64_t version_ = 0;
};

inline constexpr int kDatabaseFormatVersion = 1;

/// Writes manifest.json, embeddings.f32, records.jsonl and landmarks/ into
/// `dir`. An existing database directory at `dir` is replaced.
void save_database(const MemoryDatabase& db, const std::filesystem::path& dir);

/// Throws Io, CorruptManifest, ChecksumMismatch.
MemoryDatabase load_database(const std::filesystem::path& dir);

}  // namespace ragmem
