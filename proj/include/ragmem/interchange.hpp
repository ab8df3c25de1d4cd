#pragma once

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "ragmem/metrics.hpp"
#include "ragmem/record.hpp"

// JSONL interchange files used by the command-line tools.
//
//   records.jsonl  {"id", "embedding": [..], "landmark": "<file>", "category"?,
//                   "attributes"?: {..}, "source"?}
//   queries.jsonl  {"id"?, "embedding": [..], "landmark": "<file>"}
//   pairs.jsonl    {"itw": [..], "std": [..]}
//
// Landmark file names resolve against a caller-supplied directory.
namespace ragmem::io {

/// Throws ValidationFailed naming the offending line and record id.
std::vector<MemoryRecord> read_records(const std::filesystem::path& path,
                                       const std::filesystem::path& landmark_dir);
/// Landmarks are written as <landmark_dir>/<id>.png and referenced relative to
/// the JSONL file's directory.
void write_records(std::span<const MemoryRecord> records, const std::filesystem::path& path,
                   const std::filesystem::path& landmark_dir);

std::vector<RetrievalQuery> read_queries(const std::filesystem::path& path,
                                         const std::filesystem::path& landmark_dir);
void write_queries(std::span<const RetrievalQuery> queries, const std::filesystem::path& path,
                   const std::filesystem::path& landmark_dir);

using EmbeddingPair = std::pair<StructureEmbedding, StructureEmbedding>;
std::vector<EmbeddingPair> read_pairs(const std::filesystem::path& path);
void write_pairs(std::span<const EmbeddingPair> pairs, const std::filesystem::path& path);

/// A bare JSON array, or an object with an "embedding" array.
std::vector<double> read_embedding(const std::filesystem::path& path);

}  // namespace ragmem::io
