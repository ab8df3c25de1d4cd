#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <json.hpp>

#include "ragmem/memory_store.hpp"
#include "ragmem/record.hpp"

namespace ragmem {

inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

struct CurationConfig {
  std::size_t per_category_cap = kUnlimited;
  /// DBSCAN radius in cosine distance (1 - cos).
  double dbscan_eps = 0.1;
  std::size_t dbscan_min_pts = 4;
  /// Minimum cosine distance between kept records; 0 disables thinning.
  double downsample_radius = 0.0;
  std::size_t target_size = kUnlimited;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument.
  void validate() const;
  nlohmann::json to_json() const;
};

inline constexpr int kNoiseLabel = -1;

struct ClusterLabeling {
  /// -1 for noise, otherwise a cluster id below n_clusters.
  std::vector<int> labels;
  std::size_t n_clusters = 0;

  std::size_t noise_count() const;
};

/// Row indices (ascending) keeping at most `cap` records per category;
/// over-full categories are sampled uniformly under `seed`.
std::vector<std::size_t> category_balance(std::span<const MemoryRecord> records,
                                          std::size_t cap, std::uint64_t seed);

/// DBSCAN with distance 1 - cos(a, b). A point is core when at least
/// `min_pts` points (itself included) lie within `eps`. Clusters are
/// numbered in order of their lowest-index core point; a border point
/// reachable from several clusters joins the lowest-numbered one, which is
/// what a sequential index-order scan produces.
ClusterLabeling dbscan(std::span<const StructureEmbedding> embeddings, double eps,
                       std::size_t min_pts);

/// Greedy thinning in a seeded random order: a point is kept when every
/// already-kept point is at cosine distance >= radius. If more than
/// target_size survive, a uniform subsample of target_size is taken.
/// Returns ascending indices.
std::vector<std::size_t> density_downsample(std::span<const StructureEmbedding> embeddings,
                                            double radius, std::size_t target_size,
                                            std::uint64_t seed);

struct CurationReport {
  std::size_t input_count = 0;
  std::size_t after_balance = 0;
  std::size_t after_dbscan = 0;
  std::size_t after_downsample = 0;
  std::size_t final_count = 0;
  std::size_t n_clusters = 0;
  CurationConfig config;

  nlohmann::json to_json() const;
};

struct CurationResult {
  MemoryDatabase database;
  CurationReport report;
  /// Input indices that made it into the database, ascending.
  std::vector<std::size_t> kept;
};

/// category_balance -> dbscan (noise dropped) -> density_downsample ->
/// MemoryDatabase, preserving input order. Throws InvalidArgument (empty
/// input, mixed dims) and EmptyAfterCuration.
CurationResult build_database(std::span<const MemoryRecord> records,
                              const CurationConfig& config);

}  // namespace ragmem
