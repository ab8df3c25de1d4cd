#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ragmem/embedding.hpp"
#include "ragmem/landmark.hpp"
#include "ragmem/metrics.hpp"
#include "ragmem/record.hpp"

// Seeded synthetic data: stand-ins for encoder outputs and silhouettes, used
// by the test suites and the `ragmem synth` subcommand.
namespace ragmem::synthetic {

StructureEmbedding random_unit(std::mt19937_64& rng, std::size_t dim);

/// normalize(center + N(0, sigma^2) per component).
StructureEmbedding perturbed(const StructureEmbedding& center, double sigma,
                             std::mt19937_64& rng);

// ---- well-separated clusters --------------------------------------------

struct ClusterWorld {
  std::vector<StructureEmbedding> centers;
  /// One silhouette per cluster; pairwise aligned IoU stays below 0.7.
  std::vector<LandmarkMask> templates;
};

ClusterWorld make_cluster_world(std::size_t clusters, std::size_t dim, std::size_t side,
                                std::uint64_t seed);

/// `per_cluster` records around each listed cluster, carrying its template.
std::vector<MemoryRecord> cluster_records(const ClusterWorld& world,
                                          const std::vector<std::size_t>& which,
                                          std::size_t per_cluster, double sigma,
                                          std::uint64_t seed);

/// Queries spread round-robin over all clusters; ground truth = template.
std::vector<RetrievalQuery> cluster_queries(const ClusterWorld& world, std::size_t count,
                                            double sigma, std::uint64_t seed);

// ---- parametric garment silhouettes -------------------------------------

struct GarmentWorldConfig {
  std::size_t dim = 32;
  std::size_t side = 64;
  /// Noise on stored (flat-lay) embeddings.
  double record_noise = 0.01;
  /// Noise on query (in-the-wild) embeddings.
  double query_noise = 0.03;
  /// Fraction of pool records replaced by off-manifold outliers.
  double outlier_fraction = 0.0;
  std::uint64_t seed = 7;
};

/// Shape parameters in [0,1]: body width, body length, sleeve length, neckline depth.
struct GarmentShape {
  std::size_t category = 0;  // index into garment_categories()
  double width = 0.5, length = 0.5, sleeve = 0.5, neckline = 0.5;
};

const std::vector<std::string>& garment_categories();

LandmarkMask draw_garment(const GarmentShape& shape, std::size_t side);

/// Fixed random linear map from shape parameters to embedding space.
class GarmentWorld {
 public:
  explicit GarmentWorld(GarmentWorldConfig config);

  const GarmentWorldConfig& config() const noexcept { return config_; }
  StructureEmbedding embed(const GarmentShape& shape, double noise, std::mt19937_64& rng) const;
  GarmentShape random_shape(std::mt19937_64& rng) const;

  /// Pool of `count` records with ids "g000000"...; outliers get ids "o...".
  std::vector<MemoryRecord> pool(std::size_t count, std::uint64_t seed) const;
  std::vector<RetrievalQuery> queries(std::size_t count, std::uint64_t seed) const;

 private:
  GarmentWorldConfig config_;
  std::vector<std::vector<double>> basis_;  // dim rows x feature columns
};

}  // namespace ragmem::synthetic
