#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ragmem/embedding.hpp"
#include "ragmem/landmark.hpp"
#include "ragmem/memory_store.hpp"

namespace ragmem {

struct SlleConfig {
  std::size_t k = 4;
  /// Weight of the reconstruction in the final blend.
  double alpha = 0.5;
  /// Gram ridge, scaled by tr(G)/K.
  double reg_epsilon = 1e-3;
  double soft_mask_threshold = 0.5;

  /// Throws InvalidArgument.
  void validate() const;
};

struct LandmarkFusion {
  LandmarkMask mask;
  std::size_t selected_index = 0;
  /// Weighted soft mask in [0,1], row-major, before binarization.
  std::vector<double> soft;
  /// IoU of the binarized soft mask with each input.
  std::vector<double> ious;
};

struct SlleResult {
  std::vector<Neighbor> neighbors;
  std::vector<double> weights;
  /// Raw weighted sum of neighbors; not renormalized.
  std::vector<double> reconstructed;
  StructureEmbedding fused_embedding;
  LandmarkMask fused_landmark;
  std::size_t landmark_index = 0;  // into `neighbors`
  std::vector<double> soft_mask;
  /// ||query - sum w_i n_i||_2
  double objective = 0.0;
  std::uint64_t db_version = 0;

  const std::string& landmark_id() const { return neighbors.at(landmark_index).id; }
};

/// Affine (sum-to-one) least-squares weights reconstructing `query` from
/// `neighbors`. Solves (G + eps * tr(G)/K * I) w = 1 on the local Gram matrix
/// G_jk = (q - n_j).(q - n_k), then rescales w to sum 1. Weights can be
/// negative. Throws DimMismatch, InvalidArgument, NumericalFailure.
std::vector<double> solve_weights(const StructureEmbedding& query,
                                  std::span<const StructureEmbedding> neighbors,
                                  double reg_epsilon);

/// sum_i w_i n_i. Throws DimMismatch / CountMismatch.
std::vector<double> reconstruct(std::span<const StructureEmbedding> neighbors,
                                std::span<const double> weights);

/// ||query - reconstruction||_2
double reconstruction_error(const StructureEmbedding& query,
                            std::span<const double> reconstruction);

/// normalize(alpha * reconstructed + (1 - alpha) * query).
/// Throws DegenerateFusion when the blend cancels out.
StructureEmbedding fuse_embedding(const StructureEmbedding& query,
                                  std::span<const double> reconstructed, double alpha);

/// Interpolates the masks with the positive part of the weights, binarizes at
/// `threshold` and returns the input mask overlapping that consensus most
/// (ties to the lowest index). The result is always one of the inputs.
/// Throws ShapeMismatch, CountMismatch, AllWeightsNonPositive.
LandmarkFusion fuse_landmark(std::span<const LandmarkMask> landmarks,
                             std::span<const double> weights, double threshold);

/// knn -> solve_weights -> reconstruct -> fuse_embedding -> fuse_landmark.
SlleResult slle_retrieve(const MemoryDatabase& db, const StructureEmbedding& query,
                         const SlleConfig& config);

}  // namespace ragmem
