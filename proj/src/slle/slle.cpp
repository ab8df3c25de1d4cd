#include "ragmem/slle.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "ragmem/error.hpp"
#include "ragmem/metrics.hpp"

namespace ragmem {

void SlleConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "SLLE k must be at least 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "SLLE alpha must lie in [0, 1]");
  }
  if (!(reg_epsilon > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "SLLE reg_epsilon must be positive");
  }
  if (!(soft_mask_threshold > 0.0 && soft_mask_threshold < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "soft mask threshold must lie in (0, 1)");
  }
}

std::vector<double> solve_weights(const StructureEmbedding& query,
                                  std::span<const StructureEmbedding> neighbors,
                                  double reg_epsilon) {
  const std::size_t k = neighbors.size();
  const std::size_t d = query.dim();
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "need at least one neighbor");
  if (!(reg_epsilon > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "reg_epsilon must be positive");
  }

  // Rows of `diff` are q - n_j.
  Eigen::MatrixXd diff(k, d);
  for (std::size_t j = 0; j < k; ++j) {
    if (neighbors[j].dim() != d) {
      throw Error(ErrorCode::DimMismatch, "neighbor " + std::to_string(j) + " has dim " +
                                              std::to_string(neighbors[j].dim()) +
                                              ", query has " + std::to_string(d));
    }
    for (std::size_t c = 0; c < d; ++c) diff(j, c) = query[c] - neighbors[j][c];
  }
  Eigen::MatrixXd gram = diff * diff.transpose();

  // A zero trace means the query coincides with every neighbor; any affine
  // weights are optimal and the plain ridge picks the uniform ones.
  const double trace = gram.trace();
  const double ridge = trace > 0.0 ? reg_epsilon * trace / static_cast<double>(k) : reg_epsilon;
  gram.diagonal().array() += ridge;

  const Eigen::VectorXd w = gram.ldlt().solve(Eigen::VectorXd::Ones(k));
  const double total = w.sum();
  if (!w.allFinite() || !std::isfinite(total) || std::abs(total) < 1e-300) {
    throw Error(ErrorCode::NumericalFailure, "regularized Gram system is singular");
  }

  std::vector<double> out(k);
  for (std::size_t j = 0; j < k; ++j) out[j] = w(j) / total;
  return out;
}

std::vector<double> reconstruct(std::span<const StructureEmbedding> neighbors,
                                std::span<const double> weights) {
  if (neighbors.size() != weights.size()) {
    throw Error(ErrorCode::CountMismatch, "neighbor and weight counts differ");
  }
  if (neighbors.empty()) throw Error(ErrorCode::InvalidArgument, "no neighbors");
  const std::size_t d = neighbors[0].dim();
  std::vector<double> out(d, 0.0);
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    if (neighbors[j].dim() != d) throw Error(ErrorCode::DimMismatch, "neighbor dims differ");
    for (std::size_t c = 0; c < d; ++c) out[c] += weights[j] * neighbors[j][c];
  }
  return out;
}

double reconstruction_error(const StructureEmbedding& query,
                            std::span<const double> reconstruction) {
  if (query.dim() != reconstruction.size()) {
    throw Error(ErrorCode::DimMismatch, "reconstruction dim differs from query");
  }
  std::vector<double> residual(query.dim());
  for (std::size_t c = 0; c < residual.size(); ++c) residual[c] = query[c] - reconstruction[c];
  return l2_norm(residual);
}

StructureEmbedding fuse_embedding(const StructureEmbedding& query,
                                  std::span<const double> reconstructed, double alpha) {
  if (query.dim() != reconstructed.size()) {
    throw Error(ErrorCode::DimMismatch, "reconstruction dim differs from query");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
  }
  std::vector<double> blend(query.dim());
  for (std::size_t c = 0; c < blend.size(); ++c) {
    blend[c] = alpha * reconstructed[c] + (1.0 - alpha) * query[c];
  }
  try {
    return StructureEmbedding::normalize(blend);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroVector) throw;
    throw Error(ErrorCode::DegenerateFusion, "fused embedding cancels to zero");
  }
}

LandmarkFusion fuse_landmark(std::span<const LandmarkMask> landmarks,
                             std::span<const double> weights, double threshold) {
  if (landmarks.size() != weights.size()) {
    throw Error(ErrorCode::CountMismatch, "landmark and weight counts differ");
  }
  if (landmarks.empty()) throw Error(ErrorCode::InvalidArgument, "no landmarks to fuse");
  const LandmarkMask& first = landmarks[0];
  for (const auto& m : landmarks) {
    if (!m.same_shape(first)) {
      throw Error(ErrorCode::ShapeMismatch, "landmarks to fuse differ in size");
    }
  }

  double positive_total = 0.0;
  for (double w : weights) positive_total += std::max(w, 0.0);
  if (!(positive_total > 0.0)) {
    throw Error(ErrorCode::AllWeightsNonPositive, "every fusion weight is non-positive");
  }

  std::vector<double> soft(first.size(), 0.0);
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    const double w = std::max(weights[i], 0.0) / positive_total;
    if (w == 0.0) continue;
    const auto bits = landmarks[i].bits();
    for (std::size_t p = 0; p < soft.size(); ++p) soft[p] += w * bits[p];
  }

  std::vector<std::uint8_t> binary(soft.size());
  for (std::size_t p = 0; p < soft.size(); ++p) binary[p] = soft[p] >= threshold ? 1 : 0;
  const LandmarkMask consensus(first.width(), first.height(), std::move(binary));

  std::vector<double> ious(landmarks.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    ious[i] = mask_iou(consensus, landmarks[i]);
    if (ious[i] > ious[best]) best = i;
  }
  return LandmarkFusion{landmarks[best], best, std::move(soft), std::move(ious)};
}

SlleResult slle_retrieve(const MemoryDatabase& db, const StructureEmbedding& query,
                         const SlleConfig& config) {
  config.validate();
  auto neighbors = db.knn(query, config.k);

  std::vector<StructureEmbedding> embeddings;
  std::vector<LandmarkMask> masks;
  embeddings.reserve(neighbors.size());
  masks.reserve(neighbors.size());
  for (const auto& n : neighbors) {
    const MemoryRecord& rec = db.record(n.index);
    embeddings.push_back(rec.embedding);
    masks.push_back(rec.landmark);
  }

  auto weights = solve_weights(query, embeddings, config.reg_epsilon);
  auto reconstructed = reconstruct(embeddings, weights);
  const double objective = reconstruction_error(query, reconstructed);
  auto fused = fuse_embedding(query, reconstructed, config.alpha);
  auto landmark = fuse_landmark(masks, weights, config.soft_mask_threshold);

  return SlleResult{
      std::move(neighbors),
      std::move(weights),
      std::move(reconstructed),
      std::move(fused),
      std::move(landmark.mask),
      landmark.selected_index,
      std::move(landmark.soft),
      objective,
      db.version(),
  };
}

}  // namespace ragmem
