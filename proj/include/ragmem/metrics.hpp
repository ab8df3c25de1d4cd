#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "ragmem/embedding.hpp"
#include "ragmem/landmark.hpp"
#include "ragmem/memory_store.hpp"

namespace ragmem {

inline constexpr double kDefaultTau = 0.07;
inline constexpr double kDefaultIouThreshold = 0.85;

// ---- masks ---------------------------------------------------------------

/// |a & b| / |a | b|, 1.0 when both are empty. Throws ShapeMismatch.
double mask_iou(const LandmarkMask& a, const LandmarkMask& b);

/// Crops both masks to their foreground boxes and resizes the smaller crop
/// (by area) onto the larger crop's grid, nearest-neighbour. Throws EmptyMask.
std::pair<LandmarkMask, LandmarkMask> align_by_bbox(const LandmarkMask& a,
                                                    const LandmarkMask& b);

/// mask_iou after align_by_bbox.
double aligned_iou(const LandmarkMask& a, const LandmarkMask& b);

// ---- contrastive ---------------------------------------------------------

/// Entry (i, j) = q_i . k_j. Throws CountMismatch, DimMismatch.
Eigen::MatrixXd similarity_matrix(std::span<const StructureEmbedding> queries,
                                  std::span<const StructureEmbedding> keys);

struct InfoNceResult {
  double loss = 0.0;
  /// d loss / d s_ij
  Eigen::MatrixXd grad;
  /// 1-based rank of the diagonal entry within its row (1 = best).
  std::vector<std::size_t> positive_rank;
};

/// Row-wise softmax cross-entropy with the diagonal as positives:
/// loss = -(1/N) sum_i log softmax(s_i. / tau)_i, computed with a max shift.
/// Throws NonPositiveTau, ShapeMismatch.
InfoNceResult infonce_loss(const Eigen::MatrixXd& similarities, double tau = kDefaultTau);

// ---- retrieval evaluation ------------------------------------------------

struct RetrievalQuery {
  std::string id;
  StructureEmbedding embedding;
  LandmarkMask landmark;  // ground truth
};

struct RetrievalEvalReport {
  std::size_t scale = 0;  // database size
  std::size_t n_queries = 0;
  double iou_threshold = kDefaultIouThreshold;
  double top1_accuracy = 0.0;
  double top5_accuracy = 0.0;
  double mean_iou = 0.0;
  /// Accuracy for every requested k (k clipped to the database size).
  std::map<std::size_t, double> accuracy_at_k;

  nlohmann::json to_json() const;
};

/// A query scores a hit at k when any of its k nearest records has an
/// aligned landmark IoU strictly above the threshold. mean_iou averages the
/// rank-1 aligned IoU. Throws EmptyDatabase, InvalidArgument (no queries).
RetrievalEvalReport eval_retrieval(const MemoryDatabase& db,
                                   std::span<const RetrievalQuery> queries,
                                   std::span<const std::size_t> k_list,
                                   double iou_threshold = kDefaultIouThreshold);

/// Plain-text table: Scale | Top-1 Acc. | Top-5 Acc. | IOU.
std::string format_retrieval_table(std::span<const RetrievalEvalReport> rows);

}  // namespace ragmem
