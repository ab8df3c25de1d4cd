#include "ragmem/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ragmem/error.hpp"

namespace ragmem {

double mask_iou(const LandmarkMask& a, const LandmarkMask& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::ShapeMismatch,
                "IoU of masks sized " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " and " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
  }
  const auto x = a.bits();
  const auto y = b.bits();
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    inter += x[i] & y[i];
    uni += x[i] | y[i];
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::pair<LandmarkMask, LandmarkMask> align_by_bbox(const LandmarkMask& a,
                                                    const LandmarkMask& b) {
  const auto box_a = a.bounding_box();
  const auto box_b = b.bounding_box();
  if (!box_a || !box_b) throw Error(ErrorCode::EmptyMask, "cannot align an empty mask");
  LandmarkMask crop_a = a.crop(*box_a);
  LandmarkMask crop_b = b.crop(*box_b);
  if (crop_a.size() >= crop_b.size()) {
    crop_b = crop_b.resized(crop_a.width(), crop_a.height());
  } else {
    crop_a = crop_a.resized(crop_b.width(), crop_b.height());
  }
  return {std::move(crop_a), std::move(crop_b)};
}

double aligned_iou(const LandmarkMask& a, const LandmarkMask& b) {
  const auto [x, y] = align_by_bbox(a, b);
  return mask_iou(x, y);
}

Eigen::MatrixXd similarity_matrix(std::span<const StructureEmbedding> queries,
                                  std::span<const StructureEmbedding> keys) {
  if (queries.size() != keys.size()) {
    throw Error(ErrorCode::CountMismatch, "similarity matrix needs equal query/key counts");
  }
  const std::size_t n = queries.size();
  Eigen::MatrixXd s(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (queries[i].dim() != keys[j].dim()) {
        throw Error(ErrorCode::DimMismatch, "embedding dims differ in similarity matrix");
      }
      s(i, j) = std::clamp(dot(queries[i].values(), keys[j].values()), -1.0, 1.0);
    }
  }
  return s;
}

InfoNceResult infonce_loss(const Eigen::MatrixXd& similarities, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::NonPositiveTau, "tau must be positive");
  if (similarities.rows() != similarities.cols() || similarities.rows() == 0) {
    throw Error(ErrorCode::ShapeMismatch, "InfoNCE needs a non-empty square matrix");
  }
  const Eigen::Index n = similarities.rows();
  const double inv_n = 1.0 / static_cast<double>(n);

  InfoNceResult out;
  out.grad.resize(n, n);
  out.positive_rank.resize(static_cast<std::size_t>(n));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::ArrayXd logits = similarities.row(i).transpose().array() / tau;
    const double shift = logits.maxCoeff();
    const Eigen::ArrayXd e = (logits - shift).exp();
    const double z = e.sum();
    // -log softmax_ii = log sum_j exp(l_ij) - l_ii
    total += shift + std::log(z) - logits(i);
    out.grad.row(i) = (e / z).transpose() * (inv_n / tau);
    out.grad(i, i) -= inv_n / tau;

    std::size_t rank = 1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i && similarities(i, j) > similarities(i, i)) ++rank;
    }
    out.positive_rank[static_cast<std::size_t>(i)] = rank;
  }
  out.loss = total * inv_n;
  return out;
}

}  // namespace ragmem
