#include <algorithm>

#include <fmt/format.h>

#include "ragmem/error.hpp"
#include "ragmem/metrics.hpp"

namespace ragmem {

nlohmann::json RetrievalEvalReport::to_json() const {
  nlohmann::json at_k = nlohmann::json::object();
  for (const auto& [k, acc] : accuracy_at_k) at_k[std::to_string(k)] = acc;
  return {{"scale", scale},
          {"n_queries", n_queries},
          {"iou_threshold", iou_threshold},
          {"top1_accuracy", top1_accuracy},
          {"top5_accuracy", top5_accuracy},
          {"mean_iou", mean_iou},
          {"accuracy_at_k", std::move(at_k)}};
}

RetrievalEvalReport eval_retrieval(const MemoryDatabase& db,
                                   std::span<const RetrievalQuery> queries,
                                   std::span<const std::size_t> k_list,
                                   double iou_threshold) {
  if (db.empty()) throw Error(ErrorCode::EmptyDatabase, "cannot evaluate an empty database");
  if (queries.empty()) throw Error(ErrorCode::InvalidArgument, "no retrieval queries");
  for (std::size_t k : k_list) {
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "k values must be at least 1");
  }

  std::vector<std::size_t> ks(k_list.begin(), k_list.end());
  ks.push_back(1);
  ks.push_back(5);
  for (auto& k : ks) k = std::min(k, db.count());
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  const std::size_t depth = ks.back();

  // hits[k] counts queries with a hit among their first k neighbors.
  std::map<std::size_t, std::size_t> hits;
  double iou_sum = 0.0;
  for (const auto& q : queries) {
    const auto neighbors = db.knn(q.embedding, depth);
    std::size_t first_hit = depth + 1;
    for (std::size_t r = 0; r < neighbors.size(); ++r) {
      const double iou = aligned_iou(db.record(neighbors[r].index).landmark, q.landmark);
      if (r == 0) iou_sum += iou;
      if (iou > iou_threshold) {
        first_hit = r + 1;
        break;
      }
    }
    for (std::size_t k : ks) {
      if (first_hit <= k) ++hits[k];
    }
  }

  const double m = static_cast<double>(queries.size());
  RetrievalEvalReport report;
  report.scale = db.count();
  report.n_queries = queries.size();
  report.iou_threshold = iou_threshold;
  for (std::size_t k : k_list) {
    const std::size_t clipped = std::min(k, db.count());
    report.accuracy_at_k[k] = static_cast<double>(hits[clipped]) / m;
  }
  report.top1_accuracy = static_cast<double>(hits[1]) / m;
  report.top5_accuracy = static_cast<double>(hits[std::min<std::size_t>(5, db.count())]) / m;
  report.mean_iou = iou_sum / m;
  return report;
}

std::string format_retrieval_table(std::span<const RetrievalEvalReport> rows) {
  std::string out = fmt::format("{:<8} | {:>11} | {:>11} | {:>6}\n", "Scale", "Top-1 Acc.",
                                "Top-5 Acc.", "IOU");
  out += fmt::format("{:-<8}-+-{:->11}-+-{:->11}-+-{:->6}\n", "", "", "", "");
  for (const auto& r : rows) {
    out += fmt::format("{:<8} | {:>10.1f}% | {:>10.1f}% | {:>6.3f}\n", r.scale,
                       100.0 * r.top1_accuracy, 100.0 * r.top5_accuracy, r.mean_iou);
  }
  return out;
}

}  // namespace ragmem
