#include "ragmem/curation.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "ragmem/error.hpp"

namespace ragmem {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr Eigen::Index kBlockRows = 256;

RowMatrix stack_embeddings(std::span<const StructureEmbedding> embeddings) {
  if (embeddings.empty()) return RowMatrix(0, 0);
  const std::size_t d = embeddings[0].dim();
  RowMatrix x(static_cast<Eigen::Index>(embeddings.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (embeddings[i].dim() != d) {
      throw Error(ErrorCode::DimMismatch, "embeddings to cluster differ in dim");
    }
    for (std::size_t c = 0; c < d; ++c) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = embeddings[i][c];
    }
  }
  return x;
}

// Calls visit(i, j) for every pair i < j with cosine distance <= eps. Each
// pair's similarity is computed exactly once, so repeated sweeps agree.
template <typename Visit>
void for_each_close_pair(const RowMatrix& x, double eps, Visit&& visit) {
  const Eigen::Index n = x.rows();
  for (Eigen::Index r0 = 0; r0 < n; r0 += kBlockRows) {
    const Eigen::Index rows = std::min(kBlockRows, n - r0);
    const RowMatrix sims = x.middleRows(r0, rows) * x.middleRows(r0, n - r0).transpose();
    for (Eigen::Index a = 0; a < rows; ++a) {
      for (Eigen::Index b = a + 1; b < n - r0; ++b) {
        if (1.0 - sims(a, b) <= eps) {
          visit(static_cast<std::size_t>(r0 + a), static_cast<std::size_t>(r0 + b));
        }
      }
    }
  }
}

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // The smaller index becomes the root, so each root is its set's minimum.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;
  }

 private:
  std::vector<std::size_t> parent_;
};

std::string category_of(const MemoryRecord& r) {
  if (!r.category.empty()) return r.category;
  if (r.attributes) return r.attributes->category();
  return {};
}

}  // namespace

void CurationConfig::validate() const {
  auto fail = [](const char* why) { throw Error(ErrorCode::InvalidArgument, why); };
  if (per_category_cap < 1) fail("per_category_cap must be at least 1");
  if (!(dbscan_eps > 0.0 && dbscan_eps < 2.0)) fail("dbscan_eps must lie in (0, 2)");
  if (dbscan_min_pts < 1) fail("dbscan_min_pts must be at least 1");
  if (!(downsample_radius >= 0.0)) fail("downsample_radius must be non-negative");
  if (target_size < 1) fail("target_size must be at least 1");
}

nlohmann::json CurationConfig::to_json() const {
  auto limit = [](std::size_t v) -> nlohmann::json {
    return v == kUnlimited ? nlohmann::json(nullptr) : nlohmann::json(v);
  };
  return {{"per_category_cap", limit(per_category_cap)},
          {"dbscan_eps", dbscan_eps},
          {"dbscan_min_pts", dbscan_min_pts},
          {"downsample_radius", downsample_radius},
          {"target_size", limit(target_size)},
          {"seed", seed}};
}

std::size_t ClusterLabeling::noise_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoiseLabel));
}

std::vector<std::size_t> category_balance(std::span<const MemoryRecord> records,
                                          std::size_t cap, std::uint64_t seed) {
  if (cap < 1) throw Error(ErrorCode::InvalidArgument, "category cap must be at least 1");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) groups[category_of(records[i])].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> kept;
  for (auto& [category, members] : groups) {
    if (members.size() > cap) {
      std::shuffle(members.begin(), members.end(), rng);
      members.resize(cap);
    }
    kept.insert(kept.end(), members.begin(), members.end());
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

ClusterLabeling dbscan(std::span<const StructureEmbedding> embeddings, double eps,
                       std::size_t min_pts) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "dbscan eps must be positive");
  if (min_pts < 1) throw Error(ErrorCode::InvalidArgument, "dbscan min_pts must be >= 1");
  const std::size_t n = embeddings.size();
  const RowMatrix x = stack_embeddings(embeddings);

  std::vector<std::size_t> neighbor_count(n, 1);  // self
  for_each_close_pair(x, eps, [&](std::size_t i, std::size_t j) {
    ++neighbor_count[i];
    ++neighbor_count[j];
  });
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = neighbor_count[i] >= min_pts;

  // Non-core points have fewer than min_pts neighbors, so these lists stay short.
  DisjointSet sets(n);
  std::vector<std::vector<std::size_t>> core_neighbors_of_border(n);
  for_each_close_pair(x, eps, [&](std::size_t i, std::size_t j) {
    if (core[i] && core[j]) {
      sets.unite(i, j);
    } else if (core[i]) {
      core_neighbors_of_border[j].push_back(i);
    } else if (core[j]) {
      core_neighbors_of_border[i].push_back(j);
    }
  });

  // Roots are component minima; number clusters in ascending root order.
  ClusterLabeling out;
  out.labels.assign(n, kNoiseLabel);
  std::vector<int> cluster_of_root(n, kNoiseLabel);
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    const std::size_t root = sets.find(i);
    if (cluster_of_root[root] == kNoiseLabel) {
      cluster_of_root[root] = static_cast<int>(out.n_clusters++);
    }
    out.labels[i] = cluster_of_root[root];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    for (std::size_t c : core_neighbors_of_border[i]) {
      const int label = out.labels[c];
      if (out.labels[i] == kNoiseLabel || label < out.labels[i]) out.labels[i] = label;
    }
  }
  return out;
}

std::vector<std::size_t> density_downsample(std::span<const StructureEmbedding> embeddings,
                                            double radius, std::size_t target_size,
                                            std::uint64_t seed) {
  if (target_size < 1) throw Error(ErrorCode::InvalidArgument, "target_size must be >= 1");
  if (!(radius >= 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be >= 0");
  const std::size_t n = embeddings.size();
  const RowMatrix x = stack_embeddings(embeddings);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::size_t> kept;
  if (radius > 0.0) {
    RowMatrix kept_rows(x.rows(), x.cols());
    Eigen::Index m = 0;
    for (std::size_t idx : order) {
      const auto candidate = x.row(static_cast<Eigen::Index>(idx));
      bool clear = true;
      if (m > 0) {
        const Eigen::VectorXd sims = kept_rows.topRows(m) * candidate.transpose();
        clear = (1.0 - sims.maxCoeff()) >= radius;
      }
      if (clear) {
        kept_rows.row(m++) = candidate;
        kept.push_back(idx);
      }
    }
  } else {
    kept = order;
  }

  if (kept.size() > target_size) {
    std::shuffle(kept.begin(), kept.end(), rng);
    kept.resize(target_size);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

nlohmann::json CurationReport::to_json() const {
  return {{"input_count", input_count},
          {"after_balance", after_balance},
          {"after_dbscan", after_dbscan},
          {"after_downsample", after_downsample},
          {"final_count", final_count},
          {"n_clusters", n_clusters},
          {"seed", config.seed},
          {"config", config.to_json()}};
}

CurationResult build_database(std::span<const MemoryRecord> records,
                              const CurationConfig& config) {
  config.validate();
  if (records.empty()) throw Error(ErrorCode::InvalidArgument, "no records to curate");
  const std::size_t dim = records[0].embedding.dim();

  CurationReport report;
  report.config = config;
  report.input_count = records.size();

  // Each stage maps positions in its input back to positions in `records`.
  std::vector<std::size_t> survivors =
      category_balance(records, config.per_category_cap, config.seed);
  report.after_balance = survivors.size();

  std::vector<StructureEmbedding> embeddings;
  embeddings.reserve(survivors.size());
  for (std::size_t i : survivors) embeddings.push_back(records[i].embedding);
  const ClusterLabeling clusters = dbscan(embeddings, config.dbscan_eps, config.dbscan_min_pts);
  report.n_clusters = clusters.n_clusters;
  {
    std::vector<std::size_t> next;
    std::vector<StructureEmbedding> next_embeddings;
    for (std::size_t p = 0; p < survivors.size(); ++p) {
      if (clusters.labels[p] == kNoiseLabel) continue;
      next.push_back(survivors[p]);
      next_embeddings.push_back(std::move(embeddings[p]));
    }
    survivors = std::move(next);
    embeddings = std::move(next_embeddings);
  }
  report.after_dbscan = survivors.size();

  // Offset the seed so the thinning order is not correlated with balancing.
  const auto picked = density_downsample(embeddings, config.downsample_radius,
                                         config.target_size, config.seed + 0x5bd1e995ULL);
  std::vector<std::size_t> kept;
  kept.reserve(picked.size());
  for (std::size_t p : picked) kept.push_back(survivors[p]);
  report.after_downsample = kept.size();

  if (kept.empty()) {
    throw Error(ErrorCode::EmptyAfterCuration, "curation eliminated every record");
  }
  MemoryDatabase db(dim);
  for (std::size_t i : kept) db.insert(records[i]);
  report.final_count = db.count();
  return CurationResult{std::move(db), std::move(report), std::move(kept)};
}

}  // namespace ragmem
