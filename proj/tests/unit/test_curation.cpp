#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "ragmem/curation.hpp"
#include "ragmem/error.hpp"
#include "ragmem/synthetic.hpp"

using namespace ragmem;

namespace {

std::vector<StructureEmbedding> blobs(std::mt19937_64& rng, std::size_t dim,
                                      std::size_t centers, std::size_t per, double sigma) {
  std::vector<StructureEmbedding> out;
  for (std::size_t c = 0; c < centers; ++c) {
    const auto center = synthetic::random_unit(rng, dim);
    for (std::size_t i = 0; i < per; ++i) out.push_back(synthetic::perturbed(center, sigma, rng));
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

oracle::Mat as_mat(const std::vector<StructureEmbedding>& v) {
  oracle::Mat m;
  for (const auto& e : v) m.push_back(oracle::to_vec(e));
  return m;
}

std::vector<MemoryRecord> records_for(const std::vector<StructureEmbedding>& emb,
                                      const std::vector<std::string>& categories) {
  std::vector<MemoryRecord> out;
  for (std::size_t i = 0; i < emb.size(); ++i) {
    out.push_back(MemoryRecord{"r" + std::to_string(i), emb[i], fixtures::box_mask(8, 0, 0, 4, 4),
                               categories[i % categories.size()], std::nullopt, std::nullopt});
  }
  return out;
}

}  // namespace

TEST_SUITE("curation") {
  TEST_CASE("dbscan matches the transitive-closure oracle") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 30; ++t) {
      const std::size_t dim = 3 + t % 4;
      const auto emb = blobs(rng, dim, 1 + t % 4, 3 + t % 9, 0.05 + 0.02 * (t % 5));
      const double eps = 0.02 + 0.01 * (t % 6);
      const std::size_t min_pts = 2 + t % 4;
      const auto got = dbscan(emb, eps, min_pts);
      CHECK(got.labels == oracle::dbscan_closure(as_mat(emb), eps, min_pts));
    }
  }

  TEST_CASE("min_pts of one makes every point core") {
    std::mt19937_64 rng(2);
    const auto emb = blobs(rng, 4, 3, 5, 0.1);
    const auto got = dbscan(emb, 0.05, 1);
    CHECK(got.noise_count() == 0);
    CHECK(got.labels == oracle::dbscan_closure(as_mat(emb), 0.05, 1));
  }

  TEST_CASE("far outliers are noise") {
    std::mt19937_64 rng(9);
    std::vector<StructureEmbedding> emb;
    const std::vector<double> c = {1, 0, 0, 0};
    for (int i = 0; i < 20; ++i) emb.push_back(synthetic::perturbed(StructureEmbedding::normalize(c), 0.01, rng));
    emb.push_back(StructureEmbedding::normalize(std::vector<double>{0, 1, 0, 0}));
    emb.push_back(StructureEmbedding::normalize(std::vector<double>{0, 0, -1, 0}));
    const auto got = dbscan(emb, 0.05, 4);
    CHECK(got.n_clusters == 1);
    CHECK(got.labels[20] == kNoiseLabel);
    CHECK(got.labels[21] == kNoiseLabel);
    CHECK(got.noise_count() == 2);
  }

  TEST_CASE("downsample keeps points at least radius apart") {
    std::mt19937_64 rng(4);
    const auto emb = blobs(rng, 6, 5, 40, 0.2);
    for (double radius : {0.01, 0.05, 0.2}) {
      const auto kept = density_downsample(emb, radius, kUnlimited, 1);
      CHECK(std::is_sorted(kept.begin(), kept.end()));
      for (std::size_t a = 0; a < kept.size(); ++a) {
        for (std::size_t b = a + 1; b < kept.size(); ++b) {
          CHECK(1.0 - cosine_similarity(emb[kept[a]], emb[kept[b]]) >= radius);
        }
      }
    }
    CHECK(density_downsample(emb, 0.0, kUnlimited, 1).size() == emb.size());
    CHECK(density_downsample(emb, 0.0, 17, 1).size() == 17);
  }

  TEST_CASE("downsample is deterministic per seed") {
    std::mt19937_64 rng(4);
    const auto emb = blobs(rng, 6, 5, 40, 0.2);
    CHECK(density_downsample(emb, 0.05, 30, 8) == density_downsample(emb, 0.05, 30, 8));
  }

  TEST_CASE("category balance caps each group") {
    std::mt19937_64 rng(5);
    const auto emb = blobs(rng, 4, 1, 30, 0.3);
    const auto records = records_for(emb, {"Dress", "Dress", "Shirt"});
    const auto kept = category_balance(records, 5, 3);
    std::map<std::string, int> counts;
    for (auto i : kept) ++counts[records[i].category];
    CHECK(counts["Dress"] == 5);
    CHECK(counts["Shirt"] == 5);
    CHECK(std::is_sorted(kept.begin(), kept.end()));
    CHECK(category_balance(records, kUnlimited, 3).size() == records.size());
  }

  TEST_CASE("build_database reports each stage") {
    std::mt19937_64 rng(6);
    auto emb = blobs(rng, 8, 4, 25, 0.02);
    emb.push_back(synthetic::random_unit(rng, 8));
    const auto records = records_for(emb, {"Dress", "Shirt"});
    CurationConfig cfg;
    cfg.dbscan_eps = 0.01;
    cfg.dbscan_min_pts = 3;
    cfg.target_size = 60;
    const auto result = build_database(records, cfg);
    CHECK(result.report.input_count == 101);
    CHECK(result.report.after_dbscan <= 100);
    CHECK(result.report.final_count == 60);
    CHECK(result.database.count() == 60);
    CHECK(result.kept.size() == 60);
    const auto j = result.report.to_json();
    CHECK(j.at("final_count") == 60);
  }

  TEST_CASE("curation that removes everything is an error") {
    std::mt19937_64 rng(7);
    std::vector<StructureEmbedding> emb;
    for (int i = 0; i < 10; ++i) emb.push_back(synthetic::random_unit(rng, 32));
    CurationConfig cfg;
    cfg.dbscan_eps = 0.001;
    cfg.dbscan_min_pts = 3;
    try {
      build_database(records_for(emb, {"Dress"}), cfg);
      FAIL("empty curation accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyAfterCuration);
    }
  }

  TEST_CASE("config validation") {
    CurationConfig cfg;
    cfg.dbscan_eps = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.dbscan_eps = 2.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = CurationConfig{};
    cfg.dbscan_min_pts = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
  }
}
