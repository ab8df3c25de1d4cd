#include "ragmem/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ragmem/error.hpp"

namespace ragmem::synthetic {

StructureEmbedding random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal;
  std::vector<double> v(dim);
  for (auto& x : v) x = normal(rng);
  return StructureEmbedding::normalize(v);
}

StructureEmbedding perturbed(const StructureEmbedding& center, double sigma,
                             std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, sigma);
  std::vector<double> v(center.values().begin(), center.values().end());
  for (auto& x : v) x += normal(rng);
  return StructureEmbedding::normalize(v);
}

namespace {

// 4x4 grid of cells with all four corners set, so the bounding box always
// spans the full raster and alignment cannot make two patterns coincide.
LandmarkMask cell_pattern(std::mt19937_64& rng, std::size_t side) {
  LandmarkMask mask(side, side);
  const std::size_t cell = side / 4;
  std::bernoulli_distribution on(0.5);
  for (std::size_t cy = 0; cy < 4; ++cy) {
    for (std::size_t cx = 0; cx < 4; ++cx) {
      const bool corner = (cx == 0 || cx == 3) && (cy == 0 || cy == 3);
      if (corner || on(rng)) {
        mask.fill_rect(cx * cell, cy * cell, (cx + 1) * cell, (cy + 1) * cell);
      }
    }
  }
  return mask;
}

}  // namespace

ClusterWorld make_cluster_world(std::size_t clusters, std::size_t dim, std::size_t side,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ClusterWorld world;
  for (std::size_t c = 0; c < clusters; ++c) world.centers.push_back(random_unit(rng, dim));
  while (world.templates.size() < clusters) {
    LandmarkMask candidate = cell_pattern(rng, side);
    const bool distinct =
        std::all_of(world.templates.begin(), world.templates.end(),
                    [&](const LandmarkMask& t) { return aligned_iou(t, candidate) < 0.7; });
    if (distinct) world.templates.push_back(std::move(candidate));
  }
  return world;
}

std::vector<MemoryRecord> cluster_records(const ClusterWorld& world,
                                          const std::vector<std::size_t>& which,
                                          std::size_t per_cluster, double sigma,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<MemoryRecord> out;
  for (std::size_t c : which) {
    for (std::size_t i = 0; i < per_cluster; ++i) {
      out.push_back(MemoryRecord{fmt::format("c{:02}-{:04}", c, i),
                                 perturbed(world.centers.at(c), sigma, rng),
                                 world.templates.at(c), fmt::format("cluster{}", c),
                                 std::nullopt, std::nullopt});
    }
  }
  return out;
}

std::vector<RetrievalQuery> cluster_queries(const ClusterWorld& world, std::size_t count,
                                            double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<RetrievalQuery> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t c = i % world.centers.size();
    out.push_back(RetrievalQuery{fmt::format("q{:05}", i),
                                 perturbed(world.centers[c], sigma, rng), world.templates[c]});
  }
  return out;
}

const std::vector<std::string>& garment_categories() {
  static const std::vector<std::string> names = {"T-shirt", "Shirt", "Hoodie",
                                                 "Vest",    "Dress", "Jacket"};
  return names;
}

LandmarkMask draw_garment(const GarmentShape& shape, std::size_t side) {
  const std::string& category = garment_categories().at(shape.category);
  const double s = static_cast<double>(side);
  auto px = [s](double f) { return static_cast<std::size_t>(std::clamp(f, 0.0, 1.0) * s); };

  const double cx = 0.5;
  const double body_w = 0.26 + 0.22 * shape.width;
  double body_l = 0.34 + 0.30 * shape.length;
  if (category == "Dress") body_l += 0.2;
  const double top = 0.12;

  LandmarkMask mask(side, side);
  mask.fill_rect(px(cx - body_w / 2), px(top), px(cx + body_w / 2), px(top + body_l));

  if (category != "Vest") {
    const double sleeve_l = 0.04 + 0.18 * shape.sleeve;
    const double sleeve_t = category == "Jacket" ? 0.16 : 0.12;
    mask.fill_rect(px(cx - body_w / 2 - sleeve_l), px(top), px(cx - body_w / 2),
                   px(top + sleeve_t));
    mask.fill_rect(px(cx + body_w / 2), px(top), px(cx + body_w / 2 + sleeve_l),
                   px(top + sleeve_t));
  }

  const double neck_w = 0.12;
  const double neck_d = 0.02 + 0.12 * shape.neckline;
  mask.fill_rect(px(cx - neck_w / 2), px(top), px(cx + neck_w / 2), px(top + neck_d), false);
  if (category == "Hoodie") {
    mask.fill_rect(px(cx - neck_w / 2 - 0.03), px(top - 0.08), px(cx + neck_w / 2 + 0.03),
                   px(top));
  }
  return mask;
}

namespace {

constexpr std::size_t kShapeFeatures = 4;

std::vector<double> shape_features(const GarmentShape& shape) {
  std::vector<double> f = {2 * shape.width - 1, 2 * shape.length - 1, 2 * shape.sleeve - 1,
                           2 * shape.neckline - 1};
  for (std::size_t c = 0; c < garment_categories().size(); ++c) {
    f.push_back(c == shape.category ? 1.0 : 0.0);
  }
  return f;
}

AttributeSet garment_attributes(const GarmentShape& shape) {
  auto bucket = [](double v, std::initializer_list<const char*> names) {
    const std::size_t n = names.size();
    const std::size_t i = std::min(n - 1, static_cast<std::size_t>(v * static_cast<double>(n)));
    return std::string(*(names.begin() + i));
  };
  const std::string& category = garment_categories()[shape.category];
  std::string collar = "Round";
  if (category == "Hoodie") collar = "Hooded";
  if (category == "Shirt") collar = "Shirt";
  if (category == "Jacket") collar = "Stand-up";
  return AttributeSet::from_map({
      {"category", category},
      {"fit", bucket(shape.width, {"Slim", "Regular", "Loose"})},
      {"collar", collar},
      {"sleeve_length", category == "Vest"
                            ? std::string("Sleeveless")
                            : bucket(shape.sleeve, {"Short", "Mid", "Long", "Extra Long"})},
      {"fabric", "Knit"},
      {"length", bucket(shape.length, {"Extra Short", "Short", "Medium", "Long", "Extra Long"})},
      {"with_inner_wear", "No"},
      {"sleeves_rolled_up", "No"},
      {"top_open", category == "Jacket" ? "Yes" : "No"},
      {"top_tuck_in", "No"},
  });
}

}  // namespace

GarmentWorld::GarmentWorld(GarmentWorldConfig config) : config_(config) {
  if (config_.dim == 0 || config_.side < 16) {
    throw Error(ErrorCode::InvalidArgument, "garment world needs dim > 0 and side >= 16");
  }
  std::mt19937_64 rng(config_.seed);
  std::normal_distribution<double> normal;
  const std::size_t features = kShapeFeatures + garment_categories().size();
  basis_.assign(config_.dim, std::vector<double>(features));
  for (auto& row : basis_) {
    for (auto& x : row) x = normal(rng);
  }
}

StructureEmbedding GarmentWorld::embed(const GarmentShape& shape, double noise,
                                       std::mt19937_64& rng) const {
  const auto f = shape_features(shape);
  std::normal_distribution<double> normal(0.0, noise);
  std::vector<double> v(config_.dim);
  for (std::size_t r = 0; r < config_.dim; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < f.size(); ++c) s += basis_[r][c] * f[c];
    v[r] = s / std::sqrt(static_cast<double>(f.size())) + (noise > 0 ? normal(rng) : 0.0);
  }
  return StructureEmbedding::normalize(v);
}

GarmentShape GarmentWorld::random_shape(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> category(0, garment_categories().size() - 1);
  GarmentShape s;
  s.category = category(rng);
  s.width = unit(rng);
  s.length = unit(rng);
  s.sleeve = unit(rng);
  s.neckline = unit(rng);
  return s;
}

std::vector<MemoryRecord> GarmentWorld::pool(std::size_t count, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<MemoryRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (unit(rng) < config_.outlier_fraction) {
      // Off-manifold: random direction, random box silhouette.
      LandmarkMask mask(config_.side, config_.side);
      std::uniform_int_distribution<std::size_t> coord(0, config_.side / 2);
      const std::size_t x0 = coord(rng), y0 = coord(rng);
      mask.fill_rect(x0, y0, x0 + 4 + coord(rng), y0 + 4 + coord(rng));
      out.push_back(MemoryRecord{fmt::format("o{:06}", i), random_unit(rng, config_.dim),
                                 std::move(mask), "Innerwear", std::nullopt,
                                 std::string("synthetic-outlier")});
      continue;
    }
    const GarmentShape shape = random_shape(rng);
    out.push_back(MemoryRecord{fmt::format("g{:06}", i),
                               embed(shape, config_.record_noise, rng),
                               draw_garment(shape, config_.side),
                               garment_categories()[shape.category], garment_attributes(shape),
                               std::string("synthetic")});
  }
  return out;
}

std::vector<RetrievalQuery> GarmentWorld::queries(std::size_t count, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<RetrievalQuery> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const GarmentShape shape = random_shape(rng);
    out.push_back(RetrievalQuery{fmt::format("q{:05}", i),
                                 embed(shape, config_.query_noise, rng),
                                 draw_garment(shape, config_.side)});
  }
  return out;
}

}  // namespace ragmem::synthetic
