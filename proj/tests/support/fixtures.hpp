#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "ragmem/record.hpp"

namespace fixtures {

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("ragmem-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline ragmem::LandmarkMask box_mask(std::size_t side, std::size_t x0, std::size_t y0,
                                     std::size_t x1, std::size_t y1) {
  ragmem::LandmarkMask m(side, side);
  m.fill_rect(x0, y0, x1, y1);
  return m;
}

inline ragmem::MemoryRecord make_record(std::string id, std::vector<double> embedding,
                                        ragmem::LandmarkMask mask, std::string category = "") {
  return ragmem::MemoryRecord{std::move(id), ragmem::StructureEmbedding::normalize(embedding),
                              std::move(mask), std::move(category), std::nullopt, std::nullopt};
}

// Unit query and k unit neighbours on a common (k-1)-dim affine section of
// the sphere, so the query lies exactly in the neighbours' affine span.
struct AffineInstance {
  ragmem::StructureEmbedding query;
  std::vector<ragmem::StructureEmbedding> neighbors;
};

inline AffineInstance affine_instance(std::mt19937_64& rng, std::size_t dim, std::size_t k) {
  std::normal_distribution<double> gauss;
  // Orthonormal c-direction plus k-1 section directions via Gram-Schmidt.
  std::vector<std::vector<double>> basis;
  while (basis.size() < k) {
    std::vector<double> v(dim);
    for (auto& x : v) x = gauss(rng);
    for (const auto& b : basis) {
      double d = 0.0;
      for (std::size_t i = 0; i < dim; ++i) d += v[i] * b[i];
      for (std::size_t i = 0; i < dim; ++i) v[i] -= d * b[i];
    }
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n < 1e-6) continue;
    for (auto& x : v) x /= n;
    basis.push_back(std::move(v));
  }
  std::uniform_real_distribution<double> height(-0.6, 0.6);
  const double h = height(rng);
  const double r = std::sqrt(1.0 - h * h);
  auto point = [&] {
    std::vector<double> dir(k - 1);
    double n = 0.0;
    for (auto& x : dir) n += (x = gauss(rng)) * x;
    n = std::sqrt(n);
    std::vector<double> p(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      p[i] = h * basis[0][i];
      for (std::size_t a = 0; a + 1 < k; ++a) p[i] += r * dir[a] / n * basis[a + 1][i];
    }
    return ragmem::StructureEmbedding::normalize(p);
  };
  AffineInstance inst{point(), {}};
  for (std::size_t j = 0; j < k; ++j) inst.neighbors.push_back(point());
  return inst;
}

}  // namespace fixtures
