#pragma once

// Reference computations written with plain loops, independent of the
// library's Eigen code paths. Shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "ragmem/landmark.hpp"
#include "ragmem/memory_store.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec to_vec(const ragmem::StructureEmbedding& e) {
  return {e.values().begin(), e.values().end()};
}

// ||q - Σ w_j n_j||
inline double objective(const Vec& q, const Mat& n, const Vec& w) {
  Vec r = q;
  for (std::size_t j = 0; j < n.size(); ++j) {
    for (std::size_t c = 0; c < q.size(); ++c) r[c] -= w[j] * n[j][c];
  }
  return norm(r);
}

// Minimum objective over the affine weight set Σw = 1 for K ∈ {2, 3}, free
// weights gridded over [lo, hi] with the given step. For K = 3 the inner
// weight is minimized exactly along each grid line (the objective squared is
// a convex quadratic in it), clamped to [lo, hi]; that is never worse than
// gridding it too.
struct GridResult {
  double objective = std::numeric_limits<double>::infinity();
  Vec weights;
};

inline GridResult grid_min_objective(const Vec& q, const Mat& n, double lo = -2.0,
                                     double hi = 3.0, double step = 1e-3) {
  GridResult best;
  const auto steps = static_cast<long>(std::llround((hi - lo) / step));
  const std::size_t k = n.size();
  // d_j = q - n_j; with Σw = 1, q - Σ w n = Σ w d.
  Mat d(k, Vec(q.size()));
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t c = 0; c < q.size(); ++c) d[j][c] = q[c] - n[j][c];
  }
  Mat g(k, Vec(k));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) g[a][b] = dot(d[a], d[b]);
  }
  auto sq = [&](const Vec& w) {
    double s = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) s += w[a] * w[b] * g[a][b];
    }
    return std::max(s, 0.0);
  };
  auto consider = [&](const Vec& w) {
    const double f = std::sqrt(sq(w));
    if (f < best.objective) best = {f, w};
  };
  for (long i = 0; i <= steps; ++i) {
    const double w0 = lo + static_cast<double>(i) * step;
    if (k == 2) {
      consider({w0, 1.0 - w0});
      continue;
    }
    // f(t) = a t² + b t + c along w = (w0, t, 1 - w0 - t)
    const double f0 = sq({w0, 0.0, 1.0 - w0});
    const double f1 = sq({w0, 1.0, -w0});
    const double fm = sq({w0, -1.0, 2.0 - w0});
    const double a = 0.5 * (f1 + fm) - f0;
    const double b = 0.5 * (f1 - fm);
    double t = a > 0.0 ? -b / (2.0 * a) : lo;
    t = std::clamp(t, lo, hi);
    consider({w0, t, 1.0 - w0 - t});
    consider({w0, lo, 1.0 - w0 - lo});
    consider({w0, hi, 1.0 - w0 - hi});
  }
  return best;
}

// ---- retrieval -----------------------------------------------------------

// Full sort by (similarity desc, id asc) over the stored float32 rows.
inline std::vector<std::string> full_sort_knn(const ragmem::MemoryDatabase& db,
                                              const ragmem::StructureEmbedding& query,
                                              std::size_t k) {
  std::vector<std::pair<double, std::string>> all;
  for (std::size_t i = 0; i < db.count(); ++i) {
    const auto row = db.row(i);
    double s = 0.0, nq = 0.0, nr = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      s += static_cast<double>(row[c]) * query[c];
      nq += query[c] * query[c];
      nr += static_cast<double>(row[c]) * row[c];
    }
    all.emplace_back(s / std::sqrt(nq * nr), db.record(i).id);
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < k && i < all.size(); ++i) ids.push_back(all[i].second);
  return ids;
}

// ---- DBSCAN ----------------------------------------------------------------

// Cosine-distance DBSCAN via the transitive closure of core-core adjacency
// (Warshall), clusters numbered by their lowest core index, border points
// given the lowest-numbered cluster among their core neighbours. This matches
// the classic sequential index-order algorithm.
inline std::vector<int> dbscan_closure(const Mat& x, double eps, std::size_t min_pts) {
  const std::size_t n = x.size();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double cos = dot(x[i], x[j]) / (norm(x[i]) * norm(x[j]));
      adj[i][j] = 1.0 - cos <= eps;
    }
  }
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    core[i] = static_cast<std::size_t>(std::count(adj[i].begin(), adj[i].end(), true)) >= min_pts;
  }
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) reach[i][j] = core[i] && core[j] && adj[i][j];
    reach[i][i] = core[i];
  }
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[i][m]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (reach[m][j]) reach[i][j] = true;
      }
    }
  }
  std::vector<int> label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || label[i] >= 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (reach[i][j]) label[j] = next;
    }
    ++next;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    int best = -1;
    for (std::size_t j = 0; j < n; ++j) {
      if (core[j] && adj[i][j] && (best < 0 || label[j] < best)) best = label[j];
    }
    label[i] = best;
  }
  return label;
}

// ---- InfoNCE ---------------------------------------------------------------

inline double infonce(const Mat& s, double tau) {
  const std::size_t n = s.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : s[i]) m = std::max(m, v / tau);
    double z = 0.0;
    for (double v : s[i]) z += std::exp(v / tau - m);
    total += -(s[i][i] / tau - m - std::log(z));
  }
  return total / static_cast<double>(n);
}

// Central differences of infonce with respect to every entry.
inline Mat infonce_fd_grad(Mat s, double tau, double h = 1e-5) {
  const std::size_t n = s.size();
  Mat g(n, Vec(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double keep = s[i][j];
      s[i][j] = keep + h;
      const double up = infonce(s, tau);
      s[i][j] = keep - h;
      const double down = infonce(s, tau);
      s[i][j] = keep;
      g[i][j] = (up - down) / (2.0 * h);
    }
  }
  return g;
}

// ---- attention -------------------------------------------------------------

// softmax(q kᵀ / √d) v with explicit loops.
inline Mat attention(const Mat& q, const Mat& k, const Mat& v) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.front().size()));
  Mat out(q.size(), Vec(v.front().size(), 0.0));
  for (std::size_t i = 0; i < q.size(); ++i) {
    Vec logits(k.size());
    for (std::size_t j = 0; j < k.size(); ++j) logits[j] = dot(q[i], k[j]) * scale;
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double& l : logits) z += (l = std::exp(l - m));
    for (std::size_t j = 0; j < k.size(); ++j) {
      for (std::size_t c = 0; c < v[j].size(); ++c) out[i][c] += logits[j] / z * v[j][c];
    }
  }
  return out;
}

// ---- masks -----------------------------------------------------------------

inline double pixel_iou(const ragmem::LandmarkMask& a, const ragmem::LandmarkMask& b) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t y = 0; y < a.height(); ++y) {
    for (std::size_t x = 0; x < a.width(); ++x) {
      inter += a.at(x, y) && b.at(x, y);
      uni += a.at(x, y) || b.at(x, y);
    }
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace oracle
