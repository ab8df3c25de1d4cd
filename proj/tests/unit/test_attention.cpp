#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ragmem/attention.hpp"

using namespace ragmem::attention;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  }
  return m;
}

oracle::Mat to_mat(const Eigen::MatrixXd& m) {
  oracle::Mat out(m.rows(), oracle::Vec(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  }
  return out;
}

double max_diff(const Eigen::MatrixXd& a, const oracle::Mat& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) worst = std::max(worst, std::abs(a(i, j) - b[i][j]));
  }
  return worst;
}

}  // namespace

TEST_SUITE("attention") {
  TEST_CASE("matches the loop oracle") {
    std::mt19937_64 rng(1);
    const auto q = random_matrix(rng, 4, 8), k = random_matrix(rng, 6, 8),
               v = random_matrix(rng, 6, 3);
    CHECK(max_diff(scaled_dot_attention(q, k, v), oracle::attention(to_mat(q), to_mat(k), to_mat(v))) <=
          1e-12);
    const auto p = attention_probabilities(q, k);
    for (int i = 0; i < 4; ++i) CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("concatenated keys equal the lambda mixture") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
      const auto q = random_matrix(rng, 3, 5);
      const auto km = random_matrix(rng, 4, 5), vm = random_matrix(rng, 4, 2);
      const auto kr = random_matrix(rng, 7, 5), vr = random_matrix(rng, 7, 2);
      const auto concat = concat_kv_attention(q, km, vm, kr, vr);
      const auto mix = concat_mixture(q, km, vm, kr, vr);
      CHECK((concat - mix.combined()).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK(mix.lambda.minCoeff() > 0.0);
      CHECK(mix.lambda.maxCoeff() < 1.0);
    }
  }

  TEST_CASE("empty reference reduces to plain attention") {
    std::mt19937_64 rng(3);
    const auto q = random_matrix(rng, 3, 4), k = random_matrix(rng, 5, 4),
               v = random_matrix(rng, 5, 2);
    const Eigen::MatrixXd none_k(0, 4), none_v(0, 2);
    CHECK(concat_kv_attention(q, k, v, none_k, none_v) == scaled_dot_attention(q, k, v));
  }

  TEST_CASE("dual attention is a plain sum and differs from the mixture") {
    std::mt19937_64 rng(4);
    const auto q = random_matrix(rng, 3, 4);
    const auto k1 = random_matrix(rng, 5, 4), v1 = random_matrix(rng, 5, 2);
    const auto k2 = random_matrix(rng, 6, 4), v2 = random_matrix(rng, 6, 2);
    const auto dual = dual_cross_attention(q, k1, v1, k2, v2);
    CHECK((dual - scaled_dot_attention(q, k1, v1) - scaled_dot_attention(q, k2, v2))
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
    CHECK((dual - concat_kv_attention(q, k1, v1, k2, v2)).cwiseAbs().maxCoeff() > 1e-3);
  }
}
