#include "ragmem/attention.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ragmem/error.hpp"

namespace ragmem::attention {

namespace {

void check_operands(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                    const Eigen::MatrixXd& v) {
  if (q.cols() == 0) throw Error(ErrorCode::ShapeMismatch, "attention needs d > 0");
  if (k.rows() == 0) throw Error(ErrorCode::ShapeMismatch, "attention needs at least one key");
  if (k.cols() != q.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "query width " + std::to_string(q.cols()) +
                                              " != key width " + std::to_string(k.cols()));
  }
  if (v.rows() != k.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "keys and values have different row counts");
  }
  if (!q.allFinite() || !k.allFinite() || !v.allFinite()) {
    throw Error(ErrorCode::NonFinite, "attention operands must be finite");
  }
}

// Stacks two blocks along the sequence axis; an empty block may have any width.
Eigen::MatrixXd stack_rows(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
  if (bottom.rows() == 0) return top;
  if (top.rows() == 0) return bottom;
  if (top.cols() != bottom.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "cannot concatenate blocks of different widths");
  }
  Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

}  // namespace

Eigen::MatrixXd attention_probabilities(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k) {
  check_operands(q, k, k);
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  Eigen::MatrixXd p = (q * k.transpose()) * scale;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double shift = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - shift).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

Eigen::MatrixXd scaled_dot_attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                     const Eigen::MatrixXd& v) {
  check_operands(q, k, v);
  return attention_probabilities(q, k) * v;
}

Eigen::MatrixXd concat_kv_attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k_main,
                                    const Eigen::MatrixXd& v_main,
                                    const Eigen::MatrixXd& k_ref,
                                    const Eigen::MatrixXd& v_ref) {
  if (k_ref.rows() != v_ref.rows() || k_main.rows() != v_main.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "keys and values have different row counts");
  }
  return scaled_dot_attention(q, stack_rows(k_main, k_ref), stack_rows(v_main, v_ref));
}

Eigen::MatrixXd ConcatMixture::combined() const {
  Eigen::MatrixXd out(main.rows(), main.cols());
  for (Eigen::Index i = 0; i < main.rows(); ++i) {
    out.row(i) = lambda(i) * main.row(i) + (1.0 - lambda(i)) * reference.row(i);
  }
  return out;
}

ConcatMixture concat_mixture(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k_main,
                             const Eigen::MatrixXd& v_main, const Eigen::MatrixXd& k_ref,
                             const Eigen::MatrixXd& v_ref) {
  check_operands(q, k_main, v_main);
  check_operands(q, k_ref, v_ref);
  if (v_main.cols() != v_ref.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "branch value widths differ");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  const Eigen::MatrixXd logits_main = (q * k_main.transpose()) * scale;
  const Eigen::MatrixXd logits_ref = (q * k_ref.transpose()) * scale;

  ConcatMixture out{scaled_dot_attention(q, k_main, v_main),
                    scaled_dot_attention(q, k_ref, v_ref), Eigen::VectorXd(q.rows())};
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    // Shared shift across both segments, as in the concatenated softmax.
    const double shift = std::max(logits_main.row(i).maxCoeff(), logits_ref.row(i).maxCoeff());
    const double z_main = (logits_main.row(i).array() - shift).exp().sum();
    const double z_ref = (logits_ref.row(i).array() - shift).exp().sum();
    out.lambda(i) = z_main / (z_main + z_ref);
  }
  return out;
}

Eigen::MatrixXd dual_cross_attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k_text,
                                     const Eigen::MatrixXd& v_text,
                                     const Eigen::MatrixXd& k_emb,
                                     const Eigen::MatrixXd& v_emb) {
  if (v_text.cols() != v_emb.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "branch value widths differ");
  }
  return scaled_dot_attention(q, k_text, v_text) + scaled_dot_attention(q, k_emb, v_emb);
}

}  // namespace ragmem::attention
