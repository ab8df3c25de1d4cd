#pragma once

#include <Eigen/Core>

namespace ragmem::attention {

// Dense float64 reference kernels. Rows are tokens: q is Lq x d,
// k is Lk x d, v is Lk x dv. No heads, no batching.

/// Row-wise softmax(q k^T / sqrt(d)), Lq x Lk. Throws ShapeMismatch.
Eigen::MatrixXd attention_probabilities(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k);

/// softmax(q k^T / sqrt(d)) v with max-shifted exponentials.
Eigen::MatrixXd scaled_dot_attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                     const Eigen::MatrixXd& v);

/// One softmax over the main and reference keys stacked along the sequence
/// axis. An empty reference (0 rows) reduces to plain attention on main.
Eigen::MatrixXd concat_kv_attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k_main,
                                    const Eigen::MatrixXd& v_main,
                                    const Eigen::MatrixXd& k_ref,
                                    const Eigen::MatrixXd& v_ref);

/// The concatenated attention written as a per-row convex mixture
/// lambda * A_main + (1 - lambda) * A_ref, lambda = Z_main / (Z_main + Z_ref).
struct ConcatMixture {
  Eigen::MatrixXd main;     // attention over the main branch alone
  Eigen::MatrixXd reference;
  Eigen::VectorXd lambda;   // per query row
  Eigen::MatrixXd combined() const;
};

/// Both branches must be non-empty.
ConcatMixture concat_mixture(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k_main,
                             const Eigen::MatrixXd& v_main, const Eigen::MatrixXd& k_ref,
                             const Eigen::MatrixXd& v_ref);

/// Attention(q, k_text, v_text) + Attention(q, k_emb, v_emb): an unnormalized
/// sum of two independent softmaxes, not a mixture.
Eigen::MatrixXd dual_cross_attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k_text,
                                     const Eigen::MatrixXd& v_text,
                                     const Eigen::MatrixXd& k_emb,
                                     const Eigen::MatrixXd& v_emb);

}  // namespace ragmem::attention
