#include "tcl/pseudo_label.hpp"

#include <cmath>

#include "tcl/check.hpp"
#include "tcl/tensor_ops.hpp"

namespace tcl {

std::vector<PseudoLabelResult> pseudo_from_logits(const Tensor& logits, double rho) {
  check_arg(rho > 0.0 && rho < 1.0, "pseudo: rho must be in (0, 1)");
  check_arg(logits.rank() == 2, "pseudo: logits must be b x C, got " + shape_str(logits));
  const Tensor probs = ops::row_softmax(logits);
  std::vector<PseudoLabelResult> out(probs.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    int best = 0;
    for (std::size_t c = 1; c < probs.cols(); ++c)
      if (probs.at(i, c) > probs.at(i, best)) best = static_cast<int>(c);
    out[i].label = best;
    out[i].confidence = probs.at(i, static_cast<std::size_t>(best));
    out[i].cluster_label = best;
    out[i].gated = out[i].confidence > rho;
  }
  return out;
}

std::vector<PseudoLabelResult> assign_pseudo_labels(const EncoderPair& pair,
                                                    const Tensor& x_t_key_view, double rho) {
  return pseudo_from_logits(pair.encode_key(x_t_key_view).logits, rho);
}

std::vector<int> nearest_centroids(const Tensor& centroids, const Tensor& rows) {
  check_arg(centroids.rank() == 2 && rows.rank() == 2 && centroids.cols() == rows.cols(),
            "kmeans: centroid and row dims disagree");
  check_arg(centroids.rows() > 0, "kmeans: need at least one centroid");
  std::vector<int> out(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    int best = 0;
    double best_sim = -2.0;
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
      double sim = 0.0;
      for (std::size_t j = 0; j < rows.cols(); ++j) sim += rows.at(i, j) * centroids.at(c, j);
      if (sim > best_sim) {
        best_sim = sim;
        best = static_cast<int>(c);
      }
    }
    out[i] = best;
  }
  return out;
}

double kmeans_objective(const Tensor& features, const Tensor& centroids,
                        const std::vector<int>& assignment) {
  check_arg(assignment.size() == features.rows(), "kmeans: assignment length mismatch");
  double obj = 0.0;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const auto c = static_cast<std::size_t>(assignment[i]);
    for (std::size_t j = 0; j < features.cols(); ++j) obj += features.at(i, j) * centroids.at(c, j);
  }
  return obj;
}

ClusterState spherical_kmeans(const Tensor& features, const Tensor& init_centroids, int iters) {
  check_arg(features.rank() == 2 && features.rows() > 0, "kmeans: need a nonempty feature matrix");
  check_arg(iters >= 1, "kmeans: iters must be >= 1");
  check_arg(init_centroids.rank() == 2 && init_centroids.cols() == features.cols(),
            "kmeans: centroid dims disagree with features");
  const std::size_t C = init_centroids.rows();
  const std::size_t d = features.cols();

  ClusterState st;
  st.centroids = init_centroids;
  for (int it = 0; it < iters; ++it) {
    std::vector<int> next = nearest_centroids(st.centroids, features);
    const bool settled = (it > 0 && next == st.assignment);
    st.assignment = std::move(next);
    st.iterations = it + 1;
    if (settled) break;

    Tensor sums = Tensor::zeros({C, d});
    std::vector<std::size_t> counts(C, 0);
    for (std::size_t i = 0; i < features.rows(); ++i) {
      const auto c = static_cast<std::size_t>(st.assignment[i]);
      ++counts[c];
      for (std::size_t j = 0; j < d; ++j) sums.at(c, j) += features.at(i, j);
    }
    for (std::size_t c = 0; c < C; ++c) {
      if (counts[c] == 0) continue;  // keep the previous centroid
      double norm = 0.0;
      for (std::size_t j = 0; j < d; ++j) norm += sums.at(c, j) * sums.at(c, j);
      norm = std::sqrt(norm);
      if (norm < 1e-12) continue;  // mean cancelled out, keep the previous centroid
      for (std::size_t j = 0; j < d; ++j) st.centroids.at(c, j) = sums.at(c, j) / norm;
    }
  }
  return st;
}

Tensor source_class_centroids(const EncoderPair& pair, const Tensor& source_key_proj,
                              const std::vector<int>& labels, std::size_t classes) {
  check_arg(source_key_proj.rank() == 2, "centroids: projections must be n x d");
  check_arg(labels.size() == source_key_proj.rows(), "centroids: label count mismatch");
  const std::size_t d = source_key_proj.cols();
  check_arg(d == pair.arch().proj_dim, "centroids: projection dim disagrees with the encoder");

  Tensor sums = Tensor::zeros({classes, d});
  std::vector<std::size_t> counts(classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    check_arg(labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < classes,
              "centroids: label out of range");
    const auto c = static_cast<std::size_t>(labels[i]);
    ++counts[c];
    for (std::size_t j = 0; j < d; ++j) sums.at(c, j) += source_key_proj.at(i, j);
  }

  Tensor centroids = Tensor::zeros({classes, d});
  for (std::size_t c = 0; c < classes; ++c) {
    if (counts[c] > 0) {
      Tensor row = Tensor::zeros({1, d});
      for (std::size_t j = 0; j < d; ++j) row.at(0, j) = sums.at(c, j);
      row = ops::row_l2norm(row);
      for (std::size_t j = 0; j < d; ++j) centroids.at(c, j) = row.at(0, j);
    } else {
      // no pooled sample of this class: seed from the classifier weight
      // vector pushed through the key projection head
      const Tensor& w = pair.key().at("psi.cls.weight");  // hidden2 x classes
      Tensor v = Tensor::zeros({1, w.rows()});
      for (std::size_t j = 0; j < w.rows(); ++j) v.at(0, j) = w.at(j, c);
      Tensor row = ops::row_l2norm(
          ops::add_bias(ops::matmul(v, pair.key().at("beta.proj.weight")),
                        pair.key().at("beta.proj.bias")));
      for (std::size_t j = 0; j < d; ++j) centroids.at(c, j) = row.at(0, j);
    }
  }
  return centroids;
}

std::vector<int> refine_pseudo_labels(const Tensor& target_pool_key_proj,
                                      const std::vector<int>& classifier_labels,
                                      const Tensor& source_centroids, int iters,
                                      ClusterState* state_out) {
  if (iters == 0) return classifier_labels;
  check_arg(classifier_labels.size() == target_pool_key_proj.rows(),
            "refine: classifier label count mismatch");
  ClusterState st = spherical_kmeans(target_pool_key_proj, source_centroids, iters);
  std::vector<int> refined = st.assignment;
  if (state_out) *state_out = std::move(st);
  return refined;
}

}  // namespace tcl
