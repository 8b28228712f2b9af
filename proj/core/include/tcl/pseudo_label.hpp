#pragma once

#include <cstddef>
#include <vector>

#include "tcl/encoder.hpp"
#include "tcl/tensor.hpp"

namespace tcl {

struct PseudoLabelResult {
  int label = 0;            // key-classifier argmax, ties to the lowest index
  double confidence = 0.0;  // max key-classifier probability
  int cluster_label = 0;    // refined label; equals label until a cluster pass runs
  bool gated = false;       // confidence > rho, strictly
};

// Argmax + gate over a batch of classifier logits. cluster_label starts as a
// copy of label; refinement overwrites it later.
std::vector<PseudoLabelResult> pseudo_from_logits(const Tensor& logits, double rho);

// Same thing driven by the key encoder on a target key view.
std::vector<PseudoLabelResult> assign_pseudo_labels(const EncoderPair& pair,
                                                    const Tensor& x_t_key_view, double rho);

struct ClusterState {
  Tensor centroids;             // C x d, unit rows
  std::vector<int> assignment;  // per input row
  int iterations = 0;           // assignment rounds actually run
};

// Alternates max-cosine assignment and normalized-mean centroid updates.
// Empty clusters (and clusters whose mean cancels to zero) keep their previous
// centroid. Stops early once an assignment round reproduces the previous one.
ClusterState spherical_kmeans(const Tensor& features, const Tensor& init_centroids, int iters);

// Sum of cosine similarities between each row and its assigned centroid.
double kmeans_objective(const Tensor& features, const Tensor& centroids,
                        const std::vector<int>& assignment);

// Max-cosine centroid index per row, ties to the lowest index.
std::vector<int> nearest_centroids(const Tensor& centroids, const Tensor& rows);

// Per-class normalized means of source key projections. A class absent from
// the pool falls back to its key-classifier weight vector pushed through the
// key projection head and normalized.
Tensor source_class_centroids(const EncoderPair& pair, const Tensor& source_key_proj,
                              const std::vector<int>& labels, std::size_t classes);

// Runs spherical k-means from the source centroids and returns the cluster
// index per pooled sample. iters == 0 bypasses clustering and returns the
// classifier labels untouched. state_out, when given, receives the fitted
// cluster state (only for iters > 0).
std::vector<int> refine_pseudo_labels(const Tensor& target_pool_key_proj,
                                      const std::vector<int>& classifier_labels,
                                      const Tensor& source_centroids, int iters,
                                      ClusterState* state_out = nullptr);

}  // namespace tcl
