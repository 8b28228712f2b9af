#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tcl/graph.hpp"
#include "tcl/memory_bank.hpp"
#include "tcl/pseudo_label.hpp"
#include "tcl/tensor.hpp"

namespace tcl {

enum class Variant { TCL, IDL, ICDL, NONE };

Variant parse_variant(std::string_view name);
const char* variant_name(Variant v);

struct ContrastiveConfig {
  double tau = 0.05;
  double rho = 0.95;
  double lambda = 0.3;
  Variant variant = Variant::TCL;
};

// tau > 0, rho in (0,1), lambda in [0,1]
void validate(const ContrastiveConfig& cfg);

// One directed contrastive term. pair_count counts every positive pair,
// including pairs whose query row sees no negative key (those contribute an
// exact zero, so no node is built for them). has_node is false when nothing
// needs gradients: no pairs at all, or only zero-contribution pairs.
struct DirectedTerm {
  bool has_node = false;
  NodeId node = 0;  // mean over positive pairs
  double value = 0.0;
  double raw_sum = 0.0;  // un-normalized sum over pairs, diagnostic only
  std::size_t pair_count = 0;
};

// Class-level contrast of query rows against a bank snapshot: for each query
// with label c, every bank key labeled c is a positive, and the denominator
// is that positive plus all keys with label != c. Mean over positive pairs.
DirectedTerm class_contrast(Graph& g, NodeId queries, const std::vector<int>& query_labels,
                            const MemoryBank::View& bank, double tau);

// Instance-level contrast: each query's positive is its own key view (same
// row of own_keys) and every bank key is a negative, labels ignored. Mean
// over queries; pair_count = batch size.
DirectedTerm instance_contrast(Graph& g, NodeId queries, const Tensor& own_keys,
                               const MemoryBank::View& bank, double tau);

// Single-query InfoNCE, plain value form. k_neg may have zero rows, in which
// case the loss is exactly 0.
double info_nce(const Tensor& q, const Tensor& k_pos, const Tensor& k_neg, double tau);

// Mean cross-entropy of logits against labels via fused log-softmax.
NodeId nll_mean(Graph& g, NodeId logits, const std::vector<int>& labels);

// Gated target cross-entropy: mean over rows whose pseudo-label gate is open
// of -log p(classifier pseudo-label | logits). No gated rows, no node.
struct GatedLoss {
  bool has_node = false;
  NodeId node = 0;
  double value = 0.0;
  std::size_t gated_count = 0;
};
GatedLoss gated_nll(Graph& g, NodeId logits, const std::vector<PseudoLabelResult>& pseudo);

// A variant loss assembled from directed terms, each mean-normalized then
// summed. terms holds the directed pieces in build order for diagnostics.
struct VariantLoss {
  bool has_node = false;
  NodeId node = 0;
  double value = 0.0;
  std::size_t pair_count = 0;
  std::vector<DirectedTerm> terms;
};

struct DomainBatch {
  NodeId queries = 0;  // b x d graph node, unit rows
  const std::vector<int>* labels = nullptr;
};

// Cross-domain class-level loss over M source domains and one target.
// Term order: source-source (m outer, n inner, n != m), then each source
// against the target bank, then the target against each source bank. With
// M = 1 this is exactly the two-term single-source loss.
VariantLoss tcl_multi(Graph& g, const std::vector<DomainBatch>& sources,
                      const DomainBatch& target, const std::vector<MemoryBank::View>& source_banks,
                      const MemoryBank::View& target_bank, double tau);

// Intra-domain variant: every domain contrasts only against its own bank.
// Term order: each source against its own bank, then the target.
VariantLoss icdl(Graph& g, const std::vector<DomainBatch>& sources, const DomainBatch& target,
                 const std::vector<MemoryBank::View>& source_banks,
                 const MemoryBank::View& target_bank, double tau);

// Instance-level variant on the target only.
VariantLoss idl(Graph& g, const DomainBatch& target, const Tensor& target_own_keys,
                const MemoryBank::View& target_bank, double tau);

struct LossReport {
  double l_src = 0.0;
  double l_tar = 0.0;
  double l_tcl = 0.0;  // variant loss value, whatever the variant
  double total = 0.0;
  std::size_t gated_count = 0;
  std::size_t positive_pair_count = 0;
  std::vector<std::size_t> term_pair_counts;
};

// total = l_src + l_tar + lambda * variant. Pass variant = nullptr when
// lambda is 0; the variant terms must not have been built at all in that
// case (the bitwise-reproducibility lever for ablations).
NodeId total_node(Graph& g, NodeId l_src, const GatedLoss& l_tar, const VariantLoss* variant,
                  double lambda);
LossReport make_report(Graph& g, NodeId l_src, const GatedLoss& l_tar,
                       const VariantLoss* variant, double lambda);

}  // namespace tcl
