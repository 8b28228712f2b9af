#include "tcl/losses.hpp"

#include <algorithm>
#include <cmath>

#include "tcl/check.hpp"
#include "tcl/tensor_ops.hpp"

namespace tcl {

Variant parse_variant(std::string_view name) {
  if (name == "TCL") return Variant::TCL;
  if (name == "IDL") return Variant::IDL;
  if (name == "ICDL") return Variant::ICDL;
  if (name == "NONE") return Variant::NONE;
  throw std::invalid_argument("variant: expected TCL, IDL, ICDL, or NONE, got '" +
                              std::string(name) + "'");
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::TCL: return "TCL";
    case Variant::IDL: return "IDL";
    case Variant::ICDL: return "ICDL";
    case Variant::NONE: return "NONE";
  }
  throw std::invalid_argument("variant: bad enum value");
}

void validate(const ContrastiveConfig& cfg) {
  check_arg(cfg.tau > 0.0, "config: tau must be positive");
  check_arg(cfg.rho > 0.0 && cfg.rho < 1.0, "config: rho must be in (0, 1)");
  check_arg(cfg.lambda >= 0.0 && cfg.lambda <= 1.0, "config: lambda must be in [0, 1]");
}

namespace {

// log(exp(a) + exp(lse)) done entrywise against precomputed shift constants;
// a and lse_bcast must already be nodes of the same shape, shift is the
// entrywise max of their values.
NodeId log_add_exp(Graph& g, NodeId a, NodeId lse_bcast, Tensor shift) {
  const NodeId c2 = g.constant(std::move(shift));
  return g.add(g.log(g.add(g.exp(g.sub(a, c2)), g.exp(g.sub(lse_bcast, c2)))), c2);
}

}  // namespace

DirectedTerm class_contrast(Graph& g, NodeId queries, const std::vector<int>& query_labels,
                            const MemoryBank::View& bank, double tau) {
  check_arg(tau > 0.0, "contrast: tau must be positive");
  const Tensor& Q = g.value(queries);
  check_arg(Q.rank() == 2, "contrast: queries must be b x d, got " + shape_str(Q));
  const std::size_t b = Q.rows(), d = Q.cols();
  check_arg(query_labels.size() == b, "contrast: one label per query row");

  DirectedTerm out;
  const std::size_t K = bank.labels.size();
  if (b == 0 || K == 0) return out;
  check_arg(bank.keys.rank() == 2 && bank.keys.rows() == K && bank.keys.cols() == d,
            "contrast: bank keys must be K x d");

  std::vector<std::size_t> bank_hist;
  for (int lbl : bank.labels) {
    check_arg(lbl >= 0, "contrast: bank labels must be class indices");
    if (static_cast<std::size_t>(lbl) >= bank_hist.size()) bank_hist.resize(lbl + 1, 0);
    ++bank_hist[static_cast<std::size_t>(lbl)];
  }
  auto positives_of = [&](int c) -> std::size_t {
    return c >= 0 && static_cast<std::size_t>(c) < bank_hist.size()
               ? bank_hist[static_cast<std::size_t>(c)]
               : 0;
  };

  std::vector<std::size_t> active;  // query rows with >= 1 positive and >= 1 negative
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t npos = positives_of(query_labels[i]);
    if (npos == 0) continue;
    out.pair_count += npos;
    if (K - npos > 0) active.push_back(i);
  }
  if (out.pair_count == 0 || active.empty()) return out;
  const std::size_t a = active.size();

  const NodeId qa = a == b ? queries : g.gather_rows(queries, active);
  const NodeId sims = g.scale(g.matmul(qa, g.constant(ops::transpose(bank.keys))), 1.0 / tau);
  const Tensor sv = g.value(sims);  // copy: later nodes may reallocate the tape

  Tensor posmask = Tensor::zeros({a, K});
  Tensor negmask = Tensor::zeros({a, K});
  Tensor rowmax_b = Tensor::zeros({a, K});
  Tensor rowmax_c = Tensor::zeros({a, 1});
  for (std::size_t r = 0; r < a; ++r) {
    const int c = query_labels[active[r]];
    double m = sv.at(r, 0);
    for (std::size_t j = 0; j < K; ++j) {
      (bank.labels[j] == c ? posmask : negmask).at(r, j) = 1.0;
      m = std::max(m, sv.at(r, j));
    }
    rowmax_c.at(r, 0) = m;
    for (std::size_t j = 0; j < K; ++j) rowmax_b.at(r, j) = m;
  }

  // log of the negative mass per row, shifted by the row max for stability
  const NodeId shifted = g.exp(g.sub(sims, g.constant(std::move(rowmax_b))));
  const NodeId neg_mass = g.row_sum(g.mul(shifted, g.constant(std::move(negmask))));
  const NodeId lse_neg = g.add(g.log(neg_mass), g.constant(std::move(rowmax_c)));

  // broadcast the per-row value across K columns, then logaddexp against the
  // per-entry positive score to form log(e^pos + neg mass)
  const NodeId lse_bcast = g.matmul(lse_neg, g.constant(Tensor::full({1, K}, 1.0)));
  const Tensor lv = g.value(lse_neg);
  Tensor shift = Tensor::zeros({a, K});
  for (std::size_t r = 0; r < a; ++r)
    for (std::size_t j = 0; j < K; ++j) shift.at(r, j) = std::max(sv.at(r, j), lv.at(r, 0));
  const NodeId denom_log = log_add_exp(g, sims, lse_bcast, std::move(shift));

  const NodeId per_pair = g.sub(denom_log, sims);  // -log of each pair's softmax
  const NodeId raw = g.dot(per_pair, g.constant(std::move(posmask)));
  out.node = g.scale(raw, 1.0 / static_cast<double>(out.pair_count));
  out.has_node = true;
  out.raw_sum = g.scalar_value(raw);
  out.value = g.scalar_value(out.node);
  return out;
}

DirectedTerm instance_contrast(Graph& g, NodeId queries, const Tensor& own_keys,
                               const MemoryBank::View& bank, double tau) {
  check_arg(tau > 0.0, "contrast: tau must be positive");
  const Tensor& Q = g.value(queries);
  check_arg(Q.rank() == 2, "contrast: queries must be b x d, got " + shape_str(Q));
  check_arg(own_keys.same_shape(Q), "contrast: own keys must match the query batch");
  const std::size_t b = Q.rows(), d = Q.cols();

  DirectedTerm out;
  if (b == 0) return out;
  out.pair_count = b;
  const std::size_t K = bank.labels.size();
  if (K == 0) return out;  // every term is exactly zero without negatives
  check_arg(bank.keys.rank() == 2 && bank.keys.rows() == K && bank.keys.cols() == d,
            "contrast: bank keys must be K x d");

  const NodeId pos = g.scale(g.row_sum(g.mul(queries, g.constant(own_keys))), 1.0 / tau);
  const NodeId sims = g.scale(g.matmul(queries, g.constant(ops::transpose(bank.keys))), 1.0 / tau);
  const Tensor sv = g.value(sims);  // copy: later nodes may reallocate the tape

  Tensor rowmax_b = Tensor::zeros({b, K});
  Tensor rowmax_c = Tensor::zeros({b, 1});
  for (std::size_t r = 0; r < b; ++r) {
    double m = sv.at(r, 0);
    for (std::size_t j = 1; j < K; ++j) m = std::max(m, sv.at(r, j));
    rowmax_c.at(r, 0) = m;
    for (std::size_t j = 0; j < K; ++j) rowmax_b.at(r, j) = m;
  }
  const NodeId neg_mass = g.row_sum(g.exp(g.sub(sims, g.constant(std::move(rowmax_b)))));
  const NodeId lse_neg = g.add(g.log(neg_mass), g.constant(std::move(rowmax_c)));

  const Tensor pv = g.value(pos);
  const Tensor lv = g.value(lse_neg);
  Tensor shift = Tensor::zeros({b, 1});
  for (std::size_t r = 0; r < b; ++r) shift.at(r, 0) = std::max(pv.at(r, 0), lv.at(r, 0));
  const NodeId denom_log = log_add_exp(g, pos, lse_neg, std::move(shift));

  const NodeId raw = g.sum_all(g.sub(denom_log, pos));
  out.node = g.scale(raw, 1.0 / static_cast<double>(b));
  out.has_node = true;
  out.raw_sum = g.scalar_value(raw);
  out.value = g.scalar_value(out.node);
  return out;
}

double info_nce(const Tensor& q, const Tensor& k_pos, const Tensor& k_neg, double tau) {
  check_arg(tau > 0.0, "info_nce: tau must be positive");
  check_arg(q.numel() == k_pos.numel(), "info_nce: query and positive dims disagree");
  const std::size_t d = q.numel();
  double spos = 0.0;
  for (std::size_t j = 0; j < d; ++j) spos += q.values[j] * k_pos.values[j];
  spos /= tau;

  if (k_neg.numel() == 0) return 0.0;
  check_arg(k_neg.rank() == 2 && k_neg.cols() == d, "info_nce: negatives must be K x d");
  std::vector<double> s(k_neg.rows());
  double m = spos;
  for (std::size_t i = 0; i < k_neg.rows(); ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < d; ++j) v += q.values[j] * k_neg.at(i, j);
    s[i] = v / tau;
    m = std::max(m, s[i]);
  }
  double mass = std::exp(spos - m);
  for (double v : s) mass += std::exp(v - m);
  return std::log(mass) + m - spos;
}

NodeId nll_mean(Graph& g, NodeId logits, const std::vector<int>& labels) {
  const Tensor& lg = g.value(logits);
  check_arg(lg.rank() == 2, "nll: logits must be b x C, got " + shape_str(lg));
  const std::size_t b = lg.rows(), C = lg.cols();
  check_arg(labels.size() == b, "nll: one label per row");
  Tensor onehot = Tensor::zeros({b, C});
  for (std::size_t i = 0; i < b; ++i) {
    check_arg(labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < C,
              "nll: label out of range");
    onehot.at(i, static_cast<std::size_t>(labels[i])) = 1.0;
  }
  const NodeId picked = g.dot(g.row_log_softmax(logits), g.constant(std::move(onehot)));
  return g.scale(picked, -1.0 / static_cast<double>(b));
}

GatedLoss gated_nll(Graph& g, NodeId logits, const std::vector<PseudoLabelResult>& pseudo) {
  const Tensor& lg = g.value(logits);
  check_arg(lg.rank() == 2, "nll: logits must be b x C, got " + shape_str(lg));
  check_arg(pseudo.size() == lg.rows(), "nll: one pseudo-label per row");

  GatedLoss out;
  std::vector<std::size_t> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < pseudo.size(); ++i)
    if (pseudo[i].gated) {
      rows.push_back(i);
      labels.push_back(pseudo[i].label);
    }
  out.gated_count = rows.size();
  if (rows.empty()) return out;

  const NodeId picked = rows.size() == lg.rows() ? logits : g.gather_rows(logits, rows);
  out.node = nll_mean(g, picked, labels);
  out.has_node = true;
  out.value = g.scalar_value(out.node);
  return out;
}

namespace {

void fold_term(Graph& g, VariantLoss& out, DirectedTerm term) {
  out.pair_count += term.pair_count;
  if (term.has_node) {
    out.node = out.has_node ? g.add(out.node, term.node) : term.node;
    out.has_node = true;
  }
  out.terms.push_back(std::move(term));
}

}  // namespace

VariantLoss tcl_multi(Graph& g, const std::vector<DomainBatch>& sources,
                      const DomainBatch& target, const std::vector<MemoryBank::View>& source_banks,
                      const MemoryBank::View& target_bank, double tau) {
  check_arg(!sources.empty(), "tcl: need at least one source domain");
  check_arg(sources.size() == source_banks.size(), "tcl: one bank per source domain");
  const std::size_t M = sources.size();
  VariantLoss out;
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t n = 0; n < M; ++n) {
      if (n == m) continue;
      fold_term(g, out,
                class_contrast(g, sources[m].queries, *sources[m].labels, source_banks[n], tau));
    }
  for (std::size_t m = 0; m < M; ++m)
    fold_term(g, out,
              class_contrast(g, sources[m].queries, *sources[m].labels, target_bank, tau));
  for (std::size_t m = 0; m < M; ++m)
    fold_term(g, out, class_contrast(g, target.queries, *target.labels, source_banks[m], tau));
  if (out.has_node) out.value = g.scalar_value(out.node);
  return out;
}

VariantLoss icdl(Graph& g, const std::vector<DomainBatch>& sources, const DomainBatch& target,
                 const std::vector<MemoryBank::View>& source_banks,
                 const MemoryBank::View& target_bank, double tau) {
  check_arg(!sources.empty(), "icdl: need at least one source domain");
  check_arg(sources.size() == source_banks.size(), "icdl: one bank per source domain");
  VariantLoss out;
  for (std::size_t m = 0; m < sources.size(); ++m)
    fold_term(g, out,
              class_contrast(g, sources[m].queries, *sources[m].labels, source_banks[m], tau));
  fold_term(g, out, class_contrast(g, target.queries, *target.labels, target_bank, tau));
  if (out.has_node) out.value = g.scalar_value(out.node);
  return out;
}

VariantLoss idl(Graph& g, const DomainBatch& target, const Tensor& target_own_keys,
                const MemoryBank::View& target_bank, double tau) {
  VariantLoss out;
  fold_term(g, out, instance_contrast(g, target.queries, target_own_keys, target_bank, tau));
  if (out.has_node) out.value = g.scalar_value(out.node);
  return out;
}

NodeId total_node(Graph& g, NodeId l_src, const GatedLoss& l_tar, const VariantLoss* variant,
                  double lambda) {
  check_arg(lambda >= 0.0 && lambda <= 1.0, "total: lambda must be in [0, 1]");
  check_arg(lambda > 0.0 || variant == nullptr,
            "total: lambda = 0 must skip building the variant loss");
  NodeId t = l_src;
  if (l_tar.has_node) t = g.add(t, l_tar.node);
  if (lambda > 0.0 && variant != nullptr && variant->has_node)
    t = g.add(t, g.scale(variant->node, lambda));
  return t;
}

LossReport make_report(Graph& g, NodeId l_src, const GatedLoss& l_tar,
                       const VariantLoss* variant, double lambda) {
  LossReport r;
  r.l_src = g.scalar_value(l_src);
  r.l_tar = l_tar.has_node ? l_tar.value : 0.0;
  r.gated_count = l_tar.gated_count;
  r.total = r.l_src;
  if (l_tar.has_node) r.total += l_tar.value;
  if (variant != nullptr) {
    r.l_tcl = variant->value;
    r.positive_pair_count = variant->pair_count;
    for (const DirectedTerm& t : variant->terms) r.term_pair_counts.push_back(t.pair_count);
    if (lambda > 0.0 && variant->has_node) r.total += lambda * variant->value;
  }
  return r;
}

}  // namespace tcl
