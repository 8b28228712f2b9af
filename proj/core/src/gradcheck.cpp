#include "tcl/gradcheck.hpp"

#include <cmath>

#include "tcl/check.hpp"
#include "tcl/losses.hpp"
#include "tcl/rng.hpp"
#include "tcl/tensor_ops.hpp"

namespace tcl {

GradCheckReport gradcheck(const std::string& name,
                          const std::function<double(const Tensor&)>& f,
                          const Tensor& point, const Tensor& analytic,
                          double h, double rel_tol, double grad_floor) {
  check_arg(point.same_shape(analytic),
            "gradcheck: analytic gradient shape does not match point");
  GradCheckReport rep;
  rep.name = name;
  Tensor x = point;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double a = analytic.values[i];
    if (std::abs(a) <= grad_floor) {
      ++rep.skipped;
      continue;
    }
    const double keep = x.values[i];
    x.values[i] = keep + h;
    const double fp = f(x);
    x.values[i] = keep - h;
    const double fm = f(x);
    x.values[i] = keep;
    const double num = (fp - fm) / (2.0 * h);
    const double rel = std::abs(a - num) / std::max(std::abs(a), std::abs(num));
    ++rep.checked;
    if (rel > rep.max_rel_err) {
      rep.max_rel_err = rel;
      rep.worst_analytic = a;
      rep.worst_numeric = num;
    }
  }
  rep.pass = rep.max_rel_err < rel_tol;
  return rep;
}

namespace {

Tensor unit_rows(Rng& rng, std::size_t n, std::size_t d) {
  Tensor x = Tensor::zeros({n, d});
  for (double& v : x.values) v = rng.gaussian();
  return ops::row_l2norm(x);
}

MemoryBank::View rand_bank(Rng& rng, std::size_t K, std::size_t d, std::size_t classes) {
  MemoryBank::View v;
  v.keys = unit_rows(rng, K, d);
  for (std::size_t j = 0; j < K; ++j) v.labels.push_back(static_cast<int>(rng.below(classes)));
  return v;
}

std::vector<int> rand_labels(Rng& rng, std::size_t n, std::size_t classes) {
  std::vector<int> l;
  for (std::size_t i = 0; i < n; ++i) l.push_back(static_cast<int>(rng.below(classes)));
  return l;
}

struct Dims {
  std::size_t b, K, d, classes;
  double tau;
};

Dims rand_dims(Rng& rng) {
  Dims s;
  s.b = 2 + rng.below(3);
  s.K = 4 + rng.below(7);
  s.d = 3 + rng.below(3);
  s.classes = 2 + rng.below(2);
  s.tau = 0.25 * static_cast<double>(std::size_t{1} << rng.below(3));
  return s;
}

void fold(GradCheckReport& agg, const GradCheckReport& inst) {
  agg.checked += inst.checked;
  agg.skipped += inst.skipped;
  if (inst.max_rel_err > agg.max_rel_err) {
    agg.max_rel_err = inst.max_rel_err;
    agg.worst_analytic = inst.worst_analytic;
    agg.worst_numeric = inst.worst_numeric;
  }
}

}  // namespace

std::vector<GradCheckReport> loss_gradcheck_suite(std::size_t instances, std::uint64_t seed,
                                                  double h, double rel_tol, double grad_floor) {
  check_arg(instances > 0, "gradcheck: need at least one instance");
  std::vector<GradCheckReport> out;
  const auto sweep = [&](const std::string& name,
                         const std::function<GradCheckReport(Rng&, std::size_t)>& one) {
    GradCheckReport agg;
    agg.name = name;
    Rng rng(mix_seed(seed, {stream_tag("gradcheck"), out.size()}));
    for (std::size_t i = 0; i < instances; ++i) fold(agg, one(rng, i));
    agg.pass = agg.checked > 0 && agg.max_rel_err < rel_tol;
    out.push_back(agg);
  };

  sweep("info_nce", [&](Rng& rng, std::size_t) {
    const Dims s = rand_dims(rng);
    const Tensor point = unit_rows(rng, s.b, s.d);
    const Tensor own = unit_rows(rng, s.b, s.d);
    const auto bank = rand_bank(rng, s.K, s.d, s.classes);
    auto f = [&](const Tensor& x) {
      Graph g;
      return instance_contrast(g, g.constant(x), own, bank, s.tau).value;
    };
    Graph g;
    const NodeId leaf = g.parameter(point);
    const DirectedTerm term = instance_contrast(g, leaf, own, bank, s.tau);
    g.backward(term.node);
    return gradcheck("", f, point, g.gradient(leaf), h, rel_tol, grad_floor);
  });

  sweep("nll_mean", [&](Rng& rng, std::size_t) {
    const Dims s = rand_dims(rng);
    Tensor point = Tensor::zeros({s.b, s.classes});
    for (double& v : point.values) v = rng.gaussian();
    const auto labels = rand_labels(rng, s.b, s.classes);
    auto f = [&](const Tensor& x) {
      Graph g;
      return g.scalar_value(nll_mean(g, g.constant(x), labels));
    };
    Graph g;
    const NodeId leaf = g.parameter(point);
    g.backward(nll_mean(g, leaf, labels));
    return gradcheck("", f, point, g.gradient(leaf), h, rel_tol, grad_floor);
  });

  sweep("gated_nll", [&](Rng& rng, std::size_t) {
    const Dims s = rand_dims(rng);
    Tensor point = Tensor::zeros({s.b, s.classes});
    for (double& v : point.values) v = rng.gaussian();
    std::vector<PseudoLabelResult> pseudo(s.b);
    for (std::size_t i = 0; i < s.b; ++i) {
      pseudo[i].label = static_cast<int>(rng.below(s.classes));
      pseudo[i].gated = rng.below(2) == 0;
    }
    pseudo[0].gated = true;
    auto f = [&](const Tensor& x) {
      Graph g;
      return gated_nll(g, g.constant(x), pseudo).value;
    };
    Graph g;
    const NodeId leaf = g.parameter(point);
    const GatedLoss term = gated_nll(g, leaf, pseudo);
    g.backward(term.node);
    return gradcheck("", f, point, g.gradient(leaf), h, rel_tol, grad_floor);
  });

  const auto directed = [&](Rng& rng) {
    for (;;) {
      const Dims s = rand_dims(rng);
      const Tensor point = unit_rows(rng, s.b, s.d);
      const auto ql = rand_labels(rng, s.b, s.classes);
      const auto bank = rand_bank(rng, s.K, s.d, s.classes);
      Graph g;
      const NodeId leaf = g.parameter(point);
      const DirectedTerm term = class_contrast(g, leaf, ql, bank, s.tau);
      if (!term.has_node) continue;  // label draw left nothing to contrast, redraw
      g.backward(term.node);
      auto f = [&](const Tensor& x) {
        Graph g2;
        return class_contrast(g2, g2.constant(x), ql, bank, s.tau).value;
      };
      return gradcheck("", f, point, g.gradient(leaf), h, rel_tol, grad_floor);
    }
  };
  sweep("loss_st", [&](Rng& rng, std::size_t) { return directed(rng); });
  sweep("loss_ts", [&](Rng& rng, std::size_t) { return directed(rng); });

  sweep("tcl_multi", [&](Rng& rng, std::size_t i) {
    for (;;) {
      const Dims s = rand_dims(rng);
      const Tensor src0 = unit_rows(rng, s.b, s.d);
      const Tensor src1 = unit_rows(rng, s.b, s.d);
      const Tensor tgt = unit_rows(rng, s.b, s.d);
      const auto l0 = rand_labels(rng, s.b, s.classes);
      const auto l1 = rand_labels(rng, s.b, s.classes);
      const auto lt = rand_labels(rng, s.b, s.classes);
      const std::vector<MemoryBank::View> sbanks = {rand_bank(rng, s.K, s.d, s.classes),
                                                    rand_bank(rng, s.K, s.d, s.classes)};
      const auto tbank = rand_bank(rng, s.K, s.d, s.classes);
      const bool leaf_is_target = i % 2 == 0;
      auto build = [&](Graph& g, const Tensor& x, NodeId* leaf) {
        const NodeId xn = leaf ? g.parameter(x) : g.constant(x);
        if (leaf) *leaf = xn;
        std::vector<DomainBatch> sources(2);
        sources[0] = {leaf_is_target ? g.constant(src0) : xn, &l0};
        sources[1] = {g.constant(src1), &l1};
        const DomainBatch target{leaf_is_target ? xn : g.constant(tgt), &lt};
        return tcl_multi(g, sources, target, sbanks, tbank, s.tau);
      };
      Graph g;
      NodeId leaf = 0;
      const VariantLoss v = build(g, leaf_is_target ? tgt : src0, &leaf);
      if (!v.has_node) continue;
      g.backward(v.node);
      const Tensor point = leaf_is_target ? tgt : src0;
      auto f = [&](const Tensor& x) {
        Graph g2;
        return build(g2, x, nullptr).value;
      };
      return gradcheck("", f, point, g.gradient(leaf), h, rel_tol, grad_floor);
    }
  });

  sweep("idl", [&](Rng& rng, std::size_t) {
    const Dims s = rand_dims(rng);
    const Tensor point = unit_rows(rng, s.b, s.d);
    const Tensor own = unit_rows(rng, s.b, s.d);
    const auto lt = rand_labels(rng, s.b, s.classes);
    const auto tbank = rand_bank(rng, s.K, s.d, s.classes);
    auto f = [&](const Tensor& x) {
      Graph g;
      const DomainBatch target{g.constant(x), &lt};
      return idl(g, target, own, tbank, s.tau).value;
    };
    Graph g;
    const NodeId leaf = g.parameter(point);
    const DomainBatch target{leaf, &lt};
    const VariantLoss v = idl(g, target, own, tbank, s.tau);
    g.backward(v.node);
    return gradcheck("", f, point, g.gradient(leaf), h, rel_tol, grad_floor);
  });

  sweep("icdl", [&](Rng& rng, std::size_t i) {
    for (;;) {
      const Dims s = rand_dims(rng);
      const Tensor src0 = unit_rows(rng, s.b, s.d);
      const Tensor src1 = unit_rows(rng, s.b, s.d);
      const Tensor tgt = unit_rows(rng, s.b, s.d);
      const auto l0 = rand_labels(rng, s.b, s.classes);
      const auto l1 = rand_labels(rng, s.b, s.classes);
      const auto lt = rand_labels(rng, s.b, s.classes);
      const std::vector<MemoryBank::View> sbanks = {rand_bank(rng, s.K, s.d, s.classes),
                                                    rand_bank(rng, s.K, s.d, s.classes)};
      const auto tbank = rand_bank(rng, s.K, s.d, s.classes);
      const bool leaf_is_target = i % 2 == 0;
      auto build = [&](Graph& g, const Tensor& x, NodeId* leaf) {
        const NodeId xn = leaf ? g.parameter(x) : g.constant(x);
        if (leaf) *leaf = xn;
        std::vector<DomainBatch> sources(2);
        sources[0] = {leaf_is_target ? g.constant(src0) : xn, &l0};
        sources[1] = {g.constant(src1), &l1};
        const DomainBatch target{leaf_is_target ? xn : g.constant(tgt), &lt};
        return icdl(g, sources, target, sbanks, tbank, s.tau);
      };
      Graph g;
      NodeId leaf = 0;
      const VariantLoss v = build(g, leaf_is_target ? tgt : src0, &leaf);
      if (!v.has_node) continue;
      g.backward(v.node);
      const Tensor point = leaf_is_target ? tgt : src0;
      auto f = [&](const Tensor& x) {
        Graph g2;
        return build(g2, x, nullptr).value;
      };
      return gradcheck("", f, point, g.gradient(leaf), h, rel_tol, grad_floor);
    }
  });

  return out;
}

}  // namespace tcl
