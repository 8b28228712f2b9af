#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "tcl/check.hpp"
#include "tcl/gradcheck.hpp"
#include "tcl/graph.hpp"
#include "tcl/losses.hpp"
#include "tcl/rng.hpp"
#include "tcl/tensor_ops.hpp"

using namespace tcl;

namespace {

Tensor unit_rows(Rng& rng, std::size_t n, std::size_t d) {
  Tensor x = Tensor::zeros({n, d});
  for (double& v : x.values) v = rng.gaussian();
  return ops::row_l2norm(x);
}

MemoryBank::View make_view(Tensor keys, std::vector<int> labels) {
  MemoryBank::View v;
  v.keys = std::move(keys);
  v.labels = std::move(labels);
  return v;
}

double dot_rows(const Tensor& a, std::size_t i, const Tensor& b, std::size_t j) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.cols(); ++k) s += a.at(i, k) * b.at(j, k);
  return s;
}

// Literal pair-by-pair transcription: for every class, every query of that
// class, every same-class bank key, one softmax term whose denominator is the
// positive plus all differently-labeled keys. Plain exp arithmetic.
double oracle_class_contrast(const Tensor& Q, const std::vector<int>& ql, const Tensor& keys,
                             const std::vector<int>& kl, double tau, std::size_t& pairs,
                             double& raw) {
  pairs = 0;
  raw = 0.0;
  int cmax = -1;
  for (int c : ql) cmax = std::max(cmax, c);
  for (int c = 0; c <= cmax; ++c)
    for (std::size_t i = 0; i < ql.size(); ++i) {
      if (ql[i] != c) continue;
      for (std::size_t j = 0; j < kl.size(); ++j) {
        if (kl[j] != c) continue;
        const double num = std::exp(dot_rows(Q, i, keys, j) / tau);
        double den = num;
        for (std::size_t l = 0; l < kl.size(); ++l)
          if (kl[l] != c) den += std::exp(dot_rows(Q, i, keys, l) / tau);
        raw += -std::log(num / den);
        ++pairs;
      }
    }
  return pairs == 0 ? 0.0 : raw / static_cast<double>(pairs);
}

struct RandomInstance {
  Tensor queries;
  std::vector<int> qlabels;
  MemoryBank::View bank;
};

RandomInstance random_instance(Rng& rng, std::size_t max_b, std::size_t max_k, int classes,
                               std::size_t d) {
  RandomInstance inst;
  const std::size_t b = 1 + rng.below(max_b);
  const std::size_t K = rng.below(max_k + 1);
  inst.queries = unit_rows(rng, b, d);
  for (std::size_t i = 0; i < b; ++i)
    inst.qlabels.push_back(static_cast<int>(rng.below(classes)));
  std::vector<int> kl;
  for (std::size_t j = 0; j < K; ++j) kl.push_back(static_cast<int>(rng.below(classes)));
  inst.bank = make_view(K > 0 ? unit_rows(rng, K, d) : Tensor::zeros({0, d}), std::move(kl));
  return inst;
}

}  // namespace

TEST_SUITE("losses") {

TEST_CASE("info_nce worked values") {
  Tensor q = Tensor::row({1.0, 0.0});
  Tensor kp = Tensor::row({1.0, 0.0});
  Tensor kn = Tensor::matrix(1, 2, {0.0, 1.0});
  CHECK(info_nce(q, kp, Tensor::zeros({0, 2}), 1.0) == 0.0);
  CHECK(std::abs(info_nce(q, kp, kn, 1.0) - std::log1p(std::exp(-1.0))) < 1e-15);
  CHECK(std::abs(info_nce(q, kp, kn, 0.05) - std::log1p(std::exp(-20.0))) < 1e-14);
  CHECK(info_nce(q, kp, kn, 0.05) == doctest::Approx(2.061e-9).epsilon(1e-3));
  CHECK_THROWS_AS(info_nce(q, kp, kn, 0.0), std::invalid_argument);
}

TEST_CASE("class contrast: single pair worked example") {
  Graph g;
  const NodeId q = g.constant(Tensor::matrix(1, 2, {1.0, 0.0}));
  auto bank = make_view(Tensor::matrix(2, 2, {1.0, 0.0, 0.0, 1.0}), {0, 1});
  auto term = class_contrast(g, q, {0}, bank, 1.0);
  REQUIRE(term.has_node);
  CHECK(term.pair_count == 1);
  CHECK(std::abs(term.value - 0.313262) < 1e-6);
  CHECK(std::abs(term.value - std::log1p(std::exp(-1.0))) < 1e-12);
  CHECK(term.raw_sum == term.value);
}

TEST_CASE("class contrast: empty bank and no-positive cases") {
  Graph g;
  const NodeId q = g.constant(Tensor::matrix(1, 3, {1.0, 0.0, 0.0}));
  auto empty = make_view(Tensor::zeros({0, 3}), {});
  auto t0 = class_contrast(g, q, {0}, empty, 1.0);
  CHECK(!t0.has_node);
  CHECK(t0.pair_count == 0);
  CHECK(t0.value == 0.0);

  // bank holds only other classes: no positive pair exists
  auto others = make_view(Tensor::matrix(2, 3, {0.0, 1.0, 0.0, 0.0, 0.0, 1.0}), {1, 2});
  auto t1 = class_contrast(g, q, {0}, others, 1.0);
  CHECK(!t1.has_node);
  CHECK(t1.pair_count == 0);
}

TEST_CASE("class contrast: positives without negatives contribute exact zeros") {
  Graph g;
  Rng rng(101);
  Tensor q = unit_rows(rng, 3, 4);
  const NodeId qn = g.constant(q);
  auto bank = make_view(unit_rows(rng, 5, 4), {0, 0, 0, 0, 0});
  auto term = class_contrast(g, qn, {0, 0, 0}, bank, 0.05);
  CHECK(term.pair_count == 15);  // every pair counted
  CHECK(!term.has_node);         // but nothing to differentiate
  CHECK(term.value == 0.0);
  CHECK(term.raw_sum == 0.0);
}

TEST_CASE("class contrast: loop-oracle equivalence on random instances") {
  Rng rng(103);
  const double taus[] = {1.0, 0.25, 0.05};
  for (int t = 0; t < 200; ++t) {
    auto inst = random_instance(rng, 4, 16, 3, 1 + rng.below(6));
    const double tau = taus[t % 3];
    Graph g;
    auto term = class_contrast(g, g.constant(inst.queries), inst.qlabels, inst.bank, tau);
    std::size_t pairs = 0;
    double raw = 0.0;
    const double want =
        oracle_class_contrast(inst.queries, inst.qlabels, inst.bank.keys, inst.bank.labels, tau,
                              pairs, raw);
    CHECK(term.pair_count == pairs);
    CHECK(std::abs(term.value - want) <= 1e-9);
    CHECK(std::abs(term.raw_sum - raw) <= 1e-9);
    CHECK(term.value >= 0.0);
  }
}

TEST_CASE("class contrast: permutation invariance of banks and batches") {
  Rng rng(107);
  auto inst = random_instance(rng, 4, 12, 3, 5);
  if (inst.bank.labels.empty()) inst.bank = make_view(unit_rows(rng, 6, 5), {0, 1, 2, 0, 1, 2});
  Graph g;
  auto base = class_contrast(g, g.constant(inst.queries), inst.qlabels, inst.bank, 0.25);

  // rotate the bank
  const std::size_t K = inst.bank.labels.size();
  Tensor rkeys = Tensor::zeros({K, 5});
  std::vector<int> rlabels(K);
  for (std::size_t j = 0; j < K; ++j) {
    const std::size_t src = (j + 3) % K;
    rlabels[j] = inst.bank.labels[src];
    for (std::size_t c = 0; c < 5; ++c) rkeys.at(j, c) = inst.bank.keys.at(src, c);
  }
  Graph g2;
  auto rot = class_contrast(g2, g2.constant(inst.queries), inst.qlabels,
                            make_view(std::move(rkeys), std::move(rlabels)), 0.25);
  CHECK(std::abs(base.value - rot.value) <= 1e-12);

  // reverse the query batch
  const std::size_t b = inst.qlabels.size();
  Tensor rq = Tensor::zeros({b, 5});
  std::vector<int> rql(b);
  for (std::size_t i = 0; i < b; ++i) {
    rql[i] = inst.qlabels[b - 1 - i];
    for (std::size_t c = 0; c < 5; ++c) rq.at(i, c) = inst.queries.at(b - 1 - i, c);
  }
  Graph g3;
  auto rev = class_contrast(g3, g3.constant(rq), rql, inst.bank, 0.25);
  CHECK(std::abs(base.value - rev.value) <= 1e-12);
  CHECK(base.pair_count == rev.pair_count);
}

TEST_CASE("class contrast: raising a positive similarity lowers that pair's term") {
  double prev = 1e18;
  for (double theta : {1.2, 0.8, 0.4, 0.1}) {
    Graph g;
    const NodeId q = g.constant(Tensor::matrix(1, 3, {1.0, 0.0, 0.0}));
    Tensor keys = Tensor::matrix(3, 3, {std::cos(theta), std::sin(theta), 0.0,  // positive
                                        0.0, 0.8, 0.6,                          // negatives fixed
                                        0.0, 0.0, 1.0});
    auto term = class_contrast(g, q, {0}, make_view(std::move(keys), {0, 1, 1}), 0.5);
    REQUIRE(term.pair_count == 1);
    CHECK(term.value < prev);
    prev = term.value;
  }
}

TEST_CASE("instance contrast: worked example, empty bank, info_nce oracle") {
  Graph g;
  Tensor q = Tensor::matrix(1, 2, {1.0, 0.0});
  const NodeId qn = g.constant(q);
  auto none = make_view(Tensor::zeros({0, 2}), {});
  auto t0 = instance_contrast(g, qn, q, none, 1.0);
  CHECK(!t0.has_node);
  CHECK(t0.value == 0.0);
  CHECK(t0.pair_count == 1);

  auto bank = make_view(Tensor::matrix(1, 2, {0.0, 1.0}), {7});
  auto t1 = instance_contrast(g, qn, q, bank, 1.0);
  REQUIRE(t1.has_node);
  CHECK(t1.pair_count == 1);
  CHECK(std::abs(t1.value - std::log1p(std::exp(-1.0))) < 1e-12);

  // batch form equals the mean of per-row single-query losses
  Rng rng(109);
  Tensor queries = unit_rows(rng, 4, 6);
  Tensor own = unit_rows(rng, 4, 6);
  Tensor bkeys = unit_rows(rng, 9, 6);
  Graph g2;
  auto batch = instance_contrast(g2, g2.constant(queries), own,
                                 make_view(bkeys, std::vector<int>(9, 0)), 0.05);
  double want = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    Tensor qi = Tensor::zeros({1, 6}), oi = Tensor::zeros({1, 6});
    for (std::size_t j = 0; j < 6; ++j) {
      qi.at(0, j) = queries.at(i, j);
      oi.at(0, j) = own.at(i, j);
    }
    want += info_nce(qi, oi, bkeys, 0.05);
  }
  want /= 4.0;
  CHECK(std::abs(batch.value - want) <= 1e-9);
}

TEST_CASE("nll_mean: uniform and certain predictions") {
  Graph g;
  const NodeId uniform = g.constant(Tensor::zeros({2, 10}));
  CHECK(std::abs(g.scalar_value(nll_mean(g, uniform, {3, 7})) - std::log(10.0)) < 1e-12);

  const NodeId onecls = g.constant(Tensor::zeros({3, 1}));
  CHECK(g.scalar_value(nll_mean(g, onecls, {0, 0, 0})) == 0.0);

  CHECK_THROWS_AS(nll_mean(g, uniform, {3}), std::invalid_argument);
  CHECK_THROWS_AS(nll_mean(g, uniform, {3, 10}), std::invalid_argument);
}

TEST_CASE("nll_mean: loop oracle on random logits") {
  Rng rng(113);
  Tensor logits = Tensor::zeros({7, 5});
  for (double& v : logits.values) v = rng.gaussian(0.0, 2.0);
  std::vector<int> labels;
  for (int i = 0; i < 7; ++i) labels.push_back(static_cast<int>(rng.below(5)));
  Graph g;
  const double got = g.scalar_value(nll_mean(g, g.constant(logits), labels));
  double want = 0.0;
  for (std::size_t i = 0; i < 7; ++i) {
    double m = logits.at(i, 0);
    for (std::size_t c = 1; c < 5; ++c) m = std::max(m, logits.at(i, c));
    double z = 0.0;
    for (std::size_t c = 0; c < 5; ++c) z += std::exp(logits.at(i, c) - m);
    want += -(logits.at(i, static_cast<std::size_t>(labels[i])) - m - std::log(z));
  }
  want /= 7.0;
  CHECK(std::abs(got - want) <= 1e-12);
}

TEST_CASE("gated_nll: no gate, ln 2 example, and row selection") {
  Graph g;
  std::vector<PseudoLabelResult> pseudo(2);
  pseudo[0].label = 0;
  pseudo[1].label = 1;
  const NodeId logits = g.constant(Tensor::zeros({2, 2}));

  auto closed = gated_nll(g, logits, pseudo);
  CHECK(!closed.has_node);
  CHECK(closed.gated_count == 0);
  CHECK(closed.value == 0.0);

  pseudo[0].gated = true;  // uniform over 2 classes: query prob 0.5 on the label
  auto one = gated_nll(g, logits, pseudo);
  REQUIRE(one.has_node);
  CHECK(one.gated_count == 1);
  CHECK(std::abs(one.value - std::log(2.0)) < 1e-12);
  CHECK(std::abs(one.value - 0.693147) < 1e-6);

  // gated rows only: hand-build the expected mean over rows 0 and 2
  Rng rng(127);
  Tensor lg = Tensor::zeros({3, 4});
  for (double& v : lg.values) v = rng.gaussian();
  std::vector<PseudoLabelResult> mix(3);
  mix[0].label = 2;
  mix[0].gated = true;
  mix[1].label = 0;
  mix[2].label = 1;
  mix[2].gated = true;
  Graph g2;
  auto got = gated_nll(g2, g2.constant(lg), mix);
  CHECK(got.gated_count == 2);
  const Tensor ls = ops::row_log_softmax(lg);
  const double want = -(ls.at(0, 2) + ls.at(2, 1)) / 2.0;
  CHECK(std::abs(got.value - want) <= 1e-12);
}

TEST_CASE("tcl_multi: M=1 equals the two directed terms") {
  Rng rng(131);
  const std::size_t d = 5;
  auto src = random_instance(rng, 4, 10, 3, d);
  auto tgt = random_instance(rng, 4, 10, 3, d);

  Graph g;
  DomainBatch sb{g.constant(src.queries), &src.qlabels};
  DomainBatch tb{g.constant(tgt.queries), &tgt.qlabels};
  auto multi = tcl_multi(g, {sb}, tb, {src.bank}, tgt.bank, 0.25);

  Graph g2;
  auto st = class_contrast(g2, g2.constant(src.queries), src.qlabels, tgt.bank, 0.25);
  auto ts = class_contrast(g2, g2.constant(tgt.queries), tgt.qlabels, src.bank, 0.25);
  CHECK(multi.pair_count == st.pair_count + ts.pair_count);
  CHECK(multi.value == st.value + ts.value);  // same adds in the same order
  REQUIRE(multi.terms.size() == 2);
  CHECK(multi.terms[0].value == st.value);
  CHECK(multi.terms[1].value == ts.value);
}

TEST_CASE("tcl_multi: loop oracle across M in {1,2,3}") {
  Rng rng(137);
  for (int t = 0; t < 60; ++t) {
    const std::size_t M = 1 + rng.below(3);
    const std::size_t d = 2 + rng.below(4);
    const double tau = (t % 2) ? 0.05 : 0.5;

    std::vector<RandomInstance> src;
    std::vector<MemoryBank::View> src_banks;
    for (std::size_t m = 0; m < M; ++m) {
      src.push_back(random_instance(rng, 3, 8, 3, d));
      src_banks.push_back(src.back().bank);
    }
    auto tgt = random_instance(rng, 3, 8, 3, d);

    Graph g;
    std::vector<DomainBatch> sb;
    for (auto& s : src) sb.push_back({g.constant(s.queries), &s.qlabels});
    DomainBatch tb{g.constant(tgt.queries), &tgt.qlabels};
    auto multi = tcl_multi(g, sb, tb, src_banks, tgt.bank, tau);

    double want = 0.0;
    std::size_t want_pairs = 0;
    std::size_t pairs = 0;
    double raw = 0.0;
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t n = 0; n < M; ++n) {
        if (n == m) continue;
        want += oracle_class_contrast(src[m].queries, src[m].qlabels, src_banks[n].keys,
                                      src_banks[n].labels, tau, pairs, raw);
        want_pairs += pairs;
      }
    for (std::size_t m = 0; m < M; ++m) {
      want += oracle_class_contrast(src[m].queries, src[m].qlabels, tgt.bank.keys,
                                    tgt.bank.labels, tau, pairs, raw);
      want_pairs += pairs;
    }
    for (std::size_t m = 0; m < M; ++m) {
      want += oracle_class_contrast(tgt.queries, tgt.qlabels, src_banks[m].keys,
                                    src_banks[m].labels, tau, pairs, raw);
      want_pairs += pairs;
    }
    CHECK(multi.pair_count == want_pairs);
    CHECK(std::abs(multi.value - want) <= 1e-9);
  }
}

TEST_CASE("tcl_multi: empty banks give zero, M=0 rejected") {
  Rng rng(139);
  auto src = random_instance(rng, 3, 0, 3, 4);
  auto tgt = random_instance(rng, 3, 0, 3, 4);
  Graph g;
  DomainBatch sb{g.constant(src.queries), &src.qlabels};
  DomainBatch tb{g.constant(tgt.queries), &tgt.qlabels};
  auto multi = tcl_multi(g, {sb, sb}, tb, {src.bank, src.bank}, tgt.bank, 0.05);
  CHECK(!multi.has_node);
  CHECK(multi.value == 0.0);
  CHECK(multi.pair_count == 0);
  CHECK_THROWS_AS(tcl_multi(g, {}, tb, {}, tgt.bank, 0.05), std::invalid_argument);
}

TEST_CASE("icdl: intra-domain terms against the loop oracle") {
  Rng rng(149);
  for (int t = 0; t < 40; ++t) {
    const std::size_t d = 3 + rng.below(3);
    const double tau = (t % 2) ? 0.05 : 1.0;
    auto s0 = random_instance(rng, 3, 8, 3, d);
    auto s1 = random_instance(rng, 3, 8, 3, d);
    auto tgt = random_instance(rng, 3, 8, 3, d);

    Graph g;
    std::vector<DomainBatch> sb{{g.constant(s0.queries), &s0.qlabels},
                                {g.constant(s1.queries), &s1.qlabels}};
    DomainBatch tb{g.constant(tgt.queries), &tgt.qlabels};
    auto v = icdl(g, sb, tb, {s0.bank, s1.bank}, tgt.bank, tau);

    double want = 0.0;
    std::size_t want_pairs = 0, pairs = 0;
    double raw = 0.0;
    want += oracle_class_contrast(s0.queries, s0.qlabels, s0.bank.keys, s0.bank.labels, tau,
                                  pairs, raw);
    want_pairs += pairs;
    want += oracle_class_contrast(s1.queries, s1.qlabels, s1.bank.keys, s1.bank.labels, tau,
                                  pairs, raw);
    want_pairs += pairs;
    want += oracle_class_contrast(tgt.queries, tgt.qlabels, tgt.bank.keys, tgt.bank.labels, tau,
                                  pairs, raw);
    want_pairs += pairs;
    CHECK(v.pair_count == want_pairs);
    CHECK(std::abs(v.value - want) <= 1e-9);
  }
}

TEST_CASE("idl: single-term assembly over the target") {
  Rng rng(151);
  auto tgt = random_instance(rng, 4, 12, 3, 6);
  if (tgt.bank.labels.empty()) tgt.bank = make_view(unit_rows(rng, 5, 6), {0, 1, 2, 0, 1});
  Tensor own = unit_rows(rng, tgt.queries.rows(), 6);
  Graph g;
  DomainBatch tb{g.constant(tgt.queries), &tgt.qlabels};
  auto v = idl(g, tb, own, tgt.bank, 0.05);
  REQUIRE(v.terms.size() == 1);
  CHECK(v.pair_count == tgt.queries.rows());
  Graph g2;
  auto direct = instance_contrast(g2, g2.constant(tgt.queries), own, tgt.bank, 0.05);
  CHECK(v.value == direct.value);
}

TEST_CASE("gradients: directed terms against central differences") {
  Rng rng(157);
  const std::size_t b = 3, K = 7, d = 4;
  Tensor point = unit_rows(rng, b, d);
  std::vector<int> ql{0, 1, 2};
  auto bank = make_view(unit_rows(rng, K, d), {0, 1, 2, 0, 1, 2, 0});
  Tensor own = unit_rows(rng, b, d);

  auto fclass = [&](const Tensor& x) {
    Graph g;
    return class_contrast(g, g.constant(x), ql, bank, 0.5).value;
  };
  Graph gc;
  const NodeId leaf = gc.parameter(point);
  auto term = class_contrast(gc, leaf, ql, bank, 0.5);
  REQUIRE(term.has_node);
  gc.backward(term.node);
  auto rep = gradcheck("class_contrast", fclass, point, gc.gradient(leaf));
  INFO(rep.name, " max rel err ", rep.max_rel_err);
  CHECK(rep.pass);
  CHECK(rep.checked > 0);

  auto finst = [&](const Tensor& x) {
    Graph g;
    return instance_contrast(g, g.constant(x), own, bank, 0.5).value;
  };
  Graph gi;
  const NodeId ileaf = gi.parameter(point);
  auto iterm = instance_contrast(gi, ileaf, own, bank, 0.5);
  gi.backward(iterm.node);
  auto irep = gradcheck("instance_contrast", finst, point, gi.gradient(ileaf));
  CHECK(irep.pass);

  std::vector<PseudoLabelResult> pseudo(b);
  pseudo[0].label = 1;
  pseudo[0].gated = true;
  pseudo[2].label = 0;
  pseudo[2].gated = true;
  Tensor lpoint = Tensor::zeros({b, 4});
  for (double& v : lpoint.values) v = rng.gaussian();
  auto fgate = [&](const Tensor& x) {
    Graph g;
    return gated_nll(g, g.constant(x), pseudo).value;
  };
  Graph gg;
  const NodeId gleaf = gg.parameter(lpoint);
  auto gterm = gated_nll(gg, gleaf, pseudo);
  gg.backward(gterm.node);
  auto grep = gradcheck("gated_nll", fgate, lpoint, gg.gradient(gleaf));
  CHECK(grep.pass);
}

TEST_CASE("total assembly: arithmetic examples and the lambda-zero contract") {
  Graph g;
  const NodeId lsrc = g.constant(Tensor::scalar(1.0));
  GatedLoss ltar;
  ltar.has_node = true;
  ltar.node = g.constant(Tensor::scalar(0.5));
  ltar.value = 0.5;
  ltar.gated_count = 3;
  VariantLoss var;
  var.has_node = true;
  var.node = g.constant(Tensor::scalar(2.0));
  var.value = 2.0;
  var.pair_count = 11;

  CHECK(g.scalar_value(total_node(g, lsrc, ltar, &var, 0.3)) == doctest::Approx(2.1).epsilon(1e-12));
  CHECK(g.scalar_value(total_node(g, lsrc, ltar, &var, 1.0)) == 3.5);
  CHECK(g.scalar_value(total_node(g, lsrc, ltar, nullptr, 0.0)) == 1.5);
  CHECK_THROWS_AS(total_node(g, lsrc, ltar, &var, 0.0), std::invalid_argument);

  auto rep = make_report(g, lsrc, ltar, &var, 0.3);
  CHECK(rep.total == g.scalar_value(total_node(g, lsrc, ltar, &var, 0.3)));
  CHECK(rep.l_src == 1.0);
  CHECK(rep.l_tar == 0.5);
  CHECK(rep.l_tcl == 2.0);
  CHECK(rep.gated_count == 3);
  CHECK(rep.positive_pair_count == 11);
  CHECK(std::abs(rep.total - (rep.l_src + rep.l_tar + 0.3 * rep.l_tcl)) <= 1e-12);

  // warmup reporting: variant computed but excluded from the total
  auto warm = make_report(g, lsrc, ltar, &var, 0.0);
  CHECK(warm.total == 1.5);
  CHECK(warm.l_tcl == 2.0);
}

TEST_CASE("variant names parse both ways") {
  for (Variant v : {Variant::TCL, Variant::IDL, Variant::ICDL, Variant::NONE})
    CHECK(parse_variant(variant_name(v)) == v);
  CHECK_THROWS_AS(parse_variant("tcl"), std::invalid_argument);
  ContrastiveConfig bad;
  bad.tau = 0.0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad.tau = 0.05;
  bad.lambda = 1.5;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

}  // TEST_SUITE
