#include <cmath>
#include <cstring>

#include "doctest.h"
#include "tcl/check.hpp"
#include "tcl/gradcheck.hpp"
#include "tcl/graph.hpp"
#include "tcl/rng.hpp"
#include "tcl/tensor_ops.hpp"

using namespace tcl;

namespace {

Tensor rand_t(Rng& r, std::size_t m, std::size_t n, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::zeros({m, n});
  for (auto& v : t.values) v = r.uniform(lo, hi);
  return t;
}

// f = <op(x), w> so every output coordinate feeds the scalar with a distinct
// weight; a bug in any single adjoint entry shows up.
template <class BuildFn>
void check_unary_grad(const char* name, BuildFn build, const Tensor& x, const Tensor& w) {
  auto f = [&](const Tensor& p) {
    Graph g;
    NodeId y = build(g, g.parameter(p));
    return g.scalar_value(g.dot(y, g.constant(w)));
  };
  Graph g;
  NodeId in = g.parameter(x);
  NodeId s = g.dot(build(g, in), g.constant(w));
  g.backward(s);
  GradCheckReport rep = gradcheck(name, f, x, g.gradient(in));
  INFO(rep.name, " max_rel_err=", rep.max_rel_err, " checked=", rep.checked);
  CHECK(rep.pass);
  CHECK(rep.checked > 0);
}

}  // namespace

TEST_SUITE_BEGIN("numgrad");

TEST_CASE("relu clamps negatives and keeps positives") {
  Graph g;
  NodeId y = g.relu(g.constant(Tensor::row({-1.0, 0.0, 2.0})));
  CHECK(g.value(y).values == std::vector<double>{0.0, 0.0, 2.0});
}

TEST_CASE("row_l2norm maps zero rows to zero rows") {
  Graph g;
  NodeId y = g.row_l2norm(g.constant(Tensor::matrix(2, 3, {0, 0, 0, 3, 0, 4})));
  CHECK(g.value(y).at(0, 0) == 0.0);
  CHECK(g.value(y).at(0, 2) == 0.0);
  CHECK(g.value(y).at(1, 0) == doctest::Approx(0.6));
  CHECK(g.value(y).at(1, 2) == doctest::Approx(0.8));
}

TEST_CASE("row_softmax rows sum to one and stay finite for huge logits") {
  Graph g;
  NodeId y = g.row_softmax(g.constant(Tensor::matrix(2, 3, {1000.0, 0.0, -5.0, 0.1, 0.2, 0.3})));
  const Tensor& v = g.value(y);
  CHECK(v.at(0, 0) + v.at(0, 1) + v.at(0, 2) == doctest::Approx(1.0));
  CHECK(v.at(1, 0) + v.at(1, 1) + v.at(1, 2) == doctest::Approx(1.0));
  CHECK(v.all_finite());
}

TEST_CASE("row_log_softmax equals log of softmax and survives large shifts") {
  Rng r(7);
  Tensor x = rand_t(r, 3, 5, -3, 3);
  for (auto& v : x.values) v += 500.0;  // a naive exp would overflow
  Graph g;
  NodeId a = g.row_log_softmax(g.constant(x));
  NodeId b = g.log(g.row_softmax(g.constant(x)));
  for (std::size_t i = 0; i < 15; ++i)
    CHECK(g.value(a).values[i] == doctest::Approx(g.value(b).values[i]).epsilon(1e-12));
}

TEST_CASE("matmul against hand-computed entries") {
  Graph g;
  NodeId c = g.matmul(g.constant(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6})),
                      g.constant(Tensor::matrix(3, 2, {7, 8, 9, 10, 11, 12})));
  CHECK(g.value(c).values == std::vector<double>{58, 64, 139, 154});
}

TEST_CASE("every unary primitive matches central finite differences") {
  Rng r(101);
  SUBCASE("relu") {
    Tensor x = rand_t(r, 4, 5);
    for (auto& v : x.values)
      if (std::abs(v) < 1e-3) v = 0.1;  // keep clear of the kink
    check_unary_grad("relu", [](Graph& g, NodeId i) { return g.relu(i); }, x, rand_t(r, 4, 5));
  }
  SUBCASE("row_l2norm") {
    check_unary_grad("row_l2norm", [](Graph& g, NodeId i) { return g.row_l2norm(i); },
                     rand_t(r, 4, 6), rand_t(r, 4, 6));
  }
  SUBCASE("row_softmax") {
    check_unary_grad("row_softmax", [](Graph& g, NodeId i) { return g.row_softmax(i); },
                     rand_t(r, 3, 4, -2, 2), rand_t(r, 3, 4));
  }
  SUBCASE("row_log_softmax") {
    check_unary_grad("row_log_softmax", [](Graph& g, NodeId i) { return g.row_log_softmax(i); },
                     rand_t(r, 3, 4, -2, 2), rand_t(r, 3, 4));
  }
  SUBCASE("log") {
    check_unary_grad("log", [](Graph& g, NodeId i) { return g.log(i); },
                     rand_t(r, 3, 4, 0.2, 3.0), rand_t(r, 3, 4));
  }
  SUBCASE("exp") {
    check_unary_grad("exp", [](Graph& g, NodeId i) { return g.exp(i); },
                     rand_t(r, 3, 4, -2, 2), rand_t(r, 3, 4));
  }
  SUBCASE("scale") {
    check_unary_grad("scale", [](Graph& g, NodeId i) { return g.scale(i, -2.5); },
                     rand_t(r, 3, 4), rand_t(r, 3, 4));
  }
  SUBCASE("gather_rows with a repeated index accumulates") {
    std::vector<std::size_t> idx{2, 0, 2, 1};
    check_unary_grad(
        "gather_rows",
        [&](Graph& g, NodeId i) { return g.gather_rows(i, idx); },
        rand_t(r, 3, 4), rand_t(r, 4, 4));
  }
  SUBCASE("row_sum") {
    check_unary_grad("row_sum", [](Graph& g, NodeId i) { return g.row_sum(i); },
                     rand_t(r, 3, 5), rand_t(r, 3, 1));
  }
  SUBCASE("sum_all and mean_all") {
    check_unary_grad("sum_all", [](Graph& g, NodeId i) { return g.sum_all(i); },
                     rand_t(r, 3, 5), Tensor::full({1, 1}, 1.7));
    check_unary_grad("mean_all", [](Graph& g, NodeId i) { return g.mean_all(i); },
                     rand_t(r, 3, 5), Tensor::full({1, 1}, -0.9));
  }
}

TEST_CASE("binary primitives match finite differences on both operands") {
  Rng r(202);
  Tensor a = rand_t(r, 3, 4), b = rand_t(r, 4, 5), w = rand_t(r, 3, 5);

  auto check_pair = [&](const char* name, auto build, const Tensor& pa, const Tensor& pb,
                        const Tensor& pw) {
    for (int side = 0; side < 2; ++side) {
      auto f = [&](const Tensor& p) {
        Graph g;
        NodeId na = g.parameter(side == 0 ? p : pa);
        NodeId nb = g.parameter(side == 1 ? p : pb);
        return g.scalar_value(g.dot(build(g, na, nb), g.constant(pw)));
      };
      Graph g;
      NodeId na = g.parameter(pa), nb = g.parameter(pb);
      g.backward(g.dot(build(g, na, nb), g.constant(pw)));
      GradCheckReport rep =
          gradcheck(name, f, side == 0 ? pa : pb, g.gradient(side == 0 ? na : nb));
      INFO(name, " side=", side, " max_rel_err=", rep.max_rel_err);
      CHECK(rep.pass);
    }
  };

  check_pair("matmul", [](Graph& g, NodeId x, NodeId y) { return g.matmul(x, y); }, a, b, w);
  Tensor e1 = rand_t(r, 3, 4), e2 = rand_t(r, 3, 4), ew = rand_t(r, 3, 4);
  check_pair("add", [](Graph& g, NodeId x, NodeId y) { return g.add(x, y); }, e1, e2, ew);
  check_pair("sub", [](Graph& g, NodeId x, NodeId y) { return g.sub(x, y); }, e1, e2, ew);
  check_pair("mul", [](Graph& g, NodeId x, NodeId y) { return g.mul(x, y); }, e1, e2, ew);
  Tensor bias = rand_t(r, 1, 4);
  check_pair("add_bias", [](Graph& g, NodeId x, NodeId y) { return g.add_bias(x, y); }, e1,
             bias, ew);
  Tensor one = Tensor::full({1, 1}, 1.0);
  check_pair("dot", [](Graph& g, NodeId x, NodeId y) { return g.dot(x, y); }, e1, e2, one);
}

TEST_CASE("shared subexpressions accumulate through both paths") {
  // s = sum(x*x + x*x), ds/dx = 4x
  Rng r(303);
  Tensor x = rand_t(r, 2, 3);
  Graph g;
  NodeId in = g.parameter(x);
  NodeId z = g.mul(in, in);
  NodeId s = g.sum_all(g.add(z, z));
  g.backward(s);
  Tensor grad = g.gradient(in);
  for (std::size_t i = 0; i < x.numel(); ++i)
    CHECK(grad.values[i] == doctest::Approx(4.0 * x.values[i]).epsilon(1e-12));
}

TEST_CASE("repeated backward calls accumulate adjoints") {
  Graph g;
  NodeId in = g.parameter(Tensor::row({1.0, 2.0}));
  NodeId s = g.sum_all(in);
  g.backward(s);
  g.backward(s);
  CHECK(g.gradient(in).values == std::vector<double>{2.0, 2.0});
}

TEST_CASE("replay reproduces recorded values bit for bit") {
  Rng r(404);
  Graph g;
  NodeId x = g.parameter(rand_t(r, 4, 6));
  NodeId w = g.constant(rand_t(r, 6, 3));
  NodeId y = g.row_softmax(g.add_bias(g.matmul(g.relu(x), w), g.constant(rand_t(r, 1, 3))));
  NodeId s = g.mean_all(g.log(y));
  g.backward(s);
  CHECK(g.replay_matches());
}

TEST_CASE("two identical builds produce bit-identical values and gradients") {
  auto build = [] {
    Rng r(555);
    Graph g;
    NodeId x = g.parameter(rand_t(r, 5, 8));
    NodeId w = g.constant(rand_t(r, 8, 4));
    NodeId s = g.sum_all(g.row_l2norm(g.matmul(g.relu(x), w)));
    g.backward(s);
    return std::pair{g.value(s).values[0], g.gradient(x).values};
  };
  auto [v1, g1] = build();
  auto [v2, g2] = build();
  CHECK(std::memcmp(&v1, &v2, sizeof v1) == 0);
  CHECK(std::memcmp(g1.data(), g2.data(), g1.size() * sizeof(double)) == 0);
}

TEST_CASE("shape and validity violations are rejected") {
  Graph g;
  NodeId a = g.constant(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
  CHECK_THROWS_AS(g.matmul(a, a), std::invalid_argument);
  CHECK_THROWS_AS(g.add(a, g.constant(Tensor::row({1.0}))), std::invalid_argument);
  CHECK_THROWS_AS(g.gather_rows(a, {5}), std::invalid_argument);
  CHECK_THROWS_AS(g.constant(Tensor::row({1.0, INFINITY})), NumericError);
  CHECK_THROWS_AS(g.exp(g.constant(Tensor::row({1000.0}))), NumericError);  // overflows to inf
  CHECK_THROWS_AS(g.backward(a, Tensor::row({1.0})), std::invalid_argument);
  CHECK_THROWS_AS(g.backward(static_cast<NodeId>(999)), std::invalid_argument);
  CHECK_THROWS_AS(g.scalar_value(a), std::invalid_argument);
}

TEST_CASE("backward through a small two-layer network matches finite differences") {
  Rng r(606);
  Tensor x = rand_t(r, 4, 6), w1 = rand_t(r, 6, 5), b1 = rand_t(r, 1, 5);
  Tensor w2 = rand_t(r, 5, 3), b2 = rand_t(r, 1, 3);
  std::vector<int> labels{0, 2, 1, 2};

  auto loss_at = [&](const Tensor& w1p) {
    Graph g;
    NodeId h = g.relu(g.add_bias(g.matmul(g.constant(x), g.parameter(w1p)), g.constant(b1)));
    NodeId lp = g.row_log_softmax(g.add_bias(g.matmul(h, g.constant(w2)), g.constant(b2)));
    Tensor onehot = Tensor::zeros({4, 3});
    for (std::size_t i = 0; i < 4; ++i) onehot.at(i, labels[i]) = 1.0;
    return -0.25 * g.scalar_value(g.dot(lp, g.constant(onehot)));
  };

  Graph g;
  NodeId w1n = g.parameter(w1);
  NodeId h = g.relu(g.add_bias(g.matmul(g.constant(x), w1n), g.constant(b1)));
  NodeId lp = g.row_log_softmax(g.add_bias(g.matmul(h, g.constant(w2)), g.constant(b2)));
  Tensor onehot = Tensor::zeros({4, 3});
  for (std::size_t i = 0; i < 4; ++i) onehot.at(i, labels[i]) = 1.0;
  NodeId s = g.scale(g.dot(lp, g.constant(onehot)), -0.25);
  g.backward(s);

  GradCheckReport rep = gradcheck("mlp_w1", loss_at, w1, g.gradient(w1n));
  INFO("max_rel_err=", rep.max_rel_err);
  CHECK(rep.pass);
}

TEST_CASE("loss gradcheck suite covers the eight losses and is seed-stable") {
  const auto reports = loss_gradcheck_suite(3, 9);
  REQUIRE(reports.size() == 8);
  const char* names[8] = {"info_nce", "nll_mean", "gated_nll", "loss_st",
                          "loss_ts",  "tcl_multi", "idl",      "icdl"};
  for (std::size_t i = 0; i < 8; ++i) {
    INFO(names[i], " max_rel_err=", reports[i].max_rel_err);
    CHECK(reports[i].name == names[i]);
    CHECK(reports[i].pass);
    CHECK(reports[i].checked > 0);
  }

  const auto again = loss_gradcheck_suite(3, 9);
  for (std::size_t i = 0; i < 8; ++i) CHECK(again[i].max_rel_err == reports[i].max_rel_err);

  const auto other = loss_gradcheck_suite(3, 10);
  bool differs = false;
  for (std::size_t i = 0; i < 8; ++i) differs |= other[i].max_rel_err != reports[i].max_rel_err;
  CHECK(differs);

  CHECK_THROWS_AS((void)loss_gradcheck_suite(0, 1), std::invalid_argument);
}

TEST_SUITE_END();
