#include "tcl/graph.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "tcl/check.hpp"
#include "tcl/tensor_ops.hpp"

namespace tcl {

const char* op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::MatMul: return "matmul";
    case Op::AddBias: return "add_bias";
    case Op::Relu: return "relu";
    case Op::RowL2Norm: return "row_l2norm";
    case Op::RowSoftmax: return "row_softmax";
    case Op::RowLogSoftmax: return "row_log_softmax";
    case Op::Log: return "log";
    case Op::Exp: return "exp";
    case Op::Scale: return "scale";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Dot: return "dot";
    case Op::GatherRows: return "gather_rows";
    case Op::SumAll: return "sum_all";
    case Op::MeanAll: return "mean_all";
    case Op::RowSum: return "row_sum";
  }
  return "?";
}

const Graph::Node& Graph::node(NodeId id) const {
  check_arg(id < nodes_.size(), "graph: node id out of range");
  return nodes_[id];
}

const Tensor& Graph::value(NodeId id) const { return node(id).value; }

double Graph::scalar_value(NodeId id) const {
  const Tensor& t = value(id);
  check_arg(t.numel() == 1, "graph: scalar_value on non-scalar node " + shape_str(t));
  return t.values[0];
}

bool Graph::needs_grad(NodeId id) const { return node(id).needs_grad; }

NodeId Graph::leaf(Tensor v, bool needs_grad) {
  check_numeric(v.all_finite(), "graph: non-finite values in leaf");
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(v);
  n.needs_grad = needs_grad;
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

Tensor Graph::forward_value(const Node& n) const {
  switch (n.op) {
    case Op::Leaf: return n.value;
    case Op::MatMul: return ops::matmul(node(n.a).value, node(n.b).value);
    case Op::AddBias: return ops::add_bias(node(n.a).value, node(n.b).value);
    case Op::Relu: return ops::relu(node(n.a).value);
    case Op::RowL2Norm: return ops::row_l2norm(node(n.a).value);
    case Op::RowSoftmax: return ops::row_softmax(node(n.a).value);
    case Op::RowLogSoftmax: return ops::row_log_softmax(node(n.a).value);
    case Op::Log: return ops::elem_log(node(n.a).value);
    case Op::Exp: return ops::elem_exp(node(n.a).value);
    case Op::Scale: return ops::scale(node(n.a).value, n.scalar);
    case Op::Add: return ops::add(node(n.a).value, node(n.b).value);
    case Op::Sub: return ops::sub(node(n.a).value, node(n.b).value);
    case Op::Mul: return ops::mul(node(n.a).value, node(n.b).value);
    case Op::Dot: return Tensor::scalar(ops::dot(node(n.a).value, node(n.b).value));
    case Op::GatherRows: return ops::gather_rows(node(n.a).value, n.idx);
    case Op::SumAll: return Tensor::scalar(ops::sum(node(n.a).value));
    case Op::MeanAll: return Tensor::scalar(ops::mean(node(n.a).value));
    case Op::RowSum: return ops::row_sum(node(n.a).value);
  }
  throw std::logic_error("graph: unknown op");
}

NodeId Graph::push(Node n) {
  n.value = forward_value(n);
  check_numeric(n.value.all_finite(),
                std::string("graph: non-finite values in ") + op_name(n.op) + " output");
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  Node n;
  n.op = Op::MatMul;
  n.a = a;
  n.b = b;
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

NodeId Graph::add_bias(NodeId x, NodeId bias) {
  Node n;
  n.op = Op::AddBias;
  n.a = x;
  n.b = bias;
  n.needs_grad = node(x).needs_grad || node(bias).needs_grad;
  return push(std::move(n));
}

#define TCL_UNARY_OP(method, opcode)                  \
  NodeId Graph::method(NodeId x) {                    \
    Node n;                                           \
    n.op = opcode;                                    \
    n.a = x;                                          \
    n.needs_grad = node(x).needs_grad;                \
    return push(std::move(n));                        \
  }

TCL_UNARY_OP(relu, Op::Relu)
TCL_UNARY_OP(row_l2norm, Op::RowL2Norm)
TCL_UNARY_OP(row_softmax, Op::RowSoftmax)
TCL_UNARY_OP(row_log_softmax, Op::RowLogSoftmax)
TCL_UNARY_OP(log, Op::Log)
TCL_UNARY_OP(exp, Op::Exp)
TCL_UNARY_OP(sum_all, Op::SumAll)
TCL_UNARY_OP(mean_all, Op::MeanAll)
TCL_UNARY_OP(row_sum, Op::RowSum)
#undef TCL_UNARY_OP

NodeId Graph::scale(NodeId x, double s) {
  check_numeric(std::isfinite(s), "graph: non-finite scale factor");
  Node n;
  n.op = Op::Scale;
  n.a = x;
  n.scalar = s;
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

#define TCL_BINARY_OP(method, opcode)                               \
  NodeId Graph::method(NodeId a, NodeId b) {                        \
    Node n;                                                         \
    n.op = opcode;                                                  \
    n.a = a;                                                        \
    n.b = b;                                                        \
    n.needs_grad = node(a).needs_grad || node(b).needs_grad;        \
    return push(std::move(n));                                      \
  }

TCL_BINARY_OP(add, Op::Add)
TCL_BINARY_OP(sub, Op::Sub)
TCL_BINARY_OP(mul, Op::Mul)
TCL_BINARY_OP(dot, Op::Dot)
#undef TCL_BINARY_OP

NodeId Graph::gather_rows(NodeId x, std::vector<std::size_t> idx) {
  Node n;
  n.op = Op::GatherRows;
  n.a = x;
  n.idx = std::move(idx);
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

std::vector<double>& Graph::adj_buffer(NodeId id) {
  Node& n = nodes_[id];
  if (n.adj.size() != n.value.numel()) n.adj.assign(n.value.numel(), 0.0);
  return n.adj;
}

void Graph::accumulate(NodeId target, const std::vector<double>& contrib) {
  std::vector<double>& a = adj_buffer(target);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += contrib[i];
}

void Graph::backward(NodeId root) {
  backward(root, Tensor::full(value(root).shape, 1.0));
}

void Graph::backward(NodeId root, const Tensor& seed) {
  check_arg(root < nodes_.size(), "graph: backward on invalid node");
  check_arg(seed.same_shape(value(root)),
            "graph: seed shape " + shape_str(seed) + " does not match root " +
                shape_str(value(root)));
  if (!nodes_[root].needs_grad) return;  // no parameter upstream, nothing to do
  // fresh pass for intermediates; leaf adjoints accumulate across calls
  for (Node& n : nodes_)
    if (n.op != Op::Leaf && !n.adj.empty()) n.adj.assign(n.adj.size(), 0.0);
  {
    std::vector<double>& a = adj_buffer(root);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += seed.values[i];
  }
  for (NodeId i = root + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.adj.empty() || n.op == Op::Leaf) continue;
    backprop_node(n);
  }
}

void Graph::backprop_node(Node& n) {
  const std::vector<double>& dy = n.adj;
  const bool ga = nodes_[n.a].needs_grad;
  const bool gb = (n.op == Op::MatMul || n.op == Op::AddBias || n.op == Op::Add ||
                   n.op == Op::Sub || n.op == Op::Mul || n.op == Op::Dot)
                      ? nodes_[n.b].needs_grad
                      : false;
  switch (n.op) {
    case Op::MatMul: {
      const Tensor& A = nodes_[n.a].value;
      const Tensor& B = nodes_[n.b].value;
      const std::size_t m = A.rows(), k = A.cols(), c = B.cols();
      if (ga) {
        std::vector<double>& da = adj_buffer(n.a);
        for (std::size_t i = 0; i < m; ++i) {
          const double* dyrow = dy.data() + i * c;
          double* darow = da.data() + i * k;
          for (std::size_t kk = 0; kk < k; ++kk) {
            const double* brow = B.values.data() + kk * c;
            double s = 0.0;
            for (std::size_t j = 0; j < c; ++j) s += dyrow[j] * brow[j];
            darow[kk] += s;
          }
        }
      }
      if (gb) {
        std::vector<double>& db = adj_buffer(n.b);
        for (std::size_t i = 0; i < m; ++i) {
          const double* arow = A.values.data() + i * k;
          const double* dyrow = dy.data() + i * c;
          for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            if (av == 0.0) continue;
            double* dbrow = db.data() + kk * c;
            for (std::size_t j = 0; j < c; ++j) dbrow[j] += av * dyrow[j];
          }
        }
      }
      break;
    }
    case Op::AddBias: {
      const std::size_t rows = n.value.rows(), cols = n.value.cols();
      if (ga) accumulate(n.a, dy);
      if (gb) {
        std::vector<double>& db = adj_buffer(n.b);
        for (std::size_t i = 0; i < rows; ++i)
          for (std::size_t j = 0; j < cols; ++j) db[j] += dy[i * cols + j];
      }
      break;
    }
    case Op::Relu: {
      if (!ga) break;
      const Tensor& x = nodes_[n.a].value;
      std::vector<double>& da = adj_buffer(n.a);
      for (std::size_t i = 0; i < da.size(); ++i)
        if (x.values[i] > 0.0) da[i] += dy[i];
      break;
    }
    case Op::RowL2Norm: {
      if (!ga) break;
      const Tensor& x = nodes_[n.a].value;
      const Tensor& y = n.value;
      std::vector<double>& da = adj_buffer(n.a);
      const std::size_t rows = x.rows(), cols = x.cols();
      for (std::size_t i = 0; i < rows; ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < cols; ++j) sq += x.at(i, j) * x.at(i, j);
        const double norm = std::sqrt(sq);
        if (norm > ops::kNormFloor) {
          double yd = 0.0;
          for (std::size_t j = 0; j < cols; ++j) yd += y.at(i, j) * dy[i * cols + j];
          for (std::size_t j = 0; j < cols; ++j)
            da[i * cols + j] += (dy[i * cols + j] - y.at(i, j) * yd) / norm;
        } else {
          // inside the clamp the map is x / kNormFloor, a plain scaling
          for (std::size_t j = 0; j < cols; ++j) da[i * cols + j] += dy[i * cols + j] / ops::kNormFloor;
        }
      }
      break;
    }
    case Op::RowSoftmax: {
      if (!ga) break;
      const Tensor& y = n.value;
      std::vector<double>& da = adj_buffer(n.a);
      const std::size_t rows = y.rows(), cols = y.cols();
      for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += dy[i * cols + j] * y.at(i, j);
        for (std::size_t j = 0; j < cols; ++j)
          da[i * cols + j] += y.at(i, j) * (dy[i * cols + j] - s);
      }
      break;
    }
    case Op::RowLogSoftmax: {
      if (!ga) break;
      const Tensor& y = n.value;
      std::vector<double>& da = adj_buffer(n.a);
      const std::size_t rows = y.rows(), cols = y.cols();
      for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += dy[i * cols + j];
        for (std::size_t j = 0; j < cols; ++j)
          da[i * cols + j] += dy[i * cols + j] - std::exp(y.at(i, j)) * s;
      }
      break;
    }
    case Op::Log: {
      if (!ga) break;
      const Tensor& x = nodes_[n.a].value;
      std::vector<double>& da = adj_buffer(n.a);
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += dy[i] / x.values[i];
      break;
    }
    case Op::Exp: {
      if (!ga) break;
      const Tensor& y = n.value;
      std::vector<double>& da = adj_buffer(n.a);
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += dy[i] * y.values[i];
      break;
    }
    case Op::Scale: {
      if (!ga) break;
      std::vector<double>& da = adj_buffer(n.a);
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += n.scalar * dy[i];
      break;
    }
    case Op::Add: {
      if (ga) accumulate(n.a, dy);
      if (gb) accumulate(n.b, dy);
      break;
    }
    case Op::Sub: {
      if (ga) accumulate(n.a, dy);
      if (gb) {
        std::vector<double>& db = adj_buffer(n.b);
        for (std::size_t i = 0; i < db.size(); ++i) db[i] -= dy[i];
      }
      break;
    }
    case Op::Mul: {
      const Tensor& A = nodes_[n.a].value;
      const Tensor& B = nodes_[n.b].value;
      if (ga) {
        std::vector<double>& da = adj_buffer(n.a);
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += dy[i] * B.values[i];
      }
      if (gb) {
        std::vector<double>& db = adj_buffer(n.b);
        for (std::size_t i = 0; i < db.size(); ++i) db[i] += dy[i] * A.values[i];
      }
      break;
    }
    case Op::Dot: {
      const double g = dy[0];
      const Tensor& A = nodes_[n.a].value;
      const Tensor& B = nodes_[n.b].value;
      if (ga) {
        std::vector<double>& da = adj_buffer(n.a);
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += g * B.values[i];
      }
      if (gb) {
        std::vector<double>& db = adj_buffer(n.b);
        for (std::size_t i = 0; i < db.size(); ++i) db[i] += g * A.values[i];
      }
      break;
    }
    case Op::GatherRows: {
      if (!ga) break;
      std::vector<double>& da = adj_buffer(n.a);
      const std::size_t cols = n.value.cols();
      for (std::size_t r = 0; r < n.idx.size(); ++r)
        for (std::size_t j = 0; j < cols; ++j) da[n.idx[r] * cols + j] += dy[r * cols + j];
      break;
    }
    case Op::SumAll: {
      if (!ga) break;
      const double g = dy[0];
      std::vector<double>& da = adj_buffer(n.a);
      for (double& v : da) v += g;
      break;
    }
    case Op::MeanAll: {
      if (!ga) break;
      const double g = dy[0] / static_cast<double>(nodes_[n.a].value.numel());
      std::vector<double>& da = adj_buffer(n.a);
      for (double& v : da) v += g;
      break;
    }
    case Op::RowSum: {
      if (!ga) break;
      std::vector<double>& da = adj_buffer(n.a);
      const Tensor& x = nodes_[n.a].value;
      const std::size_t rows = x.rows(), cols = x.cols();
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) da[i * cols + j] += dy[i];
      break;
    }
    case Op::Leaf:
      break;
  }
}

Tensor Graph::gradient(NodeId id) const {
  const Node& n = node(id);
  Tensor g = Tensor::zeros(n.value.shape);
  if (!n.adj.empty()) g.values = n.adj;
  return g;
}

bool Graph::replay_matches() const {
  for (const Node& n : nodes_) {
    if (n.op == Op::Leaf) continue;
    Tensor v = forward_value(n);
    if (v.values.size() != n.value.values.size()) return false;
    if (std::memcmp(v.values.data(), n.value.values.data(),
                    v.values.size() * sizeof(double)) != 0)
      return false;
  }
  return true;
}

}  // namespace tcl
