#pragma once

#include <cstdint>
#include <vector>

#include "tcl/tensor.hpp"

namespace tcl {

using NodeId = std::uint32_t;

enum class Op : std::uint8_t {
  Leaf,
  MatMul,
  AddBias,
  Relu,
  RowL2Norm,
  RowSoftmax,
  RowLogSoftmax,
  Log,
  Exp,
  Scale,
  Add,
  Sub,
  Mul,
  Dot,
  GatherRows,
  SumAll,
  MeanAll,
  RowSum,
};

const char* op_name(Op op);

// Eager tape. Every op computes its forward value immediately and appends a
// record; backward() walks the records in reverse. Ops only ever reference
// earlier nodes, so tape order is already topological and the reverse sweep
// touches each node exactly once.
//
// The op set is fixed and every op validates shapes and finiteness up front.
// There is deliberately no broadcasting; the one "broadcast" pattern the
// losses need (a column replicated across K columns) is spelled as a matmul
// with a constant 1 x K row of ones.
class Graph {
 public:
  NodeId constant(Tensor v) { return leaf(std::move(v), false); }
  NodeId parameter(Tensor v) { return leaf(std::move(v), true); }
  NodeId leaf(Tensor v, bool needs_grad);

  NodeId matmul(NodeId a, NodeId b);
  NodeId add_bias(NodeId x, NodeId bias);
  NodeId relu(NodeId x);
  NodeId row_l2norm(NodeId x);
  NodeId row_softmax(NodeId x);
  NodeId row_log_softmax(NodeId x);
  NodeId log(NodeId x);
  NodeId exp(NodeId x);
  NodeId scale(NodeId x, double s);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId dot(NodeId a, NodeId b);
  NodeId gather_rows(NodeId x, std::vector<std::size_t> idx);
  NodeId sum_all(NodeId x);
  NodeId mean_all(NodeId x);
  NodeId row_sum(NodeId x);

  const Tensor& value(NodeId id) const;
  double scalar_value(NodeId id) const;  // 1x1 nodes
  bool needs_grad(NodeId id) const;

  // Seeds the root adjoint (with ones by default) and sweeps the tape once in
  // reverse. Leaf adjoints accumulate across calls; intermediate adjoints are
  // reset at the start of each pass.
  void backward(NodeId root);
  void backward(NodeId root, const Tensor& seed);

  // Adjoint of a node after backward; zeros if backward never reached it.
  Tensor gradient(NodeId id) const;

  std::size_t size() const { return nodes_.size(); }

  // Recomputes every non-leaf value from its parents and verifies the bits
  // match what the tape recorded.
  bool replay_matches() const;

 private:
  struct Node {
    Op op = Op::Leaf;
    NodeId a = 0;
    NodeId b = 0;
    double scalar = 0.0;
    std::vector<std::size_t> idx;
    Tensor value;
    std::vector<double> adj;  // allocated on first backward touch
    bool needs_grad = false;
  };

  NodeId push(Node n);
  Tensor forward_value(const Node& n) const;
  void backprop_node(Node& n);
  void accumulate(NodeId target, const std::vector<double>& contrib);
  std::vector<double>& adj_buffer(NodeId id);
  const Node& node(NodeId id) const;

  std::vector<Node> nodes_;
};

}  // namespace tcl
