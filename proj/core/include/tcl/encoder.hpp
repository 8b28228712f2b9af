#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tcl/graph.hpp"
#include "tcl/rng.hpp"
#include "tcl/tensor.hpp"

namespace tcl {

struct EncoderArch {
  std::size_t input_dim = 0;
  std::size_t hidden1 = 128;
  std::size_t hidden2 = 64;
  std::size_t proj_dim = 32;
  std::size_t classes = 0;
};

// Ordered name -> tensor map. Iteration order is the canonical parameter
// order everywhere: init, sgd, momentum blends, and checkpoints all walk it.
struct ParamSet {
  std::vector<std::pair<std::string, Tensor>> items;

  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;
  bool has(std::string_view name) const;
  std::size_t size() const { return items.size(); }
};

// Parameter group by name prefix: theta. extractor, beta. projection,
// psi. classifier.
char param_group(std::string_view name);

// Plain SGD with velocity: v <- m*v + g; p <- p - lr*v. One velocity slot
// per parameter, created lazily at zero. Grads are read from each tensor's
// grad buffer.
class SgdOptimizer {
 public:
  SgdOptimizer(double lr, double momentum);
  void step(ParamSet& params);
  double lr() const { return lr_; }
  double momentum() const { return momentum_; }

 private:
  double lr_, momentum_;
  std::vector<std::vector<double>> velocity_;
};

// Query/key encoder twins. The query side learns by backprop; the key side
// only ever moves by blending toward a snapshot of the query side taken
// before the optimizer step, and no gradient buffer is ever attached to it.
class EncoderPair {
 public:
  static EncoderPair init(const EncoderArch& arch, double alpha, Rng& rng);

  struct QueryBinding {
    std::vector<NodeId> nodes;  // aligned with ParamSet order
  };
  struct QueryNodes {
    NodeId features;    // b x hidden2
    NodeId projection;  // b x proj_dim, unit rows
    NodeId logits;      // b x classes
  };
  // Registers the query parameters as graph leaves; call once per graph so
  // several batches share one set of leaves (and one gradient accumulation).
  QueryBinding bind_query(Graph& g) const;
  QueryNodes encode_query(Graph& g, const QueryBinding& bind, const Tensor& x) const;

  struct KeyOut {
    Tensor features, projection, logits;
  };
  // Raw kernels, no tape. Uses the key parameters.
  KeyOut encode_key(const Tensor& x) const;
  // Raw forward with the query parameters, for evaluation.
  KeyOut query_forward(const Tensor& x) const;

  // Copies the graph's gradients into the query tensors' grad buffers.
  void pull_gradients(const Graph& g, const QueryBinding& bind);

  // Snapshot of the query side to blend from; call before the optimizer step.
  void capture_prestep();
  bool has_prestep() const { return prestep_.has_value(); }
  // theta_k <- alpha*theta_k + (1-alpha)*theta_q_snapshot, then the snapshot
  // is consumed. Throws if capture_prestep was not called this iteration.
  void momentum_update();

  ParamSet& query() { return query_; }
  const ParamSet& query() const { return query_; }
  const ParamSet& key() const { return key_; }
  const EncoderArch& arch() const { return arch_; }
  double alpha() const { return alpha_; }

  // Used by checkpoint loading; key grads stay absent by construction.
  static EncoderPair from_params(const EncoderArch& arch, double alpha, ParamSet q, ParamSet k);

 private:
  EncoderPair() = default;
  EncoderArch arch_;
  double alpha_ = 0.0;
  ParamSet query_, key_;
  std::optional<ParamSet> prestep_;
};

// Binary checkpoint: magic "TCLCKPT1", then u32 tensor count, then per tensor
// u32 name length, name bytes (prefixed "q." or "k."), u32 rank, u64 dims,
// and the float64 row-major payload. Little-endian throughout, no padding.
void save_checkpoint(const EncoderPair& pair, const std::filesystem::path& path);
EncoderPair load_checkpoint(const std::filesystem::path& path, double alpha);

}  // namespace tcl
