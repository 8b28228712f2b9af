#include "tcl/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "tcl/check.hpp"
#include "tcl/tensor_ops.hpp"

namespace tcl {

Tensor& ParamSet::at(std::string_view name) {
  for (auto& [n, t] : items)
    if (n == name) return t;
  throw std::invalid_argument("params: no parameter named '" + std::string(name) + "'");
}

const Tensor& ParamSet::at(std::string_view name) const {
  for (const auto& [n, t] : items)
    if (n == name) return t;
  throw std::invalid_argument("params: no parameter named '" + std::string(name) + "'");
}

bool ParamSet::has(std::string_view name) const {
  for (const auto& [n, t] : items)
    if (n == name) return true;
  return false;
}

char param_group(std::string_view name) {
  if (name.starts_with("theta.")) return 't';
  if (name.starts_with("beta.")) return 'b';
  if (name.starts_with("psi.")) return 'p';
  throw std::invalid_argument("params: unknown group for '" + std::string(name) + "'");
}

SgdOptimizer::SgdOptimizer(double lr, double momentum) : lr_(lr), momentum_(momentum) {
  check_arg(lr > 0.0, "sgd: lr must be positive");
  check_arg(momentum >= 0.0 && momentum < 1.0, "sgd: momentum must be in [0, 1)");
}

void SgdOptimizer::step(ParamSet& params) {
  if (velocity_.empty()) {
    velocity_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i)
      velocity_[i].assign(params.items[i].second.numel(), 0.0);
  }
  check_arg(velocity_.size() == params.size(), "sgd: parameter count changed under optimizer");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params.items[i].second;
    check_arg(p.grad.size() == p.values.size(),
              "sgd: missing gradient for '" + params.items[i].first + "'");
    std::vector<double>& v = velocity_[i];
    for (std::size_t j = 0; j < p.values.size(); ++j) {
      v[j] = momentum_ * v[j] + p.grad[j];
      p.values[j] -= lr_ * v[j];
    }
  }
}

namespace {

struct ParamSpec {
  std::string name;
  std::size_t rows, cols;
};

std::vector<ParamSpec> param_layout(const EncoderArch& a) {
  return {
      {"theta.fc1.weight", a.input_dim, a.hidden1},
      {"theta.fc1.bias", 1, a.hidden1},
      {"theta.fc2.weight", a.hidden1, a.hidden2},
      {"theta.fc2.bias", 1, a.hidden2},
      {"beta.proj.weight", a.hidden2, a.proj_dim},
      {"beta.proj.bias", 1, a.proj_dim},
      {"psi.cls.weight", a.hidden2, a.classes},
      {"psi.cls.bias", 1, a.classes},
  };
}

}  // namespace

EncoderPair EncoderPair::init(const EncoderArch& arch, double alpha, Rng& rng) {
  check_arg(arch.input_dim > 0 && arch.classes > 0, "encoder: arch dims must be positive");
  check_arg(alpha >= 0.0 && alpha < 1.0, "encoder: alpha must be in [0, 1)");
  EncoderPair pair;
  pair.arch_ = arch;
  pair.alpha_ = alpha;
  for (const ParamSpec& spec : param_layout(arch)) {
    Tensor t = Tensor::zeros({spec.rows, spec.cols});
    if (!spec.name.ends_with(".bias")) {
      // uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out))
      const double a = std::sqrt(6.0 / static_cast<double>(spec.rows + spec.cols));
      for (double& v : t.values) v = rng.uniform(-a, a);
    }
    pair.query_.items.emplace_back(spec.name, std::move(t));
  }
  pair.key_ = pair.query_;
  for (auto& [n, t] : pair.key_.items) t.grad.clear();
  return pair;
}

EncoderPair EncoderPair::from_params(const EncoderArch& arch, double alpha, ParamSet q,
                                     ParamSet k) {
  check_arg(alpha >= 0.0 && alpha < 1.0, "encoder: alpha must be in [0, 1)");
  EncoderPair pair;
  pair.arch_ = arch;
  pair.alpha_ = alpha;
  const auto layout = param_layout(arch);
  check_arg(q.size() == layout.size() && k.size() == layout.size(),
            "encoder: wrong parameter count");
  for (const ParamSpec& spec : layout) {
    for (ParamSet* side : {&q, &k}) {
      const Tensor& t = side->at(spec.name);
      check_arg(t.rank() == 2 && t.rows() == spec.rows && t.cols() == spec.cols,
                "encoder: parameter '" + spec.name + "' has wrong shape " + shape_str(t));
    }
  }
  pair.query_ = std::move(q);
  pair.key_ = std::move(k);
  for (auto& [n, t] : pair.key_.items) t.grad.clear();
  return pair;
}

EncoderPair::QueryBinding EncoderPair::bind_query(Graph& g) const {
  QueryBinding b;
  b.nodes.reserve(query_.size());
  for (const auto& [n, t] : query_.items) b.nodes.push_back(g.parameter(t));
  return b;
}

EncoderPair::QueryNodes EncoderPair::encode_query(Graph& g, const QueryBinding& bind,
                                                  const Tensor& x) const {
  check_arg(bind.nodes.size() == 8, "encoder: binding does not match layout");
  const NodeId w1 = bind.nodes[0], b1 = bind.nodes[1], w2 = bind.nodes[2], b2 = bind.nodes[3];
  const NodeId wp = bind.nodes[4], bp = bind.nodes[5], wc = bind.nodes[6], bc = bind.nodes[7];
  const NodeId in = g.constant(x);
  const NodeId h1 = g.relu(g.add_bias(g.matmul(in, w1), b1));
  const NodeId h2 = g.relu(g.add_bias(g.matmul(h1, w2), b2));
  QueryNodes out;
  out.features = h2;
  out.projection = g.row_l2norm(g.add_bias(g.matmul(h2, wp), bp));
  out.logits = g.add_bias(g.matmul(h2, wc), bc);
  return out;
}

static EncoderPair::KeyOut raw_forward(const ParamSet& p, const Tensor& x) {
  const Tensor h1 = ops::relu(ops::add_bias(ops::matmul(x, p.at("theta.fc1.weight")),
                                            p.at("theta.fc1.bias")));
  const Tensor h2 = ops::relu(ops::add_bias(ops::matmul(h1, p.at("theta.fc2.weight")),
                                            p.at("theta.fc2.bias")));
  EncoderPair::KeyOut out;
  out.projection = ops::row_l2norm(
      ops::add_bias(ops::matmul(h2, p.at("beta.proj.weight")), p.at("beta.proj.bias")));
  out.logits = ops::add_bias(ops::matmul(h2, p.at("psi.cls.weight")), p.at("psi.cls.bias"));
  out.features = h2;
  return out;
}

EncoderPair::KeyOut EncoderPair::encode_key(const Tensor& x) const { return raw_forward(key_, x); }

EncoderPair::KeyOut EncoderPair::query_forward(const Tensor& x) const {
  return raw_forward(query_, x);
}

void EncoderPair::pull_gradients(const Graph& g, const QueryBinding& bind) {
  check_arg(bind.nodes.size() == query_.size(), "encoder: binding does not match layout");
  for (std::size_t i = 0; i < query_.size(); ++i) {
    Tensor& p = query_.items[i].second;
    p.grad = g.gradient(bind.nodes[i]).values;
  }
}

void EncoderPair::capture_prestep() { prestep_ = query_; }

void EncoderPair::momentum_update() {
  check_arg(prestep_.has_value(),
            "encoder: momentum_update needs the pre-step query snapshot; call capture_prestep "
            "before the optimizer step");
  for (std::size_t i = 0; i < key_.size(); ++i) {
    std::vector<double>& k = key_.items[i].second.values;
    const std::vector<double>& q = prestep_->items[i].second.values;
    for (std::size_t j = 0; j < k.size(); ++j) k[j] = alpha_ * k[j] + (1.0 - alpha_) * q[j];
  }
  prestep_.reset();
}

// ---- checkpoint io ----------------------------------------------------

namespace {

constexpr char kMagic[8] = {'T', 'C', 'L', 'C', 'K', 'P', 'T', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

void put_u64(std::string& out, std::uint64_t v) {
  char b[8];
  std::memcpy(b, &v, 8);
  out.append(b, 8);
}

struct Cursor {
  const char* p;
  const char* end;
  void need(std::size_t n) const { check_data(p + n <= end, "checkpoint: truncated file"); }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    p += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, p, 8);
    p += 8;
    return v;
  }
};

}  // namespace

void save_checkpoint(const EncoderPair& pair, const std::filesystem::path& path) {
  std::string buf;
  buf.append(kMagic, 8);
  const std::uint32_t count = static_cast<std::uint32_t>(2 * pair.query().size());
  put_u32(buf, count);
  auto put_tensor = [&buf](const std::string& name, const Tensor& t) {
    put_u32(buf, static_cast<std::uint32_t>(name.size()));
    buf.append(name);
    put_u32(buf, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape) put_u64(buf, d);
    const char* raw = reinterpret_cast<const char*>(t.values.data());
    buf.append(raw, t.values.size() * sizeof(double));
  };
  for (const auto& [n, t] : pair.query().items) put_tensor("q." + n, t);
  for (const auto& [n, t] : pair.key().items) put_tensor("k." + n, t);

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  check_data(os.good(), "checkpoint: cannot open '" + path.string() + "' for writing");
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  check_data(os.good(), "checkpoint: short write to '" + path.string() + "'");
}

EncoderPair load_checkpoint(const std::filesystem::path& path, double alpha) {
  std::ifstream is(path, std::ios::binary);
  check_data(is.good(), "checkpoint: cannot open '" + path.string() + "'");
  std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

  check_data(buf.size() >= 8, "checkpoint: truncated file");
  check_data(std::memcmp(buf.data(), kMagic, 7) == 0, "checkpoint: bad magic");
  check_data(buf[7] == kMagic[7],
             "checkpoint: unsupported version byte '" + std::string(1, buf[7]) + "'");

  Cursor c{buf.data() + 8, buf.data() + buf.size()};
  const std::uint32_t count = c.u32();
  ParamSet q, k;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = c.u32();
    c.need(name_len);
    std::string name(c.p, name_len);
    c.p += name_len;
    const std::uint32_t rank = c.u32();
    check_data(rank >= 1 && rank <= 8, "checkpoint: implausible tensor rank");
    std::vector<std::size_t> shape(rank);
    std::size_t numel = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape[d] = static_cast<std::size_t>(c.u64());
      check_data(shape[d] > 0 && numel <= (1u << 28) / shape[d],
                 "checkpoint: implausible tensor dims");
      numel *= shape[d];
    }
    c.need(numel * sizeof(double));
    Tensor t;
    t.shape = std::move(shape);
    t.values.resize(numel);
    std::memcpy(t.values.data(), c.p, numel * sizeof(double));
    c.p += numel * sizeof(double);
    check_data(t.all_finite(), "checkpoint: non-finite values in '" + name + "'");

    if (name.starts_with("q."))
      q.items.emplace_back(name.substr(2), std::move(t));
    else if (name.starts_with("k."))
      k.items.emplace_back(name.substr(2), std::move(t));
    else
      throw DataError("checkpoint: tensor '" + name + "' has no side prefix");
  }
  check_data(c.p == c.end, "checkpoint: trailing bytes after last tensor");
  check_data(q.size() == k.size() && q.size() == 8, "checkpoint: unexpected tensor set");

  try {
    EncoderArch arch;
    arch.input_dim = q.at("theta.fc1.weight").rows();
    arch.hidden1 = q.at("theta.fc1.weight").cols();
    arch.hidden2 = q.at("theta.fc2.weight").cols();
    arch.proj_dim = q.at("beta.proj.weight").cols();
    arch.classes = q.at("psi.cls.weight").cols();
    return EncoderPair::from_params(arch, alpha, std::move(q), std::move(k));
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace tcl
