#include "tcl/train_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tcl/check.hpp"
#include "tcl/synth_data.hpp"
#include "tcl/text.hpp"

namespace tcl {

RunVariant parse_run_variant(std::string_view name) {
  if (name == "TCL") return RunVariant::TCL;
  if (name == "IDL") return RunVariant::IDL;
  if (name == "ICDL") return RunVariant::ICDL;
  if (name == "NONE") return RunVariant::NONE;
  if (name == "TCL-SourceCombine") return RunVariant::TCLSourceCombine;
  throw std::invalid_argument("variant: expected TCL, IDL, ICDL, NONE, or TCL-SourceCombine, got '" +
                              std::string(name) + "'");
}

const char* run_variant_name(RunVariant v) {
  switch (v) {
    case RunVariant::TCL: return "TCL";
    case RunVariant::IDL: return "IDL";
    case RunVariant::ICDL: return "ICDL";
    case RunVariant::NONE: return "NONE";
    case RunVariant::TCLSourceCombine: return "TCL-SourceCombine";
  }
  throw std::invalid_argument("variant: bad enum value");
}

Variant loss_variant(RunVariant v) {
  switch (v) {
    case RunVariant::TCL: return Variant::TCL;
    case RunVariant::IDL: return Variant::IDL;
    case RunVariant::ICDL: return Variant::ICDL;
    case RunVariant::NONE: return Variant::NONE;
    case RunVariant::TCLSourceCombine: return Variant::TCL;
  }
  throw std::invalid_argument("variant: bad enum value");
}

bool pools_sources(RunVariant v) { return v == RunVariant::TCLSourceCombine; }

namespace {

double num_value(std::string_view key, std::string_view value) {
  try {
    return parse_double(value);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("config: key '" + std::string(key) + "' expects a number, got '" +
                                std::string(value) + "'");
  }
}

int int_value(std::string_view key, std::string_view value) {
  try {
    const long long v = parse_int(value);
    check_arg(v >= -(1ll << 31) && v < (1ll << 31), "out of range");
    return static_cast<int>(v);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("config: key '" + std::string(key) +
                                "' expects an integer, got '" + std::string(value) + "'");
  }
}

bool bool_value(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw std::invalid_argument("config: key '" + std::string(key) + "' expects 0 or 1, got '" +
                              std::string(value) + "'");
}

std::vector<int> domain_list(std::string_view key, std::string_view value) {
  std::vector<int> out;
  if (trim(value).empty()) return out;
  for (const std::string& part : split(value, ','))
    out.push_back(int_value(key, trim(part)));
  return out;
}

std::string join_domains(const std::vector<int>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(ids[i]);
  }
  return s;
}

}  // namespace

void apply_config_entry(TrainConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "suite") {
    cfg.suite = std::string(value);
  } else if (key == "variant") {
    cfg.variant = parse_run_variant(value);
  } else if (key == "tau") {
    cfg.tau = num_value(key, value);
  } else if (key == "rho") {
    cfg.rho = num_value(key, value);
  } else if (key == "alpha") {
    cfg.alpha = num_value(key, value);
  } else if (key == "lambda") {
    cfg.lambda = num_value(key, value);
  } else if (key == "lr") {
    cfg.lr = num_value(key, value);
  } else if (key == "sgd_momentum") {
    cfg.sgd_momentum = num_value(key, value);
  } else if (key == "batch_size") {
    cfg.batch_size = int_value(key, value);
  } else if (key == "epochs") {
    cfg.epochs = int_value(key, value);
  } else if (key == "warmup_epochs") {
    cfg.warmup_epochs = int_value(key, value);
  } else if (key == "k_mem") {
    cfg.k_mem = int_value(key, value);
  } else if (key == "proj_dim") {
    cfg.proj_dim = int_value(key, value);
  } else if (key == "kmeans_iters") {
    cfg.kmeans_iters = int_value(key, value);
  } else if (key == "seed") {
    const long long v = int_value(key, value);
    check_arg(v >= 0, "config: key 'seed' expects a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(v);
  } else if (key == "target_domain") {
    cfg.target_domain = int_value(key, value);
  } else if (key == "source_domains") {
    cfg.source_domains = domain_list(key, value);
  } else if (key == "n_per_domain") {
    cfg.n_per_domain = int_value(key, value);
  } else if (key == "n_test") {
    cfg.n_test = int_value(key, value);
  } else if (key == "disable_l_tar") {
    cfg.disable_l_tar = bool_value(key, value);
  } else {
    throw std::invalid_argument("config: unknown key '" + std::string(key) + "'");
  }
}

TrainConfig parse_config_text(std::string_view text, bool require_suite) {
  TrainConfig cfg;
  bool saw_suite = false;
  std::size_t lineno = 0;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view sv = line;
    if (const auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
    sv = trim(sv);
    if (sv.empty()) continue;
    const auto eq = sv.find('=');
    check_arg(eq != std::string_view::npos,
              "config: line " + std::to_string(lineno) + " is not a key = value assignment");
    const std::string_view key = trim(sv.substr(0, eq));
    const std::string_view value = trim(sv.substr(eq + 1));
    check_arg(!key.empty(), "config: line " + std::to_string(lineno) + " has an empty key");
    if (key == "suite") saw_suite = true;
    apply_config_entry(cfg, key, value);
  }
  if (require_suite) check_arg(saw_suite, "missing config key: suite");
  cfg.validate();
  return cfg;
}

TrainConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  check_data(is.good(), "config: cannot open '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return parse_config_text(text, true);
}

void TrainConfig::validate() const {
  const SuiteSpec s = parse_suite(suite);
  check_arg(tau > 0.0, "config: tau must be positive");
  check_arg(rho > 0.0 && rho < 1.0, "config: rho must lie in (0, 1)");
  check_arg(alpha >= 0.0 && alpha < 1.0, "config: alpha must lie in [0, 1)");
  check_arg(lambda >= 0.0 && lambda <= 1.0, "config: lambda must lie in [0, 1]");
  check_arg(lr > 0.0, "config: lr must be positive");
  check_arg(sgd_momentum >= 0.0 && sgd_momentum < 1.0, "config: sgd_momentum must lie in [0, 1)");
  check_arg(batch_size >= 1, "config: batch_size must be at least 1");
  check_arg(epochs >= 1, "config: epochs must be at least 1");
  check_arg(warmup_epochs >= 0, "config: warmup_epochs must be non-negative");
  check_arg(warmup_epochs < epochs, "config: warmup_epochs must be smaller than epochs");
  check_arg(k_mem >= 1, "config: k_mem must be at least 1");
  check_arg(proj_dim >= 1, "config: proj_dim must be at least 1");
  check_arg(kmeans_iters >= 0, "config: kmeans_iters must be non-negative");
  check_arg(n_per_domain >= 1, "config: n_per_domain must be at least 1");
  check_arg(n_test >= 1, "config: n_test must be at least 1");
  check_arg(batch_size <= n_per_domain, "config: batch_size cannot exceed n_per_domain");

  const int domains = static_cast<int>(s.domains);
  check_arg(target_domain >= -1 && target_domain < domains,
            "config: target_domain out of range for suite " + suite);
  const int tgt = resolved_target();
  std::vector<int> srcs = source_domains;
  for (int d : srcs) {
    check_arg(d >= 0 && d < domains, "config: source_domains entry out of range");
    check_arg(d != tgt, "config: source_domains cannot include the target domain");
  }
  std::sort(srcs.begin(), srcs.end());
  check_arg(std::adjacent_find(srcs.begin(), srcs.end()) == srcs.end(),
            "config: source_domains has duplicates");
}

int TrainConfig::resolved_target() const {
  if (target_domain >= 0) return target_domain;
  return parse_suite(suite).default_target;
}

std::vector<int> TrainConfig::resolved_sources() const {
  std::vector<int> out = source_domains;
  if (out.empty()) {
    const int domains = static_cast<int>(parse_suite(suite).domains);
    const int tgt = resolved_target();
    for (int d = 0; d < domains; ++d)
      if (d != tgt) out.push_back(d);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<std::string, std::string>> TrainConfig::items() const {
  return {
      {"suite", suite},
      {"variant", run_variant_name(variant)},
      {"tau", fmt_double(tau)},
      {"rho", fmt_double(rho)},
      {"alpha", fmt_double(alpha)},
      {"lambda", fmt_double(lambda)},
      {"lr", fmt_double(lr)},
      {"sgd_momentum", fmt_double(sgd_momentum)},
      {"batch_size", std::to_string(batch_size)},
      {"epochs", std::to_string(epochs)},
      {"warmup_epochs", std::to_string(warmup_epochs)},
      {"k_mem", std::to_string(k_mem)},
      {"proj_dim", std::to_string(proj_dim)},
      {"kmeans_iters", std::to_string(kmeans_iters)},
      {"seed", std::to_string(seed)},
      {"target_domain", std::to_string(target_domain)},
      {"source_domains", join_domains(source_domains)},
      {"n_per_domain", std::to_string(n_per_domain)},
      {"n_test", std::to_string(n_test)},
      {"disable_l_tar", disable_l_tar ? "1" : "0"},
  };
}

std::string config_hash(const TrainConfig& cfg) {
  auto kv = cfg.items();
  std::sort(kv.begin(), kv.end());
  std::string canon;
  for (const auto& [k, v] : kv) {
    canon += k;
    canon += '=';
    canon += v;
    canon += '\n';
  }
  return content_hash_hex(canon);
}

std::string manifest_json(const TrainConfig& cfg, const std::string& out_dir) {
  nlohmann::json j;
  nlohmann::json snapshot;
  for (const auto& [k, v] : cfg.items()) snapshot[k] = v;
  j["config"] = snapshot;
  j["seed"] = cfg.seed;
  j["suite"] = cfg.suite;
  j["variant"] = run_variant_name(cfg.variant);
  j["out_dir"] = out_dir;
  j["config_hash"] = config_hash(cfg);
  return j.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path, const TrainConfig& cfg,
                    const std::string& out_dir) {
  std::ofstream os(path, std::ios::trunc);
  check_data(os.good(), "manifest: cannot open '" + path.string() + "' for writing");
  os << manifest_json(cfg, out_dir);
  check_data(os.good(), "manifest: short write to '" + path.string() + "'");
}

}  // namespace tcl
