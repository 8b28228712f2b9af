#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tcl/losses.hpp"

namespace tcl {

// Training-time variant switch. SourceCombine is TCL with every source domain
// pooled into one shared bank, so it lowers to Variant::TCL at loss level.
enum class RunVariant { TCL, IDL, ICDL, NONE, TCLSourceCombine };

RunVariant parse_run_variant(std::string_view name);
const char* run_variant_name(RunVariant v);
Variant loss_variant(RunVariant v);
bool pools_sources(RunVariant v);

// Field names double as the config file keys.
struct TrainConfig {
  std::string suite = "BLOBS-3";
  RunVariant variant = RunVariant::TCL;
  double tau = 0.05;
  double rho = 0.95;
  double alpha = 0.99;
  double lambda = 0.3;
  double lr = 0.01;
  double sgd_momentum = 0.9;
  int batch_size = 32;
  int epochs = 60;
  int warmup_epochs = 5;
  int k_mem = 512;
  int proj_dim = 32;
  int kmeans_iters = 10;
  std::uint64_t seed = 1;
  int target_domain = -1;          // -1 picks the suite default
  std::vector<int> source_domains; // empty picks every non-target domain
  int n_per_domain = 512;
  int n_test = 1000;
  bool disable_l_tar = false;      // ablation switch, keeps pseudo-labeling alive

  void validate() const;

  int resolved_target() const;
  std::vector<int> resolved_sources() const;  // ascending domain ids

  // canonical key=value pairs in declaration order
  std::vector<std::pair<std::string, std::string>> items() const;
};

// One `key = value` assignment; unknown keys and malformed values throw with
// the key named.
void apply_config_entry(TrainConfig& cfg, std::string_view key, std::string_view value);

// Flat text: `key = value` lines, `#` comments. require_suite makes an
// explicit `suite` key mandatory, which file-based runs want.
TrainConfig parse_config_text(std::string_view text, bool require_suite);
TrainConfig parse_config_file(const std::filesystem::path& path);

// FNV-1a 64 over the sorted canonical key=value lines.
std::string config_hash(const TrainConfig& cfg);

// Run manifest, written before training starts.
std::string manifest_json(const TrainConfig& cfg, const std::string& out_dir);
void write_manifest(const std::filesystem::path& path, const TrainConfig& cfg,
                    const std::string& out_dir);

}  // namespace tcl
