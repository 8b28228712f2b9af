#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tcl/encoder.hpp"
#include "tcl/losses.hpp"
#include "tcl/memory_bank.hpp"
#include "tcl/pseudo_label.hpp"
#include "tcl/synth_data.hpp"
#include "tcl/train_config.hpp"

namespace tcl {

struct MetricsRow {
  int epoch = 0;
  int step = 0;  // 1-based global step; -1 marks the epoch-end summary row
  double l_src = 0.0;
  double l_tar = 0.0;
  double l_tcl = 0.0;
  double total = 0.0;
  double gated_fraction = 0.0;
  double pl_acc = 0.0;
  double tgt_acc = 0.0;
  long long wall_ms = 0;  // pinned to 0 so reruns stay byte-identical
};

std::string metrics_header();
std::string metrics_line(const MetricsRow& row);

// lambda * min(1, epoch / warmup); exactly 0 at epoch 0, exactly lambda once
// the ramp ends.
double effective_lambda(const TrainConfig& cfg, int epoch);

// Accuracy of the query classifier's argmax on un-augmented inputs.
double evaluate(const EncoderPair& pair, const Dataset& ds);

struct TrainResult {
  TrainConfig cfg;
  double final_accuracy = 0.0;
  std::vector<double> epoch_accuracy;  // one entry per epoch, end-of-epoch eval
  std::vector<MetricsRow> rows;
  std::string metrics_csv;
};

struct StepStats {
  LossReport report;
  double gated_fraction = 0.0;
  double pl_acc = 0.0;      // classifier pseudo-label vs true label, this batch
  double lambda_eff = 0.0;
};

// One full training run: generates the suite's datasets in memory from the
// seed, then walks epochs of min-length steps. Exposes single-step execution
// so tests can interleave their own probes.
class Trainer {
 public:
  explicit Trainer(const TrainConfig& cfg);

  // out_dir empty: compute only. Otherwise writes manifest.json before the
  // first step, then metrics.csv, checkpoint.bin, and memory_*.csv. Progress
  // lines (with real wall times) go to *log when given.
  TrainResult run(const std::filesystem::path& out_dir, std::ostream* log = nullptr);

  StepStats train_step(int epoch, int step_in_epoch);
  void start_epoch(int epoch);  // reshuffles every domain's visit order
  void end_epoch(int epoch);    // clustering refinement
  int steps_per_epoch() const;

  const TrainConfig& config() const { return cfg_; }
  const EncoderPair& pair() const { return pair_; }
  const Dataset& source_data(std::size_t i) const { return source_data_[i]; }
  const Dataset& target_data() const { return target_data_; }
  const Dataset& test_data() const { return test_data_; }
  const std::vector<MemoryBank>& source_banks() const { return source_banks_; }
  const MemoryBank& target_bank() const { return target_bank_; }
  bool has_cluster_state() const { return have_centroids_; }
  std::uint64_t global_step() const { return global_step_; }

 private:
  struct BatchViews {
    Tensor q, k;
    std::vector<int> labels;
  };
  BatchViews assemble(const Dataset& ds, const std::vector<std::size_t>& order, int epoch,
                      int domain_id, int step_in_epoch, bool is_target) const;

  TrainConfig cfg_;
  SuiteSpec suite_;
  int target_id_ = 0;
  std::vector<int> source_ids_;
  std::vector<Dataset> source_data_;
  Dataset target_data_, test_data_;
  EncoderPair pair_;
  SgdOptimizer opt_;
  std::vector<MemoryBank> source_banks_;  // one per source, or one pooled
  MemoryBank target_bank_;
  std::vector<std::vector<std::size_t>> source_order_;
  std::vector<std::size_t> target_order_;
  Tensor centroids_;
  bool have_centroids_ = false;
  std::uint64_t global_step_ = 0;
  AugmentPolicy weak_, strong_;
};

// Convenience wrapper: build a Trainer and run it.
TrainResult train(const TrainConfig& cfg, const std::filesystem::path& out_dir,
                  std::ostream* log = nullptr);

}  // namespace tcl
