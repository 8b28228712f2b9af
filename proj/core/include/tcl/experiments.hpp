#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "tcl/train_config.hpp"
#include "tcl/trainer.hpp"

namespace tcl {

// Retrain-from-scratch grids over loss variants and lambda. Each cell is a
// fully seeded independent run; per-run artifacts land in subdirectories of
// out_dir (skipped when out_dir is empty) and the grid summary is returned
// as CSV text.

struct CellRun {
  std::string cell;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  std::string metrics_csv;  // kept so callers can compare runs bitwise
};

struct CellSummary {
  std::string cell;
  double mean = 0.0;
  double stddev = 0.0;  // population
};

struct AblationResult {
  std::vector<CellRun> runs;  // cell-major, seeds inner
  std::vector<CellSummary> summary;
  std::string csv;  // variant,seed,tgt_acc,std; summary rows use seed -1
};

// Cell order is pinned: TCL, wo_Ltar, wo_Ltcl, IDL, ICDL.
const std::vector<std::string>& ablation_cells();

// wo_Ltar forces the confidence gate shut, wo_Ltcl zeroes lambda; both keep
// pseudo-labeling and the memory banks running. IDL and ICDL swap the loss.
TrainConfig cell_config(const TrainConfig& base, const std::string& cell);

AblationResult run_ablation(const TrainConfig& base, const std::vector<std::uint64_t>& seeds,
                            const std::string& out_dir, std::ostream* log = nullptr);

struct SweepRun {
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  std::string metrics_csv;
};

struct SweepResult {
  std::vector<SweepRun> runs;  // lambda-major, seeds inner
  std::string csv;             // lambda,seed,accuracy
};

// lambda in {0.0, 0.1, ..., 1.0}; the 0.0 column must reproduce the
// wo_Ltcl ablation cell bitwise.
SweepResult run_lambda_sweep(const TrainConfig& base, const std::vector<std::uint64_t>& seeds,
                             const std::string& out_dir, std::ostream* log = nullptr);

}  // namespace tcl
