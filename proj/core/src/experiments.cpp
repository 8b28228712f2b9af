#include "tcl/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "tcl/check.hpp"
#include "tcl/text.hpp"

namespace tcl {
namespace {

void append_log(std::ostream* log, const std::string& line) {
  if (log) *log << line << "\n";
}

CellSummary summarize(const std::string& cell, const std::vector<CellRun>& runs) {
  CellSummary s;
  s.cell = cell;
  double n = 0.0;
  for (const auto& r : runs)
    if (r.cell == cell) {
      s.mean += r.accuracy;
      n += 1.0;
    }
  check_arg(n > 0.0, "experiments: no runs for cell " + cell);
  s.mean /= n;
  for (const auto& r : runs)
    if (r.cell == cell) s.stddev += (r.accuracy - s.mean) * (r.accuracy - s.mean);
  s.stddev = std::sqrt(s.stddev / n);
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  check_data(static_cast<bool>(out), "experiments: cannot write " + path.string());
  out << text;
}

}  // namespace

const std::vector<std::string>& ablation_cells() {
  static const std::vector<std::string> cells = {"TCL", "wo_Ltar", "wo_Ltcl", "IDL", "ICDL"};
  return cells;
}

TrainConfig cell_config(const TrainConfig& base, const std::string& cell) {
  TrainConfig cfg = base;
  if (cell == "TCL") {
    cfg.variant = RunVariant::TCL;
  } else if (cell == "wo_Ltar") {
    cfg.variant = RunVariant::TCL;
    cfg.disable_l_tar = true;
  } else if (cell == "wo_Ltcl") {
    cfg.variant = RunVariant::TCL;
    cfg.lambda = 0.0;
  } else if (cell == "IDL") {
    cfg.variant = RunVariant::IDL;
  } else if (cell == "ICDL") {
    cfg.variant = RunVariant::ICDL;
  } else {
    check_arg(false, "experiments: unknown ablation cell " + cell);
  }
  return cfg;
}

AblationResult run_ablation(const TrainConfig& base, const std::vector<std::uint64_t>& seeds,
                            const std::string& out_dir, std::ostream* log) {
  check_arg(!seeds.empty(), "experiments: need at least one seed");
  AblationResult res;
  res.csv = "variant,seed,tgt_acc,std\n";
  for (const auto& cell : ablation_cells()) {
    for (const auto seed : seeds) {
      TrainConfig cfg = cell_config(base, cell);
      cfg.seed = seed;
      cfg.validate();
      const std::string run_dir =
          out_dir.empty() ? std::string() : out_dir + "/" + cell + "_seed" + std::to_string(seed);
      const TrainResult r = train(cfg, run_dir, nullptr);
      CellRun run;
      run.cell = cell;
      run.seed = seed;
      run.accuracy = r.final_accuracy;
      run.metrics_csv = r.metrics_csv;
      res.runs.push_back(std::move(run));
      res.csv += cell + "," + std::to_string(seed) + "," + fmt_double(r.final_accuracy) + ",0\n";
      append_log(log, "[ablate] " + cell + " seed " + std::to_string(seed) + "  acc " +
                          fmt_double(r.final_accuracy));
    }
  }
  for (const auto& cell : ablation_cells()) {
    CellSummary s = summarize(cell, res.runs);
    res.csv += cell + ",-1," + fmt_double(s.mean) + "," + fmt_double(s.stddev) + "\n";
    append_log(log, "[ablate] " + cell + "  mean " + fmt_double(s.mean) + "  std " +
                        fmt_double(s.stddev));
    res.summary.push_back(std::move(s));
  }
  if (!out_dir.empty()) write_text(std::filesystem::path(out_dir) / "ablation.csv", res.csv);
  return res;
}

SweepResult run_lambda_sweep(const TrainConfig& base, const std::vector<std::uint64_t>& seeds,
                             const std::string& out_dir, std::ostream* log) {
  check_arg(!seeds.empty(), "experiments: need at least one seed");
  SweepResult res;
  res.csv = "lambda,seed,accuracy\n";
  for (int i = 0; i <= 10; ++i) {
    const double lambda = static_cast<double>(i) / 10.0;
    for (const auto seed : seeds) {
      TrainConfig cfg = base;
      cfg.lambda = lambda;
      cfg.seed = seed;
      cfg.validate();
      const std::string run_dir = out_dir.empty() ? std::string()
                                                  : out_dir + "/lambda_" + fmt_double(lambda) +
                                                        "_seed" + std::to_string(seed);
      const TrainResult r = train(cfg, run_dir, nullptr);
      SweepRun run;
      run.lambda = lambda;
      run.seed = seed;
      run.accuracy = r.final_accuracy;
      run.metrics_csv = r.metrics_csv;
      res.runs.push_back(std::move(run));
      res.csv += fmt_double(lambda) + "," + std::to_string(seed) + "," +
                 fmt_double(r.final_accuracy) + "\n";
      append_log(log, "[sweep] lambda " + fmt_double(lambda) + " seed " + std::to_string(seed) +
                          "  acc " + fmt_double(r.final_accuracy));
    }
  }
  if (!out_dir.empty()) write_text(std::filesystem::path(out_dir) / "lambda_sweep.csv", res.csv);
  return res;
}

}  // namespace tcl
