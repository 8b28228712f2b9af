#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tcl/check.hpp"
#include "tcl/encoder.hpp"
#include "tcl/experiments.hpp"
#include "tcl/gradcheck.hpp"
#include "tcl/rng.hpp"
#include "tcl/synth_data.hpp"
#include "tcl/text.hpp"
#include "tcl/train_config.hpp"
#include "tcl/trainer.hpp"

namespace {

using namespace tcl;

struct GlobalOpts {
  std::string config;
  std::string out;
  std::int64_t seed = -1;  // <0: keep the config's seed
  int threads = 1;         // accepted for interface stability; runs are single threaded
};

TrainConfig load_config(const GlobalOpts& g) {
  check_arg(!g.config.empty(), "missing --config");
  TrainConfig cfg = parse_config_file(g.config);
  if (g.seed >= 0) cfg.seed = static_cast<std::uint64_t>(g.seed);
  return cfg;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& part : split(text, ',')) {
    const long long v = parse_int(part);
    check_arg(v >= 0, "seeds must be non-negative");
    seeds.push_back(static_cast<std::uint64_t>(v));
  }
  check_arg(!seeds.empty(), "empty seed list");
  return seeds;
}

int cmd_gen_data(const GlobalOpts& g, const std::string& suite_name, std::size_t n) {
  check_arg(!g.out.empty(), "missing --out");
  const SuiteSpec suite = parse_suite(suite_name);
  const std::uint64_t seed = g.seed >= 0 ? static_cast<std::uint64_t>(g.seed) : 1;
  std::filesystem::create_directories(g.out);
  for (std::size_t d = 0; d < suite.domains; ++d) {
    const Dataset ds = generate_domain(
        suite.domain(static_cast<int>(d), n),
        mix_seed(seed, {stream_tag("data"), d, 0}));
    const auto path = std::filesystem::path(g.out) / ("domain_" + std::to_string(d) + ".bin");
    write_dataset(path, ds);
    std::cout << path.string() << "  n=" << ds.size() << "  dim=" << ds.dim() << "\n";
  }
  return 0;
}

int cmd_train(const GlobalOpts& g, const std::string& lambda_override,
              const std::string& variant_override, const std::vector<std::string>& sets) {
  TrainConfig cfg = load_config(g);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    check_arg(eq != std::string::npos, "--set expects key=value, got '" + kv + "'");
    apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!lambda_override.empty()) apply_config_entry(cfg, "lambda", lambda_override);
  if (!variant_override.empty()) apply_config_entry(cfg, "variant", variant_override);
  cfg.validate();
  const TrainResult res = train(cfg, g.out, &std::cout);
  std::cout << "final_accuracy " << fmt_double(res.final_accuracy) << "\n";
  if (!g.out.empty()) std::cout << "artifacts " << g.out << "\n";
  return 0;
}

int cmd_eval(const GlobalOpts& g, const std::string& checkpoint) {
  TrainConfig cfg = load_config(g);
  cfg.validate();
  const EncoderPair pair = load_checkpoint(checkpoint, cfg.alpha);
  Trainer probe(cfg);  // builds the suite's datasets, no training
  const double acc = evaluate(pair, probe.test_data());
  std::cout << "accuracy " << fmt_double(acc) << "\n";
  return 0;
}

int cmd_ablate(const GlobalOpts& g, const std::string& seeds_text) {
  check_arg(!g.out.empty(), "missing --out");
  TrainConfig cfg = load_config(g);
  cfg.validate();
  const auto seeds = parse_seed_list(seeds_text);
  run_ablation(cfg, seeds, g.out, &std::cout);
  std::cout << "wrote " << (std::filesystem::path(g.out) / "ablation.csv").string() << "\n";
  return 0;
}

int cmd_sweep_lambda(const GlobalOpts& g, const std::string& seeds_text) {
  check_arg(!g.out.empty(), "missing --out");
  TrainConfig cfg = load_config(g);
  cfg.validate();
  const auto seeds = parse_seed_list(seeds_text);
  run_lambda_sweep(cfg, seeds, g.out, &std::cout);
  std::cout << "wrote " << (std::filesystem::path(g.out) / "lambda_sweep.csv").string() << "\n";
  return 0;
}

int cmd_gradcheck(const GlobalOpts& g, std::size_t instances) {
  const std::uint64_t seed = g.seed >= 0 ? static_cast<std::uint64_t>(g.seed) : 1;
  const auto reports = loss_gradcheck_suite(instances, seed);
  bool all_pass = true;
  for (const auto& r : reports) {
    std::cout << r.name << "  max_rel_err " << fmt_double(r.max_rel_err) << "  checked "
              << r.checked << "  skipped " << r.skipped << "  "
              << (r.pass ? "[ok]" : "[FAIL]") << "\n";
    all_pass = all_pass && r.pass;
  }
  if (!all_pass) {
    std::cout << "gradcheck FAILED\n";
    return 3;
  }
  std::cout << "gradcheck passed\n";
  return 0;
}

int cmd_inspect_memory(const std::string& run_dir, const std::string& checkpoint, double alpha) {
  if (!checkpoint.empty()) {
    const EncoderPair pair = load_checkpoint(checkpoint, alpha);
    std::cout << "checkpoint ok  input_dim " << pair.arch().input_dim << "  proj_dim "
              << pair.arch().proj_dim << "  classes " << pair.arch().classes << "\n";
  }
  check_data(std::filesystem::is_directory(run_dir), "not a run directory: " + run_dir);
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(run_dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("memory_", 0) == 0 && e.path().extension() == ".csv")
      files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  check_data(!files.empty(), "no memory_*.csv files in " + run_dir);
  for (const auto& path : files) {
    std::ifstream is(path);
    check_data(static_cast<bool>(is), "cannot open " + path.string());
    std::string header;
    std::getline(is, header);
    check_data(header.rfind("step,domain,label", 0) == 0,
               path.string() + ": unexpected header '" + header + "'");
    const std::size_t dim = split(header, ',').size() - 3;
    std::size_t rows = 0;
    int min_label = 0, max_label = 0;
    double worst_norm_err = 0.0;
    std::string line;
    while (std::getline(is, line)) {
      const auto cells = split(line, ',');
      check_data(cells.size() == dim + 3, path.string() + ": ragged row " + std::to_string(rows));
      const int label = static_cast<int>(parse_int(cells[2]));
      check_data(label >= 0, path.string() + ": negative label in row " + std::to_string(rows));
      double norm2 = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double v = parse_double(cells[3 + j]);
        norm2 += v * v;
      }
      worst_norm_err = std::max(worst_norm_err, std::abs(std::sqrt(norm2) - 1.0));
      min_label = rows == 0 ? label : std::min(min_label, label);
      max_label = rows == 0 ? label : std::max(max_label, label);
      ++rows;
    }
    check_data(worst_norm_err <= 1e-6,
               path.string() + ": key rows drift off the unit sphere");
    std::cout << path.filename().string() << "  rows " << rows << "  dim " << dim << "  labels "
              << min_label << ".." << max_label << "  max_norm_err "
              << fmt_double(worst_norm_err) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transferrable contrastive learning harness"};
  app.require_subcommand(1);
  app.fallthrough();  // inherited: global flags may follow the subcommand name

  GlobalOpts g;
  app.add_option("--config", g.config, "key = value config file");
  app.add_option("--seed", g.seed, "seed override");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--threads", g.threads, "worker threads (only 1 is used)")
      ->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen-data", "materialize a suite's domain datasets");
  std::string suite_name = "BLOBS-3";
  std::size_t gen_n = 512;
  gen->add_option("--suite", suite_name, "suite name");
  gen->add_option("--n", gen_n, "samples per domain");

  auto* tr = app.add_subcommand("train", "train one run from a config");
  std::string lambda_override, variant_override;
  std::vector<std::string> sets;
  tr->add_option("--lambda", lambda_override, "override lambda");
  tr->add_option("--variant", variant_override, "override run variant");
  tr->add_option("--set", sets, "override any config key, key=value");

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on the config's test split");
  std::string checkpoint;
  ev->add_option("--checkpoint", checkpoint, "checkpoint file")->required();

  auto* ab = app.add_subcommand("ablate", "variant ablation grid");
  std::string ablate_seeds = "1,2,3,4,5";
  ab->add_option("--seeds", ablate_seeds, "comma separated seeds");

  auto* sw = app.add_subcommand("sweep-lambda", "lambda grid 0.0..1.0");
  std::string sweep_seeds = "1,2,3";
  sw->add_option("--seeds", sweep_seeds, "comma separated seeds");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of every loss");
  std::size_t instances = 10;
  gc->add_option("--instances", instances, "instances per loss");

  auto* im = app.add_subcommand("inspect-memory", "validate and summarize memory dumps");
  std::string run_dir;
  double inspect_alpha = 0.99;
  im->add_option("--run", run_dir, "run directory with memory_*.csv")->required();
  im->add_option("--checkpoint", checkpoint, "also load this checkpoint");
  im->add_option("--alpha", inspect_alpha, "momentum for checkpoint load");

  try {
    app.parse(argc, argv);
    if (gen->parsed()) return cmd_gen_data(g, suite_name, gen_n);
    if (tr->parsed()) return cmd_train(g, lambda_override, variant_override, sets);
    if (ev->parsed()) return cmd_eval(g, checkpoint);
    if (ab->parsed()) return cmd_ablate(g, ablate_seeds);
    if (sw->parsed()) return cmd_sweep_lambda(g, sweep_seeds);
    if (gc->parsed()) return cmd_gradcheck(g, instances);
    if (im->parsed()) return cmd_inspect_memory(run_dir, checkpoint, inspect_alpha);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const tcl::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const tcl::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
