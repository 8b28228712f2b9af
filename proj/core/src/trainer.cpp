#include "tcl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <ostream>

#include "tcl/check.hpp"
#include "tcl/text.hpp"

namespace tcl {

namespace {

std::size_t argmax_row(const Tensor& m, std::size_t row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < m.cols(); ++j)
    if (m.at(row, j) > m.at(row, best)) best = j;
  return best;
}

TrainConfig validated(TrainConfig cfg) {
  cfg.validate();
  return cfg;
}

EncoderPair init_pair(const TrainConfig& cfg, const SuiteSpec& suite) {
  EncoderArch arch;
  arch.input_dim = suite.dim;
  arch.classes = suite.classes;
  arch.proj_dim = static_cast<std::size_t>(cfg.proj_dim);
  Rng rng(mix_seed(cfg.seed, {stream_tag("init")}));
  return EncoderPair::init(arch, cfg.alpha, rng);
}

Tensor first_rows(const Dataset& ds, std::size_t n) {
  Tensor out = Tensor::zeros({n, ds.dim()});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < ds.dim(); ++j) out.at(i, j) = ds.x.at(i, j);
  return out;
}

}  // namespace

std::string metrics_header() {
  return "epoch,step,l_src,l_tar,l_tcl,total,gated_fraction,pl_acc,tgt_acc,wall_ms";
}

std::string metrics_line(const MetricsRow& r) {
  std::string s = std::to_string(r.epoch);
  s += ',';
  s += std::to_string(r.step);
  for (double v : {r.l_src, r.l_tar, r.l_tcl, r.total, r.gated_fraction, r.pl_acc, r.tgt_acc}) {
    s += ',';
    s += fmt_double(v);
  }
  s += ',';
  s += std::to_string(r.wall_ms);
  return s;
}

double effective_lambda(const TrainConfig& cfg, int epoch) {
  if (cfg.lambda == 0.0) return 0.0;
  if (cfg.warmup_epochs <= 0) return cfg.lambda;
  const double ramp =
      std::min(1.0, static_cast<double>(epoch) / static_cast<double>(cfg.warmup_epochs));
  return cfg.lambda * ramp;
}

double evaluate(const EncoderPair& pair, const Dataset& ds) {
  check_arg(ds.size() > 0, "evaluate: empty dataset");
  const EncoderPair::KeyOut out = pair.query_forward(ds.x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (static_cast<int>(argmax_row(out.logits, i)) == ds.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

Trainer::Trainer(const TrainConfig& cfg)
    : cfg_(validated(cfg)),
      suite_(parse_suite(cfg_.suite)),
      target_id_(cfg_.resolved_target()),
      source_ids_(cfg_.resolved_sources()),
      pair_(init_pair(cfg_, suite_)),
      opt_(cfg_.lr, cfg_.sgd_momentum),
      target_bank_(static_cast<std::size_t>(cfg_.k_mem), static_cast<std::size_t>(cfg_.proj_dim),
                   static_cast<int>(suite_.classes)),
      weak_(weak_policy(suite_.kind)),
      strong_(strong_policy(suite_.kind)) {
  check_arg(!source_ids_.empty(), "trainer: need at least one source domain");
  const std::size_t n = static_cast<std::size_t>(cfg_.n_per_domain);
  for (int d : source_ids_)
    source_data_.push_back(generate_domain(
        suite_.domain(d, n), mix_seed(cfg_.seed, {stream_tag("data"), static_cast<std::uint64_t>(d), 0})));
  target_data_ = generate_domain(
      suite_.domain(target_id_, n),
      mix_seed(cfg_.seed, {stream_tag("data"), static_cast<std::uint64_t>(target_id_), 0}));
  test_data_ = generate_domain(
      suite_.domain(target_id_, static_cast<std::size_t>(cfg_.n_test)),
      mix_seed(cfg_.seed, {stream_tag("data"), static_cast<std::uint64_t>(target_id_), 1}));

  const std::size_t nbanks = pools_sources(cfg_.variant) ? 1 : source_ids_.size();
  const std::size_t batch_rows =
      static_cast<std::size_t>(cfg_.batch_size) * (pools_sources(cfg_.variant) ? source_ids_.size() : 1);
  check_arg(batch_rows <= static_cast<std::size_t>(cfg_.k_mem),
            "trainer: k_mem must hold at least one enqueued batch");
  for (std::size_t i = 0; i < nbanks; ++i)
    source_banks_.emplace_back(static_cast<std::size_t>(cfg_.k_mem),
                               static_cast<std::size_t>(cfg_.proj_dim),
                               static_cast<int>(suite_.classes));
}

int Trainer::steps_per_epoch() const {
  std::size_t steps = target_data_.size() / static_cast<std::size_t>(cfg_.batch_size);
  for (const Dataset& ds : source_data_)
    steps = std::min(steps, ds.size() / static_cast<std::size_t>(cfg_.batch_size));
  return static_cast<int>(steps);
}

void Trainer::start_epoch(int epoch) {
  auto shuffled = [&](const Dataset& ds, int domain_id) {
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(cfg_.seed, {stream_tag("shuffle"), static_cast<std::uint64_t>(epoch),
                                 static_cast<std::uint64_t>(domain_id)}));
    rng.shuffle(order);
    return order;
  };
  source_order_.clear();
  for (std::size_t i = 0; i < source_data_.size(); ++i)
    source_order_.push_back(shuffled(source_data_[i], source_ids_[i]));
  target_order_ = shuffled(target_data_, target_id_);
}

Trainer::BatchViews Trainer::assemble(const Dataset& ds, const std::vector<std::size_t>& order,
                                      int epoch, int domain_id, int step_in_epoch,
                                      bool is_target) const {
  const std::size_t b = static_cast<std::size_t>(cfg_.batch_size);
  const std::size_t base = static_cast<std::size_t>(step_in_epoch) * b;
  check_arg(base + b <= order.size(), "trainer: step index past the epoch's batches");
  BatchViews v;
  v.q = Tensor::zeros({b, ds.dim()});
  v.k = Tensor::zeros({b, ds.dim()});
  Rng aug(mix_seed(cfg_.seed,
                   {stream_tag("augment"), static_cast<std::uint64_t>(epoch),
                    static_cast<std::uint64_t>(domain_id), static_cast<std::uint64_t>(step_in_epoch)}));
  for (std::size_t r = 0; r < b; ++r) {
    const std::size_t row = order[base + r];
    const TwoViews tv = make_views(ds.row(row), is_target, weak_, strong_, aug);
    for (std::size_t j = 0; j < ds.dim(); ++j) {
      v.q.at(r, j) = tv.query.values[j];
      v.k.at(r, j) = tv.key.values[j];
    }
    v.labels.push_back(ds.labels[row]);
  }
  return v;
}

StepStats Trainer::train_step(int epoch, int step_in_epoch) {
  ++global_step_;
  const std::size_t b = static_cast<std::size_t>(cfg_.batch_size);

  std::vector<BatchViews> src_views;
  for (std::size_t i = 0; i < source_data_.size(); ++i)
    src_views.push_back(
        assemble(source_data_[i], source_order_[i], epoch, source_ids_[i], step_in_epoch, false));
  BatchViews tgt = assemble(target_data_, target_order_, epoch, target_id_, step_in_epoch, true);

  if (pools_sources(cfg_.variant) && src_views.size() > 1) {
    BatchViews pooled;
    const std::size_t dim = suite_.dim;
    pooled.q = Tensor::zeros({b * src_views.size(), dim});
    pooled.k = Tensor::zeros({b * src_views.size(), dim});
    std::size_t at = 0;
    for (const BatchViews& v : src_views) {
      for (std::size_t r = 0; r < b; ++r, ++at)
        for (std::size_t j = 0; j < dim; ++j) {
          pooled.q.at(at, j) = v.q.at(r, j);
          pooled.k.at(at, j) = v.k.at(r, j);
        }
      pooled.labels.insert(pooled.labels.end(), v.labels.begin(), v.labels.end());
    }
    src_views.clear();
    src_views.push_back(std::move(pooled));
  }

  // key views first, no tape
  std::vector<EncoderPair::KeyOut> key_src;
  for (const BatchViews& v : src_views) key_src.push_back(pair_.encode_key(v.k));
  const EncoderPair::KeyOut key_tgt = pair_.encode_key(tgt.k);

  // pseudo-label and gate the target batch
  std::vector<PseudoLabelResult> pseudo = pseudo_from_logits(key_tgt.logits, cfg_.rho);
  if (cfg_.disable_l_tar)
    for (PseudoLabelResult& p : pseudo) p.gated = false;
  std::vector<int> refined(b);
  if (have_centroids_) {
    refined = nearest_centroids(centroids_, key_tgt.projection);
  } else {
    for (std::size_t i = 0; i < b; ++i) refined[i] = pseudo[i].label;
  }

  // query views on the tape
  Graph g;
  const EncoderPair::QueryBinding bind = pair_.bind_query(g);
  std::vector<EncoderPair::QueryNodes> q_src;
  for (const BatchViews& v : src_views) q_src.push_back(pair_.encode_query(g, bind, v.q));
  const EncoderPair::QueryNodes q_tgt = pair_.encode_query(g, bind, tgt.q);

  NodeId src_sum = nll_mean(g, q_src[0].logits, src_views[0].labels);
  for (std::size_t i = 1; i < q_src.size(); ++i)
    src_sum = g.add(src_sum, nll_mean(g, q_src[i].logits, src_views[i].labels));
  const NodeId l_src = g.scale(src_sum, 1.0 / static_cast<double>(q_src.size()));

  const GatedLoss l_tar = gated_nll(g, q_tgt.logits, pseudo);

  const Variant lv = loss_variant(cfg_.variant);
  const double lam_eff = effective_lambda(cfg_, epoch);
  VariantLoss variant;
  bool built = false;
  if (lv != Variant::NONE && cfg_.lambda > 0.0) {
    std::vector<MemoryBank::View> sviews;
    for (const MemoryBank& bank : source_banks_) sviews.push_back(bank.snapshot());
    const MemoryBank::View tview = target_bank_.snapshot();
    std::vector<DomainBatch> sbatches;
    for (std::size_t i = 0; i < q_src.size(); ++i)
      sbatches.push_back({q_src[i].projection, &src_views[i].labels});
    const DomainBatch tbatch{q_tgt.projection, &refined};
    switch (lv) {
      case Variant::TCL: variant = tcl_multi(g, sbatches, tbatch, sviews, tview, cfg_.tau); break;
      case Variant::ICDL: variant = icdl(g, sbatches, tbatch, sviews, tview, cfg_.tau); break;
      case Variant::IDL: variant = idl(g, tbatch, key_tgt.projection, tview, cfg_.tau); break;
      case Variant::NONE: break;
    }
    built = true;
  }

  const NodeId total =
      total_node(g, l_src, l_tar, built && lam_eff > 0.0 ? &variant : nullptr, lam_eff);
  StepStats stats;
  stats.report = make_report(g, l_src, l_tar, built ? &variant : nullptr, lam_eff);
  stats.lambda_eff = lam_eff;

  g.backward(total);
  pair_.pull_gradients(g, bind);
  for (const auto& [name, t] : pair_.key().items)
    check_numeric(t.grad.empty(), "trainer: a gradient reached the key encoder at " + name);

  pair_.capture_prestep();
  opt_.step(pair_.query());
  pair_.momentum_update();

  for (std::size_t i = 0; i < src_views.size(); ++i)
    source_banks_[i].enqueue(key_src[i].projection, src_views[i].labels);
  target_bank_.enqueue(key_tgt.projection, refined);

  stats.gated_fraction = static_cast<double>(l_tar.gated_count) / static_cast<double>(b);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < b; ++i)
    if (pseudo[i].label == tgt.labels[i]) ++hits;
  stats.pl_acc = static_cast<double>(hits) / static_cast<double>(b);
  return stats;
}

void Trainer::end_epoch(int) {
  if (cfg_.kmeans_iters <= 0) return;
  constexpr std::size_t kPoolCap = 2048;

  const std::size_t tn = std::min(target_data_.size(), kPoolCap);
  const EncoderPair::KeyOut tout = pair_.encode_key(first_rows(target_data_, tn));
  std::vector<int> cls(tn);
  for (std::size_t i = 0; i < tn; ++i) cls[i] = static_cast<int>(argmax_row(tout.logits, i));

  std::size_t total_rows = 0;
  for (const Dataset& ds : source_data_) total_rows += std::min(ds.size(), kPoolCap);
  Tensor spool = Tensor::zeros({total_rows, suite_.dim});
  std::vector<int> slabels;
  slabels.reserve(total_rows);
  std::size_t at = 0;
  for (const Dataset& ds : source_data_) {
    const std::size_t n = std::min(ds.size(), kPoolCap);
    for (std::size_t i = 0; i < n; ++i, ++at) {
      for (std::size_t j = 0; j < ds.dim(); ++j) spool.at(at, j) = ds.x.at(i, j);
      slabels.push_back(ds.labels[i]);
    }
  }
  const EncoderPair::KeyOut sout = pair_.encode_key(spool);
  const Tensor cents = source_class_centroids(pair_, sout.projection, slabels, suite_.classes);

  ClusterState state;
  refine_pseudo_labels(tout.projection, cls, cents, cfg_.kmeans_iters, &state);
  centroids_ = state.centroids;
  have_centroids_ = true;
}

TrainResult Trainer::run(const std::filesystem::path& out_dir, std::ostream* log) {
  const bool artifacts = !out_dir.empty();
  if (artifacts) {
    std::filesystem::create_directories(out_dir);
    write_manifest(out_dir / "manifest.json", cfg_, out_dir.string());
  }

  TrainResult res;
  res.cfg = cfg_;
  std::string csv = metrics_header();
  csv += '\n';

  double last_eval = evaluate(pair_, test_data_);
  const int S = steps_per_epoch();
  check_arg(S >= 1, "trainer: dataset too small for one step per epoch");

  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    start_epoch(epoch);
    double sum_src = 0, sum_tar = 0, sum_tcl = 0, sum_gated = 0, sum_pl = 0;
    for (int s = 0; s < S; ++s) {
      const StepStats st = train_step(epoch, s);
      sum_src += st.report.l_src;
      sum_tar += st.report.l_tar;
      sum_tcl += st.report.l_tcl;
      sum_gated += st.gated_fraction;
      sum_pl += st.pl_acc;
      if (global_step_ % 10 == 1) {
        MetricsRow r;
        r.epoch = epoch;
        r.step = static_cast<int>(global_step_);
        r.l_src = st.report.l_src;
        r.l_tar = st.report.l_tar;
        r.l_tcl = st.report.l_tcl;
        r.total = st.report.total;
        r.gated_fraction = st.gated_fraction;
        r.pl_acc = st.pl_acc;
        r.tgt_acc = last_eval;
        res.rows.push_back(r);
        csv += metrics_line(r);
        csv += '\n';
      }
    }
    end_epoch(epoch);
    last_eval = evaluate(pair_, test_data_);
    res.epoch_accuracy.push_back(last_eval);

    const double inv = 1.0 / static_cast<double>(S);
    MetricsRow er;
    er.epoch = epoch;
    er.step = -1;
    er.l_src = sum_src * inv;
    er.l_tar = sum_tar * inv;
    er.l_tcl = sum_tcl * inv;
    er.total = er.l_src + er.l_tar + effective_lambda(cfg_, epoch) * er.l_tcl;
    er.gated_fraction = sum_gated * inv;
    er.pl_acc = sum_pl * inv;
    er.tgt_acc = last_eval;
    res.rows.push_back(er);
    csv += metrics_line(er);
    csv += '\n';

    if (log) {
      const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      *log << "epoch " << epoch << "  acc " << fmt_double(last_eval) << "  gated "
           << fmt_double(er.gated_fraction) << "  " << ms << " ms\n";
    }
  }

  res.final_accuracy = res.epoch_accuracy.back();
  res.metrics_csv = std::move(csv);

  if (artifacts) {
    std::ofstream ms(out_dir / "metrics.csv", std::ios::trunc);
    check_data(ms.good(), "trainer: cannot write metrics.csv");
    ms << res.metrics_csv;
    save_checkpoint(pair_, out_dir / "checkpoint.bin");
    auto dump_bank = [&](const MemoryBank& bank, int domain_id, const std::string& name) {
      std::ofstream os(out_dir / name, std::ios::trunc);
      check_data(os.good(), "trainer: cannot write " + name);
      dump_memory_csv(os, bank, domain_id);
    };
    if (pools_sources(cfg_.variant)) {
      dump_bank(source_banks_[0], -1, "memory_combined.csv");
    } else {
      for (std::size_t i = 0; i < source_banks_.size(); ++i)
        dump_bank(source_banks_[i], source_ids_[i],
                  "memory_" + std::to_string(source_ids_[i]) + ".csv");
    }
    dump_bank(target_bank_, target_id_, "memory_" + std::to_string(target_id_) + ".csv");
  }
  return res;
}

TrainResult train(const TrainConfig& cfg, const std::filesystem::path& out_dir,
                  std::ostream* log) {
  Trainer t(cfg);
  return t.run(out_dir, log);
}

}  // namespace tcl
