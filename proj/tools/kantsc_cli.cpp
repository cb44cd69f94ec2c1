// kantsc: KAN / MLP time-series classification laboratory.
//
// Subcommands: train, attack, lipschitz, ablate, report, gradcheck, gen-cbf.
// Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric failure,
// 5 incompatible checkpoint.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "kantsc/attack.hpp"
#include "kantsc/cbf.hpp"
#include "kantsc/checkpoint.hpp"
#include "kantsc/csvio.hpp"
#include "kantsc/data.hpp"
#include "kantsc/gradcheck.hpp"
#include "kantsc/lipschitz.hpp"
#include "kantsc/loss.hpp"
#include "kantsc/metrics.hpp"
#include "kantsc/model.hpp"
#include "kantsc/ranks.hpp"
#include "kantsc/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kantsc;

namespace {

// ---------------------------------------------------------------------------
// shared option plumbing
// ---------------------------------------------------------------------------

struct CommonOpts {
  std::string data_root;
  std::string dataset = "CBF";
  std::string arch = "kan";
  int grid = 5;
  bool no_base = false;
  bool no_spline = false;
  std::uint64_t seed = 1;
  std::string out = "runs";
  int jobs = 1;
  std::string config_file;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_model_flags = true) {
  const char* env_root = std::getenv("KANTSC_DATA");
  if (env_root) o.data_root = env_root;
  cmd->add_option("--data", o.data_root, "UCR-layout data root (env KANTSC_DATA)");
  cmd->add_option("--dataset", o.dataset, "dataset name, or 'all'");
  if (with_model_flags) {
    cmd->add_option("--arch", o.arch, "kan|mlp1|mlp2|mlp_l|kan_mlp|mlp_kan");
    cmd->add_option("--grid", o.grid, "spline grid size");
    cmd->add_flag("--no-base", o.no_base, "disable the silu base path (KAN layers)");
    cmd->add_flag("--no-spline", o.no_spline, "disable the spline path (KAN layers)");
  }
  cmd->add_option("--seed", o.seed, "run seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--jobs", o.jobs, "parallel (dataset, model, seed) cells");
  cmd->add_option("--config", o.config_file, "JSON config file; flags override");
}

// Flags beat the config file; the file beats built-in defaults.
class JsonOverlay {
 public:
  explicit JsonOverlay(const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
      in >> j_;
    } catch (const json::exception& e) {
      throw ConfigError("bad JSON in '" + path + "': " + e.what());
    }
  }

  template <typename T>
  void apply(CLI::App* cmd, const std::string& flag, T& target) const {
    if (j_.is_null()) return;
    const std::string key = flag.substr(2);  // strip leading --
    if (!j_.contains(key)) return;
    if (cmd->count(flag) > 0) return;
    try {
      target = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }

 private:
  json j_;
};

ModelConfig model_config_from(const CommonOpts& o, const Dataset& ds,
                              double dropout) {
  ModelConfig cfg;
  cfg.arch = arch_from_string(o.arch);
  cfg.d = static_cast<int>(ds.d);
  cfg.m = ds.m;
  cfg.grid_size = o.grid;
  cfg.use_base = !o.no_base;
  cfg.use_spline = !o.no_spline;
  cfg.dropout = dropout;
  cfg.seed = o.seed;
  return cfg;
}

std::string model_tag(const ModelConfig& cfg) {
  std::string tag = arch_to_string(cfg.arch);
  const bool has_kan = cfg.arch != Arch::Mlp1 && cfg.arch != Arch::Mlp2;
  if (has_kan) {
    if (cfg.grid_size != 5) tag += "_g" + std::to_string(cfg.grid_size);
    if (!cfg.use_base) tag += "_nobase";
    if (!cfg.use_spline) tag += "_nospline";
  }
  return tag;
}

json model_config_json(const ModelConfig& cfg) {
  return json{{"arch", arch_to_string(cfg.arch)},
              {"d", cfg.d},
              {"m", cfg.m},
              {"grid_size", cfg.grid_size},
              {"spline_order", cfg.spline_order},
              {"use_base", cfg.use_base},
              {"use_spline", cfg.use_spline},
              {"dropout", cfg.dropout},
              {"seed", cfg.seed}};
}

void write_provenance(const fs::path& dir, const json& resolved) {
  fs::create_directories(dir);
  std::ofstream out(dir / "config.json", std::ios::binary);
  out << resolved.dump(2) << "\n";
}

std::vector<std::string> resolve_datasets(const CommonOpts& o) {
  if (o.data_root.empty())
    throw ConfigError("no data root: pass --data or set KANTSC_DATA");
  if (o.dataset == "all") return list_datasets(o.data_root);
  return {o.dataset};
}

void run_cells(std::vector<std::function<void()>> cells, int jobs) {
  if (jobs <= 1) {
    for (auto& cell : cells) cell();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        cells[i]();
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<int>(jobs, static_cast<int>(cells.size()));
  pool.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOpts {
  CommonOpts common;
  int epochs = 1000;
  double lr0 = 1e-2;
  double lr_decay = 0.9;
  int decay_every = 25;
  double weight_decay = 1e-2;
  double l1_coeff = 0.0;
  double entropy_coeff = 1e-5;
  int batch_size = 0;
  double dropout = 0.1;
};

struct TrainOutcome {
  ModelConfig model_cfg;
  fs::path dir;
  double accuracy = 0.0;
  double f1 = 0.0;
};

TrainOutcome run_one_training(const TrainOpts& o, const Dataset& ds,
                              bool quiet = false) {
  ModelConfig mcfg = model_config_from(o.common, ds, o.dropout);
  Model model = build_model(mcfg);

  TrainConfig tcfg;
  tcfg.epochs = o.epochs;
  tcfg.lr0 = o.lr0;
  tcfg.lr_decay = o.lr_decay;
  tcfg.decay_every = o.decay_every;
  tcfg.weight_decay = o.weight_decay;
  tcfg.l1_coeff = o.l1_coeff;
  tcfg.entropy_coeff = o.entropy_coeff;
  tcfg.batch_size = o.batch_size;
  tcfg.seed = o.common.seed;

  const TrainHistory history = train(model, ds, tcfg);

  Tensor test_x;
  std::vector<int> test_y;
  Dataset::split_matrix(ds.test, test_x, test_y);
  const std::vector<int> preds = argmax_rows(model.forward(test_x, false));

  TrainOutcome outcome;
  outcome.model_cfg = mcfg;
  outcome.accuracy = accuracy(preds, test_y);
  outcome.f1 = macro_f1(preds, test_y, ds.m);

  const std::string tag = model_tag(mcfg);
  outcome.dir = fs::path(o.common.out) /
                (ds.name + "_" + tag + "_s" + std::to_string(o.common.seed));
  fs::create_directories(outcome.dir);

  json resolved;
  resolved["command"] = "train";
  resolved["dataset"] = ds.name;
  resolved["data"] = o.common.data_root;
  resolved["model"] = model_config_json(mcfg);
  resolved["train"] = {{"epochs", tcfg.epochs},
                       {"lr0", tcfg.lr0},
                       {"lr_decay", tcfg.lr_decay},
                       {"decay_every", tcfg.decay_every},
                       {"weight_decay", tcfg.weight_decay},
                       {"l1_coeff", tcfg.l1_coeff},
                       {"entropy_coeff", tcfg.entropy_coeff},
                       {"batch_size", tcfg.batch_size},
                       {"seed", tcfg.seed}};
  write_provenance(outcome.dir, resolved);

  CheckpointMeta meta;
  meta.epoch = o.epochs;
  meta.rng_seed = o.common.seed;
  save_checkpoint(model, (outcome.dir / "model.ckpt").string(), meta);

  {
    CsvWriter csv((outcome.dir / "history.csv").string(),
                  {"epoch", "lr", "train_loss", "train_accuracy", "test_accuracy"});
    for (const EpochRecord& rec : history.epochs)
      csv.write_row({std::to_string(rec.epoch), fmt_double(rec.lr),
                     fmt_double(rec.train_loss), fmt_double(rec.train_accuracy),
                     fmt_double(rec.test_accuracy)});
  }
  {
    CsvWriter csv((outcome.dir / "metrics.csv").string(),
                  {"dataset", "model", "seed", "accuracy", "macro_f1"});
    csv.write_row({ds.name, tag, std::to_string(o.common.seed),
                   fmt_double(outcome.accuracy), fmt_double(outcome.f1)});
  }
  if (!quiet)
    std::cout << ds.name << " " << tag << " seed " << o.common.seed
              << ": test accuracy " << fmt_double(outcome.accuracy, "%.4f")
              << ", macro F1 " << fmt_double(outcome.f1, "%.4f") << "\n";
  return outcome;
}

int cmd_train(const TrainOpts& opts) {
  const std::vector<std::string> names = resolve_datasets(opts.common);
  std::vector<std::function<void()>> cells;
  for (const std::string& name : names) {
    cells.push_back([&opts, name] {
      const Dataset ds = load_dataset(opts.common.data_root, name);
      run_one_training(opts, ds);
    });
  }
  run_cells(std::move(cells), opts.common.jobs);
  return 0;
}

// ---------------------------------------------------------------------------
// attack
// ---------------------------------------------------------------------------

struct AttackOpts {
  CommonOpts common;
  std::string ckpt;
  std::vector<double> eps = {0.05, 0.1, 0.25, 0.5};
  double alpha_ratio = 0.01;
  int iters = 100;
  bool random_start = false;
  std::string denominator = "correct";
  std::size_t subsample = 0;  // 0 = whole test split
};

void subsample_rows(Tensor& x, std::vector<int>& y, std::size_t cap,
                    std::uint64_t seed) {
  const std::size_t n = x.rows();
  if (cap == 0 || n <= cap) return;
  std::vector<std::size_t> index(n);
  std::iota(index.begin(), index.end(), 0);
  Rng rng(seed ^ 0x5EBull);
  shuffle(index, rng);
  index.resize(cap);
  std::sort(index.begin(), index.end());
  const std::size_t d = x.cols();
  Tensor xs({cap, d});
  std::vector<int> ys(cap);
  for (std::size_t i = 0; i < cap; ++i) {
    std::copy(&x.data[index[i] * d], &x.data[(index[i] + 1) * d], &xs.data[i * d]);
    ys[i] = y[index[i]];
  }
  x = std::move(xs);
  y = std::move(ys);
}

int cmd_attack(const AttackOpts& opts) {
  if (opts.ckpt.empty()) throw ConfigError("attack: --ckpt is required");
  Model model = load_checkpoint(opts.ckpt);
  if (opts.common.arch != "kan" &&
      arch_from_string(opts.common.arch) != model.config().arch)
    throw CheckpointError("checkpoint arch " +
                          arch_to_string(model.config().arch) +
                          " does not match --arch " + opts.common.arch);

  const Dataset ds = load_dataset(opts.common.data_root, opts.common.dataset);
  if (static_cast<int>(ds.d) != model.config().d || ds.m != model.config().m)
    throw CheckpointError("checkpoint was trained for d=" +
                          std::to_string(model.config().d) + ", m=" +
                          std::to_string(model.config().m) +
                          "; dataset has d=" + std::to_string(ds.d) +
                          ", m=" + std::to_string(ds.m));

  Tensor x;
  std::vector<int> y;
  Dataset::split_matrix(ds.test, x, y);
  subsample_rows(x, y, opts.subsample, opts.common.seed);

  const AsrDenominator denom = opts.denominator == "all"
                                   ? AsrDenominator::All
                                   : AsrDenominator::CorrectBefore;
  const std::string tag = model_tag(model.config());

  fs::create_directories(opts.common.out);
  json resolved;
  resolved["command"] = "attack";
  resolved["ckpt"] = opts.ckpt;
  resolved["dataset"] = ds.name;
  resolved["eps"] = opts.eps;
  resolved["alpha_ratio"] = opts.alpha_ratio;
  resolved["iters"] = opts.iters;
  resolved["random_start"] = opts.random_start;
  resolved["asr_denominator"] = opts.denominator;
  resolved["subsample"] = opts.subsample;
  resolved["seed"] = opts.common.seed;
  write_provenance(opts.common.out, resolved);

  CsvWriter csv((fs::path(opts.common.out) / "asr.csv").string(),
                {"dataset", "model", "eps", "n_eval", "n_correct_before",
                 "n_success", "asr"});
  double prev_asr = -1.0;
  for (double eps : opts.eps) {
    AttackConfig acfg;
    acfg.eps = eps;
    acfg.alpha = opts.alpha_ratio * eps;
    acfg.iters = opts.iters;
    acfg.random_start = opts.random_start;
    acfg.seed = opts.common.seed;
    const AttackReport report = attack_success_rate(model, x, y, acfg, denom);
    csv.write_row({ds.name, tag, fmt_double(eps), std::to_string(report.n_eval),
                   std::to_string(report.n_correct_before),
                   std::to_string(report.n_success), fmt_double(report.asr)});
    std::cout << "eps " << fmt_double(eps, "%.3g") << ": ASR "
              << fmt_double(report.asr, "%.4f") << " (" << report.n_success
              << "/" << report.n_correct_before << ")\n";
    if (report.asr_defined && prev_asr >= 0.0 && report.asr < prev_asr - 1e-12)
      std::cerr << "warning: ASR decreased from " << prev_asr << " to "
                << report.asr << " as eps grew\n";
    if (report.asr_defined) prev_asr = report.asr;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// lipschitz
// ---------------------------------------------------------------------------

struct LipOpts {
  CommonOpts common;
  std::string ckpt;
  std::string ckpt_b;
  double radius = 0.5;
  int starts = 8;
  int ascent_steps = 10;
  double ascent_lr = 0.0;
  std::size_t subsample = 256;
};

LipschitzSummary lip_summary_for(const std::string& ckpt, const LipOpts& opts,
                                 const Dataset& ds) {
  Model model = load_checkpoint(ckpt);
  if (static_cast<int>(ds.d) != model.config().d)
    throw CheckpointError("checkpoint/dataset length mismatch");
  Tensor x;
  std::vector<int> y;
  Dataset::split_matrix(ds.test, x, y);
  LipschitzConfig cfg;
  cfg.radius = opts.radius;
  cfg.n_starts = opts.starts;
  cfg.ascent_steps = opts.ascent_steps;
  cfg.ascent_lr = opts.ascent_lr;
  cfg.seed = opts.common.seed;
  return lipschitz_dataset_summary(model, x, cfg, opts.subsample);
}

int cmd_lipschitz(const LipOpts& opts) {
  if (opts.ckpt.empty()) throw ConfigError("lipschitz: --ckpt is required");
  const Dataset ds = load_dataset(opts.common.data_root, opts.common.dataset);

  fs::create_directories(opts.common.out);
  json resolved;
  resolved["command"] = "lipschitz";
  resolved["ckpt"] = opts.ckpt;
  resolved["ckpt_b"] = opts.ckpt_b;
  resolved["dataset"] = ds.name;
  resolved["radius"] = opts.radius;
  resolved["starts"] = opts.starts;
  resolved["ascent_steps"] = opts.ascent_steps;
  resolved["ascent_lr"] = opts.ascent_lr;
  resolved["subsample"] = opts.subsample;
  resolved["seed"] = opts.common.seed;
  write_provenance(opts.common.out, resolved);

  Model model_a = load_checkpoint(opts.ckpt);
  const std::string tag_a = model_tag(model_a.config());
  const LipschitzSummary a = lip_summary_for(opts.ckpt, opts, ds);
  {
    CsvWriter csv((fs::path(opts.common.out) / "lipschitz_samples.csv").string(),
                  {"dataset", "model", "sample_index", "estimate"});
    for (std::size_t i = 0; i < a.estimates.size(); ++i)
      csv.write_row({ds.name, tag_a, std::to_string(i), fmt_double(a.estimates[i])});
  }
  {
    const std::vector<double> qs = quantiles(a.estimates);
    CsvWriter csv((fs::path(opts.common.out) / "lipschitz_summary.csv").string(),
                  {"dataset", "model", "n", "q1", "median", "q3"});
    csv.write_row({ds.name, tag_a, std::to_string(a.estimates.size()),
                   fmt_double(qs[0]), fmt_double(qs[1]), fmt_double(qs[2])});
  }
  std::cout << tag_a << " median local Lipschitz estimate: "
            << fmt_double(a.median, "%.6g") << "\n";

  if (!opts.ckpt_b.empty()) {
    Model model_b = load_checkpoint(opts.ckpt_b);
    const std::string tag_b = model_tag(model_b.config());
    const LipschitzSummary b = lip_summary_for(opts.ckpt_b, opts, ds);
    CsvWriter csv((fs::path(opts.common.out) / "lipschitz_diff.csv").string(),
                  {"dataset", "model_a", "model_b", "median_a", "median_b",
                   "diff"});
    csv.write_row({ds.name, tag_a, tag_b, fmt_double(a.median),
                   fmt_double(b.median), fmt_double(a.median - b.median)});
    std::cout << tag_a << " - " << tag_b
              << " median difference: " << fmt_double(a.median - b.median, "%.6g")
              << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// ablate
// ---------------------------------------------------------------------------

struct AblateOpts {
  CommonOpts common;
  TrainOpts train;  // epochs etc.
  std::vector<int> grids = {1, 5, 50};
  int hist_bins = 40;
};

struct AblateCell {
  std::string variant;  // full | nobase | nospline
  int grid = 0;         // 0 means '-'
  double test_accuracy = 0.0;
  double train_accuracy = 0.0;
  json histograms;
};

json component_histograms(Model& model, const Tensor& x, int bins) {
  const auto [base, spline] = model.last_layer_components(x);
  auto hist_json = [&](const Tensor& t) {
    double lo = t.data.empty() ? 0.0 : t.data[0];
    double hi = lo;
    for (double v : t.data) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(hi > lo)) hi = lo + 1.0;
    const Histogram h = histogram(t.data, static_cast<std::size_t>(bins), lo, hi);
    return json{{"edges", h.edges}, {"counts", h.counts}};
  };
  return json{{"base", hist_json(base)}, {"spline", hist_json(spline)}};
}

int cmd_ablate(const AblateOpts& opts) {
  const Dataset ds = load_dataset(opts.common.data_root, opts.common.dataset);
  fs::create_directories(opts.common.out);

  struct CellSpec {
    std::string variant;
    bool use_base;
    bool use_spline;
    int grid;
  };
  std::vector<CellSpec> specs;
  for (int g : opts.grids) specs.push_back({"full", true, true, g});
  for (int g : opts.grids) specs.push_back({"nobase", false, true, g});
  specs.push_back({"nospline", true, false, opts.grids.front()});

  std::vector<AblateCell> cells(specs.size());
  std::vector<std::function<void()>> work;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    work.push_back([&, i] {
      const CellSpec& spec = specs[i];
      TrainOpts to = opts.train;
      to.common = opts.common;
      to.common.arch = "kan";
      to.common.grid = spec.grid;
      to.common.no_base = !spec.use_base;
      to.common.no_spline = !spec.use_spline;
      to.common.out = (fs::path(opts.common.out) / "cells").string();

      const TrainOutcome outcome = run_one_training(to, ds, /*quiet=*/true);
      Model model = load_checkpoint((outcome.dir / "model.ckpt").string());
      model.set_train(false);

      AblateCell cell;
      cell.variant = spec.variant;
      cell.grid = spec.use_spline ? spec.grid : 0;
      cell.test_accuracy = outcome.accuracy;

      Tensor train_x;
      std::vector<int> train_y;
      Dataset::split_matrix(ds.train, train_x, train_y);
      cell.train_accuracy =
          accuracy(argmax_rows(model.forward(train_x, false)), train_y);
      cell.histograms =
          json{{"train", component_histograms(model, train_x, opts.hist_bins)}};
      Tensor test_x;
      std::vector<int> test_y;
      Dataset::split_matrix(ds.test, test_x, test_y);
      cell.histograms["test"] = component_histograms(model, test_x, opts.hist_bins);
      cells[i] = std::move(cell);
    });
  }
  run_cells(std::move(work), opts.common.jobs);

  json resolved;
  resolved["command"] = "ablate";
  resolved["dataset"] = ds.name;
  resolved["grids"] = opts.grids;
  resolved["seed"] = opts.common.seed;
  resolved["epochs"] = opts.train.epochs;
  write_provenance(opts.common.out, resolved);

  {
    CsvWriter csv((fs::path(opts.common.out) / "ablation_accuracy.csv").string(),
                  {"dataset", "variant", "grid", "seed", "test_accuracy",
                   "train_accuracy"});
    for (const AblateCell& cell : cells)
      csv.write_row({ds.name, cell.variant,
                     cell.grid ? std::to_string(cell.grid) : "-",
                     std::to_string(opts.common.seed),
                     fmt_double(cell.test_accuracy),
                     fmt_double(cell.train_accuracy)});
  }
  {
    // pairwise >= counts across grids, within each spline-bearing variant
    CsvWriter csv((fs::path(opts.common.out) / "ablation_pairwise.csv").string(),
                  {"variant", "grid_row", "grid_col", "count"});
    for (const std::string& variant : {std::string("full"), std::string("nobase")}) {
      std::vector<std::vector<double>> acc;
      std::vector<int> grids;
      for (const AblateCell& cell : cells)
        if (cell.variant == variant) {
          acc.push_back({cell.test_accuracy});
          grids.push_back(cell.grid);
        }
      const auto counts = pairwise_geq_counts(acc);
      for (std::size_t r = 0; r < counts.size(); ++r)
        for (std::size_t c = 0; c < counts.size(); ++c)
          csv.write_row({variant, std::to_string(grids[r]),
                         std::to_string(grids[c]), std::to_string(counts[r][c])});
    }
  }
  {
    CsvWriter csv((fs::path(opts.common.out) / "ablation_quantiles.csv").string(),
                  {"variant", "grid", "q1", "q2", "q3"});
    for (const AblateCell& cell : cells) {
      const std::vector<double> qs = quantiles({cell.test_accuracy});
      csv.write_row({cell.variant, cell.grid ? std::to_string(cell.grid) : "-",
                     fmt_double(qs[0]), fmt_double(qs[1]), fmt_double(qs[2])});
    }
  }
  {
    json hists = json::array();
    for (const AblateCell& cell : cells)
      hists.push_back(json{{"variant", cell.variant},
                           {"grid", cell.grid ? json(cell.grid) : json("-")},
                           {"histograms", cell.histograms}});
    std::ofstream out(fs::path(opts.common.out) / "histograms.json",
                      std::ios::binary);
    out << hists.dump(2) << "\n";
  }

  for (const AblateCell& cell : cells)
    std::cout << cell.variant << " grid "
              << (cell.grid ? std::to_string(cell.grid) : "-") << ": test "
              << fmt_double(cell.test_accuracy, "%.4f") << " (train "
              << fmt_double(cell.train_accuracy, "%.4f") << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportOpts {
  std::string runs = "runs";
  std::string out = "report";
  bool allow_missing = false;
};

struct MetricsRow {
  std::string dataset;
  std::string model;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (start <= line.size()) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

int cmd_report(const ReportOpts& opts) {
  if (!fs::is_directory(opts.runs))
    throw DataError("runs directory '" + opts.runs + "' not found");

  std::vector<MetricsRow> rows;
  for (const auto& entry : fs::recursive_directory_iterator(opts.runs)) {
    if (!entry.is_regular_file() || entry.path().filename() != "metrics.csv")
      continue;
    std::ifstream in(entry.path());
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const std::vector<std::string> f = split_csv_line(line);
      if (f.size() < 5)
        throw DataError("malformed metrics row in " + entry.path().string());
      MetricsRow row;
      row.dataset = f[0];
      row.model = f[1];
      row.seed = std::stoull(f[2]);
      row.accuracy = std::stod(f[3]);
      row.macro_f1 = std::stod(f[4]);
      rows.push_back(std::move(row));
    }
  }
  if (rows.empty()) throw DataError("no metrics.csv found under " + opts.runs);

  std::set<std::string> datasets;
  std::set<std::string> models;
  for (const MetricsRow& r : rows) {
    datasets.insert(r.dataset);
    models.insert(r.model);
  }
  if (models.size() < 2)
    throw ConfigError("report: need at least 2 models, found " +
                      std::to_string(models.size()));
  if (datasets.size() < 2)
    throw ConfigError("report: need at least 2 datasets, found " +
                      std::to_string(datasets.size()));

  // median over seeds per (dataset, model)
  std::map<std::pair<std::string, std::string>, std::vector<double>> acc_cell;
  std::map<std::pair<std::string, std::string>, std::vector<double>> f1_cell;
  for (const MetricsRow& r : rows) {
    acc_cell[{r.dataset, r.model}].push_back(r.accuracy);
    f1_cell[{r.dataset, r.model}].push_back(r.macro_f1);
  }

  std::vector<std::string> missing;
  for (const std::string& d : datasets)
    for (const std::string& m : models)
      if (!acc_cell.count({d, m})) missing.push_back(d + " x " + m);
  if (!missing.empty() && !opts.allow_missing) {
    std::string msg = "report: missing cells:";
    for (const std::string& cell : missing) msg += " " + cell;
    throw DataError(msg + " (use --allow-missing to drop incomplete datasets)");
  }

  std::vector<std::string> kept_datasets;
  for (const std::string& d : datasets) {
    bool complete = true;
    for (const std::string& m : models)
      if (!acc_cell.count({d, m})) complete = false;
    if (complete) kept_datasets.push_back(d);
  }
  if (kept_datasets.size() < 2)
    throw DataError("report: fewer than 2 complete datasets after dropping");

  fs::create_directories(opts.out);
  const std::vector<std::string> model_list(models.begin(), models.end());

  std::vector<std::vector<double>> acc_matrix;
  std::vector<std::vector<double>> f1_matrix;
  {
    CsvWriter csv((fs::path(opts.out) / "aggregate_metrics.csv").string(),
                  {"dataset", "model", "n_seeds", "accuracy_median",
                   "macro_f1_median"});
    for (const std::string& d : kept_datasets) {
      std::vector<double> acc_row;
      std::vector<double> f1_row;
      for (const std::string& m : model_list) {
        std::vector<double> acc = acc_cell.at({d, m});
        std::vector<double> f1 = f1_cell.at({d, m});
        const double acc_med = quantile(acc, 0.5);
        const double f1_med = quantile(f1, 0.5);
        csv.write_row({d, m, std::to_string(acc.size()), fmt_double(acc_med),
                       fmt_double(f1_med)});
        acc_row.push_back(acc_med);
        f1_row.push_back(f1_med);
      }
      acc_matrix.push_back(std::move(acc_row));
      f1_matrix.push_back(std::move(f1_row));
    }
  }

  auto rank_json = [&](const RankSummary& s) {
    json mean_ranks = json::object();
    json flipped = json::object();
    for (std::size_t j = 0; j < model_list.size(); ++j) {
      mean_ranks[model_list[j]] = s.mean_ranks[j];
      flipped[model_list[j]] = s.mean_ranks_flipped[j];
    }
    return json{{"n_datasets", s.n_datasets},
                {"k_models", s.k_models},
                {"mean_ranks", mean_ranks},
                {"mean_ranks_higher_better", flipped},
                {"friedman_stat", s.friedman_stat},
                {"critical_difference", s.critical_difference},
                {"alpha", s.alpha},
                {"post_hoc", "nemenyi"}};
  };

  json summary;
  summary["models"] = model_list;
  summary["datasets"] = kept_datasets;
  summary["accuracy"] = rank_json(friedman_ranks(acc_matrix, true));
  summary["macro_f1"] = rank_json(friedman_ranks(f1_matrix, true));

  // optional ASR tables: runs/**/asr.csv, ranked lower-is-better per eps
  std::map<std::string, std::map<std::pair<std::string, std::string>, double>>
      asr_cells;
  for (const auto& entry : fs::recursive_directory_iterator(opts.runs)) {
    if (!entry.is_regular_file() || entry.path().filename() != "asr.csv") continue;
    std::ifstream in(entry.path());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const std::vector<std::string> f = split_csv_line(line);
      if (f.size() < 7) continue;
      asr_cells[f[2]][{f[0], f[1]}] = std::stod(f[6]);
    }
  }
  for (const auto& [eps, cells] : asr_cells) {
    std::vector<std::vector<double>> matrix;
    bool complete = true;
    for (const std::string& d : kept_datasets) {
      std::vector<double> row;
      for (const std::string& m : model_list) {
        auto it = cells.find({d, m});
        if (it == cells.end()) {
          complete = false;
          break;
        }
        row.push_back(it->second);
      }
      if (!complete) break;
      matrix.push_back(std::move(row));
    }
    if (complete && matrix.size() >= 2)
      summary["asr_eps_" + eps] = rank_json(friedman_ranks(matrix, false));
  }

  std::ofstream out(fs::path(opts.out) / "rank_summary.json", std::ios::binary);
  out << summary.dump(2) << "\n";
  std::cout << "report: " << kept_datasets.size() << " datasets x "
            << model_list.size() << " models -> " << opts.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck
// ---------------------------------------------------------------------------

struct GradcheckOpts {
  double tol = 1e-4;
  int seeds = 10;
};

int cmd_gradcheck(const GradcheckOpts& opts) {
  struct Row {
    std::string name;
    double worst = 0.0;
    bool pass = true;
  };
  std::vector<Row> rows;

  auto record = [&](const std::string& name, const CheckReport& report) {
    Row* row = nullptr;
    for (Row& r : rows)
      if (r.name == name) row = &r;
    if (!row) {
      rows.push_back({name, 0.0, true});
      row = &rows.back();
    }
    row->worst = std::max(row->worst, report.max_rel_err);
    row->pass = row->pass && report.pass;
  };

  for (int seed = 0; seed < opts.seeds; ++seed) {
    Rng rng(1000 + static_cast<std::uint64_t>(seed));

    {
      LinearLayer layer(6, 4);
      layer.init(rng);
      Tensor x({2, 6});
      for (double& v : x.data) v = rng.uniform(-0.9, 0.9);
      record("linear", grad_check(layer, x, 1e-3, opts.tol));
    }
    {
      ReluLayer layer;
      Tensor x({2, 6});
      for (double& v : x.data) v = sample_away_from(rng, -0.9, 0.9, {0.0}, 1e-3);
      record("relu", grad_check(layer, x, 1e-4, opts.tol));
    }
    {
      Rng drop_rng(7);
      DropoutLayer layer(0.1, &drop_rng);
      layer.set_train(false);  // dropout-off contract
      Tensor x({2, 6});
      for (double& v : x.data) v = rng.uniform(-0.9, 0.9);
      record("dropout-off", grad_check(layer, x, 1e-3, opts.tol));
    }
    {
      BatchNorm1d bn(5);
      for (double& v : bn.running_mean.data) v = rng.uniform(-0.5, 0.5);
      for (double& v : bn.running_var.data) v = rng.uniform(0.5, 2.0);
      for (double& v : bn.gamma.value.data) v = rng.uniform(0.5, 1.5);
      bn.set_train(false);
      Tensor x({3, 5});
      for (double& v : x.data) v = rng.uniform(-0.9, 0.9);
      record("batchnorm-frozen", grad_check(bn, x, 1e-3, opts.tol));
    }
    for (int G : {1, 5, 50}) {
      KanLayer layer(4, 3, SplineSpec::make(G, 3));
      layer.init(rng);
      Tensor x({2, 4});
      for (double& v : x.data)
        v = sample_away_from(rng, -0.9, 0.9, layer.spec().knots, 1e-3);
      record("kan-G" + std::to_string(G), grad_check(layer, x, 1e-6, opts.tol));
    }
    {
      ModelConfig cfg;
      cfg.arch = Arch::Kan;
      cfg.d = 4;
      cfg.m = 3;
      cfg.seed = 10 + static_cast<std::uint64_t>(seed);
      Model model = build_model(cfg);
      std::vector<double> avoid = SplineSpec::make(cfg.grid_size, 3).knots;
      avoid.push_back(0.0);
      Tensor x({2, 4});
      for (double& v : x.data) v = sample_away_from(rng, -0.9, 0.9, avoid, 2e-3);
      record("kan-model", grad_check(model, x, 1e-6, opts.tol));
    }
  }

  bool all_pass = true;
  for (const Row& row : rows) {
    std::cout << (row.pass ? "[PASS] " : "[FAIL] ") << row.name
              << ": max rel err " << fmt_double(row.worst, "%.3g") << " over "
              << opts.seeds << " seeds (tol " << fmt_double(opts.tol, "%.1g")
              << ")\n";
    all_pass = all_pass && row.pass;
  }
  return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// gen-cbf
// ---------------------------------------------------------------------------

struct GenCbfOpts {
  std::string out;
  std::size_t train_count = 30;
  std::size_t test_count = 900;
  std::size_t length = 128;
  std::uint64_t seed = 7;
};

int cmd_gen_cbf(const GenCbfOpts& opts) {
  if (opts.out.empty()) throw ConfigError("gen-cbf: --out is required");
  write_cbf_dir(opts.out, opts.train_count, opts.test_count, opts.length,
                opts.seed);
  std::cout << "wrote " << opts.out << "/CBF (" << opts.train_count << " train, "
            << opts.test_count << " test, length " << opts.length << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KAN / MLP time-series classification laboratory"};
  app.require_subcommand(1);

  TrainOpts train_opts;
  CLI::App* train_cmd = app.add_subcommand("train", "train one model");
  add_common(train_cmd, train_opts.common);
  train_cmd->add_option("--epochs", train_opts.epochs);
  train_cmd->add_option("--lr", train_opts.lr0);
  train_cmd->add_option("--lr-decay", train_opts.lr_decay);
  train_cmd->add_option("--decay-every", train_opts.decay_every);
  train_cmd->add_option("--weight-decay", train_opts.weight_decay);
  train_cmd->add_option("--l1-coeff", train_opts.l1_coeff);
  train_cmd->add_option("--entropy-coeff", train_opts.entropy_coeff);
  train_cmd->add_option("--batch-size", train_opts.batch_size);
  train_cmd->add_option("--dropout", train_opts.dropout);

  AttackOpts attack_opts;
  CLI::App* attack_cmd = app.add_subcommand("attack", "PGD attack on a checkpoint");
  add_common(attack_cmd, attack_opts.common);
  attack_cmd->add_option("--ckpt", attack_opts.ckpt, "checkpoint path");
  attack_cmd->add_option("--eps", attack_opts.eps, "perturbation budgets");
  attack_cmd->add_option("--alpha-ratio", attack_opts.alpha_ratio,
                         "step size as a fraction of eps");
  attack_cmd->add_option("--iters", attack_opts.iters);
  attack_cmd->add_flag("--random-start", attack_opts.random_start);
  attack_cmd->add_option("--asr-denominator", attack_opts.denominator,
                         "correct|all");
  attack_cmd->add_option("--subsample", attack_opts.subsample,
                         "cap on attacked test samples (0 = all)");

  LipOpts lip_opts;
  CLI::App* lip_cmd =
      app.add_subcommand("lipschitz", "empirical local Lipschitz estimates");
  add_common(lip_cmd, lip_opts.common);
  lip_cmd->add_option("--ckpt", lip_opts.ckpt, "checkpoint path");
  lip_cmd->add_option("--ckpt-b", lip_opts.ckpt_b,
                      "second checkpoint: also emit the median difference");
  lip_cmd->add_option("--radius", lip_opts.radius);
  lip_cmd->add_option("--starts", lip_opts.starts);
  lip_cmd->add_option("--ascent-steps", lip_opts.ascent_steps);
  lip_cmd->add_option("--ascent-lr", lip_opts.ascent_lr);
  lip_cmd->add_option("--subsample", lip_opts.subsample);

  AblateOpts ablate_opts;
  CLI::App* ablate_cmd =
      app.add_subcommand("ablate", "grid-size and component ablation battery");
  add_common(ablate_cmd, ablate_opts.common, /*with_model_flags=*/false);
  ablate_cmd->add_option("--grids", ablate_opts.grids, "grid sizes");
  ablate_cmd->add_option("--epochs", ablate_opts.train.epochs);
  ablate_cmd->add_option("--hist-bins", ablate_opts.hist_bins);

  ReportOpts report_opts;
  CLI::App* report_cmd =
      app.add_subcommand("report", "aggregate metrics and rank statistics");
  report_cmd->add_option("--runs", report_opts.runs, "runs directory tree");
  report_cmd->add_option("--out", report_opts.out, "output directory");
  report_cmd->add_flag("--allow-missing", report_opts.allow_missing,
                       "drop datasets with missing cells instead of failing");

  GradcheckOpts gradcheck_opts;
  CLI::App* gradcheck_cmd =
      app.add_subcommand("gradcheck", "run the full gradient-check suite");
  gradcheck_cmd->add_option("--tol", gradcheck_opts.tol);
  gradcheck_cmd->add_option("--seeds", gradcheck_opts.seeds);

  GenCbfOpts gen_opts;
  CLI::App* gen_cmd =
      app.add_subcommand("gen-cbf", "write a synthetic CBF dataset (UCR layout)");
  gen_cmd->add_option("--out", gen_opts.out, "data root to create CBF/ under");
  gen_cmd->add_option("--train-count", gen_opts.train_count);
  gen_cmd->add_option("--test-count", gen_opts.test_count);
  gen_cmd->add_option("--length", gen_opts.length);
  gen_cmd->add_option("--seed", gen_opts.seed);

  try {
    app.parse(argc, argv);

    if (train_cmd->parsed()) {
      const JsonOverlay overlay(train_opts.common.config_file);
      overlay.apply(train_cmd, "--data", train_opts.common.data_root);
      overlay.apply(train_cmd, "--dataset", train_opts.common.dataset);
      overlay.apply(train_cmd, "--arch", train_opts.common.arch);
      overlay.apply(train_cmd, "--grid", train_opts.common.grid);
      overlay.apply(train_cmd, "--seed", train_opts.common.seed);
      overlay.apply(train_cmd, "--out", train_opts.common.out);
      overlay.apply(train_cmd, "--jobs", train_opts.common.jobs);
      overlay.apply(train_cmd, "--epochs", train_opts.epochs);
      overlay.apply(train_cmd, "--lr", train_opts.lr0);
      overlay.apply(train_cmd, "--lr-decay", train_opts.lr_decay);
      overlay.apply(train_cmd, "--decay-every", train_opts.decay_every);
      overlay.apply(train_cmd, "--weight-decay", train_opts.weight_decay);
      overlay.apply(train_cmd, "--l1-coeff", train_opts.l1_coeff);
      overlay.apply(train_cmd, "--entropy-coeff", train_opts.entropy_coeff);
      overlay.apply(train_cmd, "--batch-size", train_opts.batch_size);
      overlay.apply(train_cmd, "--dropout", train_opts.dropout);
      return cmd_train(train_opts);
    }
    if (attack_cmd->parsed()) {
      const JsonOverlay overlay(attack_opts.common.config_file);
      overlay.apply(attack_cmd, "--data", attack_opts.common.data_root);
      overlay.apply(attack_cmd, "--dataset", attack_opts.common.dataset);
      overlay.apply(attack_cmd, "--ckpt", attack_opts.ckpt);
      overlay.apply(attack_cmd, "--eps", attack_opts.eps);
      overlay.apply(attack_cmd, "--iters", attack_opts.iters);
      overlay.apply(attack_cmd, "--subsample", attack_opts.subsample);
      overlay.apply(attack_cmd, "--seed", attack_opts.common.seed);
      overlay.apply(attack_cmd, "--out", attack_opts.common.out);
      return cmd_attack(attack_opts);
    }
    if (lip_cmd->parsed()) {
      const JsonOverlay overlay(lip_opts.common.config_file);
      overlay.apply(lip_cmd, "--data", lip_opts.common.data_root);
      overlay.apply(lip_cmd, "--dataset", lip_opts.common.dataset);
      overlay.apply(lip_cmd, "--ckpt", lip_opts.ckpt);
      overlay.apply(lip_cmd, "--ckpt-b", lip_opts.ckpt_b);
      overlay.apply(lip_cmd, "--radius", lip_opts.radius);
      overlay.apply(lip_cmd, "--starts", lip_opts.starts);
      overlay.apply(lip_cmd, "--ascent-steps", lip_opts.ascent_steps);
      overlay.apply(lip_cmd, "--subsample", lip_opts.subsample);
      overlay.apply(lip_cmd, "--seed", lip_opts.common.seed);
      overlay.apply(lip_cmd, "--out", lip_opts.common.out);
      return cmd_lipschitz(lip_opts);
    }
    if (ablate_cmd->parsed()) {
      const JsonOverlay overlay(ablate_opts.common.config_file);
      overlay.apply(ablate_cmd, "--data", ablate_opts.common.data_root);
      overlay.apply(ablate_cmd, "--dataset", ablate_opts.common.dataset);
      overlay.apply(ablate_cmd, "--grids", ablate_opts.grids);
      overlay.apply(ablate_cmd, "--epochs", ablate_opts.train.epochs);
      overlay.apply(ablate_cmd, "--seed", ablate_opts.common.seed);
      overlay.apply(ablate_cmd, "--out", ablate_opts.common.out);
      overlay.apply(ablate_cmd, "--jobs", ablate_opts.common.jobs);
      return cmd_ablate(ablate_opts);
    }
    if (report_cmd->parsed()) return cmd_report(report_opts);
    if (gradcheck_cmd->parsed()) return cmd_gradcheck(gradcheck_opts);
    if (gen_cmd->parsed()) return cmd_gen_cbf(gen_opts);
    throw ConfigError("no subcommand given");
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
