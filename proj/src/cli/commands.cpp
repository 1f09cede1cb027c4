#include "asrk/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "asrk/data/synthetic.hpp"
#include "asrk/encoder/vocabulary.hpp"
#include "asrk/errors.hpp"
#include "asrk/random.hpp"
#include "asrk/rerankers/scoring.hpp"

namespace asrk::cli {

namespace fs = std::filesystem;

namespace {

enum SeedStream : std::uint64_t {
  kPretrainStream = 0xa5c,
  kHoldoutStream = 0x401d,
  kSynthTrain = 1,
  kSynthDev = 2,
  kSynthTest = 3,
  kSynthFever = 4,
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  return out;
}

std::vector<data::QuestionRecord> load_split(const std::string& path, data::SplitFilter filter) {
  return data::load_as2_tsv(path, filter).questions;
}

bool is_masr_fp(const ExperimentConfig& config) { return config.model == ExperimentKind::masr_fp; }

rerankers::TrainOptions pretrain_options(const ExperimentConfig& config) {
  rerankers::TrainOptions options;
  options.epochs = config.pretrain_epochs;
  options.batch_size = config.batch_size;
  options.seed = derive_seed(config.seed, kPretrainStream);
  return options;
}

std::string report_line(const eval::MetricReport& r) {
  return "p1=" + fmt(r.p_at_1) + " map=" + fmt(r.map) + " mrr=" + fmt(r.mrr) + " n=" + std::to_string(r.n_questions);
}

}  // namespace

encoder::Vocabulary experiment_vocab(std::span<const data::QuestionRecord> train,
                                     std::span<const data::FeverRecord> fever, std::size_t max_size) {
  std::vector<std::string> corpus;
  for (const auto& q : train) {
    corpus.push_back(q.question);
    for (const auto& c : q.candidates) corpus.push_back(c.text);
  }
  for (const auto& f : fever) {
    corpus.push_back(f.claim);
    corpus.push_back(f.evidence);
  }
  return encoder::build_vocab(corpus, max_size);
}

bool same_architecture(const rerankers::ModelConfig& a, const rerankers::ModelConfig& b) {
  return a.kind == b.kind && a.k == b.k && a.scheme == b.scheme && a.encoder.layers == b.encoder.layers &&
         a.encoder.heads == b.encoder.heads && a.encoder.hidden == b.encoder.hidden &&
         a.encoder.ffn == b.encoder.ffn && a.encoder.vocab_size == b.encoder.vocab_size &&
         a.encoder.max_length == b.encoder.max_length;
}

eval::RunResult evaluate_model(const rerankers::RerankerModel& model,
                               std::span<const data::QuestionRecord> records, std::size_t threads) {
  const auto& vocab = rerankers::base_of(model).vocab();
  std::size_t tokens = 0, known = 0;
  for (const auto& q : records) {
    auto count = [&](const std::string& text) {
      for (int id : vocab.ids(text)) {
        ++tokens;
        known += id != encoder::kUnkId;
      }
    };
    count(q.question);
    for (const auto& c : q.candidates) count(c.text);
  }
  if (tokens > 0 && known == 0) {
    throw Error(ErrorKind::incompatibility, "dataset shares no tokens with the checkpoint vocabulary");
  }
  const auto scores = rerankers::score_questions(model, records, threads);
  return eval::make_run(records, scores);
}

Trained train_experiment(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  if (config.train_path.empty()) throw Error(ErrorKind::config, "train_path is required", "train_path");
  const auto train = load_split(config.train_path, data::SplitFilter::train_convention);
  std::vector<data::QuestionRecord> dev, test;
  if (!config.dev_path.empty()) dev = load_split(config.dev_path, data::SplitFilter::eval_convention);
  if (!config.test_path.empty()) test = load_split(config.test_path, data::SplitFilter::eval_convention);

  const bool inline_pretrain = is_masr_fp(config) && config.init_checkpoint.empty();
  std::vector<data::FeverRecord> fever;
  if (inline_pretrain) fever = data::load_fever_jsonl(config.fever_path).records;

  const auto model_config = config.model_config();
  std::optional<rerankers::RerankerModel> built;
  if (!config.init_checkpoint.empty()) {
    Checkpoint init = load_checkpoint(config.init_checkpoint);
    if (!same_architecture(init.config.model_config(), model_config)) {
      throw Error(ErrorKind::incompatibility,
                  "init_checkpoint architecture differs from the configured model (" +
                      std::string(to_string(init.config.model)) + " vs " + std::string(to_string(config.model)) + ")");
    }
    built.emplace(rerankers::make_model(model_config, init.vocab));
    copy_parameters(rerankers::base_of(init.model).params(), rerankers::base_of(*built).params());
  } else {
    auto vocab = std::make_shared<const encoder::Vocabulary>(
        experiment_vocab(train, fever, config.encoder.vocab_size));
    built.emplace(rerankers::make_model(model_config, vocab));
  }
  rerankers::RerankerModel model = std::move(*built);
  TrainReport report;

  if (inline_pretrain && config.epochs > 0 && config.pretrain_epochs > 0) {
    tensor::Optimizer opt(config.pretrain_optimizer_config());
    rerankers::pretrain_asc(model, fever, opt, pretrain_options(config));
    report.pretrain_accuracy = rerankers::asc_accuracy(model, fever);
    if (log) *log << "pretrain asc_accuracy=" << fmt(*report.pretrain_accuracy) << "\n";
  }

  auto& params = rerankers::base_of(model).params();
  std::vector<std::vector<double>> best;
  double best_map = -1.0;
  std::size_t since_best = 0;
  if (!dev.empty()) {
    report.best_dev = eval::evaluate(evaluate_model(model, dev, config.threads));
    best_map = report.best_dev->map;
    best = params.snapshot();
    if (log) *log << "epoch 0 dev " << report_line(*report.best_dev) << "\n";
  }

  if (config.epochs > 0) {
    tensor::Optimizer opt(config.optimizer_config());
    rerankers::TrainOptions options;
    options.epochs = config.epochs;
    options.batch_size = config.batch_size;
    options.seed = config.seed;
    options.asc_weight = config.asc_weight;
    options.on_epoch = [&](const rerankers::EpochStats& stats) {
      EpochRecord record{stats, std::nullopt};
      bool keep_going = true;
      if (!dev.empty()) {
        record.dev = eval::evaluate(evaluate_model(model, dev, config.threads));
        if (record.dev->map > best_map) {
          best_map = record.dev->map;
          best = params.snapshot();
          report.best_epoch = stats.epoch;
          report.best_dev = record.dev;
          since_best = 0;
        } else if (config.patience > 0 && ++since_best >= config.patience) {
          keep_going = false;
        }
      } else {
        report.best_epoch = stats.epoch;
      }
      if (log) {
        *log << "epoch " << stats.epoch << " loss=" << fmt(stats.loss);
        if (record.dev) *log << " dev " << report_line(*record.dev);
        *log << "\n";
      }
      report.epochs.push_back(record);
      return keep_going;
    };
    const auto result = rerankers::train_model(model, train, opt, options);
    report.skipped = result.skipped;
    report.steps = result.steps;
    if (!dev.empty()) params.restore(best);
  }

  if (!test.empty()) {
    report.test_run = evaluate_model(model, test, config.threads);
    report.test = eval::evaluate(*report.test_run);
    if (log) *log << "test " << report_line(*report.test) << " (epoch " << report.best_epoch << ")\n";
  }
  return {std::move(model), std::move(report)};
}

TrainReport cmd_train(const ExperimentConfig& config, const fs::path& out_dir, std::ostream& log) {
  config.validate();
  ensure_dir(out_dir);
  Trained trained = train_experiment(config, &log);
  save_checkpoint(out_dir / "model.ckpt", config, trained.model);
  {
    auto out = open_out(out_dir / "vocab.txt");
    rerankers::base_of(trained.model).vocab().write(out);
  }
  {
    auto out = open_out(out_dir / "metrics.tsv");
    out << "epoch\tloss\tmain_loss\tasc_loss\tdev_p1\tdev_map\tdev_mrr\n";
    for (const auto& e : trained.report.epochs) {
      out << e.stats.epoch << '\t' << exact(e.stats.loss) << '\t' << exact(e.stats.main_loss) << '\t'
          << exact(e.stats.asc_loss);
      if (e.dev) {
        out << '\t' << exact(e.dev->p_at_1) << '\t' << exact(e.dev->map) << '\t' << exact(e.dev->mrr);
      } else {
        out << "\t\t\t";
      }
      out << '\n';
    }
  }
  if (trained.report.test_run) eval::save_run((out_dir / "test_run.tsv").string(), *trained.report.test_run);
  log << "best_epoch " << trained.report.best_epoch << "\n";
  return trained.report;
}

PretrainReport cmd_pretrain_asc(const ExperimentConfig& config, const fs::path& out_dir, std::ostream& log) {
  config.validate();
  if (config.model == ExperimentKind::pointwise || config.model == ExperimentKind::multiclassifier ||
      config.model == ExperimentKind::pairwise) {
    throw Error(ErrorKind::incompatibility, std::string(to_string(config.model)) + " has no answer support classifier");
  }
  if (config.resolved_scheme() != rerankers::AscScheme::fever_three_way) {
    throw Error(ErrorKind::incompatibility, "ASC pretraining needs the fever_three_way scheme");
  }
  if (config.fever_path.empty()) throw Error(ErrorKind::config, "fever_path is required", "fever_path");
  ensure_dir(out_dir);

  auto fever = data::load_fever_jsonl(config.fever_path).records;
  if (fever.empty()) throw Error(ErrorKind::input, "no FEVER records in '" + config.fever_path + "'");
  std::vector<data::QuestionRecord> train;
  if (!config.train_path.empty()) train = load_split(config.train_path, data::SplitFilter::train_convention);
  auto vocab = std::make_shared<const encoder::Vocabulary>(experiment_vocab(train, fever, config.encoder.vocab_size));
  rerankers::RerankerModel model = rerankers::make_model(config.model_config(), vocab);

  std::vector<std::size_t> order(fever.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(config.seed, kHoldoutStream));
  rng.shuffle(std::span<std::size_t>(order));
  std::size_t n_hold = static_cast<std::size_t>(std::floor(config.pretrain_holdout * fever.size()));
  if (config.pretrain_holdout > 0.0 && n_hold == 0 && fever.size() > 1) n_hold = 1;
  std::vector<data::FeverRecord> fit, held;
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_hold ? held : fit).push_back(fever[order[i]]);

  PretrainReport report;
  report.train_pairs = fit.size();
  report.heldout_pairs = held.size();
  tensor::Optimizer opt(config.pretrain_optimizer_config());
  auto options = pretrain_options(config);
  options.on_epoch = [&](const rerankers::EpochStats& stats) {
    report.epochs.push_back(stats);
    log << "epoch " << stats.epoch << " asc_loss=" << fmt(stats.loss) << "\n";
    return true;
  };
  if (config.pretrain_epochs > 0) rerankers::pretrain_asc(model, fit, opt, options);
  report.heldout_accuracy = held.empty() ? rerankers::asc_accuracy(model, fit) : rerankers::asc_accuracy(model, held);
  log << "heldout_accuracy " << fmt(report.heldout_accuracy) << " (" << held.size() << " pairs)\n";
  save_checkpoint(out_dir / "asc.ckpt", config, model);
  return report;
}

EvaluateReport cmd_evaluate(const EvaluateOptions& options, const fs::path& out_dir, std::ostream& log) {
  Checkpoint ck = load_checkpoint(options.checkpoint);
  if (options.vocab) {
    std::ifstream in(*options.vocab);
    if (!in) throw Error(ErrorKind::io, "cannot open vocabulary '" + options.vocab->string() + "'");
    if (!(encoder::Vocabulary::read(in) == *ck.vocab)) {
      throw Error(ErrorKind::incompatibility, "vocabulary '" + options.vocab->string() +
                                                  "' does not match the checkpoint vocabulary");
    }
  }
  const auto dataset = data::load_as2_tsv(options.data, options.filter);
  EvaluateReport report;
  report.filtered_out = dataset.filtered_out;
  report.run = evaluate_model(ck.model, dataset.questions, options.threads);
  report.metrics = eval::evaluate(report.run);
  ensure_dir(out_dir);
  eval::save_run((out_dir / "run.tsv").string(), report.run);
  log << report_line(report.metrics) << " filtered_out=" << report.filtered_out << "\n";
  return report;
}

eval::RandomizationResult cmd_compare(const CompareOptions& options, std::ostream& log) {
  const auto a = eval::load_run(options.run_a.string());
  const auto b = eval::load_run(options.run_b.string());
  const auto r = eval::randomization_test(a, b, options.metric, options.trials, options.seed, options.threads);
  const std::string m(eval::to_string(options.metric));
  log << m << "_a " << fmt(r.metric_a) << "\n"
      << m << "_b " << fmt(r.metric_b) << "\n"
      << "difference " << fmt(r.metric_a - r.metric_b) << "\n"
      << "p_value " << exact(r.p_value) << "\n"
      << "trials " << r.trials << "\n"
      << "significant_at_0.05 " << (r.p_value < 0.05 ? "yes" : "no") << "\n";
  return r;
}

SweepReport cmd_sweep_k(const ExperimentConfig& config, std::span<const std::size_t> ks, eval::Metric metric,
                        const fs::path& out_dir, std::ostream& log) {
  config.validate();
  if (config.model == ExperimentKind::pointwise) {
    throw Error(ErrorKind::config, "sweep-k needs a model that uses k", "model");
  }
  if (config.dev_path.empty()) throw Error(ErrorKind::config, "sweep-k needs dev_path", "dev_path");
  for (std::size_t k : ks) {
    ExperimentConfig probe = config;
    probe.k = k;
    probe.validate();
  }
  ensure_dir(out_dir);
  const auto dev = load_split(config.dev_path, data::SplitFilter::eval_convention);

  SweepReport report;
  report.metric = metric;
  {
    ExperimentConfig base = config;
    base.model = ExperimentKind::pointwise;
    base.k.reset();
    base.asc_scheme.reset();
    base.test_path.clear();
    base.init_checkpoint.clear();
    auto trained = train_experiment(base, nullptr);
    report.baseline = eval::metric_value(evaluate_model(trained.model, dev, config.threads), metric);
    log << "baseline pointwise " << eval::to_string(metric) << "=" << fmt(report.baseline) << "\n";
  }
  auto trainer = [&](std::size_t k) {
    ExperimentConfig c = config;
    c.k = k;
    c.test_path.clear();
    auto trained = train_experiment(c, nullptr);
    return std::move(trained.model);
  };
  auto dev_run = [&](const rerankers::RerankerModel& model) {
    auto run = evaluate_model(model, dev, config.threads);
    log << "k=" << rerankers::base_of(model).config().k << " " << eval::to_string(metric) << "="
        << fmt(eval::metric_value(run, metric)) << "\n";
    return run;
  };
  report.sweep = eval::sweep_k(trainer, dev_run, ks, metric);

  auto out = open_out(out_dir / "sweep.tsv");
  out << "# selected_k=" << report.sweep.selected_k << "\tbaseline=" << exact(report.baseline)
      << "\tmetric=" << eval::to_string(metric) << "\tmodel=" << to_string(config.model) << "\n";
  out << "k\tmetric\timprovement_pct\n";
  for (const auto& row : report.sweep.rows) {
    const double improvement = report.baseline > 0.0 ? 100.0 * (row.metric - report.baseline) / report.baseline : 0.0;
    out << row.k << '\t' << exact(row.metric) << '\t' << exact(improvement) << '\n';
  }
  log << "selected_k " << report.sweep.selected_k << "\n";
  return report;
}

void cmd_generate_synthetic(const ExperimentConfig& config, const fs::path& out_dir, std::ostream& log) {
  config.synthetic.validate();
  ensure_dir(out_dir);
  struct Split {
    const char* name;
    std::size_t count;
    std::uint64_t stream;
  };
  for (const Split& split : {Split{"train", config.synthetic_train, kSynthTrain},
                             Split{"dev", config.synthetic_dev, kSynthDev},
                             Split{"test", config.synthetic_test, kSynthTest}}) {
    data::SyntheticConfig sc = config.synthetic;
    sc.n_questions = split.count;
    sc.id_prefix = std::string(split.name) + "-";
    const auto records = data::generate_synthetic(derive_seed(config.seed, split.stream), sc);
    data::save_as2_tsv(out_dir / (std::string(split.name) + ".tsv"), records);
    log << split.name << " " << records.size() << " questions\n";
  }
  data::SyntheticConfig sc = config.synthetic;
  sc.n_questions = config.synthetic_fever;
  const auto fever = data::generate_synthetic_fever(derive_seed(config.seed, kSynthFever), sc);
  auto out = open_out(out_dir / "fever.jsonl");
  data::write_fever_jsonl(out, fever);
  log << "fever " << fever.size() << " pairs\n";
}

}  // namespace asrk::cli
