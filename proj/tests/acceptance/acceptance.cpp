// One PASS/FAIL line per acceptance criterion.
//   acceptance                 run everything
//   acceptance --only=a,b      run the named criteria
//   acceptance --list          print criterion names

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "../support/gradcheck.hpp"
#include "../support/metric_oracle.hpp"
#include "asrk/cli/checkpoint.hpp"
#include "asrk/cli/commands.hpp"
#include "asrk/data/synthetic.hpp"
#include "asrk/errors.hpp"
#include "asrk/random.hpp"
#include "asrk/rerankers/asc_labels.hpp"
#include "asrk/rerankers/scoring.hpp"
#include "asrk/rerankers/training.hpp"
#include "asrk/tensor/ops.hpp"

namespace fs = std::filesystem;
using namespace asrk;
using tensor::Tensor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("asrk_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::shared_ptr<const encoder::Vocabulary> vocab_for(const std::vector<data::QuestionRecord>& qs) {
  return std::make_shared<const encoder::Vocabulary>(cli::experiment_vocab(qs, {}, 1000));
}

rerankers::ModelConfig small_model(rerankers::ModelKind kind, std::size_t vocab_size, std::size_t hidden,
                                   std::size_t k, double head_std, std::uint64_t seed) {
  rerankers::ModelConfig c;
  c.kind = kind;
  c.k = k;
  c.seed = seed;
  c.head_init_std = head_std;
  c.encoder.layers = 1;
  c.encoder.heads = 2;
  c.encoder.hidden = hidden;
  c.encoder.ffn = 2 * hidden;
  c.encoder.vocab_size = vocab_size;
  c.encoder.max_length = 64;
  return c;
}

double train_p_at_1(const rerankers::RerankerModel& model, const std::vector<data::QuestionRecord>& qs) {
  return eval::p_at_1(eval::make_run(qs, rerankers::score_questions(model, qs)));
}

// ---------------------------------------------------------------- gradients

Outcome gradients() {
  Stopwatch clock;
  using namespace tensor;
  Rng rng(2024);
  auto r = [&](Shape s) {
    std::vector<double> v(element_count(s));
    for (double& x : v) x = rng.normal();
    return Tensor::from(std::move(s), std::move(v), true);
  };
  const std::vector<int> ids{3, 0, 3, 1};
  const std::vector<int> labels{1, 0, 2};
  struct OpCase {
    const char* name;
    std::function<Tensor(const std::vector<Tensor>&)> op;
    std::vector<Tensor> inputs;
  };
  std::vector<OpCase> ops = {
      {"matmul", [](const auto& in) { return matmul(in[0], in[1]); }, {r({3, 4}), r({4, 5})}},
      {"add", [](const auto& in) { return add(in[0], in[1]); }, {r({4, 5}), r({4, 5})}},
      {"add_row", [](const auto& in) { return add_row(in[0], in[1]); }, {r({5, 4}), r({4})}},
      {"mul", [](const auto& in) { return mul(in[0], in[1]); }, {r({4, 5}), r({4, 5})}},
      {"scale", [](const auto& in) { return scale(in[0], -1.7); }, {r({20})}},
      {"tanh", [](const auto& in) { return tanh(in[0]); }, {r({4, 5})}},
      {"gelu", [](const auto& in) { return gelu(in[0]); }, {r({4, 5})}},
      {"softmax_rows", [](const auto& in) { return softmax(in[0], 1); }, {r({4, 5})}},
      {"softmax_cols", [](const auto& in) { return softmax(in[0], 0); }, {r({4, 5})}},
      {"cross_entropy", [&](const auto& in) { return cross_entropy(in[0], labels); }, {r({3, 7})}},
      {"max_pool_rows", [](const auto& in) { return max_pool_rows(in[0]); }, {r({4, 5})}},
      {"layer_norm", [](const auto& in) { return layer_norm(in[0], in[1], in[2]); }, {r({3, 6}), r({6}), r({6})}},
      {"embedding", [&](const auto& in) { return embedding_lookup(in[0], ids); }, {r({5, 4})}},
      {"concat", [](const auto& in) { return concat(in, 0); }, {r({10}), r({12})}},
      {"concat_cols", [](const auto& in) { return concat(in, 1); }, {r({4, 2}), r({4, 3})}},
      {"stack_rows", [](const auto& in) { return stack_rows(in); }, {r({7}), r({7}), r({7})}},
      {"dropout", [](const auto& in) { return dropout(in[0], 0.3, 42, true); }, {r({5, 5})}},
      {"transpose", [](const auto& in) { return transpose(in[0]); }, {r({4, 6})}},
      {"slice_cols", [](const auto& in) { return slice_cols(in[0], 1, 4); }, {r({5, 5})}},
      {"row", [](const auto& in) { return row(in[0], 1); }, {r({3, 7})}},
      {"reshape", [](const auto& in) { return reshape(in[0], {4, 6}); }, {r({6, 4})}},
      {"mean", [](const auto& in) { return mean(in[0]); }, {r({4, 5})}},
  };
  double worst = 0.0;
  std::string worst_name;
  std::size_t failures = 0;
  for (auto& c : ops) {
    ParameterSet params;
    for (std::size_t i = 0; i < c.inputs.size(); ++i) params.add("x" + std::to_string(i), c.inputs[i]);
    const Tensor probe = c.op(c.inputs);
    std::vector<double> w(probe.size());
    for (double& x : w) x = rng.normal();
    const Tensor weights = Tensor::from(probe.shape(), w);
    auto loss = [&] { return sum(mul(c.op(c.inputs), weights)); };
    const auto res = check::check_gradients(loss, params, 20, rng.next());
    if (res.max_relative_error >= 1e-3 || res.checked < 20) ++failures;
    if (res.max_relative_error >= worst) {
      worst = res.max_relative_error;
      worst_name = std::string(c.name) + " " + res.worst;
    }
  }

  data::SyntheticConfig sc;
  sc.n_questions = 10;
  const auto qs = data::generate_synthetic(31, sc);
  const auto vocab = vocab_for(qs);
  auto model_check = [&](rerankers::ModelKind kind, std::size_t k, const std::function<Tensor(
                                                                         const rerankers::RerankerModel&)>& fn) {
    auto model = rerankers::make_model(small_model(kind, vocab->size(), 8, k, 0.5, 77), vocab);
    auto loss = [&] { return fn(model); };
    const auto res = check::check_gradients(loss, rerankers::base_of(model).params(), 24, 5 + k);
    if (res.max_relative_error >= 1e-3 || res.checked < 20) ++failures;
    if (res.max_relative_error >= worst) {
      worst = res.max_relative_error;
      worst_name = std::string(rerankers::to_string(kind)) + " " + res.worst;
    }
  };
  model_check(rerankers::ModelKind::pointwise, 2, [&](const auto& m) {
    rerankers::Pass pass;
    return rerankers::pointwise_loss(std::get<rerankers::PointwiseModel>(m), qs[0].question, qs[0].candidates[1],
                                     pass)
        .total;
  });
  model_check(rerankers::ModelKind::asr, 2, [&](const auto& m) {
    rerankers::Pass pass;
    return rerankers::asr_loss(std::get<rerankers::AsrModel>(m), qs[1], 1.0, pass).total;
  });
  model_check(rerankers::ModelKind::masr, 2, [&](const auto& m) {
    rerankers::Pass pass;
    return rerankers::masr_loss(std::get<rerankers::MasrModel>(m), qs[2], 1.0, pass)->total;
  });
  const double secs = clock.seconds();
  return {failures == 0 && secs < 120.0,
          fmt("%zu primitives + 3 model losses, max rel err %.3g (%s), %zu failing, %.1fs (limit 120s)", ops.size(),
              worst, worst_name.c_str(), failures, secs)};
}

// ------------------------------------------------------- permutation invariance

Outcome permutation_invariance() {
  Stopwatch clock;
  data::SyntheticConfig sc;
  sc.n_questions = 200;
  sc.n_candidates = 6;
  const auto qs = data::generate_synthetic(41, sc);
  const auto vocab = vocab_for(qs);
  constexpr std::size_t k = 4;
  rerankers::AsrModel model(small_model(rerankers::ModelKind::asr, vocab->size(), 16, k, 0.5, 9), vocab);
  Rng rng(43);
  double worst = 0.0;
  std::size_t checks = 0;
  for (const auto& q : qs) {
    std::vector<std::string> texts;
    for (const auto& c : q.candidates) texts.push_back(c.text);
    const std::size_t t = rng.below(texts.size());
    std::vector<std::string> support;
    for (std::size_t j = 0; j < texts.size(); ++j) {
      if (j != t && support.size() < k) support.push_back(texts[j]);
    }
    const double base = rerankers::asr_forward(model, q.question, texts[t], support).probability;
    for (int p = 0; p < 10; ++p) {
      rng.shuffle(std::span<std::string>(support));
      const double permuted = rerankers::asr_forward(model, q.question, texts[t], support).probability;
      worst = std::max(worst, std::abs(permuted - base));
      ++checks;
    }
  }
  const double secs = clock.seconds();
  return {worst < 1e-9 && secs < 60.0 && checks == 2000,
          fmt("%zu instances x 10 permutations, max |dp| = %.3g (limit 1e-9), %.1fs (limit 60s)", qs.size(), worst,
              secs)};
}

// ----------------------------------------------------------------- metric oracle

Outcome metric_oracle() {
  Rng rng(101);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    eval::RunResult run;
    std::vector<oracle::Question> reference;
    const std::size_t n_q = 1 + rng.below(15);
    for (std::size_t i = 0; i < n_q; ++i) {
      eval::QuestionRun q;
      q.id = "q" + std::to_string(i);
      const std::size_t n = 2 + rng.below(9);
      const bool coarse = rng.bernoulli(0.5);  // many ties
      for (std::size_t j = 0; j < n; ++j) {
        q.scores.push_back(coarse ? static_cast<double>(rng.below(3)) : rng.uniform());
        q.labels.push_back(rng.bernoulli(0.4));
      }
      q.labels[rng.below(n)] = 1;
      reference.push_back({q.scores, q.labels});
      run.questions.push_back(std::move(q));
    }
    mismatches += eval::p_at_1(run) != oracle::mean_over(reference, oracle::precision_at_1);
    mismatches += eval::mean_average_precision(run) != oracle::mean_over(reference, oracle::average_precision);
    mismatches += eval::mean_reciprocal_rank(run) != oracle::mean_over(reference, oracle::reciprocal_rank);
  }
  return {mismatches == 0, fmt("1000 randomized runs x 3 metrics, %zu exact mismatches", mismatches)};
}

// -------------------------------------------------------------- asc truth table

Outcome asc_truth_table() {
  using rerankers::AscScheme;
  struct Row {
    bool t, c;
    AscScheme scheme;
    int label;
  };
  const Row table[] = {
      {true, true, AscScheme::four_way, 0},          {true, false, AscScheme::four_way, 1},
      {false, true, AscScheme::four_way, 2},         {false, false, AscScheme::four_way, 3},
      {true, true, AscScheme::fever_three_way, 0},   {true, false, AscScheme::fever_three_way, 0},
      {false, true, AscScheme::fever_three_way, 1},  {false, false, AscScheme::fever_three_way, 2},
  };
  std::size_t wrong = 0;
  for (const auto& row : table) wrong += rerankers::derive_asc_label(row.t, row.c, row.scheme) != row.label;
  const bool fever_names = data::fever_label_for(0) == data::FeverLabel::supported &&
                           data::fever_label_for(1) == data::FeverLabel::refuted &&
                           data::fever_label_for(2) == data::FeverLabel::not_enough_info;
  return {wrong == 0 && fever_names, fmt("4 four-way + 4 three-way (t,c) cases, %zu wrong; FEVER names %s", wrong,
                                         fever_names ? "aligned" : "misaligned")};
}

// ------------------------------------------------------------------------ overfit

Outcome overfit() {
  data::SyntheticConfig sc;
  sc.n_questions = 20;
  const auto qs = data::generate_synthetic(7, sc);
  const auto vocab = vocab_for(qs);
  const fs::path dir = scratch("overfit");
  bool all = true;
  std::string detail;
  for (auto kind : {rerankers::ModelKind::pointwise, rerankers::ModelKind::asr, rerankers::ModelKind::masr}) {
    Stopwatch clock;
    auto model = rerankers::make_model(small_model(kind, vocab->size(), 32, 3, 0.0, 11), vocab);
    tensor::OptimizerConfig oc;
    oc.learning_rate = 1e-3;
    tensor::Optimizer opt(oc);
    rerankers::TrainOptions options;
    options.epochs = 200;
    options.batch_size = 8;
    options.seed = 11;
    std::size_t reached = 0;
    options.on_epoch = [&](const rerankers::EpochStats& s) {
      if (train_p_at_1(model, qs) == 1.0) {
        reached = s.epoch;
        return false;
      }
      return true;
    };
    rerankers::train_model(model, qs, opt, options);

    // Reload through the checkpoint and evaluate on the training file.
    cli::ExperimentConfig config;
    config.model = kind == rerankers::ModelKind::pointwise ? cli::ExperimentKind::pointwise
                   : kind == rerankers::ModelKind::asr     ? cli::ExperimentKind::asr
                                                           : cli::ExperimentKind::masr;
    config.encoder = rerankers::base_of(model).config().encoder;
    config.k = 3;
    config.seed = 11;
    const std::string name(rerankers::to_string(kind));
    cli::save_checkpoint(dir / (name + ".ckpt"), config, model);
    data::save_as2_tsv(dir / "train.tsv", qs);
    cli::EvaluateOptions eo;
    eo.checkpoint = dir / (name + ".ckpt");
    eo.data = dir / "train.tsv";
    std::ostringstream log;
    const auto report = cli::cmd_evaluate(eo, dir / name, log);
    const double secs = clock.seconds();
    const bool ok = reached > 0 && report.metrics.p_at_1 == 1.0 && secs < 300.0;
    all = all && ok;
    detail += fmt("%s%s reached P@1=1 at epoch %zu, reloaded P@1 %.3f, %.1fs;", detail.empty() ? "" : " ",
                  name.c_str(), reached, report.metrics.p_at_1, secs);
  }
  return {all, detail + " (limits: 200 epochs, 300s each)"};
}

// ---------------------------------------------------------- directional claims

// Settings for the synthetic directional experiments.
cli::ExperimentConfig directional_config(const fs::path& data_dir, std::uint64_t seed) {
  cli::ExperimentConfig c;
  c.seed = seed;
  c.encoder.hidden = 32;
  c.encoder.layers = 2;
  c.encoder.heads = 2;
  c.encoder.ffn = 64;
  c.encoder.max_length = 64;
  c.encoder.vocab_size = 1000;
  c.learning_rate = 1e-3;
  c.pretrain_learning_rate = 1e-3;
  c.epochs = 40;
  c.patience = 10;
  c.synthetic.n_candidates = 4;
  c.synthetic.support_strength = 0.9;
  c.synthetic_train = 300;
  c.synthetic_dev = 100;
  c.synthetic_test = 100;
  c.synthetic_fever = 300;
  std::ostringstream log;
  cli::cmd_generate_synthetic(c, data_dir, log);
  c.train_path = (data_dir / "train.tsv").string();
  c.dev_path = (data_dir / "dev.tsv").string();
  c.test_path = (data_dir / "test.tsv").string();
  c.fever_path = (data_dir / "fever.jsonl").string();
  return c;
}

struct SeedResult {
  double a = 0.0, b = 0.0;
  eval::RunResult run_a, run_b;
};

std::vector<SeedResult> run_pair(const std::string& tag, cli::ExperimentKind a, cli::ExperimentKind b) {
  std::vector<SeedResult> out;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const fs::path dir = scratch(tag + "_" + std::to_string(seed));
    auto config = directional_config(dir, seed);
    SeedResult r;
    for (int side = 0; side < 2; ++side) {
      config.model = side == 0 ? a : b;
      auto trained = cli::train_experiment(config, nullptr);
      auto& run = side == 0 ? r.run_a : r.run_b;
      run = *trained.report.test_run;
      for (auto& q : run.questions) q.id = "s" + std::to_string(seed) + "/" + q.id;
      (side == 0 ? r.a : r.b) = trained.report.test->p_at_1;
      std::fprintf(stderr, "  seed %llu %s test P@1 %.3f (best epoch %zu)\n", static_cast<unsigned long long>(seed),
                   std::string(cli::to_string(config.model)).c_str(), trained.report.test->p_at_1,
                   trained.report.best_epoch);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string seed_table(const std::vector<SeedResult>& rs) {
  std::string s;
  for (const auto& r : rs) s += fmt("%s%.2f/%.2f", s.empty() ? "" : " ", r.a, r.b);
  return s;
}

Outcome asr_beats_pr() {
  Stopwatch clock;
  const auto rs = run_pair("asr_pr", cli::ExperimentKind::asr, cli::ExperimentKind::pointwise);
  std::size_t wins = 0;
  eval::RunResult pooled_a, pooled_b;
  for (const auto& r : rs) {
    wins += r.a > r.b;
    pooled_a.questions.insert(pooled_a.questions.end(), r.run_a.questions.begin(), r.run_a.questions.end());
    pooled_b.questions.insert(pooled_b.questions.end(), r.run_b.questions.begin(), r.run_b.questions.end());
  }
  const auto test = eval::randomization_test(pooled_a, pooled_b, eval::Metric::p_at_1, 100000, 0);
  const double secs = clock.seconds();
  return {wins >= 4 && test.p_value < 0.05 && secs < 1800.0,
          fmt("ASR/PR test P@1 per seed: %s; ASR ahead in %zu/5 (need 4); pooled P@1 %.3f vs %.3f, "
              "randomization p = %.3g over %zu trials (need < 0.05); %.0fs (limit 1800s)",
              seed_table(rs).c_str(), wins, test.metric_a, test.metric_b, test.p_value, test.trials, secs)};
}

Outcome masr_fp_vs_masr_f() {
  Stopwatch clock;
  const auto rs = run_pair("masr_fp", cli::ExperimentKind::masr_fp, cli::ExperimentKind::masr_f);
  std::size_t wins = 0;
  for (const auto& r : rs) wins += r.a >= r.b;
  return {wins >= 3, fmt("MASR-FP/MASR-F test P@1 per seed: %s; MASR-FP >= MASR-F in %zu/5 (need 3); %.0fs",
                         seed_table(rs).c_str(), wins, clock.seconds())};
}

// --------------------------------------------------------------- calibration

Outcome calibration() {
  Rng rng(555);
  std::vector<double> ps;
  for (int rep = 0; rep < 200; ++rep) {
    eval::RunResult a, b;
    for (int i = 0; i < 40; ++i) {
      eval::QuestionRun qa, qb;
      qa.id = qb.id = "q" + std::to_string(i);
      for (int j = 0; j < 12; ++j) {
        const char label = j == 0 || rng.bernoulli(0.3);
        qa.labels.push_back(label);
        qb.labels.push_back(label);
        qa.scores.push_back(rng.uniform());
        qb.scores.push_back(rng.uniform());
      }
      a.questions.push_back(std::move(qa));
      b.questions.push_back(std::move(qb));
    }
    ps.push_back(eval::randomization_test(a, b, eval::Metric::map, 2000, rng.next()).p_value);
  }
  const double d = eval::ks_statistic(ps);
  const double p_ks = eval::ks_uniform_pvalue(ps);

  data::SyntheticConfig sc;
  sc.n_questions = 50;
  const auto qs = data::generate_synthetic(3, sc);
  std::vector<std::vector<double>> scores;
  Rng srng(4);
  for (const auto& q : qs) {
    scores.emplace_back();
    for (std::size_t j = 0; j < q.candidates.size(); ++j) scores.back().push_back(srng.uniform());
  }
  const auto run = eval::make_run(qs, scores);
  bool identical_one = true;
  for (auto metric : {eval::Metric::p_at_1, eval::Metric::map, eval::Metric::mrr}) {
    identical_one = identical_one && eval::randomization_test(run, run, metric, 100000, 1).p_value == 1.0;
  }
  return {p_ks > 0.01 && identical_one,
          fmt("200 null p-values: KS D = %.4f, KS p = %.3f (need > 0.01); identical runs p = 1.0 for all metrics: %s",
              d, p_ks, identical_one ? "yes" : "no")};
}

// --------------------------------------------------------------- determinism

Outcome determinism() {
  const fs::path root = scratch("determinism");
  cli::ExperimentConfig base;
  base.seed = 21;
  base.encoder.hidden = 8;
  base.encoder.layers = 1;
  base.encoder.heads = 2;
  base.encoder.ffn = 16;
  base.encoder.max_length = 48;
  base.encoder.vocab_size = 500;
  base.learning_rate = 1e-2;
  base.pretrain_learning_rate = 1e-2;
  base.epochs = 3;
  base.pretrain_epochs = 2;
  base.batch_size = 4;
  base.synthetic_train = 30;
  base.synthetic_dev = 15;
  base.synthetic_test = 15;
  base.synthetic_fever = 10;

  // Every command twice (the second time with 3 threads where threads apply).
  auto run_all = [&](const fs::path& dir, std::size_t threads) {
    std::ostringstream log;
    auto config = base;
    config.threads = threads;
    cli::cmd_generate_synthetic(config, dir / "data", log);
    config.train_path = (dir / "data" / "train.tsv").string();
    config.dev_path = (dir / "data" / "dev.tsv").string();
    config.test_path = (dir / "data" / "test.tsv").string();
    config.fever_path = (dir / "data" / "fever.jsonl").string();
    for (auto kind : {cli::ExperimentKind::pointwise, cli::ExperimentKind::multiclassifier,
                      cli::ExperimentKind::pairwise, cli::ExperimentKind::asr, cli::ExperimentKind::masr,
                      cli::ExperimentKind::masr_f, cli::ExperimentKind::masr_fp}) {
      config.model = kind;
      cli::cmd_train(config, dir / std::string(cli::to_string(kind)), log);
    }
    config.model = cli::ExperimentKind::masr_fp;
    cli::cmd_pretrain_asc(config, dir / "pretrain", log);
    cli::EvaluateOptions eo;
    eo.checkpoint = dir / "asr" / "model.ckpt";
    eo.data = config.test_path;
    eo.threads = threads;
    cli::cmd_evaluate(eo, dir / "evaluate", log);
    cli::CompareOptions co;
    co.run_a = dir / "asr" / "test_run.tsv";
    co.run_b = dir / "pointwise" / "test_run.tsv";
    co.trials = 20000;
    co.seed = 5;
    co.threads = threads;
    cli::cmd_compare(co, log);
    config.model = cli::ExperimentKind::asr;
    config.epochs = 1;
    const std::vector<std::size_t> ks = {1, 2};
    cli::cmd_sweep_k(config, ks, eval::Metric::map, dir / "sweep", log);
    return log.str();
  };
  const std::string log_a = run_all(root / "a", 1);
  const std::string log_b = run_all(root / "b", 3);
  std::size_t files = 0, differing = 0;
  std::string first_diff;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), root / "a");
    ++files;
    std::string a = slurp(entry.path()), b = slurp(root / "b" / rel);
    if (rel.filename() != "model.ckpt" && rel.filename() != "asc.ckpt") {
      if (a != b) {
        ++differing;
        if (first_diff.empty()) first_diff = rel.string();
      }
      continue;
    }
    // Checkpoints embed the thread count in their config snapshot.
    std::istringstream in_a(a), in_b(b);
    auto ca = cli::read_checkpoint(in_a), cb = cli::read_checkpoint(in_b);
    const bool same = rerankers::base_of(ca.model).params().snapshot() ==
                          rerankers::base_of(cb.model).params().snapshot() &&
                      *ca.vocab == *cb.vocab;
    if (!same) {
      ++differing;
      if (first_diff.empty()) first_diff = rel.string();
    }
  }
  const bool logs_equal = log_a == log_b;
  return {differing == 0 && logs_equal && files > 0,
          fmt("all six commands run twice (1 vs 3 threads): %zu output files, %zu differ%s%s; reported numbers %s",
              files, differing, first_diff.empty() ? "" : " first: ", first_diff.c_str(),
              logs_equal ? "identical" : "DIFFER")};
}

struct Criterion {
  const char* name;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {"gradients", gradients},
    {"permutation_invariance", permutation_invariance},
    {"metric_oracle", metric_oracle},
    {"asc_truth_table", asc_truth_table},
    {"overfit", overfit},
    {"asr_beats_pr", asr_beats_pr},
    {"masr_fp_vs_masr_f", masr_fp_vs_masr_f},
    {"randomization_calibration", calibration},
    {"determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--list") {
      for (const auto& c : kCriteria) std::printf("%s\n", c.name);
      return 0;
    }
    if (arg.rfind("--only=", 0) == 0) {
      std::stringstream ss(arg.substr(7));
      std::string name;
      while (std::getline(ss, name, ',')) only.push_back(name);
    } else {
      std::fprintf(stderr, "usage: acceptance [--list] [--only=name,...]\n");
      return 2;
    }
  }
  for (const auto& name : only) {
    if (std::none_of(std::begin(kCriteria), std::end(kCriteria), [&](const auto& c) { return name == c.name; })) {
      std::fprintf(stderr, "unknown criterion '%s'\n", name.c_str());
      return 2;
    }
  }
  int failed = 0;
  for (const auto& c : kCriteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
