#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "asrk/cli/commands.hpp"
#include "asrk/errors.hpp"

namespace {

using namespace asrk;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::parse:
    case ErrorKind::value:
    case ErrorKind::input:
    case ErrorKind::io:
    case ErrorKind::vocabulary:
    case ErrorKind::label:
    case ErrorKind::empty_pool: return 3;
    case ErrorKind::incompatibility:
    case ErrorKind::alignment: return 4;
    default: return 1;
  }
}

struct ConfigFlags {
  std::string path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", path, "experiment config file (key = value)");
    cmd->add_option("--set", overrides, "override one key, as key=value")->take_all();
    cmd->add_option("--seed", seed, "random seed");
  }

  cli::ExperimentConfig resolve() const {
    cli::ExperimentConfig config = path.empty() ? cli::ExperimentConfig{} : cli::load_config(path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorKind::config, "--set expects key=value, got '" + kv + "'", "bad_value");
      }
      cli::set_option(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) config.seed = *seed;
    config.validate();
    return config;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Answer-support rerankers for answer sentence selection"};
  app.require_subcommand(1);

  std::string out_dir = "out";
  std::string metric_name = "p1";
  std::size_t trials = 100000;
  std::size_t threads = 1;

  ConfigFlags train_flags;
  auto* train = app.add_subcommand("train", "train a reranker; writes model.ckpt, vocab.txt, metrics.tsv");
  train_flags.attach(train);
  train->add_option("--out", out_dir, "output directory");

  ConfigFlags pretrain_flags;
  auto* pretrain = app.add_subcommand("pretrain-asc", "fit the answer support classifier on FEVER pairs");
  pretrain_flags.attach(pretrain);
  pretrain->add_option("--out", out_dir, "output directory");

  cli::EvaluateOptions eval_options;
  std::string eval_vocab, eval_filter = "eval";
  auto* evaluate = app.add_subcommand("evaluate", "score a dataset with a checkpoint; writes run.tsv");
  evaluate->add_option("--checkpoint", eval_options.checkpoint, "checkpoint file")->required();
  evaluate->add_option("--data", eval_options.data, "AS2 TSV file")->required();
  evaluate->add_option("--vocab", eval_vocab, "vocabulary file that must match the checkpoint");
  evaluate->add_option("--filter", eval_filter, "question filter: eval, train or none");
  evaluate->add_option("--threads", threads, "scoring threads");
  evaluate->add_option("--out", out_dir, "output directory");

  cli::CompareOptions compare_options;
  std::uint64_t compare_seed = 0;
  auto* compare = app.add_subcommand("compare", "paired randomization test between two run files");
  compare->add_option("run_a", compare_options.run_a, "first run file")->required();
  compare->add_option("run_b", compare_options.run_b, "second run file")->required();
  compare->add_option("--metric", metric_name, "p1, map or mrr");
  compare->add_option("--trials", trials, "randomization trials");
  compare->add_option("--seed", compare_seed, "random seed");
  compare->add_option("--threads", threads, "worker threads");

  ConfigFlags sweep_flags;
  std::vector<std::size_t> ks = {1, 2, 3, 4, 5};
  std::string sweep_metric = "map";
  auto* sweep = app.add_subcommand("sweep-k", "train once per k and compare against the pointwise baseline");
  sweep_flags.attach(sweep);
  sweep->add_option("--ks", ks, "support sizes")->delimiter(',');
  sweep->add_option("--metric", sweep_metric, "p1, map or mrr");
  sweep->add_option("--out", out_dir, "output directory");

  ConfigFlags synth_flags;
  auto* synth = app.add_subcommand("generate-synthetic", "write a synthetic AS2 corpus and FEVER pairs");
  synth_flags.attach(synth);
  synth->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train) {
      cli::cmd_train(train_flags.resolve(), out_dir, std::cout);
    } else if (*pretrain) {
      cli::cmd_pretrain_asc(pretrain_flags.resolve(), out_dir, std::cout);
    } else if (*evaluate) {
      if (!eval_vocab.empty()) eval_options.vocab = eval_vocab;
      eval_options.filter = data::parse_split_filter(eval_filter);
      eval_options.threads = threads;
      cli::cmd_evaluate(eval_options, out_dir, std::cout);
    } else if (*compare) {
      compare_options.metric = eval::parse_metric(metric_name);
      compare_options.trials = trials;
      compare_options.seed = compare_seed;
      compare_options.threads = threads;
      cli::cmd_compare(compare_options, std::cout);
    } else if (*sweep) {
      cli::cmd_sweep_k(sweep_flags.resolve(), ks, eval::parse_metric(sweep_metric), out_dir, std::cout);
    } else if (*synth) {
      cli::cmd_generate_synthetic(synth_flags.resolve(), out_dir, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
