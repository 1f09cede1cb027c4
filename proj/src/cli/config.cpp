#include "asrk/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "asrk/errors.hpp"

namespace asrk::cli {

namespace {

[[noreturn]] void fail(const std::string& code, const std::string& message) {
  throw Error(ErrorKind::config, code + ": " + message, code);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size()) {
    fail("bad_value", std::string(key) + " expects a non-negative integer, got '" + std::string(value) + "'");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  const std::string text(value);
  char* end = nullptr;
  const double out = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || !std::isfinite(out)) {
    fail("bad_value", std::string(key) + " expects a number, got '" + text + "'");
  }
  return out;
}


struct Field {
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;  // empty string = unset
};

Field size_field(std::size_t ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, std::string_view v) { c.*member = parse_u64("value", v); },
          [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
}

Field double_field(double ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, std::string_view v) { c.*member = parse_double("value", v); },
          [member](const ExperimentConfig& c) { return format_double(c.*member); }};
}

Field string_field(std::string ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, std::string_view v) { c.*member = std::string(v); },
          [member](const ExperimentConfig& c) { return c.*member; }};
}

template <class T>
Field encoder_field(T encoder::EncoderConfig::*member) {
  return {[member](ExperimentConfig& c, std::string_view v) {
            if constexpr (std::is_same_v<T, double>) {
              c.encoder.*member = parse_double("value", v);
            } else {
              c.encoder.*member = parse_u64("value", v);
            }
          },
          [member](const ExperimentConfig& c) {
            if constexpr (std::is_same_v<T, double>) {
              return format_double(c.encoder.*member);
            } else {
              return std::to_string(c.encoder.*member);
            }
          }};
}

template <class T>
Field synthetic_field(T data::SyntheticConfig::*member) {
  return {[member](ExperimentConfig& c, std::string_view v) {
            if constexpr (std::is_same_v<T, double>) {
              c.synthetic.*member = parse_double("value", v);
            } else {
              c.synthetic.*member = parse_u64("value", v);
            }
          },
          [member](const ExperimentConfig& c) {
            if constexpr (std::is_same_v<T, double>) {
              return format_double(c.synthetic.*member);
            } else {
              return std::to_string(c.synthetic.*member);
            }
          }};
}

// Key order here is the serialization order.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"model",
       {[](ExperimentConfig& c, std::string_view v) { c.model = parse_experiment_kind(v); },
        [](const ExperimentConfig& c) { return std::string(to_string(c.model)); }}},
      {"k",
       {[](ExperimentConfig& c, std::string_view v) { c.k = parse_u64("k", v); },
        [](const ExperimentConfig& c) { return c.k ? std::to_string(*c.k) : std::string(); }}},
      {"asc_scheme",
       {[](ExperimentConfig& c, std::string_view v) {
          try {
            c.asc_scheme = rerankers::parse_asc_scheme(v);
          } catch (const Error&) {
            fail("bad_value", "asc_scheme expects four_way or fever_three_way, got '" + std::string(v) + "'");
          }
        },
        [](const ExperimentConfig& c) {
          return c.asc_scheme ? std::string(rerankers::to_string(*c.asc_scheme)) : std::string();
        }}},
      {"asc_weight", double_field(&ExperimentConfig::asc_weight)},
      {"head_init_std", double_field(&ExperimentConfig::head_init_std)},
      {"layers", encoder_field(&encoder::EncoderConfig::layers)},
      {"heads", encoder_field(&encoder::EncoderConfig::heads)},
      {"hidden", encoder_field(&encoder::EncoderConfig::hidden)},
      {"ffn", encoder_field(&encoder::EncoderConfig::ffn)},
      {"vocab_size", encoder_field(&encoder::EncoderConfig::vocab_size)},
      {"max_length", encoder_field(&encoder::EncoderConfig::max_length)},
      {"dropout", encoder_field(&encoder::EncoderConfig::dropout)},
      {"optimizer",
       {[](ExperimentConfig& c, std::string_view v) {
          if (v == "adam") {
            c.optimizer = tensor::OptimizerKind::adam;
          } else if (v == "sgd") {
            c.optimizer = tensor::OptimizerKind::sgd;
          } else {
            fail("bad_value", "optimizer expects adam or sgd, got '" + std::string(v) + "'");
          }
        },
        [](const ExperimentConfig& c) {
          return std::string(c.optimizer == tensor::OptimizerKind::adam ? "adam" : "sgd");
        }}},
      {"learning_rate",
       {[](ExperimentConfig& c, std::string_view v) { c.learning_rate = parse_double("learning_rate", v); },
        [](const ExperimentConfig& c) { return c.learning_rate ? format_double(*c.learning_rate) : std::string(); }}},
      {"epochs", size_field(&ExperimentConfig::epochs)},
      {"batch_size", size_field(&ExperimentConfig::batch_size)},
      {"patience", size_field(&ExperimentConfig::patience)},
      {"seed",
       {[](ExperimentConfig& c, std::string_view v) { c.seed = parse_u64("seed", v); },
        [](const ExperimentConfig& c) { return std::to_string(c.seed); }}},
      {"threads", size_field(&ExperimentConfig::threads)},
      {"train_path", string_field(&ExperimentConfig::train_path)},
      {"dev_path", string_field(&ExperimentConfig::dev_path)},
      {"test_path", string_field(&ExperimentConfig::test_path)},
      {"fever_path", string_field(&ExperimentConfig::fever_path)},
      {"init_checkpoint", string_field(&ExperimentConfig::init_checkpoint)},
      {"pretrain_epochs", size_field(&ExperimentConfig::pretrain_epochs)},
      {"pretrain_learning_rate",
       {[](ExperimentConfig& c, std::string_view v) {
          c.pretrain_learning_rate = parse_double("pretrain_learning_rate", v);
        },
        [](const ExperimentConfig& c) {
          return c.pretrain_learning_rate ? format_double(*c.pretrain_learning_rate) : std::string();
        }}},
      {"pretrain_holdout", double_field(&ExperimentConfig::pretrain_holdout)},
      {"synthetic_train", size_field(&ExperimentConfig::synthetic_train)},
      {"synthetic_dev", size_field(&ExperimentConfig::synthetic_dev)},
      {"synthetic_test", size_field(&ExperimentConfig::synthetic_test)},
      {"synthetic_fever", size_field(&ExperimentConfig::synthetic_fever)},
      {"synthetic_candidates", synthetic_field(&data::SyntheticConfig::n_candidates)},
      {"support_strength", synthetic_field(&data::SyntheticConfig::support_strength)},
      {"synthetic_topics", synthetic_field(&data::SyntheticConfig::topics)},
      {"synthetic_relations", synthetic_field(&data::SyntheticConfig::relations)},
      {"synthetic_evidence_tokens", synthetic_field(&data::SyntheticConfig::evidence_tokens)},
      {"synthetic_fillers", synthetic_field(&data::SyntheticConfig::fillers)},
      {"synthetic_max_fillers", synthetic_field(&data::SyntheticConfig::max_fillers)},
      {"synthetic_answer_hit", synthetic_field(&data::SyntheticConfig::answer_hit)},
      {"synthetic_distractor_hit", synthetic_field(&data::SyntheticConfig::distractor_hit)},
  };
  return table;
}

const Field* find_field(std::string_view key) {
  for (const auto& [name, field] : fields()) {
    if (name == key) return &field;
  }
  return nullptr;
}

bool is_masr(ExperimentKind kind) {
  return kind == ExperimentKind::masr || kind == ExperimentKind::masr_f || kind == ExperimentKind::masr_fp;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::pointwise: return "pointwise";
    case ExperimentKind::multiclassifier: return "multiclassifier";
    case ExperimentKind::pairwise: return "pairwise";
    case ExperimentKind::asr: return "asr";
    case ExperimentKind::masr: return "masr";
    case ExperimentKind::masr_f: return "masr_f";
    case ExperimentKind::masr_fp: return "masr_fp";
  }
  return "pointwise";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
  for (auto kind : {ExperimentKind::pointwise, ExperimentKind::multiclassifier, ExperimentKind::pairwise,
                    ExperimentKind::asr, ExperimentKind::masr, ExperimentKind::masr_f, ExperimentKind::masr_fp}) {
    if (text == to_string(kind)) return kind;
  }
  fail("model", "unknown model '" + std::string(text) +
                    "' (expected pointwise, multiclassifier, pairwise, asr, masr, masr_f or masr_fp)");
}

std::size_t ExperimentConfig::resolved_k() const {
  if (k) return *k;
  return model == ExperimentKind::multiclassifier ? 5 : 3;
}

rerankers::AscScheme ExperimentConfig::resolved_scheme() const {
  if (model == ExperimentKind::masr_f || model == ExperimentKind::masr_fp) return rerankers::AscScheme::fever_three_way;
  return asc_scheme.value_or(rerankers::AscScheme::four_way);
}

double ExperimentConfig::resolved_learning_rate() const {
  if (learning_rate) return *learning_rate;
  return model == ExperimentKind::pointwise ? 1e-6 : 2e-6;
}

double ExperimentConfig::resolved_pretrain_learning_rate() const {
  return pretrain_learning_rate.value_or(resolved_learning_rate());
}

rerankers::ModelConfig ExperimentConfig::model_config() const {
  rerankers::ModelConfig c;
  switch (model) {
    case ExperimentKind::pointwise: c.kind = rerankers::ModelKind::pointwise; break;
    case ExperimentKind::multiclassifier: c.kind = rerankers::ModelKind::multiclassifier; break;
    case ExperimentKind::pairwise: c.kind = rerankers::ModelKind::pairwise; break;
    case ExperimentKind::asr: c.kind = rerankers::ModelKind::asr; break;
    default: c.kind = rerankers::ModelKind::masr; break;
  }
  c.encoder = encoder;
  c.k = resolved_k();
  c.scheme = resolved_scheme();
  c.seed = seed;
  c.head_init_std = head_init_std;
  return c;
}

tensor::OptimizerConfig ExperimentConfig::optimizer_config() const {
  tensor::OptimizerConfig c;
  c.kind = optimizer;
  c.learning_rate = resolved_learning_rate();
  return c;
}

tensor::OptimizerConfig ExperimentConfig::pretrain_optimizer_config() const {
  tensor::OptimizerConfig c = optimizer_config();
  c.learning_rate = resolved_pretrain_learning_rate();
  return c;
}

void ExperimentConfig::validate() const {
  encoder.validate();
  if ((model == ExperimentKind::masr_f || model == ExperimentKind::masr_fp) && asc_scheme &&
      *asc_scheme != rerankers::AscScheme::fever_three_way) {
    fail("asc_scheme_forced", std::string(to_string(model)) + " always uses fever_three_way");
  }
  if (model == ExperimentKind::masr_fp && fever_path.empty() && init_checkpoint.empty()) {
    fail("fever_path", "masr_fp needs fever_path or a pretrained init_checkpoint");
  }
  const bool needs_support = model == ExperimentKind::pairwise || model == ExperimentKind::asr || is_masr(model);
  if (needs_support && resolved_k() == 0) fail("k", "k must be at least 1 for " + std::string(to_string(model)));
  if (batch_size == 0) fail("batch_size", "batch_size must be positive");
  if (!(resolved_learning_rate() > 0.0)) fail("learning_rate", "learning_rate must be positive");
  if (!(resolved_pretrain_learning_rate() > 0.0)) fail("pretrain_learning_rate", "must be positive");
  if (asc_weight < 0.0) fail("asc_weight", "asc_weight must be >= 0");
  if (head_init_std < 0.0) fail("head_init_std", "head_init_std must be >= 0");
  if (threads == 0) fail("threads", "threads must be positive");
  if (!(pretrain_holdout >= 0.0 && pretrain_holdout < 1.0)) fail("pretrain_holdout", "must lie in [0, 1)");
  synthetic.validate();
}

std::string ExperimentConfig::serialize() const {
  std::string out;
  for (const auto& [name, field] : fields()) {
    const std::string value = field.get(*this);
    if (value.empty()) continue;
    out += name + " = " + value + "\n";
  }
  return out;
}

void set_option(ExperimentConfig& config, std::string_view key, std::string_view value) {
  const Field* field = find_field(key);
  if (!field) fail("unknown_key", "unknown configuration key '" + std::string(key) + "'");
  try {
    field->set(config, value);
  } catch (const Error& e) {
    if (e.code() == "bad_value") {
      fail("bad_value", std::string(key) + " = '" + std::string(value) + "' is not valid");
    }
    throw;
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      fail("bad_value", "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (auto [it, inserted] = seen.emplace(key, line_no); !inserted) {
      fail("duplicate_key", "line " + std::to_string(line_no) + ": '" + key + "' already set on line " +
                                std::to_string(it->second));
    }
    try {
      set_option(config, key, value);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::config) {
        throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": " + e.what(), e.code());
      }
      throw;
    }
  }
  config.validate();
  return config;
}

ExperimentConfig parse_config_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_config(in);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path + "'");
  return parse_config(in);
}

}  // namespace asrk::cli
