#include "asrk/data/synthetic.hpp"

#include <cmath>

#include "asrk/errors.hpp"
#include "asrk/random.hpp"

namespace asrk::data {
namespace {

std::string tok(const char* stem, std::uint64_t i) { return stem + std::to_string(i); }

void append_fillers(std::string& out, Rng& rng, std::size_t pool, std::size_t max_count) {
  const std::size_t count = rng.below(max_count + 1);
  for (std::size_t i = 0; i < count; ++i) {
    out += ' ';
    out += tok("w", rng.below(pool));
  }
}

std::uint64_t other_than(Rng& rng, std::uint64_t n, std::uint64_t excluded) {
  std::uint64_t x = rng.below(n - 1);
  return x >= excluded ? x + 1 : x;
}

}  // namespace

void SyntheticConfig::validate() const {
  auto fail = [](const char* code, const std::string& message) { throw Error(ErrorKind::config, message, code); };
  if (n_candidates < 2) fail("n_candidates", "synthetic questions need at least 2 candidates");
  if (!(support_strength >= 0.0 && support_strength <= 1.0)) {
    fail("support_strength", "support_strength must lie in [0, 1]");
  }
  if (topics < 1 || relations < 2 || evidence_tokens < 2 || fillers < 1) {
    fail("token_pools", "synthetic token pools too small");
  }
  if (!(answer_hit >= 0.0 && answer_hit <= 1.0) || !(distractor_hit >= 0.0 && distractor_hit <= 1.0)) {
    fail("answer_hit", "answer probabilities must lie in [0, 1]");
  }
}

std::vector<QuestionRecord> generate_synthetic(std::uint64_t seed, const SyntheticConfig& config) {
  config.validate();
  Rng rng(derive_seed(seed, 0x5e7));
  std::vector<QuestionRecord> out;
  out.reserve(config.n_questions);
  for (std::size_t qi = 0; qi < config.n_questions; ++qi) {
    const std::uint64_t topic = rng.below(config.topics);
    const std::uint64_t relation = rng.below(config.relations);
    const std::uint64_t latent = rng.below(config.evidence_tokens);

    QuestionRecord record;
    record.id = config.id_prefix + std::to_string(qi);
    record.question = "what " + tok("rel", relation) + " of " + tok("tp", topic) + " ?";
    append_fillers(record.question, rng, config.fillers, config.max_fillers);

    const std::size_t n = config.n_candidates;
    const std::size_t n_correct = n == 2 ? 1 : 2 + rng.below(n - 2);
    std::vector<char> correct(n, 0);
    for (std::size_t i = 0; i < n_correct; ++i) correct[i] = 1;
    rng.shuffle(std::span<char>(correct));

    for (std::size_t ci = 0; ci < n; ++ci) {
      const bool is_correct = correct[ci] != 0;
      std::string text = tok("tp", topic);
      append_fillers(text, rng, config.fillers, config.max_fillers);
      const double hit = is_correct ? config.answer_hit : config.distractor_hit;
      const std::uint64_t answer = rng.bernoulli(hit) ? relation : other_than(rng, config.relations, relation);
      text += ' ' + tok("ans", answer);
      append_fillers(text, rng, config.fillers, config.max_fillers);
      std::uint64_t evidence = rng.below(config.evidence_tokens);
      if (is_correct && rng.bernoulli(config.support_strength)) evidence = latent;
      text += ' ' + tok("ev", evidence);
      record.candidates.push_back({std::move(text), is_correct, static_cast<int>(ci)});
    }
    out.push_back(std::move(record));
  }
  return out;
}

std::vector<QuestionRecord> generate_synthetic(std::uint64_t seed, std::size_t n_questions,
                                               std::size_t n_candidates, double support_strength) {
  SyntheticConfig config;
  config.n_questions = n_questions;
  config.n_candidates = n_candidates;
  config.support_strength = support_strength;
  return generate_synthetic(seed, config);
}

FeverLabel fever_label_for(int three_way_class) {
  switch (three_way_class) {
    case 0: return FeverLabel::supported;
    case 1: return FeverLabel::refuted;
    case 2: return FeverLabel::not_enough_info;
    default: throw Error(ErrorKind::label, "no FEVER label for class " + std::to_string(three_way_class));
  }
}

std::vector<FeverRecord> generate_synthetic_fever(std::uint64_t seed, const SyntheticConfig& config) {
  SyntheticConfig base = config;
  base.id_prefix = "fever";
  const auto questions = generate_synthetic(derive_seed(seed, 0xfe7e), base);
  std::vector<FeverRecord> out;
  for (const auto& q : questions) {
    for (std::size_t t = 0; t < q.candidates.size(); ++t) {
      for (std::size_t c = 0; c < q.candidates.size(); ++c) {
        if (t == c) continue;
        const int cls = rerankers::derive_asc_label(q.candidates[t].correct, q.candidates[c].correct,
                                                    rerankers::AscScheme::fever_three_way);
        out.push_back({q.candidates[t].text, q.candidates[c].text, fever_label_for(cls)});
      }
    }
  }
  return out;
}

}  // namespace asrk::data
