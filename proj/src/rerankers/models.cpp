#include "asrk/rerankers/models.hpp"

#include "asrk/errors.hpp"
#include "asrk/random.hpp"
#include "asrk/tensor/ops.hpp"

namespace asrk::rerankers {

using tensor::Tensor;

namespace {

enum Stream : std::uint64_t {
  kPrEncoder = 1,
  kAscEncoder = 2,
  kAscHead = 3,
  kMainHead = 4,
  kListHead = 5,
};

encoder::Encoder make_encoder(const ModelConfig& config, tensor::ParameterSet& params, const std::string& prefix,
                              std::uint64_t stream) {
  Rng rng(derive_seed(config.seed, stream));
  return encoder::Encoder(config.encoder, params, prefix, rng);
}

Tensor init_head(const ModelConfig& config, tensor::ParameterSet& params, const std::string& name,
                 tensor::Shape shape, std::uint64_t stream) {
  Tensor t = Tensor::zeros(std::move(shape));
  if (config.head_init_std > 0.0) {
    Rng rng(derive_seed(config.seed, stream));
    for (double& x : t.mutable_data()) x = rng.normal(0.0, config.head_init_std);
  }
  return params.add(name, t);
}

Tensor linear(const Tensor& w, const Tensor& x) {
  return tensor::reshape(tensor::matmul(w, tensor::reshape(x, {x.size(), 1})), {w.dim(0)});
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::pointwise: return "pointwise";
    case ModelKind::multiclassifier: return "multiclassifier";
    case ModelKind::pairwise: return "pairwise";
    case ModelKind::asr: return "asr";
    case ModelKind::masr: return "masr";
  }
  return "pointwise";
}

ModelKind parse_model_kind(std::string_view text) {
  for (auto kind : {ModelKind::pointwise, ModelKind::multiclassifier, ModelKind::pairwise, ModelKind::asr,
                    ModelKind::masr}) {
    if (text == to_string(kind)) return kind;
  }
  throw Error(ErrorKind::config, "unknown model kind '" + std::string(text) + "'", "model");
}

void ModelConfig::validate() const {
  encoder.validate();
  const bool needs_support = kind == ModelKind::pairwise || kind == ModelKind::asr || kind == ModelKind::masr;
  if (needs_support && k == 0) throw Error(ErrorKind::config, "k must be at least 1", "k");
  if (!(head_init_std >= 0.0)) throw Error(ErrorKind::config, "head_init_std must be >= 0", "head_init_std");
}

encoder::EncodeOptions Pass::next() {
  return {training_, derive_seed(seed_, calls_++)};
}

ModelBase::ModelBase(ModelConfig config, std::shared_ptr<const encoder::Vocabulary> vocab)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
  config_.validate();
  if (!vocab_) throw Error(ErrorKind::config, "model needs a vocabulary", "vocab");
  if (vocab_->size() > config_.encoder.vocab_size) {
    throw Error(ErrorKind::config,
                "vocabulary of " + std::to_string(vocab_->size()) + " tokens exceeds vocab_size " +
                    std::to_string(config_.encoder.vocab_size),
                "vocab_size");
  }
}

encoder::EncodedPair ModelBase::pair(std::string_view a, std::string_view b) const {
  return encoder::encode_pair_text(a, b, *vocab_, config_.encoder);
}

Tensor ModelBase::head_weight(const std::string& name, tensor::Shape shape, std::uint64_t stream) {
  return init_head(config_, params_, name, std::move(shape), stream);
}

Tensor ModelBase::head_bias(const std::string& name, std::size_t n) {
  return params_.add(name, Tensor::zeros({n}));
}

PointwiseModel::PointwiseModel(ModelConfig config, std::shared_ptr<const encoder::Vocabulary> vocab)
    : ModelBase(std::move(config), std::move(vocab)),
      encoder_(make_encoder(config_, params_, "pr.", kPrEncoder)),
      w_(head_weight("head.w", {2, config_.encoder.hidden}, kMainHead)),
      b_(head_bias("head.b", 2)) {}

Tensor PointwiseModel::logits(std::string_view question, std::string_view candidate, Pass& pass) const {
  const Tensor e = encoder_.encode(pair(question, candidate), pass.next());
  return tensor::add(linear(w_, tensor::tanh(e)), b_);
}

MultiClassifierModel::MultiClassifierModel(ModelConfig config, std::shared_ptr<const encoder::Vocabulary> vocab)
    : ModelBase(std::move(config), std::move(vocab)),
      encoder_(make_encoder(config_, params_, "pr.", kPrEncoder)),
      w_(head_weight("head.w", {config_.k + 1, config_.encoder.hidden}, kMainHead)) {}

Tensor MultiClassifierModel::logits(std::string_view question, std::span<const std::string> candidates,
                                    Pass& pass) const {
  if (candidates.size() != config_.k + 1) {
    throw Error(ErrorKind::config, "multi-classifier expects " + std::to_string(config_.k + 1) +
                                       " candidates, got " + std::to_string(candidates.size()));
  }
  const Tensor e = encoder_.encode(encoder::encode_texts(question, candidates, *vocab_, config_.encoder),
                                   pass.next());
  return linear(w_, e);
}

PairwiseModel::PairwiseModel(ModelConfig config, std::shared_ptr<const encoder::Vocabulary> vocab)
    : ModelBase(std::move(config), std::move(vocab)),
      encoder_(make_encoder(config_, params_, "pr.", kPrEncoder)),
      w_(head_weight("head.w", {2, (config_.k + 1) * config_.encoder.hidden}, kMainHead)),
      b_(head_bias("head.b", 2)) {}

Tensor PairwiseModel::logits(std::string_view question, std::string_view target,
                             std::span<const std::string> others, Pass& pass) const {
  if (others.size() != config_.k) {
    throw Error(ErrorKind::config, "pairwise model built for k=" + std::to_string(config_.k) + " got " +
                                       std::to_string(others.size()) + " other candidates",
                "k");
  }
  std::vector<Tensor> parts;
  parts.push_back(encoder_.encode(pair(question, target), pass.next()));
  for (const auto& o : others) parts.push_back(encoder_.encode(pair(question, o), pass.next()));
  return tensor::add(linear(w_, tensor::concat(parts, 0)), b_);
}

AsrCore::AsrCore(const ModelConfig& config, const encoder::Vocabulary& vocab, tensor::ParameterSet& params)
    : vocab_(&vocab),
      k_(config.k),
      pr_(make_encoder(config, params, "pr.", kPrEncoder)),
      asc_(make_encoder(config, params, "asc.", kAscEncoder)),
      asc_w_(init_head(config, params, "asc.head.w", {num_classes(config.scheme), config.encoder.hidden},
                       kAscHead)),
      asc_b_(params.add("asc.head.b", Tensor::zeros({num_classes(config.scheme)}))) {}

SupportRepresentation AsrCore::represent(std::string_view question, std::string_view target,
                                         std::span<const std::string> support, Pass& pass) const {
  if (support.size() != k_) {
    throw Error(ErrorKind::config, "support set must hold k=" + std::to_string(k_) + " texts, got " +
                                       std::to_string(support.size()),
                "k");
  }
  SupportRepresentation out;
  const Tensor e_t = pr_.encode(encoder::encode_pair_text(question, target, *vocab_, pr_.config()), pass.next());
  for (const auto& c : support) out.pair_embeddings.push_back(asc_embedding(target, c, pass));
  const Tensor pooled = tensor::max_pool_rows(tensor::stack_rows(out.pair_embeddings));
  const Tensor parts[] = {e_t, pooled};
  out.v = tensor::concat(parts, 0);
  return out;
}

Tensor AsrCore::asc_embedding(std::string_view target, std::string_view candidate, Pass& pass) const {
  return asc_.encode(encoder::encode_pair_text(target, candidate, *vocab_, asc_.config()), pass.next());
}

Tensor AsrCore::asc_logits(const Tensor& pair_embedding) const {
  return tensor::add(linear(asc_w_, tensor::tanh(pair_embedding)), asc_b_);
}

AsrModel::AsrModel(ModelConfig config, std::shared_ptr<const encoder::Vocabulary> vocab)
    : ModelBase(std::move(config), std::move(vocab)),
      core_(config_, *vocab_, params_),
      w_(head_weight("joint.w", {2, 2 * config_.encoder.hidden}, kMainHead)),
      b_(head_bias("joint.b", 2)) {}

SupportRepresentation AsrModel::represent(std::string_view question, std::string_view target,
                                          std::span<const std::string> support, Pass& pass) const {
  return core_.represent(question, target, support, pass);
}

Tensor AsrModel::joint_logits(const Tensor& v) const { return tensor::add(linear(w_, v), b_); }

Tensor AsrModel::asc_logits(std::string_view target, std::string_view candidate, Pass& pass) const {
  return core_.asc_logits(core_.asc_embedding(target, candidate, pass));
}

MasrModel::MasrModel(ModelConfig config, std::shared_ptr<const encoder::Vocabulary> vocab)
    : ModelBase(std::move(config), std::move(vocab)),
      core_(config_, *vocab_, params_),
      w_(head_weight("list.w", {1, 2 * config_.encoder.hidden}, kListHead)) {}

MasrModel::Listwise MasrModel::list_logits(std::string_view question, std::span<const std::string> candidates,
                                           Pass& pass) const {
  if (candidates.empty() || candidates.size() > config_.k + 1) {
    throw Error(ErrorKind::config, "MASR scores 1.." + std::to_string(config_.k + 1) + " candidates, got " +
                                       std::to_string(candidates.size()),
                "k");
  }
  Listwise out;
  std::vector<Tensor> rows;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto support = support_for(candidates, i, config_.k);
    out.blocks.push_back(core_.represent(question, candidates[i], support, pass));
    rows.push_back(out.blocks.back().v);
  }
  const Tensor stacked = tensor::stack_rows(rows);
  out.logits = tensor::reshape(tensor::matmul(stacked, tensor::transpose(w_)), {candidates.size()});
  return out;
}

SupportRepresentation MasrModel::represent(std::string_view question, std::string_view target,
                                           std::span<const std::string> support, Pass& pass) const {
  return core_.represent(question, target, support, pass);
}

Tensor MasrModel::asc_logits(std::string_view target, std::string_view candidate, Pass& pass) const {
  return core_.asc_logits(core_.asc_embedding(target, candidate, pass));
}

RerankerModel make_model(const ModelConfig& config, std::shared_ptr<const encoder::Vocabulary> vocab) {
  switch (config.kind) {
    case ModelKind::pointwise: return RerankerModel(std::in_place_type<PointwiseModel>, config, std::move(vocab));
    case ModelKind::multiclassifier:
      return RerankerModel(std::in_place_type<MultiClassifierModel>, config, std::move(vocab));
    case ModelKind::pairwise: return RerankerModel(std::in_place_type<PairwiseModel>, config, std::move(vocab));
    case ModelKind::asr: return RerankerModel(std::in_place_type<AsrModel>, config, std::move(vocab));
    case ModelKind::masr: return RerankerModel(std::in_place_type<MasrModel>, config, std::move(vocab));
  }
  throw Error(ErrorKind::config, "unknown model kind", "model");
}

const ModelBase& base_of(const RerankerModel& model) {
  return std::visit([](const auto& m) -> const ModelBase& { return m; }, model);
}

ModelBase& base_of(RerankerModel& model) {
  return std::visit([](auto& m) -> ModelBase& { return m; }, model);
}

std::vector<std::string> support_for(std::span<const std::string> candidates, std::size_t index, std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < candidates.size() && out.size() < k; ++j) {
    if (j != index) out.push_back(candidates[j]);
  }
  out.resize(k);
  return out;
}

}  // namespace asrk::rerankers
