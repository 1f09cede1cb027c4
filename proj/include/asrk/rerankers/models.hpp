#pragma once

// The five reranking architectures. Every model owns a ParameterSet whose
// names carry a fixed prefix per component:
//   pr.     encoder over (question, candidate)
//   asc.    encoder and head of the answer support classifier
//   head.   output head of single-encoder models
//   joint.  binary head of ASR
//   list.   listwise head of MASR

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "asrk/encoder/encoder.hpp"
#include "asrk/rerankers/asc_labels.hpp"
#include "asrk/tensor/parameters.hpp"

namespace asrk::rerankers {

enum class ModelKind { pointwise, multiclassifier, pairwise, asr, masr };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct ModelConfig {
  ModelKind kind = ModelKind::pointwise;
  encoder::EncoderConfig encoder;
  std::size_t k = 3;
  AscScheme scheme = AscScheme::four_way;
  std::uint64_t seed = 0;
  // Heads start at zero unless set; a nonzero value draws N(0, head_init_std).
  double head_init_std = 0.0;

  void validate() const;
};

// Dropout bookkeeping for one forward pass. Each encoder call takes the
// next seed in sequence, so replaying a pass reproduces its masks.
class Pass {
 public:
  Pass() = default;
  Pass(bool training, std::uint64_t seed) : training_(training), seed_(seed) {}

  encoder::EncodeOptions next();
  bool training() const { return training_; }

 private:
  bool training_ = false;
  std::uint64_t seed_ = 0;
  std::uint64_t calls_ = 0;
};

class ModelBase {
 public:
  ModelBase(const ModelBase&) = delete;
  ModelBase& operator=(const ModelBase&) = delete;
  ModelBase(ModelBase&&) = default;
  ModelBase& operator=(ModelBase&&) = default;

  const ModelConfig& config() const { return config_; }
  const encoder::Vocabulary& vocab() const { return *vocab_; }
  const std::shared_ptr<const encoder::Vocabulary>& shared_vocab() const { return vocab_; }
  tensor::ParameterSet& params() { return params_; }
  const tensor::ParameterSet& params() const { return params_; }

 protected:
  ModelBase(ModelConfig config, std::shared_ptr<const encoder::Vocabulary> vocab);
  ~ModelBase() = default;

  encoder::EncodedPair pair(std::string_view a, std::string_view b) const;
  tensor::Tensor head_weight(const std::string& name, tensor::Shape shape, std::uint64_t stream);
  tensor::Tensor head_bias(const std::string& name, std::size_t n);

  ModelConfig config_;
  std::shared_ptr<const encoder::Vocabulary> vocab_;
  tensor::ParameterSet params_;
};

// softmax(W · tanh(E(q,c)) + B), W[2×d], B[2]; class 1 is "correct".
class PointwiseModel : public ModelBase {
 public:
  PointwiseModel(ModelConfig config, std::shared_ptr<const encoder::Vocabulary> vocab);

  tensor::Tensor logits(std::string_view question, std::string_view candidate, Pass& pass) const;

 private:
  encoder::Encoder encoder_;
  tensor::Tensor w_, b_;
};

// One sequence q [SEP] c_1 [SEP] ... [SEP] c_{k+1}; softmax(E · Wᵀ), W[(k+1)×d].
class MultiClassifierModel : public ModelBase {
 public:
  MultiClassifierModel(ModelConfig config, std::shared_ptr<const encoder::Vocabulary> vocab);

  // Exactly k+1 candidates.
  tensor::Tensor logits(std::string_view question, std::span<const std::string> candidates,
                        Pass& pass) const;

 private:
  encoder::Encoder encoder_;
  tensor::Tensor w_;
};

// [E(q,t) : E(q,o_1) : ... : E(q,o_k)] -> W[2×(k+1)d] + B.
class PairwiseModel : public ModelBase {
 public:
  PairwiseModel(ModelConfig config, std::shared_ptr<const encoder::Vocabulary> vocab);

  tensor::Tensor logits(std::string_view question, std::string_view target, std::span<const std::string> others,
                        Pass& pass) const;

 private:
  encoder::Encoder encoder_;
  tensor::Tensor w_, b_;
};

// Pair representations of a target against its support set.
struct SupportRepresentation {
  tensor::Tensor v;                           // [E_t : maxpool(Ê_1..Ê_k)], shape [2d]
  std::vector<tensor::Tensor> pair_embeddings;  // Ê_j, one per support entry
};

// The (q,t) encoder plus the answer support classifier. Shared by ASR and
// MASR; it always lives inside one of them.
class AsrCore {
 public:
  AsrCore(const ModelConfig& config, const encoder::Vocabulary& vocab, tensor::ParameterSet& params);

  // `support` must hold exactly k texts; empty strings act as padding.
  SupportRepresentation represent(std::string_view question, std::string_view target,
                                  std::span<const std::string> support, Pass& pass) const;
  tensor::Tensor asc_embedding(std::string_view target, std::string_view candidate, Pass& pass) const;
  // W_asc · tanh(Ê) + B_asc, one logit per class of the scheme.
  tensor::Tensor asc_logits(const tensor::Tensor& pair_embedding) const;

  std::size_t classes() const { return asc_w_.dim(0); }
  std::size_t k() const { return k_; }

 private:
  const encoder::Vocabulary* vocab_;
  std::size_t k_;
  encoder::Encoder pr_;
  encoder::Encoder asc_;
  tensor::Tensor asc_w_, asc_b_;
};

class AsrModel : public ModelBase {
 public:
  AsrModel(ModelConfig config, std::shared_ptr<const encoder::Vocabulary> vocab);

  // `support` must hold exactly k texts; empty strings act as padding.
  SupportRepresentation represent(std::string_view question, std::string_view target,
                                  std::span<const std::string> support, Pass& pass) const;
  // V · Wᵀ + B, W[2×2d].
  tensor::Tensor joint_logits(const tensor::Tensor& v) const;
  tensor::Tensor asc_logits(std::string_view target, std::string_view candidate, Pass& pass) const;

  const AsrCore& core() const { return core_; }

 private:
  AsrCore core_;
  tensor::Tensor w_, b_;
};

class MasrModel : public ModelBase {
 public:
  MasrModel(ModelConfig config, std::shared_ptr<const encoder::Vocabulary> vocab);

  // Shared ASR representation for each target against the others, padded
  // to k; returns one logit per candidate. Accepts 1..k+1 candidates.
  struct Listwise {
    tensor::Tensor logits;
    std::vector<SupportRepresentation> blocks;
  };
  Listwise list_logits(std::string_view question, std::span<const std::string> candidates, Pass& pass) const;
  SupportRepresentation represent(std::string_view question, std::string_view target,
                                  std::span<const std::string> support, Pass& pass) const;
  tensor::Tensor asc_logits(std::string_view target, std::string_view candidate, Pass& pass) const;

  const AsrCore& core() const { return core_; }

 private:
  AsrCore core_;
  tensor::Tensor w_;
};

using RerankerModel = std::variant<PointwiseModel, MultiClassifierModel, PairwiseModel, AsrModel, MasrModel>;

RerankerModel make_model(const ModelConfig& config, std::shared_ptr<const encoder::Vocabulary> vocab);
const ModelBase& base_of(const RerankerModel& model);
ModelBase& base_of(RerankerModel& model);

// Support texts for target `index` among `candidates`: every other
// candidate in order, padded with empty strings (or cut) to exactly k.
std::vector<std::string> support_for(std::span<const std::string> candidates, std::size_t index, std::size_t k);

}  // namespace asrk::rerankers
