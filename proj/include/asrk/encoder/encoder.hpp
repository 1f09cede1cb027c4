#pragma once

// Miniature post-layer-norm transformer cross-encoder. The pair
// representation is the final hidden state at the [CLS] position.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asrk/encoder/vocabulary.hpp"
#include "asrk/random.hpp"
#include "asrk/tensor/parameters.hpp"

namespace asrk::encoder {

struct EncoderConfig {
  std::size_t layers = 2;
  std::size_t heads = 2;
  std::size_t hidden = 64;
  std::size_t ffn = 256;
  std::size_t vocab_size = 8192;
  std::size_t max_length = 128;
  double dropout = 0.0;

  // Throws config error (with a short code) on inconsistent values.
  void validate() const;
};

struct EncodedPair {
  std::vector<int> token_ids;
  std::vector<int> segment_ids;
  std::vector<int> position_ids;
  std::vector<int> attention_mask;  // 1 = real token, 0 = padding

  std::size_t size() const { return token_ids.size(); }
};

// [CLS] a [SEP] b [EOS], truncated longest-first (ties trim b) so the total
// fits config.max_length.
EncodedPair encode_pair_text(std::string_view a, std::string_view b, const Vocabulary& vocab,
                             const EncoderConfig& config);

// [CLS] first [SEP] rest_0 [SEP] rest_1 ... [EOS]. `first` is segment 0,
// everything after the first [SEP] is segment 1. Truncation trims the
// currently longest text, preferring the later one on ties.
EncodedPair encode_texts(std::string_view first, std::span<const std::string> rest,
                         const Vocabulary& vocab, const EncoderConfig& config);

// Appends [PAD] tokens (mask 0) up to `length`.
EncodedPair pad_to(EncodedPair pair, std::size_t length);

struct EncodeOptions {
  bool training = false;
  std::uint64_t dropout_seed = 0;
};

class Encoder {
 public:
  // Registers parameters under `prefix` and initialises them from `rng`:
  // weights and embeddings ~ N(0, 0.02), biases 0, layer-norm gains 1.
  Encoder(const EncoderConfig& config, tensor::ParameterSet& params, const std::string& prefix,
          Rng& rng);

  // Returns the [CLS] output, shape [hidden].
  tensor::Tensor encode(const EncodedPair& pair, const EncodeOptions& options = {}) const;

  const EncoderConfig& config() const { return config_; }
  const std::string& prefix() const { return prefix_; }

 private:
  struct Layer {
    tensor::Tensor wq, bq, wk, bk, wv, bv, wo, bo;
    tensor::Tensor ln1_gain, ln1_bias;
    tensor::Tensor w1, b1, w2, b2;
    tensor::Tensor ln2_gain, ln2_bias;
  };

  EncoderConfig config_;
  std::string prefix_;
  tensor::Tensor token_embedding_, segment_embedding_, position_embedding_;
  std::vector<Layer> layers_;
};

}  // namespace asrk::encoder
