#include "asrk/encoder/encoder.hpp"

#include <cmath>

#include "asrk/errors.hpp"
#include "asrk/tensor/ops.hpp"

namespace asrk::encoder {

using tensor::Tensor;

void EncoderConfig::validate() const {
  auto fail = [](const std::string& code, const std::string& message) {
    throw Error(ErrorKind::config, code + ": " + message, code);
  };
  if (layers == 0) fail("encoder_layers", "at least one layer is required");
  if (heads == 0 || hidden == 0 || hidden % heads != 0) {
    fail("heads_divide_hidden", "hidden size " + std::to_string(hidden) +
                                    " must be a positive multiple of heads " + std::to_string(heads));
  }
  if (ffn == 0) fail("ffn_size", "feed-forward size must be positive");
  if (vocab_size <= static_cast<std::size_t>(kReservedCount)) {
    fail("vocab_size", "vocabulary must hold more than the reserved tokens");
  }
  if (max_length < 3 || max_length > 512) fail("max_length", "max_length must lie in [3, 512]");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout", "dropout must lie in [0, 1)");
}

namespace {

void truncate_longest_first(std::vector<std::vector<int>>& texts, std::size_t budget) {
  auto total = [&] {
    std::size_t n = 0;
    for (const auto& t : texts) n += t.size();
    return n;
  };
  while (total() > budget) {
    std::size_t longest = 0;
    for (std::size_t i = 1; i < texts.size(); ++i) {
      if (texts[i].size() >= texts[longest].size()) longest = i;
    }
    texts[longest].pop_back();
  }
}

}  // namespace

EncodedPair encode_texts(std::string_view first, std::span<const std::string> rest,
                         const Vocabulary& vocab, const EncoderConfig& config) {
  std::vector<std::vector<int>> texts;
  texts.push_back(vocab.ids(first));
  for (const auto& r : rest) texts.push_back(vocab.ids(r));
  const std::size_t specials = texts.size() + 1;  // [CLS], one [SEP] per boundary, [EOS]
  if (config.max_length < specials) {
    throw Error(ErrorKind::config, "max_length " + std::to_string(config.max_length) +
                                       " cannot hold " + std::to_string(specials) + " special tokens");
  }
  truncate_longest_first(texts, config.max_length - specials);

  EncodedPair out;
  auto push = [&](int id, int segment) {
    out.position_ids.push_back(static_cast<int>(out.token_ids.size()));
    out.token_ids.push_back(id);
    out.segment_ids.push_back(segment);
    out.attention_mask.push_back(1);
  };
  push(kClsId, 0);
  for (int id : texts[0]) push(id, 0);
  for (std::size_t t = 1; t < texts.size(); ++t) {
    push(kSepId, t == 1 ? 0 : 1);
    for (int id : texts[t]) push(id, 1);
  }
  push(kEosId, texts.size() > 1 ? 1 : 0);
  return out;
}

EncodedPair encode_pair_text(std::string_view a, std::string_view b, const Vocabulary& vocab,
                             const EncoderConfig& config) {
  const std::string second(b);
  return encode_texts(a, std::span(&second, 1), vocab, config);
}

EncodedPair pad_to(EncodedPair pair, std::size_t length) {
  while (pair.size() < length) {
    pair.position_ids.push_back(static_cast<int>(pair.token_ids.size()));
    pair.token_ids.push_back(kPadId);
    pair.segment_ids.push_back(0);
    pair.attention_mask.push_back(0);
  }
  return pair;
}

Encoder::Encoder(const EncoderConfig& config, tensor::ParameterSet& params, const std::string& prefix,
                 Rng& rng)
    : config_(config), prefix_(prefix) {
  config_.validate();
  const std::size_t d = config_.hidden;
  auto normal = [&](const std::string& name, tensor::Shape shape) {
    std::vector<double> v(tensor::element_count(shape));
    for (double& x : v) x = rng.normal(0.0, 0.02);
    return params.add(prefix_ + name, Tensor::from(std::move(shape), std::move(v), true));
  };
  auto constant = [&](const std::string& name, std::size_t n, double value) {
    return params.add(prefix_ + name, Tensor::full({n}, value, true));
  };
  token_embedding_ = normal("tok_emb", {config_.vocab_size, d});
  segment_embedding_ = normal("seg_emb", {2, d});
  position_embedding_ = normal("pos_emb", {config_.max_length, d});
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const std::string p = "l" + std::to_string(l) + ".";
    Layer layer;
    layer.wq = normal(p + "wq", {d, d});
    layer.bq = constant(p + "bq", d, 0.0);
    layer.wk = normal(p + "wk", {d, d});
    layer.bk = constant(p + "bk", d, 0.0);
    layer.wv = normal(p + "wv", {d, d});
    layer.bv = constant(p + "bv", d, 0.0);
    layer.wo = normal(p + "wo", {d, d});
    layer.bo = constant(p + "bo", d, 0.0);
    layer.ln1_gain = constant(p + "ln1_g", d, 1.0);
    layer.ln1_bias = constant(p + "ln1_b", d, 0.0);
    layer.w1 = normal(p + "w1", {d, config_.ffn});
    layer.b1 = constant(p + "b1", config_.ffn, 0.0);
    layer.w2 = normal(p + "w2", {config_.ffn, d});
    layer.b2 = constant(p + "b2", d, 0.0);
    layer.ln2_gain = constant(p + "ln2_g", d, 1.0);
    layer.ln2_bias = constant(p + "ln2_b", d, 0.0);
    layers_.push_back(std::move(layer));
  }
}

Tensor Encoder::encode(const EncodedPair& pair, const EncodeOptions& options) const {
  using namespace tensor;
  const std::size_t n = pair.size();
  if (n == 0) throw Error(ErrorKind::input, "cannot encode an empty sequence");
  if (n > config_.max_length) {
    throw Error(ErrorKind::input, "sequence of " + std::to_string(n) + " tokens exceeds max_length " +
                                      std::to_string(config_.max_length));
  }
  if (pair.segment_ids.size() != n || pair.position_ids.size() != n || pair.attention_mask.size() != n) {
    throw Error(ErrorKind::input, "encoded pair fields have inconsistent lengths");
  }
  const std::size_t d = config_.hidden;
  const std::size_t head_dim = d / config_.heads;
  const double score_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::uint64_t dropout_stream = 0;
  auto drop = [&](const Tensor& x) {
    return dropout(x, config_.dropout, derive_seed(options.dropout_seed, dropout_stream++),
                   options.training);
  };

  bool padded = false;
  std::vector<double> key_bias(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (pair.attention_mask[i] == 0) {
      key_bias[i] = -1e9;
      padded = true;
    }
  }
  const Tensor mask = Tensor::from({n}, std::move(key_bias));

  Tensor x = add(add(embedding_lookup(token_embedding_, pair.token_ids),
                     embedding_lookup(segment_embedding_, pair.segment_ids)),
                 embedding_lookup(position_embedding_, pair.position_ids));
  x = drop(x);

  for (const Layer& layer : layers_) {
    const Tensor q = add_row(matmul(x, layer.wq), layer.bq);
    const Tensor k = add_row(matmul(x, layer.wk), layer.bk);
    const Tensor v = add_row(matmul(x, layer.wv), layer.bv);
    std::vector<Tensor> heads;
    heads.reserve(config_.heads);
    for (std::size_t h = 0; h < config_.heads; ++h) {
      const std::size_t lo = h * head_dim, hi = lo + head_dim;
      const Tensor qh = config_.heads == 1 ? q : slice_cols(q, lo, hi);
      const Tensor kh = config_.heads == 1 ? k : slice_cols(k, lo, hi);
      const Tensor vh = config_.heads == 1 ? v : slice_cols(v, lo, hi);
      Tensor scores = scale(matmul(qh, transpose(kh)), score_scale);
      if (padded) scores = add_row(scores, mask);
      heads.push_back(matmul(softmax(scores, 1), vh));
    }
    const Tensor attended = heads.size() == 1 ? heads[0] : concat(heads, 1);
    const Tensor projected = drop(add_row(matmul(attended, layer.wo), layer.bo));
    x = layer_norm(add(x, projected), layer.ln1_gain, layer.ln1_bias);
    const Tensor hidden = gelu(add_row(matmul(x, layer.w1), layer.b1));
    const Tensor ff = drop(add_row(matmul(hidden, layer.w2), layer.b2));
    x = layer_norm(add(x, ff), layer.ln2_gain, layer.ln2_bias);
  }
  return row(x, 0);
}

}  // namespace asrk::encoder
