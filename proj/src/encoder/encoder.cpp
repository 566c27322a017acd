#include "wscd/encoder/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "wscd/error.hpp"
#include "wscd/numerics/ops.hpp"
#include "wscd/text/utf8.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace encoder {

namespace {

Tensor uniform(numerics::Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<real>(rng.uniform(-bound, bound));
  return t;
}

}  // namespace

std::size_t EncoderConfig::min_word_len() const {
  return ngram_orders.empty() ? 1 : *std::max_element(ngram_orders.begin(), ngram_orders.end());
}

void EncoderConfig::validate() const {
  if (char_dim == 0 || filters_per_order == 0) throw ConfigError("encoder dims must be positive");
  if (ngram_orders.empty()) throw ConfigError("encoder needs at least one n-gram order");
  for (std::size_t n : ngram_orders)
    if (n == 0) throw ConfigError("n-gram order must be positive");
  if (max_word_len < min_word_len()) {
    throw ConfigError("max_word_len " + std::to_string(max_word_len) +
                      " is below the largest n-gram order " + std::to_string(min_word_len()));
  }
}

Encoder::Encoder(EncoderConfig config, text::CharVocab vocab)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
  config_.validate();
}

std::string Encoder::conv_weight_name(std::size_t n) {
  return "encoder.conv" + std::to_string(n) + ".weight";
}
std::string Encoder::conv_bias_name(std::size_t n) {
  return "encoder.conv" + std::to_string(n) + ".bias";
}
std::string Encoder::position_name(std::size_t n) { return "encoder.pos" + std::to_string(n); }
std::string Encoder::attention_weight_name(std::size_t n) {
  return "encoder.attn" + std::to_string(n) + ".weight";
}
std::string Encoder::attention_bias_name(std::size_t n) {
  return "encoder.attn" + std::to_string(n) + ".bias";
}

void Encoder::init_params(ParameterStore& params, Rng& rng) const {
  const std::size_t d = config_.char_dim;
  const std::size_t f = config_.filters_per_order;
  params.add(embedding_name(), uniform({vocab_.size(), d}, 1.0, rng));
  for (std::size_t n : config_.ngram_orders) {
    const double conv_bound = 1.0 / std::sqrt(static_cast<double>(n * d));
    const double feat_bound = 1.0 / std::sqrt(static_cast<double>(f));
    params.add(conv_weight_name(n), uniform({f, n, d}, conv_bound, rng));
    params.add(conv_bias_name(n), uniform({f}, conv_bound, rng));
    if (config_.positional)
      params.add(position_name(n), uniform({config_.max_word_len - n + 1, f}, feat_bound, rng));
    params.add(attention_weight_name(n), uniform({f, 1}, feat_bound, rng));
    params.add(attention_bias_name(n), uniform({1}, feat_bound, rng));
  }
}

std::size_t Encoder::extend_vocabulary(ParameterStore& params,
                                       std::span<const std::string> words, Rng& rng) {
  const std::size_t before = vocab_.size();
  for (const auto& w : words)
    for (char32_t cp : text::decode_utf8(text::nfc(w))) vocab_.add(cp);
  const std::size_t added = vocab_.size() - before;
  if (added == 0) return 0;

  auto& table = params.get(embedding_name());
  if (table.value.dim(0) != before) {
    throw DimensionError("embedding table rows do not match vocabulary size");
  }
  std::vector<real> data(table.value.data().begin(), table.value.data().end());
  for (std::size_t i = 0; i < added * config_.char_dim; ++i)
    data.push_back(static_cast<real>(rng.uniform(-1.0, 1.0)));
  table.value = Tensor({vocab_.size(), config_.char_dim}, std::move(data));
  if (table.trainable) table.grad = Tensor(table.value.shape());
  return added;
}

std::vector<std::size_t> Encoder::tokenize(std::string_view word) const {
  return text::normalize_word(word, vocab_, config_.min_word_len(), config_.max_word_len);
}

Var Encoder::ngram_features(Graph& g, ParameterStore& params, Var embedded,
                            std::size_t order) const {
  return numerics::conv1d(g, embedded, g.param(params.get(conv_weight_name(order))),
                          g.param(params.get(conv_bias_name(order))), config_.activation);
}

Var Encoder::add_position(Graph& g, ParameterStore& params, Var features,
                          std::size_t order) const {
  if (!config_.positional) return features;
  return numerics::add_position(g, features, g.param(params.get(position_name(order))));
}

Var Encoder::attend(Graph& g, ParameterStore& params, Var features, std::size_t order,
                    Var* weights) const {
  const std::size_t rows = g.value(features).dim(0);
  Var scores = numerics::matmul(g, features, g.param(params.get(attention_weight_name(order))));
  scores = numerics::add_bias(g, scores, g.param(params.get(attention_bias_name(order))));
  scores = numerics::tanh(g, scores);
  Var a = numerics::softmax_rows(g, numerics::reshape(g, scores, {1, rows}));
  if (weights) *weights = a;
  return numerics::matmul(g, a, features);
}

Var Encoder::encode(Graph& g, ParameterStore& params, std::span<const std::size_t> seq,
                    std::vector<Var>* weights) const {
  Var embedded = numerics::gather_rows(g, g.param(params.get(embedding_name())), seq);
  std::vector<Var> parts;
  parts.reserve(config_.ngram_orders.size());
  for (std::size_t n : config_.ngram_orders) {
    Var f = ngram_features(g, params, embedded, n);
    f = add_position(g, params, f, n);
    Var a;
    parts.push_back(attend(g, params, f, n, weights ? &a : nullptr));
    if (weights) weights->push_back(a);
  }
  return numerics::concat_cols(g, parts);
}

Var Encoder::encode(Graph& g, ParameterStore& params, std::string_view word) const {
  const auto seq = tokenize(word);
  return encode(g, params, seq);
}

Var Encoder::encode_batch(Graph& g, ParameterStore& params,
                          std::span<const std::string> words) const {
  std::vector<Var> rows;
  rows.reserve(words.size());
  for (const auto& w : words) rows.push_back(encode(g, params, w));
  return numerics::concat_rows(g, rows);
}

Var Encoder::encode_batch(Graph& g, ParameterStore& params,
                          const std::vector<std::vector<std::size_t>>& seqs,
                          std::span<const std::size_t> which) const {
  std::vector<Var> rows;
  rows.reserve(which.size());
  for (std::size_t i : which) rows.push_back(encode(g, params, seqs.at(i)));
  return numerics::concat_rows(g, rows);
}

std::vector<std::vector<std::size_t>> Encoder::tokenize_all(
    std::span<const std::string> words) const {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(tokenize(w));
  return out;
}

WordEncoding Encoder::encode(const ParameterStore& params, std::string_view word) const {
  Graph g(/*grad_enabled=*/false);
  // Inference graphs never write gradients, so the parameters stay untouched.
  auto& mutable_params = const_cast<ParameterStore&>(params);
  std::vector<Var> weights;
  const auto seq = tokenize(word);
  Var r = encode(g, mutable_params, seq, &weights);
  WordEncoding out;
  out.r = g.value(r).reshaped({config_.output_dim()});
  for (Var w : weights) out.attention.push_back(g.value(w).reshaped({g.value(w).size()}));
  return out;
}

}  // namespace encoder
WSCD_MODEL_NAMESPACE_END
