#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wscd/numerics/graph.hpp"
#include "wscd/numerics/kernels.hpp"
#include "wscd/rng.hpp"
#include "wscd/text/vocab.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace encoder {

using numerics::Graph;
using numerics::ParameterStore;
using numerics::Tensor;
using numerics::Var;

struct EncoderConfig {
  std::size_t char_dim = 64;
  std::size_t filters_per_order = 64;
  std::vector<std::size_t> ngram_orders = {2, 3, 4, 5, 6};
  std::size_t max_word_len = 40;
  bool positional = true;
  kernels::Activation activation = kernels::Activation::tanh;

  std::size_t output_dim() const { return ngram_orders.size() * filters_per_order; }
  std::size_t min_word_len() const;
  // Throws ConfigError.
  void validate() const;
};

struct WordEncoding {
  Tensor r;                        // [output_dim]
  std::vector<Tensor> attention;   // one distribution per n-gram order
};

// Character n-gram CNN word encoder: per order n, a width-n convolution gives
// a feature map F_n, a trainable positional table is added row-wise, and a
// one-score-per-position attention pools the rows into r_n. The word vector
// is the concatenation [r_n for n in ngram_orders].
//
// Parameters live in a caller-owned ParameterStore under "encoder.".
class Encoder {
 public:
  static constexpr std::string_view kPrefix = "encoder.";

  Encoder(EncoderConfig config, text::CharVocab vocab);

  const EncoderConfig& config() const { return config_; }
  const text::CharVocab& vocab() const { return vocab_; }

  // Adds freshly initialized encoder parameters to `params`.
  void init_params(ParameterStore& params, Rng& rng) const;

  // Grows the vocabulary with the codepoints of `words`; new embedding rows
  // are randomly initialized, existing rows are untouched. Returns the count
  // of new characters.
  std::size_t extend_vocabulary(ParameterStore& params, std::span<const std::string> words,
                                Rng& rng);

  std::vector<std::size_t> tokenize(std::string_view word) const;

  // [len x char_dim] -> F_n [(len-n+1) x filters]
  Var ngram_features(Graph& g, ParameterStore& params, Var embedded, std::size_t order) const;
  Var add_position(Graph& g, ParameterStore& params, Var features, std::size_t order) const;
  // Pools a feature map into r_n [1 x filters]; `weights` receives the
  // attention distribution [1 x rows] when non-null.
  Var attend(Graph& g, ParameterStore& params, Var features, std::size_t order,
             Var* weights = nullptr) const;

  // Full word -> [1 x output_dim].
  Var encode(Graph& g, ParameterStore& params, std::span<const std::size_t> seq,
             std::vector<Var>* weights = nullptr) const;
  Var encode(Graph& g, ParameterStore& params, std::string_view word) const;
  // Batch of words stacked into [N x output_dim].
  Var encode_batch(Graph& g, ParameterStore& params, std::span<const std::string> words) const;
  // Pre-tokenized variant: rows seqs[which[0]], seqs[which[1]], ...
  Var encode_batch(Graph& g, ParameterStore& params,
                   const std::vector<std::vector<std::size_t>>& seqs,
                   std::span<const std::size_t> which) const;
  std::vector<std::vector<std::size_t>> tokenize_all(std::span<const std::string> words) const;

  // Inference-only convenience.
  WordEncoding encode(const ParameterStore& params, std::string_view word) const;

  static std::string embedding_name() { return "encoder.embedding"; }
  static std::string conv_weight_name(std::size_t n);
  static std::string conv_bias_name(std::size_t n);
  static std::string position_name(std::size_t n);
  static std::string attention_weight_name(std::size_t n);
  static std::string attention_bias_name(std::size_t n);

 private:
  EncoderConfig config_;
  text::CharVocab vocab_;
};

}  // namespace encoder
WSCD_MODEL_NAMESPACE_END
