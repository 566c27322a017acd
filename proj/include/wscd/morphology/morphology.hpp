#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wscd/data/dataset.hpp"
#include "wscd/data/types.hpp"
#include "wscd/encoder/encoder.hpp"
#include "wscd/numerics/checkpoint.hpp"
#include "wscd/rng.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace morphology {

using data::MorphPair;
using data::load_unimorph;
using data::pairs_from_unimorph;
using encoder::Encoder;
using numerics::Graph;
using numerics::ParameterStore;
using numerics::Var;

// Hand-tuned morphology learning rates per family.
real default_lr(data::LanguageFamily family);

struct MorphTrainConfig {
  real lr = real(2e-3);
  std::size_t epochs = 20;
  std::size_t batch = 32;
  real decay = real(0.95);
  std::size_t proj_dim = 128;
  real weight_decay = real(1e-5);
  double heldout_fraction = 0.1;
  // Epochs without held-out improvement before stopping; 0 disables.
  std::size_t patience = 5;
  std::size_t collapse_sample = 100;
  double collapse_warn = 0.99;

  void validate() const;  // throws ConfigError
};

// Siamese head: both words go through the same encoder, then one shared
// fully connected layer to z in R^K; the loss is the batch-mean squared
// distance between z_l and z_r.
class MorphologyModel {
 public:
  static constexpr std::string_view kPrefix = "morph.";
  static std::string weight_name() { return "morph.fc.weight"; }
  static std::string bias_name() { return "morph.fc.bias"; }

  MorphologyModel(const Encoder& enc, std::size_t proj_dim) : enc_(enc), proj_dim_(proj_dim) {}

  void init_head(ParameterStore& params, Rng& rng) const;
  Var project(Graph& g, ParameterStore& params, Var r) const;
  // Loss over pairs (left[i], right[i]) for i in `which`.
  Var loss(Graph& g, ParameterStore& params, const std::vector<std::vector<std::size_t>>& left,
           const std::vector<std::vector<std::size_t>>& right,
           std::span<const std::size_t> which) const;

 private:
  const Encoder& enc_;
  std::size_t proj_dim_;
};

struct MorphEpoch {
  std::size_t epoch = 0;  // 1-based; epoch 0 is the untrained state
  double train_loss = 0;
  double heldout_loss = 0;
  double collapse = 0;
};

struct MorphTrainResult {
  std::vector<MorphEpoch> curve;  // curve[0] is the untrained state
  std::size_t best_epoch = 0;
  std::size_t train_pairs = 0;
  std::size_t heldout_pairs = 0;
  bool stopped_early = false;
  std::vector<std::string> warnings;
};

// Trains the encoder ("encoder.*") and head ("morph.*") on `pairs`, holding
// out a fraction for early stopping; the parameters are left at the best
// held-out epoch (best training loss when nothing is held out). Missing head
// parameters are created. Throws PreconditionError on an empty pair list and
// NumericError if the loss diverges. `log`, when set, receives JSON lines.
MorphTrainResult train_morphology(std::span<const MorphPair> pairs, const Encoder& enc,
                                  ParameterStore& params, const MorphTrainConfig& config,
                                  Rng& rng, std::ostream* log = nullptr);

// Mean pairwise cosine of the encodings of up to `sample` distinct words.
// Values near 1 mean every word is mapped to nearly the same vector.
double collapse_metric(const Encoder& enc, const ParameterStore& params,
                       std::span<const std::string> words, std::size_t sample, Rng& rng);

// Encoder weights, optionally with the morphology head.
numerics::Checkpoint export_encoder(const ParameterStore& params, bool keep_head = false);
void export_encoder(const std::filesystem::path& path, const ParameterStore& params,
                    bool keep_head = false);
// Copies every "encoder." tensor (and "morph." ones when keep_head) into an
// already initialized store. Shape or name mismatches throw DimensionError.
std::size_t import_encoder(ParameterStore& params, const numerics::Checkpoint& ckpt,
                           bool keep_head = false);

}  // namespace morphology
WSCD_MODEL_NAMESPACE_END
