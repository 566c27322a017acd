#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wscd/data/dataset.hpp"
#include "wscd/detector/detector.hpp"
#include "wscd/encoder/encoder.hpp"
#include "wscd/eval/eval.hpp"
#include "wscd/morphology/morphology.hpp"
#include "wscd/numerics/checkpoint.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace pipeline {

enum class Mode { supervised, weakly, unsupervised, baseline };

Mode parse_mode(const std::string& name);  // throws ConfigError
std::string mode_name(Mode mode);

struct ExperimentConfig {
  encoder::EncoderConfig encoder;
  detector::DetectorConfig detector;
  detector::TrainConfig supervised{real(1e-2), real(0.95), 20, 32, 0};
  detector::TrainConfig pretrain{real(1e-2), real(0.95), 10, 32, 0};
  detector::SelfTrainConfig self_train;
  detector::KMeansConfig kmeans;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
};

// Encoder weights and vocabulary produced by morphology training.
struct EncoderInit {
  numerics::Checkpoint weights;
  text::CharVocab vocab;
};

struct FoldOutput {
  std::size_t fold = 0;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::vector<std::size_t> train_ids;  // classes or raw cluster ids
  std::vector<std::size_t> test_ids;
  numerics::ParameterStore params;     // trained model of this fold
  std::vector<std::string> warnings;
};

struct RunOutput {
  Mode mode = Mode::baseline;
  std::vector<FoldOutput> folds;
  std::vector<double> thresholds;  // baseline only
};

// Fresh encoder for a run: the vocabulary of `init` (if any) extended with
// every character of `words`, weights copied from `init` and new embedding
// rows drawn from `rng`.
struct BuiltEncoder {
  encoder::Encoder enc;
  numerics::ParameterStore params;
};
BuiltEncoder build_encoder(const encoder::EncoderConfig& config,
                           std::span<const std::string> words, const EncoderInit* init, Rng& rng);

std::vector<std::string> words_of(std::span<const data::WordPair> pairs);
std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold);

// Supervised cross-entropy training on stratified folds.
RunOutput run_supervised(const data::CognateDataset& dataset, const EncoderInit* init,
                         const ExperimentConfig& config, std::ostream* log = nullptr);

// Label-free pipeline (pretraining, k-means, self-training) on unstratified
// folds. Its input type carries no labels.
RunOutput run_label_free(std::span<const data::WordPair> pairs, const EncoderInit* init,
                         const ExperimentConfig& config, std::ostream* log = nullptr);

// Fitted-threshold orthographic similarity on stratified folds.
RunOutput run_baseline(const data::CognateDataset& dataset, const ExperimentConfig& config);

// Scores a run against gold labels; label-free runs map clusters to labels
// on each fold's training split.
eval::EvalReport score(const RunOutput& run, std::span<const data::Label> labels,
                       const std::string& language_pair, std::uint64_t seed);

// Convenience: runs `mode` end to end and scores it.
eval::EvalReport evaluate_mode(Mode mode, const data::CognateDataset& dataset,
                               const EncoderInit* init, const ExperimentConfig& config,
                               std::ostream* log = nullptr);

// Morphology pretraining from scratch on `pairs`, returning the transferable
// encoder.
EncoderInit pretrain_encoder(std::span<const data::MorphPair> pairs,
                             const encoder::EncoderConfig& config,
                             const morphology::MorphTrainConfig& train, std::uint64_t seed,
                             morphology::MorphTrainResult* result = nullptr,
                             std::ostream* log = nullptr);

}  // namespace pipeline
WSCD_MODEL_NAMESPACE_END
