#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wscd/data/types.hpp"
#include "wscd/encoder/encoder.hpp"
#include "wscd/numerics/graph.hpp"
#include "wscd/rng.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace detector {

using data::Label;
using data::WordPair;
using encoder::Encoder;
using numerics::Graph;
using numerics::ParameterStore;
using numerics::Tensor;
using numerics::Var;

// Hand-tuned label-free detector learning rates per family.
real default_lr(data::LanguageFamily family);

struct DetectorConfig {
  std::size_t classes = 2;    // K; also the number of clusters
  std::size_t proj_dim = 2;   // width of u, v and z
  bool sense_activation = true;

  void validate() const;  // throws ConfigError
};

// Pre-tokenized pair: both sides already mapped through the vocabulary.
struct TokenPair {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
};

std::vector<TokenPair> tokenize_pairs(const Encoder& enc, std::span<const WordPair> pairs);

struct PairForward {
  Var u, v;     // [N x K] projections of each side
  Var cos;      // [N x 1]
  Var z;        // [N x K] sense-layer output
  Var logits;   // [N x classes]
  Var p;        // softmax(logits)
};

// Siamese pair model: one shared encoder for both sides, a shared linear
// projection to u/v, the sense layer over [u; v; cos(u, v)], and a class
// head. Parameter names start with "detector."; the encoder keeps its own
// "encoder." names so a morphology checkpoint can be loaded unchanged.
class Detector {
 public:
  static constexpr std::string_view kPrefix = "detector.";
  static std::string centroids_name() { return "detector.centroids"; }

  Detector(const Encoder& enc, DetectorConfig config);

  const Encoder& encoder() const { return enc_; }
  const DetectorConfig& config() const { return config_; }

  // Adds detector parameters (not the encoder's) to `params`; centroids
  // start at zero until init_centroids.
  void init_params(ParameterStore& params, Rng& rng) const;

  PairForward forward(Graph& g, ParameterStore& params, std::span<const TokenPair> pairs,
                      std::span<const std::size_t> which) const;
  PairForward forward(Graph& g, ParameterStore& params, std::span<const TokenPair> pairs) const;

  // Inference helpers over every pair, batched internally.
  Tensor embed_all(const ParameterStore& params, std::span<const TokenPair> pairs) const;
  Tensor probabilities(const ParameterStore& params, std::span<const TokenPair> pairs) const;

  // Prefixes of everything trained in the pair regimes.
  std::vector<std::string> trainable_prefixes() const;

 private:
  const Encoder& enc_;
  DetectorConfig config_;
};

struct TrainConfig {
  real lr = real(1e-2);
  real decay = real(0.95);
  std::size_t epochs = 10;
  std::size_t batch = 32;
  real clip_norm = 0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0;
  double change = -1;  // assignment-change fraction; -1 where not applicable
};

// ---- unsupervised pretraining -------------------------------------------

struct PretrainResult {
  std::vector<EpochLog> curve;
  Tensor z;  // [N x K] embeddings of every pair after training
  std::vector<std::string> warnings;
};

// Minimizes the clustering loss over unlabeled pairs. Only WordPair-derived
// tokens reach this function, so labels cannot influence it.
PretrainResult pretrain_unsupervised(const Detector& det, ParameterStore& params,
                                     std::span<const TokenPair> pairs, const TrainConfig& config,
                                     Rng& rng, std::ostream* log = nullptr);

// ---- clustering ----------------------------------------------------------

struct KMeansConfig {
  std::size_t k = 2;
  std::size_t batch = 256;
  std::size_t epochs = 20;
};

struct KMeansResult {
  Tensor centroids;  // [k x dim]
  std::vector<std::size_t> assignments;
  double inertia = 0;
};

// k-means++ seeding: first center uniform, later ones with probability
// proportional to squared distance from the nearest chosen center.
Tensor kmeans_pp_seed(const Tensor& points, std::size_t k, Rng& rng);
std::vector<std::size_t> nearest_centroids(const Tensor& points, const Tensor& centroids);
double inertia(const Tensor& points, const Tensor& centroids);
// Minibatch k-means with per-center learning rates 1/count.
KMeansResult minibatch_kmeans(const Tensor& points, const KMeansConfig& config, Rng& rng);

// Runs minibatch k-means on z and stores the centroids under
// Detector::centroids_name(). Throws PreconditionError when N < k.
Tensor init_centroids(ParameterStore& params, const Tensor& z, const KMeansConfig& config,
                      Rng& rng);

// p_ij = (q_ij^2 / f_j) / sum_j' (q_ij'^2 / f_j'), f_j = sum_i q_ij. A zero
// cluster frequency is clamped to a tiny epsilon and reported in `warnings`.
Tensor target_distribution(const Tensor& q, std::vector<std::string>* warnings = nullptr);
std::vector<std::size_t> hard_assignments(const Tensor& q);

// Something that maps item indices to points in the clustering space.
class EmbeddingModel {
 public:
  virtual ~EmbeddingModel() = default;
  virtual std::size_t size() const = 0;
  virtual Var embed(Graph& g, ParameterStore& params, std::span<const std::size_t> which) const = 0;
  virtual std::vector<std::string> trainable_prefixes() const = 0;
};

// Points used as-is; only the centroids train.
class IdentityEmbedding final : public EmbeddingModel {
 public:
  explicit IdentityEmbedding(Tensor points) : points_(std::move(points)) {}
  std::size_t size() const override { return points_.dim(0); }
  Var embed(Graph& g, ParameterStore& params, std::span<const std::size_t> which) const override;
  std::vector<std::string> trainable_prefixes() const override { return {}; }

 private:
  Tensor points_;
};

// Sense-layer embeddings z of a pair list.
class PairEmbedding final : public EmbeddingModel {
 public:
  PairEmbedding(const Detector& det, std::span<const TokenPair> pairs)
      : det_(det), pairs_(pairs) {}
  std::size_t size() const override { return pairs_.size(); }
  Var embed(Graph& g, ParameterStore& params, std::span<const std::size_t> which) const override;
  std::vector<std::string> trainable_prefixes() const override;

 private:
  const Detector& det_;
  std::span<const TokenPair> pairs_;
};

struct SelfTrainConfig {
  real lr = real(1e-2);
  real decay = real(0.95);
  std::size_t batch = 32;
  std::size_t max_epochs = 50;
  std::size_t update_interval = 1;  // epochs between target refreshes
  double tol = 0.001;               // stop when change fraction <= tol
  std::string centroids = "detector.centroids";
};

struct SelfTrainResult {
  std::vector<std::size_t> assignments;
  Tensor q;
  std::vector<EpochLog> curve;       // one entry per target refresh
  std::vector<double> refresh_kl;    // KL(P||Q)/N at each refresh
  std::size_t epochs_run = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

// DEC-style refinement: at every refresh computes q for all items and the
// sharpened target p, then fits q to p by minimizing KL(P||Q) over the
// embedding model and the centroids. Stops once the fraction of changed
// hard assignments between refreshes is at most `tol`; on hitting the epoch
// limit restores the refresh with the lowest KL and warns.
SelfTrainResult self_train(const EmbeddingModel& model, ParameterStore& params,
                           const SelfTrainConfig& config, Rng& rng, std::ostream* log = nullptr);

Tensor soft_assignments(const EmbeddingModel& model, const ParameterStore& params,
                        const std::string& centroids);

// ---- supervised ----------------------------------------------------------

struct SupervisedResult {
  std::vector<EpochLog> curve;
  std::vector<std::string> warnings;
};

SupervisedResult train_supervised(const Detector& det, ParameterStore& params,
                                  std::span<const TokenPair> pairs, std::span<const Label> labels,
                                  const TrainConfig& config, Rng& rng,
                                  std::ostream* log = nullptr);

// ---- prediction ----------------------------------------------------------

enum class PredictMode { supervised, clusters };

struct Prediction {
  std::vector<std::size_t> ids;  // class index or raw cluster id
  Tensor probabilities;          // p (supervised) or q (clusters)
};

Prediction predict(const Detector& det, const ParameterStore& params,
                   std::span<const TokenPair> pairs, PredictMode mode);

}  // namespace detector
WSCD_MODEL_NAMESPACE_END
