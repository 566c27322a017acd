#include "wscd/detector/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wscd/error.hpp"
#include "wscd/jsonl.hpp"
#include "wscd/numerics/checkpoint.hpp"
#include "wscd/numerics/ops.hpp"
#include "wscd/numerics/optim.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace detector {

namespace ops = numerics;

namespace {

constexpr std::size_t kInferenceChunk = 128;

Tensor uniform(numerics::Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = real(rng.uniform(-bound, bound));
  return t;
}

std::string proj_w() { return "detector.proj.weight"; }
std::string proj_b() { return "detector.proj.bias"; }
std::string sense_w() { return "detector.sense.weight"; }
std::string sense_b() { return "detector.sense.bias"; }
std::string head_w() { return "detector.head.weight"; }
std::string head_b() { return "detector.head.bias"; }

Var dense(Graph& g, ParameterStore& params, Var x, const std::string& w, const std::string& b) {
  return ops::add_bias(g, ops::matmul(g, x, g.param(params.get(w))), g.param(params.get(b)));
}

// Inference graphs never write gradients, so const parameters are safe here.
ParameterStore& readonly(const ParameterStore& params) { return const_cast<ParameterStore&>(params); }

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

void append_rows(std::vector<real>& out, const Tensor& t) {
  out.insert(out.end(), t.data().begin(), t.data().end());
}

std::vector<std::size_t> argmax_rows(const Tensor& t) {
  std::vector<std::size_t> out(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const auto row = t.row(i);
    out[i] = std::size_t(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

Tensor select_rows(const Tensor& t, std::span<const std::size_t> which) {
  std::vector<real> data;
  data.reserve(which.size() * t.cols());
  for (std::size_t i : which) {
    const auto r = t.row(i);
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor({which.size(), t.cols()}, std::move(data));
}

}  // namespace

real default_lr(data::LanguageFamily family) {
  switch (family) {
    case data::LanguageFamily::indian: return real(1e-2);
    case data::LanguageFamily::celtic: return real(1e-1);
    case data::LanguageFamily::south_african: return real(1e-2);
  }
  return real(1e-2);
}

void DetectorConfig::validate() const {
  if (classes != 2) throw ConfigError("cognate detection uses exactly two classes");
  if (proj_dim == 0) throw ConfigError("detector projection dim must be positive");
}

std::vector<TokenPair> tokenize_pairs(const Encoder& enc, std::span<const WordPair> pairs) {
  std::vector<TokenPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({enc.tokenize(p.first), enc.tokenize(p.second)});
  return out;
}

Detector::Detector(const Encoder& enc, DetectorConfig config) : enc_(enc), config_(config) {
  config_.validate();
}

void Detector::init_params(ParameterStore& params, Rng& rng) const {
  const std::size_t d = enc_.config().output_dim();
  const std::size_t k = config_.proj_dim;
  const std::size_t sense_in = 2 * k + 1;
  const double pb = 1.0 / std::sqrt(double(d));
  const double sb = 1.0 / std::sqrt(double(sense_in));
  const double hb = 1.0 / std::sqrt(double(k));
  params.add(proj_w(), uniform({d, k}, pb, rng));
  params.add(proj_b(), uniform({k}, pb, rng));
  params.add(sense_w(), uniform({sense_in, k}, sb, rng));
  params.add(sense_b(), uniform({k}, sb, rng));
  params.add(head_w(), uniform({k, config_.classes}, hb, rng));
  params.add(head_b(), uniform({config_.classes}, hb, rng));
  params.add(centroids_name(), Tensor({config_.classes, k}));
}

PairForward Detector::forward(Graph& g, ParameterStore& params, std::span<const TokenPair> pairs,
                              std::span<const std::size_t> which) const {
  std::vector<Var> left, right;
  left.reserve(which.size());
  right.reserve(which.size());
  for (std::size_t i : which) {
    left.push_back(enc_.encode(g, params, pairs[i].first));
    right.push_back(enc_.encode(g, params, pairs[i].second));
  }
  PairForward f;
  f.u = dense(g, params, ops::concat_rows(g, left), proj_w(), proj_b());
  f.v = dense(g, params, ops::concat_rows(g, right), proj_w(), proj_b());
  f.cos = ops::cosine_rows(g, f.u, f.v);
  const Var joined[] = {f.u, f.v, f.cos};
  f.z = dense(g, params, ops::concat_cols(g, joined), sense_w(), sense_b());
  if (config_.sense_activation) f.z = ops::tanh(g, f.z);
  f.logits = dense(g, params, f.z, head_w(), head_b());
  f.p = ops::softmax_rows(g, f.logits);
  return f;
}

PairForward Detector::forward(Graph& g, ParameterStore& params,
                              std::span<const TokenPair> pairs) const {
  const auto all = iota(pairs.size());
  return forward(g, params, pairs, all);
}

Tensor Detector::embed_all(const ParameterStore& params, std::span<const TokenPair> pairs) const {
  std::vector<real> data;
  const auto all = iota(pairs.size());
  for (std::size_t s = 0; s < all.size(); s += kInferenceChunk) {
    Graph g(false);
    const auto part = std::span(all).subspan(s, std::min(kInferenceChunk, all.size() - s));
    append_rows(data, g.value(forward(g, readonly(params), pairs, part).z));
  }
  return Tensor({pairs.size(), config_.proj_dim}, std::move(data));
}

Tensor Detector::probabilities(const ParameterStore& params,
                               std::span<const TokenPair> pairs) const {
  std::vector<real> data;
  const auto all = iota(pairs.size());
  for (std::size_t s = 0; s < all.size(); s += kInferenceChunk) {
    Graph g(false);
    const auto part = std::span(all).subspan(s, std::min(kInferenceChunk, all.size() - s));
    append_rows(data, g.value(forward(g, readonly(params), pairs, part).p));
  }
  return Tensor({pairs.size(), config_.classes}, std::move(data));
}

std::vector<std::string> Detector::trainable_prefixes() const {
  return {std::string(Encoder::kPrefix), "detector.proj.", "detector.sense.", "detector.head."};
}

// ---- unsupervised pretraining ---------------------------------------------

PretrainResult pretrain_unsupervised(const Detector& det, ParameterStore& params,
                                     std::span<const TokenPair> pairs, const TrainConfig& config,
                                     Rng& rng, std::ostream* log) {
  if (pairs.empty()) throw PreconditionError("pretrain_unsupervised needs pairs");
  if (config.batch == 0) throw ConfigError("batch size must be at least 1");
  PretrainResult result;
  if (pairs.size() == 1 || config.batch == 1)
    result.warnings.push_back("single-row batches make the cluster-balance term degenerate");

  const numerics::Sgd sgd({config.lr, config.decay, 0, config.clip_norm});
  const auto prefixes = det.trainable_prefixes();
  auto order = iota(pairs.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double sum = 0;
    for (std::size_t s = 0; s < order.size(); s += config.batch) {
      const auto part = std::span(order).subspan(s, std::min(config.batch, order.size() - s));
      Graph g;
      Var loss;
      try {
        loss = ops::cluster_loss(g, det.forward(g, params, pairs, part).p);
        g.backward(loss);
      } catch (const NumericError& e) {
        throw NumericError("unsupervised pretraining diverged in epoch " +
                           std::to_string(epoch + 1) + ": " + e.what());
      }
      sum += double(g.value(loss).item()) * double(part.size());
      sgd.step(params, epoch, prefixes);
    }
    EpochLog e{epoch + 1, sum / double(pairs.size()), -1};
    result.curve.push_back(e);
    write_jsonl(log, {{"phase", "pretrain"}, {"epoch", e.epoch}, {"loss", e.loss}});
  }
  result.z = det.embed_all(params, pairs);
  return result;
}

// ---- clustering --------------------------------------------------------------

namespace {

double squared_distance(std::span<const real> a, std::span<const real> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a[i]) - double(b[i]);
    s += d * d;
  }
  return s;
}

}  // namespace

Tensor kmeans_pp_seed(const Tensor& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  if (k == 0 || n < k) throw PreconditionError("k-means needs at least k points");
  std::vector<std::size_t> chosen{rng.index(n)};
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i)
    nearest[i] = squared_distance(points.row(i), points.row(chosen[0]));
  while (chosen.size() < k) {
    const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0) {
      double target = rng.uniform() * total;
      for (pick = 0; pick + 1 < n; ++pick) {
        if (nearest[pick] > 0 && target < nearest[pick]) break;
        target -= nearest[pick];
      }
      while (nearest[pick] == 0) --pick;  // rounding ran past the last positive weight
    } else {
      // Every point coincides with a chosen center: take an unused index.
      std::vector<std::size_t> unused;
      for (std::size_t i = 0; i < n; ++i)
        if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) unused.push_back(i);
      pick = unused[rng.index(unused.size())];
    }
    chosen.push_back(pick);
    for (std::size_t i = 0; i < n; ++i)
      nearest[i] = std::min(nearest[i], squared_distance(points.row(i), points.row(pick)));
  }
  return select_rows(points, chosen);
}

std::vector<std::size_t> nearest_centroids(const Tensor& points, const Tensor& centroids) {
  std::vector<std::size_t> out(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centroids.rows(); ++j) {
      const double d = squared_distance(points.row(i), centroids.row(j));
      if (d < best) {
        best = d;
        out[i] = j;
      }
    }
  }
  return out;
}

double inertia(const Tensor& points, const Tensor& centroids) {
  const auto assign = nearest_centroids(points, centroids);
  double s = 0;
  for (std::size_t i = 0; i < points.rows(); ++i)
    s += squared_distance(points.row(i), centroids.row(assign[i]));
  return s;
}

KMeansResult minibatch_kmeans(const Tensor& points, const KMeansConfig& config, Rng& rng) {
  if (points.rank() != 2) throw DimensionError("k-means expects an [N x dim] matrix");
  if (config.batch == 0) throw ConfigError("k-means batch must be at least 1");
  KMeansResult r;
  r.centroids = kmeans_pp_seed(points, config.k, rng);
  std::vector<std::size_t> counts(config.k, 0);
  auto order = iota(points.rows());
  const std::size_t dim = points.cols();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t s = 0; s < order.size(); s += config.batch) {
      const auto part = std::span(order).subspan(s, std::min(config.batch, order.size() - s));
      const Tensor batch = select_rows(points, part);
      // Assign the whole batch first, then move centers one point at a time.
      const auto assign = nearest_centroids(batch, r.centroids);
      for (std::size_t i = 0; i < part.size(); ++i) {
        const std::size_t c = assign[i];
        const real eta = real(1) / real(++counts[c]);
        auto center = r.centroids.row(c);
        const auto x = batch.row(i);
        for (std::size_t f = 0; f < dim; ++f) center[f] = (1 - eta) * center[f] + eta * x[f];
      }
    }
  }
  r.assignments = nearest_centroids(points, r.centroids);
  r.inertia = inertia(points, r.centroids);
  return r;
}

Tensor init_centroids(ParameterStore& params, const Tensor& z, const KMeansConfig& config,
                      Rng& rng) {
  if (z.rows() < config.k) throw PreconditionError("init_centroids: fewer points than clusters");
  auto result = minibatch_kmeans(z, config, rng);
  auto& slot = params.get(Detector::centroids_name());
  if (slot.value.shape() != result.centroids.shape())
    throw DimensionError("centroid parameter shape does not match k x dim");
  slot.value = result.centroids;
  return result.centroids;
}

Tensor target_distribution(const Tensor& q, std::vector<std::string>* warnings) {
  constexpr double kEps = 1e-10;
  const std::size_t n = q.rows(), k = q.cols();
  // One sample: f_j = q_j, so the formula reduces to q itself. Returning it
  // directly keeps that fixed point exact instead of exact-up-to-rounding.
  if (n == 1 && q.all_finite()) {
    double mass = 0;
    for (real v : q.data()) mass += double(v);
    if (mass > 0) return q;
  }
  std::vector<double> freq(k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) freq[j] += double(q.at(i, j));
  for (std::size_t j = 0; j < k; ++j) {
    if (freq[j] <= 0) {
      freq[j] = kEps;
      if (warnings) warnings->push_back("cluster " + std::to_string(j) + " is empty");
    }
  }
  Tensor p(q.shape());
  std::vector<double> w(k);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0;
    for (std::size_t j = 0; j < k; ++j) {
      w[j] = double(q.at(i, j)) * double(q.at(i, j)) / freq[j];
      total += w[j];
    }
    for (std::size_t j = 0; j < k; ++j) p.at(i, j) = real(w[j] / total);
  }
  numerics::require_finite(p, "target_distribution");
  return p;
}

std::vector<std::size_t> hard_assignments(const Tensor& q) { return argmax_rows(q); }

Var IdentityEmbedding::embed(Graph& g, ParameterStore&, std::span<const std::size_t> which) const {
  return g.constant(select_rows(points_, which));
}

Var PairEmbedding::embed(Graph& g, ParameterStore& params,
                         std::span<const std::size_t> which) const {
  return det_.forward(g, params, pairs_, which).z;
}

std::vector<std::string> PairEmbedding::trainable_prefixes() const {
  return {std::string(Encoder::kPrefix), "detector.proj.", "detector.sense."};
}

Tensor soft_assignments(const EmbeddingModel& model, const ParameterStore& params,
                        const std::string& centroids) {
  const auto all = iota(model.size());
  const Tensor& c = params.get(centroids).value;
  std::vector<real> data;
  for (std::size_t s = 0; s < all.size(); s += kInferenceChunk) {
    Graph g(false);
    const auto part = std::span(all).subspan(s, std::min(kInferenceChunk, all.size() - s));
    const Tensor& z = g.value(model.embed(g, readonly(params), part));
    append_rows(data, ops::soft_assign(z, c));
  }
  return Tensor({model.size(), c.rows()}, std::move(data));
}

SelfTrainResult self_train(const EmbeddingModel& model, ParameterStore& params,
                           const SelfTrainConfig& config, Rng& rng, std::ostream* log) {
  if (config.batch == 0 || config.update_interval == 0)
    throw ConfigError("self-training batch and update interval must be at least 1");
  if (config.tol < 0 || config.tol > 1) throw ConfigError("self-training tol must be in [0,1]");
  const std::size_t n = model.size();
  if (n == 0) throw PreconditionError("self_train needs items");

  auto prefixes = model.trainable_prefixes();
  prefixes.push_back(config.centroids);
  const numerics::Sgd sgd({config.lr, config.decay, 0, 0});

  SelfTrainResult result;
  double best_kl = std::numeric_limits<double>::infinity();
  numerics::Checkpoint best_state;
  Tensor best_q;
  std::vector<std::size_t> previous;
  Tensor target;
  auto order = iota(n);

  for (std::size_t epoch = 0;; ++epoch) {
    if (epoch % config.update_interval == 0) {
      Tensor q = soft_assignments(model, params, config.centroids);
      target = target_distribution(q, &result.warnings);
      const auto hard = hard_assignments(q);
      const double kl = double(ops::kl_div(target, q)) / double(n);
      double change = -1;
      if (!previous.empty()) {
        std::size_t moved = 0;
        for (std::size_t i = 0; i < n; ++i) moved += hard[i] != previous[i];
        change = double(moved) / double(n);
      }
      result.curve.push_back({epoch, kl, change});
      result.refresh_kl.push_back(kl);
      write_jsonl(log, {{"phase", "self-train"}, {"epoch", epoch}, {"loss", kl}, {"change", change}});
      if (kl < best_kl) {
        best_kl = kl;
        best_state = numerics::snapshot(params);
        best_q = q;
      }
      previous = hard;
      result.q = std::move(q);
      result.assignments = hard;
      if (change >= 0 && change <= config.tol) {
        result.converged = true;
        break;
      }
    }
    if (epoch == config.max_epochs) break;

    rng.shuffle(std::span(order));
    for (std::size_t s = 0; s < n; s += config.batch) {
      const auto part = std::span(order).subspan(s, std::min(config.batch, n - s));
      Graph g;
      try {
        Var z = model.embed(g, params, part);
        Var q = ops::soft_assign(g, z, g.param(params.get(config.centroids)));
        Var p = g.constant(select_rows(target, part));
        g.backward(ops::scale(g, ops::kl_div(g, p, q), real(1) / real(part.size())));
      } catch (const NumericError& e) {
        throw NumericError("self-training diverged in epoch " + std::to_string(epoch + 1) + ": " +
                           e.what());
      }
      sgd.step(params, epoch, prefixes);
    }
    result.epochs_run = epoch + 1;
  }

  if (!result.converged) {
    numerics::restore(params, best_state);
    result.q = best_q;
    result.assignments = hard_assignments(best_q);
    result.warnings.push_back("self-training hit " + std::to_string(config.max_epochs) +
                              " epochs without converging; kept the lowest-KL state");
  }
  return result;
}

// ---- supervised ----------------------------------------------------------------

SupervisedResult train_supervised(const Detector& det, ParameterStore& params,
                                  std::span<const TokenPair> pairs, std::span<const Label> labels,
                                  const TrainConfig& config, Rng& rng, std::ostream* log) {
  if (pairs.size() != labels.size()) throw DimensionError("pair and label counts differ");
  if (pairs.empty()) throw PreconditionError("train_supervised needs labeled pairs");
  if (config.batch == 0) throw ConfigError("batch size must be at least 1");
  SupervisedResult result;
  std::vector<std::size_t> targets;
  for (Label l : labels) targets.push_back(data::label_index(l));
  if (std::adjacent_find(targets.begin(), targets.end(), std::not_equal_to<>()) == targets.end())
    result.warnings.push_back("training data contains a single class");

  const numerics::Sgd sgd({config.lr, config.decay, 0, config.clip_norm});
  const auto prefixes = det.trainable_prefixes();
  auto order = iota(pairs.size());
  std::vector<std::size_t> batch_targets;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double sum = 0;
    for (std::size_t s = 0; s < order.size(); s += config.batch) {
      const auto part = std::span(order).subspan(s, std::min(config.batch, order.size() - s));
      batch_targets.clear();
      for (std::size_t i : part) batch_targets.push_back(targets[i]);
      Graph g;
      Var loss;
      try {
        loss = ops::softmax_cross_entropy(g, det.forward(g, params, pairs, part).logits,
                                          batch_targets);
        g.backward(loss);
      } catch (const NumericError& e) {
        throw NumericError("supervised training diverged in epoch " + std::to_string(epoch + 1) +
                           ": " + e.what());
      }
      sum += double(g.value(loss).item()) * double(part.size());
      sgd.step(params, epoch, prefixes);
    }
    EpochLog e{epoch + 1, sum / double(pairs.size()), -1};
    result.curve.push_back(e);
    write_jsonl(log, {{"phase", "supervised"}, {"epoch", e.epoch}, {"loss", e.loss}});
  }
  return result;
}

// ---- prediction ------------------------------------------------------------------

Prediction predict(const Detector& det, const ParameterStore& params,
                   std::span<const TokenPair> pairs, PredictMode mode) {
  Prediction out;
  if (mode == PredictMode::supervised) {
    out.probabilities = det.probabilities(params, pairs);
  } else {
    const Tensor z = det.embed_all(params, pairs);
    out.probabilities = ops::soft_assign(z, params.get(Detector::centroids_name()).value);
  }
  out.ids = argmax_rows(out.probabilities);
  return out;
}

}  // namespace detector
WSCD_MODEL_NAMESPACE_END
