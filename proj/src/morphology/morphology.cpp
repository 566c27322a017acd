#include "wscd/morphology/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "wscd/error.hpp"
#include "wscd/jsonl.hpp"
#include "wscd/numerics/ops.hpp"
#include "wscd/numerics/optim.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace morphology {

using numerics::Tensor;

real default_lr(data::LanguageFamily family) {
  switch (family) {
    case data::LanguageFamily::indian: return real(1e-4);
    case data::LanguageFamily::celtic: return real(2e-3);
    case data::LanguageFamily::south_african: return real(4e-3);
  }
  return real(2e-3);
}

void MorphTrainConfig::validate() const {
  if (!(lr > 0)) throw ConfigError("morphology lr must be positive");
  if (batch == 0) throw ConfigError("morphology batch size must be at least 1");
  if (proj_dim == 0) throw ConfigError("morphology projection dim must be positive");
  if (heldout_fraction < 0 || heldout_fraction >= 1)
    throw ConfigError("held-out fraction must be in [0,1)");
}

void MorphologyModel::init_head(ParameterStore& params, Rng& rng) const {
  const std::size_t in = enc_.config().output_dim();
  const double bound = 1.0 / std::sqrt(double(in));
  Tensor w({in, proj_dim_});
  for (auto& v : w.data()) v = real(rng.uniform(-bound, bound));
  Tensor b({proj_dim_});
  for (auto& v : b.data()) v = real(rng.uniform(-bound, bound));
  params.add(weight_name(), std::move(w));
  params.add(bias_name(), std::move(b));
}

Var MorphologyModel::project(Graph& g, ParameterStore& params, Var r) const {
  Var z = numerics::matmul(g, r, g.param(params.get(weight_name())));
  return numerics::add_bias(g, z, g.param(params.get(bias_name())));
}

Var MorphologyModel::loss(Graph& g, ParameterStore& params,
                          const std::vector<std::vector<std::size_t>>& left,
                          const std::vector<std::vector<std::size_t>>& right,
                          std::span<const std::size_t> which) const {
  Var zl = project(g, params, enc_.encode_batch(g, params, left, which));
  Var zr = project(g, params, enc_.encode_batch(g, params, right, which));
  return numerics::mse(g, zl, zr);
}

namespace {

double evaluate(const MorphologyModel& model, ParameterStore& params,
                const std::vector<std::vector<std::size_t>>& left,
                const std::vector<std::vector<std::size_t>>& right,
                std::span<const std::size_t> which, std::size_t batch) {
  if (which.empty()) return 0;
  double total = 0;
  for (std::size_t start = 0; start < which.size(); start += batch) {
    const auto part = which.subspan(start, std::min(batch, which.size() - start));
    Graph g(false);
    total += double(g.value(model.loss(g, params, left, right, part)).item()) * double(part.size());
  }
  return total / double(which.size());
}

}  // namespace

MorphTrainResult train_morphology(std::span<const MorphPair> pairs, const Encoder& enc,
                                  ParameterStore& params, const MorphTrainConfig& config,
                                  Rng& rng, std::ostream* log) {
  if (pairs.empty()) throw PreconditionError("train_morphology needs at least one pair");
  config.validate();

  MorphologyModel model(enc, config.proj_dim);
  if (!params.contains(MorphologyModel::weight_name())) model.init_head(params, rng);

  std::vector<std::string> lw, rw, all_words;
  for (const auto& p : pairs) {
    if (p.word1.empty() || p.word2.empty()) throw InputError("morphology pair with an empty word");
    lw.push_back(p.word1);
    rw.push_back(p.word2);
  }
  const auto left = enc.tokenize_all(lw);
  const auto right = enc.tokenize_all(rw);
  all_words = lw;
  all_words.insert(all_words.end(), rw.begin(), rw.end());

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span(order));
  const auto n_held = static_cast<std::size_t>(double(pairs.size()) * config.heldout_fraction);
  std::vector<std::size_t> heldout(order.begin(), order.begin() + std::ptrdiff_t(n_held));
  std::vector<std::size_t> train(order.begin() + std::ptrdiff_t(n_held), order.end());

  MorphTrainResult result;
  result.train_pairs = train.size();
  result.heldout_pairs = heldout.size();

  const numerics::Sgd sgd({config.lr, config.decay, config.weight_decay, 0});
  const std::vector<std::string> prefixes{std::string(Encoder::kPrefix),
                                          std::string(MorphologyModel::kPrefix)};
  const bool use_heldout = !heldout.empty();

  auto record = [&](std::size_t epoch, double train_loss) {
    MorphEpoch e;
    e.epoch = epoch;
    e.train_loss = train_loss;
    e.heldout_loss = evaluate(model, params, left, right, heldout, config.batch);
    Rng probe(rng.seed() ^ 0xc0ffeeULL);
    e.collapse = collapse_metric(enc, params, all_words, config.collapse_sample, probe);
    result.curve.push_back(e);
    write_jsonl(log, {{"epoch", e.epoch},
                      {"loss", e.train_loss},
                      {"heldout_loss", e.heldout_loss},
                      {"collapse", e.collapse}});
    return e;
  };

  const MorphEpoch initial = record(0, evaluate(model, params, left, right, train, config.batch));
  double best = use_heldout ? initial.heldout_loss : initial.train_loss;
  auto best_state = export_encoder(params, true);
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span(train));
    double sum = 0;
    for (std::size_t start = 0; start < train.size(); start += config.batch) {
      const auto part =
          std::span(train).subspan(start, std::min(config.batch, train.size() - start));
      Graph g;
      Var loss;
      try {
        loss = model.loss(g, params, left, right, part);
        g.backward(loss);
      } catch (const NumericError& e) {
        throw NumericError("morphology training diverged in epoch " + std::to_string(epoch) +
                           ": " + e.what());
      }
      sum += double(g.value(loss).item()) * double(part.size());
      sgd.step(params, epoch - 1, prefixes);
    }
    const MorphEpoch e = record(epoch, sum / double(train.size()));
    if (!std::isfinite(e.train_loss) || !std::isfinite(e.heldout_loss))
      throw NumericError("morphology loss is not finite in epoch " + std::to_string(epoch));
    if (e.collapse > config.collapse_warn) {
      result.warnings.push_back("epoch " + std::to_string(epoch) + ": encodings collapsing (mean cosine " +
                                std::to_string(e.collapse) + ")");
    }
    const double monitored = use_heldout ? e.heldout_loss : e.train_loss;
    if (monitored < best) {
      best = monitored;
      best_state = export_encoder(params, true);
      result.best_epoch = epoch;
      since_best = 0;
    } else if (config.patience && ++since_best >= config.patience) {
      result.stopped_early = true;
      break;
    }
  }
  numerics::restore(params, best_state);
  return result;
}

double collapse_metric(const Encoder& enc, const ParameterStore& params,
                       std::span<const std::string> words, std::size_t sample, Rng& rng) {
  std::vector<std::string> distinct(words.begin(), words.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  rng.shuffle(std::span(distinct));
  if (distinct.size() > sample) distinct.resize(sample);
  if (distinct.size() < 2) return 1.0;

  std::vector<Tensor> codes;
  codes.reserve(distinct.size());
  for (const auto& w : distinct) codes.push_back(enc.encode(params, w).r);
  double sum = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < codes.size(); ++i)
    for (std::size_t j = i + 1; j < codes.size(); ++j, ++count)
      sum += double(numerics::cosine(codes[i].data(), codes[j].data()));
  return sum / double(count);
}

numerics::Checkpoint export_encoder(const ParameterStore& params, bool keep_head) {
  auto out = numerics::snapshot(params, Encoder::kPrefix);
  if (keep_head) out.merge(numerics::snapshot(params, MorphologyModel::kPrefix));
  return out;
}

void export_encoder(const std::filesystem::path& path, const ParameterStore& params,
                    bool keep_head) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint: " + path.string());
  numerics::write_checkpoint(out, export_encoder(params, keep_head));
  if (!out) throw InputError("failed writing checkpoint: " + path.string());
}

std::size_t import_encoder(ParameterStore& params, const numerics::Checkpoint& ckpt,
                           bool keep_head) {
  std::size_t copied = numerics::assign_from_checkpoint(params, ckpt, Encoder::kPrefix);
  if (copied == 0) throw DimensionError("checkpoint holds no encoder parameters");
  if (keep_head) {
    for (const auto& [name, tensor] : ckpt)
      if (name.starts_with(MorphologyModel::kPrefix) && !params.contains(name))
        params.add(name, Tensor(tensor.shape()));
    copied += numerics::assign_from_checkpoint(params, ckpt, MorphologyModel::kPrefix);
  }
  return copied;
}

}  // namespace morphology
WSCD_MODEL_NAMESPACE_END
