#include "wscd/cli/pipeline.hpp"

#include <algorithm>
#include <set>

#include "wscd/error.hpp"
#include "wscd/text/utf8.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace pipeline {

Mode parse_mode(const std::string& name) {
  if (name == "supervised") return Mode::supervised;
  if (name == "weakly") return Mode::weakly;
  if (name == "unsupervised") return Mode::unsupervised;
  if (name == "baseline") return Mode::baseline;
  throw ConfigError("unknown mode: " + name);
}

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::supervised: return "supervised";
    case Mode::weakly: return "weakly";
    case Mode::unsupervised: return "unsupervised";
    case Mode::baseline: return "baseline";
  }
  return "?";
}

std::vector<std::string> words_of(std::span<const data::WordPair> pairs) {
  std::vector<std::string> out;
  out.reserve(2 * pairs.size());
  for (const auto& p : pairs) {
    out.push_back(p.first);
    out.push_back(p.second);
  }
  return out;
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) {
  // splitmix64 finalizer over (seed, fold)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (fold + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

BuiltEncoder build_encoder(const encoder::EncoderConfig& config,
                           std::span<const std::string> words, const EncoderInit* init, Rng& rng) {
  if (!init) {
    BuiltEncoder b{encoder::Encoder(config, text::CharVocab::from_words(words)), {}};
    b.enc.init_params(b.params, rng);
    return b;
  }
  BuiltEncoder b{encoder::Encoder(config, init->vocab), {}};
  b.enc.init_params(b.params, rng);
  morphology::import_encoder(b.params, init->weights);
  // Sorted so the new rows do not depend on word order.
  std::set<std::string> distinct(words.begin(), words.end());
  const std::vector<std::string> sorted(distinct.begin(), distinct.end());
  b.enc.extend_vocabulary(b.params, sorted, rng);
  return b;
}

namespace {

template <typename T>
std::vector<T> pick(std::span<const T> items, std::span<const std::size_t> which) {
  std::vector<T> out;
  out.reserve(which.size());
  for (std::size_t i : which) out.push_back(items[i]);
  return out;
}

}  // namespace

RunOutput run_supervised(const data::CognateDataset& dataset, const EncoderInit* init,
                         const ExperimentConfig& config, std::ostream* log) {
  const auto labels = dataset.labels();
  const auto pairs = dataset.word_pairs();
  const auto plan = data::stratified_kfold(labels, config.folds, config.seed);
  const auto words = words_of(pairs);

  RunOutput run;
  run.mode = Mode::supervised;
  for (std::size_t f = 0; f < config.folds; ++f) {
    Rng rng(fold_seed(config.seed, f));
    auto built = build_encoder(config.encoder, words, init, rng);
    const detector::Detector det(built.enc, config.detector);
    det.init_params(built.params, rng);
    const auto tokens = detector::tokenize_pairs(built.enc, pairs);

    FoldOutput out;
    out.fold = f;
    out.train_indices = plan.train_indices(f);
    out.test_indices = plan.test_indices(f);
    const auto train_tokens = pick<detector::TokenPair>(tokens, out.train_indices);
    const auto train_labels = pick<data::Label>(labels, out.train_indices);
    auto res = detector::train_supervised(det, built.params, train_tokens, train_labels,
                                          config.supervised, rng, log);
    out.warnings = std::move(res.warnings);
    out.train_ids = detector::predict(det, built.params, train_tokens,
                                      detector::PredictMode::supervised).ids;
    const auto test_tokens = pick<detector::TokenPair>(tokens, out.test_indices);
    out.test_ids = detector::predict(det, built.params, test_tokens,
                                     detector::PredictMode::supervised).ids;
    out.params = std::move(built.params);
    run.folds.push_back(std::move(out));
  }
  return run;
}

RunOutput run_label_free(std::span<const data::WordPair> pairs, const EncoderInit* init,
                         const ExperimentConfig& config, std::ostream* log) {
  const auto plan = data::kfold(pairs.size(), config.folds, config.seed);
  const auto words = words_of(pairs);

  RunOutput run;
  run.mode = init ? Mode::weakly : Mode::unsupervised;
  for (std::size_t f = 0; f < config.folds; ++f) {
    Rng rng(fold_seed(config.seed, f));
    auto built = build_encoder(config.encoder, words, init, rng);
    const detector::Detector det(built.enc, config.detector);
    det.init_params(built.params, rng);
    const auto tokens = detector::tokenize_pairs(built.enc, pairs);

    FoldOutput out;
    out.fold = f;
    out.train_indices = plan.train_indices(f);
    out.test_indices = plan.test_indices(f);
    const auto train_tokens = pick<detector::TokenPair>(tokens, out.train_indices);

    auto pre = detector::pretrain_unsupervised(det, built.params, train_tokens, config.pretrain,
                                               rng, log);
    out.warnings = std::move(pre.warnings);
    detector::init_centroids(built.params, pre.z, config.kmeans, rng);
    const detector::PairEmbedding embedding(det, train_tokens);
    auto st = detector::self_train(embedding, built.params, config.self_train, rng, log);
    out.warnings.insert(out.warnings.end(), st.warnings.begin(), st.warnings.end());

    out.train_ids = detector::predict(det, built.params, train_tokens,
                                      detector::PredictMode::clusters).ids;
    const auto test_tokens = pick<detector::TokenPair>(tokens, out.test_indices);
    out.test_ids = detector::predict(det, built.params, test_tokens,
                                     detector::PredictMode::clusters).ids;
    out.params = std::move(built.params);
    run.folds.push_back(std::move(out));
  }
  return run;
}

RunOutput run_baseline(const data::CognateDataset& dataset, const ExperimentConfig& config) {
  const auto labels = dataset.labels();
  const auto plan = data::stratified_kfold(labels, config.folds, config.seed);
  const auto sims = eval::orthographic_similarities(dataset.word_pairs());

  RunOutput run;
  run.mode = Mode::baseline;
  for (std::size_t f = 0; f < config.folds; ++f) {
    FoldOutput out;
    out.fold = f;
    out.train_indices = plan.train_indices(f);
    out.test_indices = plan.test_indices(f);
    const auto fit = eval::fit_threshold(pick<double>(sims, out.train_indices),
                                         pick<data::Label>(labels, out.train_indices));
    run.thresholds.push_back(fit.threshold);
    for (auto l : eval::threshold_predict(pick<double>(sims, out.train_indices), fit.threshold))
      out.train_ids.push_back(data::label_index(l));
    for (auto l : eval::threshold_predict(pick<double>(sims, out.test_indices), fit.threshold))
      out.test_ids.push_back(data::label_index(l));
    run.folds.push_back(std::move(out));
  }
  return run;
}

eval::EvalReport score(const RunOutput& run, std::span<const data::Label> labels,
                       const std::string& language_pair, std::uint64_t seed) {
  eval::EvalReport report;
  report.method = mode_name(run.mode);
  report.language_pair = language_pair;
  report.seed = seed;
  const bool clusters = run.mode == Mode::weakly || run.mode == Mode::unsupervised;
  if (run.mode == Mode::baseline)
    report.notes.push_back("orthographic threshold fitted on each training fold");
  for (const auto& fold : run.folds) {
    const auto truth = pick<data::Label>(labels, fold.test_indices);
    std::vector<data::Label> predicted;
    if (clusters) {
      const auto map = eval::map_clusters(fold.train_ids, pick<data::Label>(labels, fold.train_indices));
      predicted = map.apply(fold.test_ids);
      for (const auto& w : map.warnings)
        report.notes.push_back("fold " + std::to_string(fold.fold) + ": " + w);
    } else {
      for (std::size_t id : fold.test_ids) predicted.push_back(data::label_from_index(id));
    }
    eval::FoldResult r;
    r.fold = fold.fold;
    r.seed = seed;
    r.counts = eval::confusion(predicted, truth);
    r.scores = eval::f_score(r.counts);
    report.folds.push_back(r);
    for (const auto& w : fold.warnings)
      report.notes.push_back("fold " + std::to_string(fold.fold) + ": " + w);
  }
  return report;
}

eval::EvalReport evaluate_mode(Mode mode, const data::CognateDataset& dataset,
                               const EncoderInit* init, const ExperimentConfig& config,
                               std::ostream* log) {
  const auto labels = dataset.labels();
  const std::string lp = dataset.lang_a + "-" + dataset.lang_b;
  switch (mode) {
    case Mode::supervised:
      return score(run_supervised(dataset, init, config, log), labels, lp, config.seed);
    case Mode::weakly:
      if (!init) throw ConfigError("weakly-supervised mode needs a morphology encoder");
      [[fallthrough]];
    case Mode::unsupervised: {
      const auto pairs = dataset.word_pairs();
      auto run = run_label_free(pairs, mode == Mode::weakly ? init : nullptr, config, log);
      return score(run, labels, lp, config.seed);
    }
    case Mode::baseline:
      return score(run_baseline(dataset, config), labels, lp, config.seed);
  }
  throw ConfigError("unknown mode");
}

EncoderInit pretrain_encoder(std::span<const data::MorphPair> pairs,
                             const encoder::EncoderConfig& config,
                             const morphology::MorphTrainConfig& train, std::uint64_t seed,
                             morphology::MorphTrainResult* result, std::ostream* log) {
  std::vector<std::string> words;
  for (const auto& p : pairs) {
    words.push_back(p.word1);
    words.push_back(p.word2);
  }
  Rng rng(seed);
  auto built = build_encoder(config, words, nullptr, rng);
  auto r = morphology::train_morphology(pairs, built.enc, built.params, train, rng, log);
  if (result) *result = std::move(r);
  return {morphology::export_encoder(built.params), built.enc.vocab()};
}

}  // namespace pipeline
WSCD_MODEL_NAMESPACE_END
