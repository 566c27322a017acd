#include "wscd/selfcheck.hpp"

#include <algorithm>
#include <cmath>

#include "wscd/detector/detector.hpp"
#include "wscd/encoder/encoder.hpp"
#include "wscd/morphology/morphology.hpp"
#include "wscd/numerics/gradcheck.hpp"
#include "wscd/numerics/ops.hpp"
#include "wscd/text/utf8.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace selfcheck {

namespace {

using numerics::Graph;
using numerics::ParameterStore;
using numerics::Tensor;
using numerics::Var;

std::string random_word(Rng& rng, std::size_t min_len, std::size_t max_len) {
  const std::u32string letters = U"abcdeé";
  std::u32string w;
  const std::size_t len = min_len + rng.index(max_len - min_len + 1);
  for (std::size_t i = 0; i < len; ++i) w.push_back(letters[rng.index(letters.size())]);
  return text::encode_utf8(w);
}

Tensor random_tensor(numerics::Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = real(rng.uniform(-bound, bound));
  return t;
}

void merge(ObjectiveCheck& into, const numerics::GradCheckReport& r) {
  ++into.instances;
  into.entries += r.entries_checked;
  if (r.max_rel_error >= into.max_rel_error) {
    into.max_rel_error = r.max_rel_error;
    into.worst_entry = r.worst_entry;
  }
}

}  // namespace

std::vector<ObjectiveCheck> gradient_suite(std::size_t instances, std::uint64_t seed) {
  std::vector<ObjectiveCheck> out(4);
  out[0].objective = "clustering loss (encoder -> sense -> softmax)";
  out[1].objective = "self-training KL through soft assignment";
  out[2].objective = "supervised cross-entropy";
  out[3].objective = "morphology MSE";

  Rng rng(seed);
  for (std::size_t inst = 0; inst < instances; ++inst) {
    std::vector<data::WordPair> pairs;
    std::vector<std::string> words;
    for (std::size_t i = 0; i < 3; ++i) {
      pairs.push_back({random_word(rng, 2, 6), random_word(rng, 2, 6)});
      words.push_back(pairs.back().first);
      words.push_back(pairs.back().second);
    }
    encoder::EncoderConfig ec;
    ec.char_dim = 3;
    ec.filters_per_order = 2;
    ec.ngram_orders = {2, 3};
    ec.max_word_len = 6;
    const encoder::Encoder enc(ec, text::CharVocab::from_words(words));
    const detector::Detector det(enc, {});
    ParameterStore params;
    enc.init_params(params, rng);
    det.init_params(params, rng);
    // Move the state away from the symmetric init so every path carries gradient.
    params.get(detector::Detector::centroids_name()).value =
        random_tensor({2, det.config().proj_dim}, 1.0, rng);
    const auto tokens = detector::tokenize_pairs(enc, pairs);

    numerics::GradCheckOptions opts;
    opts.seed = rng.next_u64();

    merge(out[0], numerics::check_gradients(
                      params,
                      [&](Graph& g) { return numerics::cluster_loss(g, det.forward(g, params, tokens).p); },
                      opts));

    Tensor target;
    {
      Graph g(false);
      const Tensor& z = g.value(det.forward(g, params, tokens).z);
      target = detector::target_distribution(
          numerics::soft_assign(z, params.get(detector::Detector::centroids_name()).value));
    }
    merge(out[1], numerics::check_gradients(
                      params,
                      [&](Graph& g) {
                        Var z = det.forward(g, params, tokens).z;
                        Var q = numerics::soft_assign(
                            g, z, g.param(params.get(detector::Detector::centroids_name())));
                        return numerics::scale(g, numerics::kl_div(g, g.constant(target), q),
                                               real(1) / real(tokens.size()));
                      },
                      opts));

    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < tokens.size(); ++i) labels.push_back(rng.index(2));
    merge(out[2], numerics::check_gradients(
                      params,
                      [&](Graph& g) {
                        return numerics::softmax_cross_entropy(
                            g, det.forward(g, params, tokens).logits, labels);
                      },
                      opts));

    ParameterStore morph_params;
    enc.init_params(morph_params, rng);
    const morphology::MorphologyModel head(enc, 3);
    head.init_head(morph_params, rng);
    std::vector<std::vector<std::size_t>> left, right;
    for (const auto& t : tokens) {
      left.push_back(t.first);
      right.push_back(t.second);
    }
    const std::vector<std::size_t> all{0, 1, 2};
    merge(out[3], numerics::check_gradients(
                      morph_params,
                      [&](Graph& g) { return head.loss(g, morph_params, left, right, all); }, opts));
  }
  return out;
}

DistributionCheck distribution_suite(std::size_t calls, std::uint64_t seed) {
  Rng rng(seed);
  DistributionCheck c;
  auto check_rows = [&](const Tensor& t) {
    for (std::size_t i = 0; i < t.rows(); ++i) {
      double s = 0;
      for (real v : t.row(i)) {
        s += double(v);
        if (!(v >= 0 && v <= 1)) c.all_in_unit_interval = false;
      }
      c.max_row_error = std::max(c.max_row_error, std::fabs(s - 1));
    }
  };
  for (std::size_t call = 0; call < calls; ++call, ++c.calls) {
    const std::size_t n = 1 + rng.index(16);
    const std::size_t dim = 1 + rng.index(6);
    const Tensor logits = random_tensor({n, 2}, 10.0, rng);
    const Tensor p = numerics::softmax_rows(logits);
    check_rows(p);

    const Tensor z = random_tensor({n, dim}, 5.0, rng);
    const Tensor centroids = random_tensor({2, dim}, 5.0, rng);
    const Tensor q = numerics::soft_assign(z, centroids);
    check_rows(q);
    const Tensor target = detector::target_distribution(q);
    check_rows(target);
    c.max_self_kl = std::max({c.max_self_kl, std::fabs(double(numerics::kl_div(p, p))),
                              std::fabs(double(numerics::kl_div(target, target)))});

    const Tensor first({1, dim}, std::vector<real>(z.row(0).begin(), z.row(0).end()));
    const Tensor single = numerics::soft_assign(first, centroids);
    if (!(detector::target_distribution(single) == single)) c.fixed_point_exact = false;
  }
  return c;
}

}  // namespace selfcheck
WSCD_MODEL_NAMESPACE_END
