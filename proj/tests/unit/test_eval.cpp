#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "wscd/error.hpp"
#include "wscd/eval/eval.hpp"
#include "wscd/rng.hpp"
#include "wscd/text/utf8.hpp"

using namespace wscd;
using namespace wscd::eval;
using data::Label;

namespace {

constexpr Label C = Label::cognate;
constexpr Label N = Label::non_cognate;

std::size_t dp_oracle(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

std::u32string random_word(Rng& rng) {
  std::u32string w(rng.index(8), U'a');
  for (auto& c : w) c = U"abcé"[rng.index(4)];
  return w;
}

}  // namespace

TEST_SUITE("scores") {
  TEST_CASE("closed forms") {
    CHECK(f_score({10, 0, 0, 5}).f == 1);
    CHECK(f_score({0, 3, 4, 5}).f == 0);
    const auto s = f_score({6, 2, 4, 0});
    CHECK(s.precision == doctest::Approx(0.75));
    CHECK(s.recall == doctest::Approx(0.6));
    CHECK(s.f == doctest::Approx(2.0 / 3.0));
    const auto empty = f_score({});
    CHECK(empty.precision == 0);
    CHECK(empty.recall == 0);
    CHECK(empty.f == 0);
  }

  TEST_CASE("confusion counting") {
    const std::vector<Label> pred{C, C, N, N, C};
    const std::vector<Label> truth{C, N, C, N, C};
    const auto c = confusion(pred, truth);
    CHECK(c == ConfusionCounts{2, 1, 1, 1});
    CHECK(c.total() == 5);
    CHECK_THROWS(confusion(std::span(pred).first(2), truth));
  }

  TEST_CASE("F never decreases when tp grows") {
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
      ConfusionCounts c{rng.index(20), rng.index(20), rng.index(20), rng.index(20)};
      const double before = f_score(c).f;
      ++c.tp;
      CHECK(f_score(c).f >= before);
    }
  }
}

TEST_SUITE("cluster mapping") {
  TEST_CASE("aligned, inverted and tied clusters") {
    const std::vector<Label> labels{C, C, N, N};
    const std::vector<std::size_t> aligned{1, 1, 0, 0};
    const auto id = map_clusters(aligned, labels);
    CHECK_FALSE(id.swapped());
    CHECK(id.mapping_accuracy == 1);

    const std::vector<std::size_t> inverted{0, 0, 1, 1};
    const auto sw = map_clusters(inverted, labels);
    CHECK(sw.swapped());
    CHECK(sw.mapping_accuracy == 1);
    CHECK(sw.apply(inverted) == labels);

    const std::vector<std::size_t> tied{0, 1, 0, 1};
    CHECK_FALSE(map_clusters(tied, labels).swapped());
  }

  TEST_CASE("one empty cluster takes the majority") {
    const std::vector<Label> labels{C, C, C, N};
    const std::vector<std::size_t> all_zero{0, 0, 0, 0};
    const auto m = map_clusters(all_zero, labels);
    CHECK(m.apply(0) == C);
    CHECK(m.apply(1) == N);
    CHECK_FALSE(m.warnings.empty());
  }

  TEST_CASE("mapped F is invariant to swapping cluster ids") {
    Rng rng(12);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Label> labels;
      std::vector<std::size_t> ids, flipped;
      for (int i = 0; i < 30; ++i) {
        labels.push_back(rng.bernoulli(0.5) ? C : N);
        ids.push_back(rng.index(2));
        flipped.push_back(1 - ids.back());
      }
      // An exact accuracy tie resolves to the identity for both id orders.
      std::size_t agree = 0;
      for (std::size_t i = 0; i < ids.size(); ++i) agree += data::label_index(labels[i]) == ids[i];
      if (2 * agree == ids.size()) continue;
      ++checked;
      const double a = f_score(confusion(map_clusters(ids, labels).apply(ids), labels)).f;
      const double b = f_score(confusion(map_clusters(flipped, labels).apply(flipped), labels)).f;
      CHECK(a == b);
    }
    CHECK(checked > 80);
  }
}

TEST_SUITE("orthographic") {
  TEST_CASE("closed forms") {
    CHECK(levenshtein(U"kitten", U"sitting") == 3);
    CHECK(orthographic_similarity("kitten", "sitting") == doctest::Approx(1.0 - 3.0 / 7.0));
    CHECK(orthographic_similarity("abc", "abc") == 1);
    CHECK(orthographic_similarity("a", "z") == 0);
    CHECK(orthographic_similarity("", "") == 1);
    // composed and decomposed accents compare equal after NFC
    CHECK(orthographic_similarity("nuachtán", "nuachta\xcc\x81n") == 1);
  }

  TEST_CASE("levenshtein against the DP table; similarity symmetric and bounded") {
    Rng rng(6);
    for (int i = 0; i < 2000; ++i) {
      const auto a = random_word(rng), b = random_word(rng);
      CHECK(levenshtein(a, b) == dp_oracle(a, b));
      const auto sa = text::encode_utf8(a), sb = text::encode_utf8(b);
      const double s = orthographic_similarity(sa, sb);
      CHECK(s == orthographic_similarity(sb, sa));
      CHECK(s >= 0);
      CHECK(s <= 1);
    }
  }

  TEST_CASE("threshold prediction and fitting") {
    const std::vector<double> sims{0.9, 0.8, 0.4, 0.3, 0.85};
    const std::vector<Label> labels{C, C, N, N, N};
    CHECK(threshold_predict(sims, 0.8) == std::vector<Label>{C, C, N, N, C});
    const auto fit = fit_threshold(sims, labels);
    // 0.8 keeps both cognates and one false positive
    CHECK(fit.threshold == doctest::Approx(0.8));
    CHECK(fit.f == doctest::Approx(0.8));

    const std::vector<double> flat{0.5, 0.7};
    const std::vector<Label> both{C, C};
    CHECK(fit_threshold(flat, both).threshold == doctest::Approx(0.5));
    // F is 0 everywhere, so the starting threshold 1 is kept
    const std::vector<Label> none{N, N};
    CHECK(fit_threshold(flat, none).threshold == 1);

    const std::vector<data::WordPair> pairs{{"abc", "abc"}, {"a", "z"}};
    CHECK(orthographic_baseline(pairs, 1.0) == std::vector<Label>{C, N});
  }
}

TEST_SUITE("welch") {
  TEST_CASE("reference instance") {
    const std::vector<double> a{27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1,
                                21.9, 22.6, 23.1, 19.6, 19.0, 21.7, 21.4};
    const std::vector<double> b{27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8, 22.0,
                                24.8, 20.2, 21.9, 22.1, 22.9, 20.5, 24.4};
    const auto r = welch_t_test(a, b);
    CHECK(r.t == doctest::Approx(-2.455356398286006).epsilon(1e-10));
    CHECK(r.df == doctest::Approx(24.988529290231416).epsilon(1e-10));
    CHECK(r.p == doctest::Approx(0.021378001462866985).epsilon(1e-8));
    CHECK_FALSE(r.significant);
    CHECK(welch_t_test(a, b, 0.05).significant);
  }

  TEST_CASE("identical, separated and degenerate samples") {
    const std::vector<double> a{0.61, 0.64, 0.60, 0.66, 0.63};
    CHECK(welch_t_test(a, a).p == doctest::Approx(1.0));
    std::vector<double> b = a;
    for (auto& x : b) x += 100;
    CHECK(welch_t_test(b, a).p < 0.01);
    CHECK(welch_t_test(b, a).significant);

    const std::vector<double> c1{1, 1, 1}, c2{2, 2, 2};
    CHECK(welch_t_test(c1, c2).degenerate);
    CHECK(welch_t_test(c1, c2).p == 0);
    CHECK(welch_t_test(c1, c1).p == 1);
    CHECK_THROWS_AS(welch_t_test(std::span(a).first(1), a), PreconditionError);
  }
}

TEST_SUITE("reports") {
  TEST_CASE("JSON round trip") {
    EvalReport r;
    r.method = "weakly";
    r.language_pair = "hi-mr";
    r.config_hash = "ce013625030ba8dba906f756967f9e9ca394464a";
    r.seed = 42;
    r.notes = {"fit-threshold baseline"};
    for (std::size_t k = 0; k < 3; ++k) {
      FoldResult f;
      f.fold = k;
      f.seed = 42;
      f.counts = {5 + k, 2, 1, 7};
      f.scores = f_score(f.counts);
      r.folds.push_back(f);
    }
    const auto back = EvalReport::from_json(r.to_json());
    CHECK(back.method == r.method);
    CHECK(back.language_pair == r.language_pair);
    CHECK(back.config_hash == r.config_hash);
    CHECK(back.seed == 42);
    CHECK(back.notes == r.notes);
    CHECK(back.f_values() == r.f_values());
    CHECK(back.mean_f() == doctest::Approx(r.mean_f()));
    CHECK(back.folds[2].counts == r.folds[2].counts);
    CHECK_THROWS_AS(EvalReport::from_json("[1,2"), FormatError);
  }

  TEST_CASE("result table layout") {
    ResultTable t;
    t.add("Orthographic Similarity", "hi-mr", 0.25);
    t.add("weakly", "hi-mr", 0.8123);
    t.add("weakly", "ga-gd", 0.7);
    const auto text = t.render(2);
    CHECK(text.find("Orthographic Similarity") < text.find("weakly"));
    CHECK(text.find("hi-mr") < text.find("ga-gd"));
    CHECK(text.find("0.81") != std::string::npos);
    CHECK(text.find("0.25") != std::string::npos);
  }
}
