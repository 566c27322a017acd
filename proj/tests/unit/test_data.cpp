#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "wscd/data/dataset.hpp"
#include "wscd/error.hpp"

using namespace wscd;
using namespace wscd::data;

namespace {

std::vector<WordPair> numbered_cognates(std::size_t n) {
  std::vector<WordPair> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({"a" + std::to_string(i), "b" + std::to_string(i)});
  return out;
}

std::vector<Label> class_labels(std::size_t pos, std::size_t neg) {
  std::vector<Label> out(pos, Label::cognate);
  out.insert(out.end(), neg, Label::non_cognate);
  return out;
}

// Checks partition and the per-class floor/ceil bound of a fold plan.
void check_stratified(const FoldPlan& plan, std::span<const Label> labels) {
  const std::size_t k = plan.k;
  std::vector<std::size_t> seen;
  for (const auto& f : plan.folds) seen.insert(seen.end(), f.begin(), f.end());
  std::sort(seen.begin(), seen.end());
  REQUIRE(seen.size() == labels.size());
  for (std::size_t i = 0; i < seen.size(); ++i) REQUIRE(seen[i] == i);

  for (Label c : {Label::cognate, Label::non_cognate}) {
    const double ideal = double(std::count(labels.begin(), labels.end(), c)) / double(k);
    for (const auto& f : plan.folds) {
      const auto in_fold = std::count_if(f.begin(), f.end(), [&](auto i) { return labels[i] == c; });
      CHECK(std::abs(double(in_fold) - ideal) <= 1.0);
    }
  }
}

}  // namespace

TEST_SUITE("negatives") {
  TEST_CASE("two cognates allow only the crossed pairs") {
    const std::vector<WordPair> cog{{"a", "b"}, {"c", "d"}};
    Rng rng(1);
    const auto set = build_negatives(cog, {1, 1}, rng);
    CHECK(set.requested == 2);
    CHECK(set.generated == 2);
    std::set<WordPair> neg;
    for (const auto& p : set.pairs)
      if (p.label == Label::non_cognate) neg.insert(p.words);
    CHECK(neg == std::set<WordPair>{{"a", "d"}, {"c", "b"}});
  }

  TEST_CASE("shortfall warns instead of duplicating") {
    const std::vector<WordPair> cog{{"a", "b"}, {"c", "d"}};
    Rng rng(1);
    const auto set = build_negatives(cog, {1, 3}, rng);
    CHECK(set.requested == 6);
    CHECK(set.generated == 2);
    CHECK(set.warnings.size() == 1);
    CHECK_THROWS_AS(build_negatives(std::span(cog).first(1), {1, 1}, rng), PreconditionError);
  }

  TEST_CASE("negatives never coincide with positives and follow the ratio") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      // Shared second words create crossed pairs that equal real cognates.
      std::vector<WordPair> cog;
      for (std::size_t i = 0; i < 30; ++i)
        cog.push_back({"w" + std::to_string(i % 10), "v" + std::to_string(i / 3)});
      std::sort(cog.begin(), cog.end());
      cog.erase(std::unique(cog.begin(), cog.end()), cog.end());
      Rng rng(seed);
      const auto set = build_negatives(cog, {60, 40}, rng);
      const std::set<WordPair> pos(cog.begin(), cog.end());
      std::set<WordPair> neg;
      for (const auto& p : set.pairs) {
        if (p.label != Label::non_cognate) continue;
        CHECK_FALSE(pos.contains(p.words));
        CHECK(neg.insert(p.words).second);
      }
      CHECK(set.requested == NegativeRatio{60, 40}.negatives_for(cog.size()));
    }
  }

  TEST_CASE("same seed gives the same negatives") {
    const auto cog = numbered_cognates(50);
    Rng a(9), b(9);
    CHECK(build_negatives(cog, {1, 1}, a).pairs == build_negatives(cog, {1, 1}, b).pairs);
  }

  TEST_CASE("ratio parsing") {
    const auto r = NegativeRatio::parse("60:40");
    CHECK(r.cognate == 60);
    CHECK(r.non_cognate == 40);
    CHECK(r.negatives_for(15726) == 10484);
    CHECK(NegativeRatio::parse("15726:15983").negatives_for(15726) == 15983);
    for (const char* bad : {"60", "a:b", "0:1", "1:-1", "1:2x", ""})
      CHECK_THROWS_AS(NegativeRatio::parse(bad), ConfigError);
  }
}

TEST_SUITE("folds") {
  TEST_CASE("balanced classes split evenly") {
    const auto labels = class_labels(10, 10);
    const auto plan = stratified_kfold(labels, 5, 3);
    check_stratified(plan, labels);
    for (const auto& f : plan.folds) CHECK(f.size() == 4);
  }

  TEST_CASE("small uneven classes") {
    const auto labels = class_labels(14, 9);
    check_stratified(stratified_kfold(labels, 5, 1), labels);
    CHECK_THROWS_AS(stratified_kfold(class_labels(14, 4), 5, 1), PreconditionError);
  }

  TEST_CASE("bound holds for random class sizes") {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t k = 2 + rng.index(9);
      const auto labels = class_labels(k + rng.index(60), k + rng.index(60));
      std::vector<Label> shuffled = labels;
      rng.shuffle(std::span(shuffled));
      check_stratified(stratified_kfold(shuffled, k, trial), shuffled);
    }
  }

  TEST_CASE("train and test indices are complementary; seeds are reproducible") {
    const auto labels = class_labels(12, 8);
    const auto plan = stratified_kfold(labels, 4, 5);
    CHECK(plan.folds == stratified_kfold(labels, 4, 5).folds);
    for (std::size_t f = 0; f < 4; ++f) {
      auto all = plan.train_indices(f);
      const auto test = plan.test_indices(f);
      all.insert(all.end(), test.begin(), test.end());
      std::sort(all.begin(), all.end());
      CHECK(all.size() == 20);
      CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    }
    const auto free = kfold(23, 5, 2);
    std::size_t total = 0;
    for (const auto& f : free.folds) {
      CHECK((f.size() == 4 || f.size() == 5));
      total += f.size();
    }
    CHECK(total == 23);
    CHECK_THROWS_AS(kfold(3, 5, 1), PreconditionError);
  }
}

TEST_SUITE("synthetic") {
  TEST_CASE("shift map application") {
    CHECK(apply_shift("banana", {{U'a', U'o'}}) == "bonono");
  }

  TEST_CASE("identity shift and zero budget give identical cognates") {
    SyntheticSpec spec;
    spec.shift.clear();
    spec.edit_budget = 0;
    spec.lexicon_size = 40;
    spec.morph_stems = 10;
    Rng rng(2);
    const auto corpus = gen_synthetic(spec, rng);
    std::size_t pos = 0;
    for (const auto& p : corpus.dataset.pairs)
      if (p.label == Label::cognate) {
        CHECK(p.words.first == p.words.second);
        ++pos;
      }
    CHECK(pos == 40);
  }

  TEST_CASE("reproducible, duplicate-free and morphology by suffixation") {
    SyntheticSpec spec;
    spec.inflection_rate = 0.5;
    Rng a(4), b(4);
    const auto x = gen_synthetic(spec, a);
    const auto y = gen_synthetic(spec, b);
    CHECK(x.dataset.pairs == y.dataset.pairs);
    CHECK(x.morphology == y.morphology);
    std::set<WordPair> uniq;
    for (const auto& p : x.dataset.pairs) CHECK(uniq.insert(p.words).second);
    CHECK(x.dataset.count(Label::cognate) == x.dataset.count(Label::non_cognate));
    for (const auto& m : x.morphology) {
      REQUIRE(m.word2.size() > m.word1.size());
      CHECK(m.word2.compare(0, m.word1.size(), m.word1) == 0);
      const std::string suffix = m.word2.substr(m.word1.size());
      CHECK(std::find(spec.suffixes.begin(), spec.suffixes.end(), suffix) != spec.suffixes.end());
    }
    CHECK(x.morphology.size() >= spec.morph_stems);
  }

  TEST_CASE("invalid specs") {
    SyntheticSpec spec;
    spec.min_len = 9;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = {};
    spec.cognate_ratio = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = {};
    spec.inflection_rate = 1.5;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
  }
}

TEST_SUITE("loaders") {
  TEST_CASE("cognate TSV with malformed, unlabeled and duplicate rows") {
    std::istringstream in(
        "nuachtán\tnuachtáin\t1\n"
        "missing-second\n"
        "x\ty\t7\n"
        "hello\tworld\t0\n"
        "nuachtán\tnuachtáin\t1\n"
        "bare\tpair\n"
        "\n");
    LoadReport rep;
    const auto ds = read_cognates(in, &rep);
    CHECK(ds.size() == 3);
    CHECK(ds.count(Label::cognate) == 1);
    CHECK(ds.count(Label::non_cognate) == 1);
    CHECK(ds.unlabeled() == 1);
    CHECK(rep.skipped_malformed == 2);
    CHECK(rep.duplicates == 1);
    CHECK_THROWS_AS(ds.labels(), DataError);
  }

  TEST_CASE("empty file and bad encoding") {
    std::istringstream empty("");
    LoadReport rep;
    CHECK(read_cognates(empty, &rep).size() == 0);
    CHECK_FALSE(rep.warnings.empty());
    std::istringstream bad("a\t\xff\t1\n");
    CHECK_THROWS_AS(read_cognates(bad), InputError);
  }

  TEST_CASE("file round trip and manifest check") {
    const auto dir = std::filesystem::temp_directory_path() / "wscd_test_data";
    std::filesystem::create_directories(dir);
    CognateDataset ds;
    ds.lang_a = "hi";
    ds.lang_b = "mr";
    ds.pairs = {{{"a", "b"}, Label::cognate}, {{"c", "d"}, Label::non_cognate},
                {{"e", "f"}, Label::cognate}};
    save_cognates(dir / "d.tsv", ds);
    const auto back = load_cognates(dir / "d.tsv");
    CHECK(back.pairs == ds.pairs);

    auto m = Manifest::of(ds);
    CHECK(Manifest::from_json(m.to_json()).cognates == 2);
    CHECK(load_cognates(dir / "d.tsv", nullptr, m).size() == 3);
    m.cognates = 3;
    CHECK_THROWS_AS(load_cognates(dir / "d.tsv", nullptr, m), DataError);
    CHECK_THROWS_AS(Manifest::from_json("{"), FormatError);
    CHECK_THROWS_AS(load_cognates(dir / "absent.tsv"), InputError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("UniMorph parsing") {
    std::istringstream in(
        "nuachtán\tnuachtáin\tN;GEN;SG\n"
        "síceolaí\tsíceolaithe\tN;PL\n"
        "nuachtán\tnuachtáin\tN;NOM;PL\n"
        "broken\n"
        "\n");
    LoadReport rep;
    const auto pairs = pairs_from_unimorph(in, "gle", &rep);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0] == MorphPair{"nuachtán", "nuachtáin", "gle"});
    CHECK(rep.duplicates == 1);
    CHECK(rep.skipped_malformed == 1);
  }

  TEST_CASE("label stripping") {
    const std::vector<CandidatePair> pairs{{{"a", "b"}, Label::cognate}, {{"c", "d"}, std::nullopt}};
    CHECK(strip_labels(pairs) == std::vector<WordPair>{{"a", "b"}, {"c", "d"}});
  }
}

TEST_SUITE("resample") {
  std::vector<MorphPair> hundred() {
    std::vector<MorphPair> out;
    for (int i = 0; i < 100; ++i) out.push_back({"s" + std::to_string(i), "t", "x"});
    return out;
  }

  TEST_CASE("grid sizes") {
    const auto base = hundred();
    Rng rng(1);
    CHECK(morph_resample(base, 0, rng) == base);
    const auto down = morph_resample(base, -30, rng);
    CHECK(down.size() == 70);
    std::set<std::string> names;
    for (const auto& p : down) CHECK(names.insert(p.word1).second);
    const auto up = morph_resample(base, 30, rng);
    REQUIRE(up.size() == 130);
    CHECK(std::equal(base.begin(), base.end(), up.begin()));
    CHECK_THROWS_AS(morph_resample(base, -100, rng), PreconditionError);
  }

  TEST_CASE("reproducible") {
    const auto base = hundred();
    Rng a(3), b(3);
    CHECK(morph_resample(base, -15, a) == morph_resample(base, -15, b));
  }
}

TEST_SUITE("families") {
  TEST_CASE("names") {
    CHECK(parse_family("celtic") == LanguageFamily::celtic);
    CHECK(parse_family("south-african") == LanguageFamily::south_african);
    CHECK(parse_family("south_african") == LanguageFamily::south_african);
    CHECK(family_name(LanguageFamily::indian) == "indian");
    CHECK_THROWS_AS(parse_family("germanic"), ConfigError);
  }
}
