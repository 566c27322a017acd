#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wscd/data/types.hpp"
#include "wscd/rng.hpp"

namespace wscd::data {

// Target proportion of cognates to non-cognates, e.g. 60:40.
struct NegativeRatio {
  double cognate = 1;
  double non_cognate = 1;

  // Parses "A:B" with positive numbers. Throws ConfigError.
  static NegativeRatio parse(const std::string& text);
  std::size_t negatives_for(std::size_t positives) const;
};

struct NegativeSet {
  std::vector<CandidatePair> pairs;  // positives first, then negatives
  std::size_t requested = 0;
  std::size_t generated = 0;
  std::vector<std::string> warnings;
};

// Pairs word1 of one cognate with word2 of a different cognate. Never emits a
// known cognate pair or a duplicate. Falls short (with a warning) when the
// ratio cannot be met.
NegativeSet build_negatives(std::span<const WordPair> cognates, NegativeRatio ratio, Rng& rng);

struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::size_t>> folds;  // sorted test indices per fold

  std::vector<std::size_t> test_indices(std::size_t fold) const { return folds.at(fold); }
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

// Every class is shuffled and dealt round-robin, continuing the deal where
// the previous class stopped, so per-fold class counts are floor or ceil of
// n_c / k. Throws PreconditionError if a class has fewer than k members.
FoldPlan stratified_kfold(std::span<const Label> labels, std::size_t k, std::uint64_t seed);
// Label-free variant for paths that must not read labels.
FoldPlan kfold(std::size_t n, std::size_t k, std::uint64_t seed);

struct SyntheticSpec {
  std::size_t lexicon_size = 240;
  std::size_t min_len = 4;
  std::size_t max_len = 8;
  std::string consonants = "bdgklmnprstv";
  std::string vowels = "aeiou";
  // Sound-shift map applied to the pivot word to form its cognate partner.
  std::map<char32_t, char32_t> shift = {{U'a', U'o'}, {U'k', U'g'}, {U't', U'd'}};
  std::size_t edit_budget = 1;
  double cognate_ratio = 0.5;          // fraction of emitted pairs that are cognates
  std::vector<std::string> suffixes = {"an", "ein", "ach", "uil", "eas", "ith"};
  // Probability that either side of a candidate pair carries an inflection.
  double inflection_rate = 0.0;
  std::size_t morph_stems = 300;       // pivot stems used for morphology pairs
  std::string lang_a = "syn-a";
  std::string lang_b = "syn-b";

  void validate() const;  // throws ConfigError
};

struct SyntheticCorpus {
  CognateDataset dataset;
  std::vector<MorphPair> morphology;
};

std::string apply_shift(const std::string& word, const std::map<char32_t, char32_t>& shift);
SyntheticCorpus gen_synthetic(const SyntheticSpec& spec, Rng& rng);

struct Manifest {
  std::string lang_a;
  std::string lang_b;
  std::size_t cognates = 0;
  std::size_t non_cognates = 0;
  Source source = Source::real;

  static Manifest of(const CognateDataset& ds);
  std::string to_json() const;
  static Manifest from_json(const std::string& text);
  static Manifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

struct LoadReport {
  std::size_t skipped_malformed = 0;
  std::size_t duplicates = 0;
  std::vector<std::string> warnings;
};

// `word1<TAB>word2<TAB>label` rows, label in {1, 0}; a row without a label
// column is kept unlabeled. Malformed rows are skipped and counted; invalid
// UTF-8 throws InputError. When a manifest is given its class counts must
// match (DataError otherwise).
CognateDataset read_cognates(std::istream& in, LoadReport* report = nullptr);
CognateDataset load_cognates(const std::filesystem::path& path, LoadReport* report = nullptr,
                             const std::optional<Manifest>& manifest = std::nullopt);
void write_cognates(std::ostream& out, const CognateDataset& ds);
void save_cognates(const std::filesystem::path& path, const CognateDataset& ds);

// UniMorph `lemma<TAB>inflected[<TAB>features]`; the features column is
// ignored. Blank/malformed lines are skipped and duplicates dropped.
std::vector<MorphPair> pairs_from_unimorph(std::istream& in, const std::string& language,
                                           LoadReport* report = nullptr);
std::vector<MorphPair> load_unimorph(const std::filesystem::path& path,
                                     const std::string& language, LoadReport* report = nullptr);
void write_unimorph(std::ostream& out, std::span<const MorphPair> pairs);

// Resize by `percent` (e.g. -30, 0, +15): down-sampling keeps a uniform
// subset without replacement in original order; up-sampling appends draws
// with replacement.
std::vector<MorphPair> morph_resample(std::span<const MorphPair> pairs, int percent, Rng& rng);

}  // namespace wscd::data
