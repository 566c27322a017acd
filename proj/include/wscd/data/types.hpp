#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wscd::data {

enum class Label : std::uint8_t { non_cognate = 0, cognate = 1 };

inline std::size_t label_index(Label l) { return static_cast<std::size_t>(l); }
inline Label label_from_index(std::size_t i) { return i ? Label::cognate : Label::non_cognate; }

// Cross-lingual word pair without any label: the only input type the
// label-free training paths accept.
struct WordPair {
  std::string first;   // pivot-side word
  std::string second;  // other-language word
  friend auto operator<=>(const WordPair&, const WordPair&) = default;
};

struct CandidatePair {
  WordPair words;
  std::optional<Label> label;
  friend bool operator==(const CandidatePair&, const CandidatePair&) = default;
};

enum class Source { real, synthetic };

// Language families with separately tuned learning rates.
enum class LanguageFamily { indian, celtic, south_african };

// Accepts "indian", "celtic", "south-african"/"south_african". Throws ConfigError.
LanguageFamily parse_family(const std::string& name);
std::string family_name(LanguageFamily family);

struct CognateDataset {
  std::vector<CandidatePair> pairs;
  std::string lang_a;
  std::string lang_b;
  Source source = Source::real;

  std::size_t size() const { return pairs.size(); }
  std::size_t count(Label label) const;
  std::size_t unlabeled() const;
  std::vector<Label> labels() const;  // throws if any pair is unlabeled
  std::vector<WordPair> word_pairs() const;
  std::vector<WordPair> word_pairs(std::span<const std::size_t> indices) const;
};

// Monolingual morphologically related pair (lemma, inflected form).
struct MorphPair {
  std::string word1;
  std::string word2;
  std::string language;
  friend bool operator==(const MorphPair&, const MorphPair&) = default;
};

// Drops labels: the only route from labeled data into label-free training.
std::vector<WordPair> strip_labels(std::span<const CandidatePair> pairs);

}  // namespace wscd::data
