#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wscd/data/types.hpp"

namespace wscd::eval {

using data::Label;

// Binary confusion counts with "cognate" as the positive class.
struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts confusion(std::span<const Label> predicted, std::span<const Label> truth);

struct Scores {
  double precision = 0;
  double recall = 0;
  double f = 0;
};

// Any zero denominator yields 0 for that quantity.
Scores f_score(const ConfusionCounts& c);

// Frozen cluster-id -> label assignment for a two-cluster model.
struct ClusterMap {
  std::array<Label, 2> label_of{Label::non_cognate, Label::cognate};
  double mapping_accuracy = 0;
  std::vector<std::string> warnings;

  bool swapped() const { return label_of[0] == Label::cognate; }
  Label apply(std::size_t cluster) const { return label_of.at(cluster); }
  std::vector<Label> apply(std::span<const std::size_t> clusters) const;
};

// Picks whichever of the two bijections scores higher accuracy on the mapping
// split; a tie keeps the identity (cluster c -> label c). When one cluster is
// empty the populated cluster takes the split's majority label and the empty
// one the other label.
ClusterMap map_clusters(std::span<const std::size_t> clusters, std::span<const Label> labels);

// Unit-cost edit distance over codepoints.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);
// 1 - levenshtein / max(len) on NFC codepoints; two empty strings give 1.
double orthographic_similarity(std::string_view a, std::string_view b);

std::vector<double> orthographic_similarities(std::span<const data::WordPair> pairs);
std::vector<Label> threshold_predict(std::span<const double> similarities, double threshold);
std::vector<Label> orthographic_baseline(std::span<const data::WordPair> pairs, double threshold);

struct ThresholdFit {
  double threshold = 1;
  double f = 0;
};

// Threshold in [0,1] maximizing F on the given split. Candidates are 1 and
// the observed similarity values; among equal F the highest threshold wins.
ThresholdFit fit_threshold(std::span<const double> similarities, std::span<const Label> labels);

struct WelchResult {
  double t = 0;
  double df = 0;
  double p = 1;
  bool significant = false;
  bool degenerate = false;  // both samples had zero variance
};

// Two-sample Welch t-test with a two-sided p-value. Throws
// PreconditionError for fewer than two samples on either side.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b,
                         double alpha = 0.01);

struct FoldResult {
  std::size_t fold = 0;
  std::uint64_t seed = 0;
  ConfusionCounts counts;
  Scores scores;
};

struct EvalReport {
  std::string method;         // e.g. "weakly", "baseline"
  std::string language_pair;  // "a-b"
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  std::vector<std::string> notes;

  double mean_f() const;
  std::vector<double> f_values() const;
  std::string to_json() const;
  static EvalReport from_json(std::string_view text);
};

// Plain-text grid of mean F values: rows are methods, columns language pairs.
class ResultTable {
 public:
  void add(const std::string& method, const std::string& column, double f);
  void add(const EvalReport& report) { add(report.method, report.language_pair, report.mean_f()); }
  std::string render(int precision = 2) const;

 private:
  std::vector<std::string> methods_;
  std::vector<std::string> columns_;
  std::map<std::pair<std::string, std::string>, double> cells_;
};

}  // namespace wscd::eval
