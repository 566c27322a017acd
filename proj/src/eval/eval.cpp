#include "wscd/eval/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "wscd/error.hpp"
#include "wscd/text/utf8.hpp"

namespace wscd::eval {

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

ConfusionCounts confusion(std::span<const Label> predicted, std::span<const Label> truth) {
  if (predicted.size() != truth.size())
    throw DimensionError("confusion: prediction and label counts differ");
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] == Label::cognate;
    const bool t = truth[i] == Label::cognate;
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Scores f_score(const ConfusionCounts& c) {
  Scores s;
  if (c.tp + c.fp) s.precision = double(c.tp) / double(c.tp + c.fp);
  if (c.tp + c.fn) s.recall = double(c.tp) / double(c.tp + c.fn);
  if (s.precision + s.recall > 0) s.f = 2 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

// ---- cluster mapping --------------------------------------------------------

std::vector<Label> ClusterMap::apply(std::span<const std::size_t> clusters) const {
  std::vector<Label> out;
  out.reserve(clusters.size());
  for (std::size_t c : clusters) out.push_back(apply(c));
  return out;
}

ClusterMap map_clusters(std::span<const std::size_t> clusters, std::span<const Label> labels) {
  if (clusters.size() != labels.size())
    throw DimensionError("map_clusters: cluster and label counts differ");
  if (clusters.empty()) throw PreconditionError("map_clusters: empty mapping split");

  // agree[c][l] = members of cluster c carrying label l
  std::size_t agree[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (clusters[i] > 1) throw PreconditionError("map_clusters: cluster id outside {0,1}");
    ++agree[clusters[i]][data::label_index(labels[i])];
  }
  const double n = double(clusters.size());
  ClusterMap m;
  const std::size_t size0 = agree[0][0] + agree[0][1];
  const std::size_t size1 = agree[1][0] + agree[1][1];
  if (size0 == 0 || size1 == 0) {
    const std::size_t full = size0 ? 0 : 1;
    const std::size_t pos = agree[full][1], neg = agree[full][0];
    const Label majority = pos > neg ? Label::cognate
                         : neg > pos ? Label::non_cognate
                                     : data::label_from_index(full);
    m.label_of[full] = majority;
    m.label_of[1 - full] = majority == Label::cognate ? Label::non_cognate : Label::cognate;
    m.mapping_accuracy = double(std::max(pos, neg)) / n;
    m.warnings.push_back("cluster " + std::to_string(1 - full) +
                         " is empty on the mapping split; cluster " + std::to_string(full) +
                         " mapped to the majority label");
    return m;
  }
  const std::size_t identity = agree[0][0] + agree[1][1];
  const std::size_t swap = agree[0][1] + agree[1][0];
  if (swap > identity) m.label_of = {Label::cognate, Label::non_cognate};
  m.mapping_accuracy = double(std::max(identity, swap)) / n;
  return m;
}

// ---- orthographic baseline ----------------------------------------------------

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double orthographic_similarity(std::string_view a, std::string_view b) {
  const auto ua = text::decode_utf8(text::nfc(a));
  const auto ub = text::decode_utf8(text::nfc(b));
  const std::size_t longest = std::max(ua.size(), ub.size());
  if (longest == 0) return 1.0;
  return 1.0 - double(levenshtein(ua, ub)) / double(longest);
}

std::vector<double> orthographic_similarities(std::span<const data::WordPair> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(orthographic_similarity(p.first, p.second));
  return out;
}

std::vector<Label> threshold_predict(std::span<const double> similarities, double threshold) {
  std::vector<Label> out;
  out.reserve(similarities.size());
  for (double s : similarities) out.push_back(s >= threshold ? Label::cognate : Label::non_cognate);
  return out;
}

std::vector<Label> orthographic_baseline(std::span<const data::WordPair> pairs, double threshold) {
  if (!(threshold >= 0 && threshold <= 1))
    throw PreconditionError("orthographic_baseline: threshold must lie in [0,1]");
  return threshold_predict(orthographic_similarities(pairs), threshold);
}

ThresholdFit fit_threshold(std::span<const double> similarities, std::span<const Label> labels) {
  if (similarities.size() != labels.size())
    throw DimensionError("fit_threshold: similarity and label counts differ");
  // Sweep thresholds from high to low; predictions at threshold s are all
  // items with similarity >= s, so counts update incrementally.
  std::vector<std::size_t> order(similarities.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return similarities[a] > similarities[b]; });
  std::size_t positives = 0;
  for (Label l : labels) positives += l == Label::cognate;

  ThresholdFit best;
  ConfusionCounts c;
  c.fn = positives;
  c.tn = labels.size() - positives;
  for (std::size_t i = 0; i < order.size();) {
    const double s = similarities[order[i]];
    for (; i < order.size() && similarities[order[i]] == s; ++i) {
      if (labels[order[i]] == Label::cognate) {
        ++c.tp;
        --c.fn;
      } else {
        ++c.fp;
        --c.tn;
      }
    }
    const double f = f_score(c).f;
    if (f > best.f) best = {std::clamp(s, 0.0, 1.0), f};
  }
  return best;
}

// ---- significance ------------------------------------------------------------

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b, double alpha) {
  if (a.size() < 2 || b.size() < 2)
    throw PreconditionError("welch_t_test needs at least two samples per side");
  auto moments = [](std::span<const double> x) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
    double ss = 0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / double(x.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = double(a.size()), nb = double(b.size());
  const double sa = va / na, sb = vb / nb;

  WelchResult r;
  if (sa + sb == 0) {
    r.degenerate = true;
    r.p = ma == mb ? 1.0 : 0.0;
    r.t = ma == mb ? 0.0 : std::copysign(INFINITY, ma - mb);
    r.significant = r.p < alpha;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(sa + sb);
  r.df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1) + sb * sb / (nb - 1));
  const boost::math::students_t dist(r.df);
  r.p = 2 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t)));
  r.p = std::min(r.p, 1.0);
  r.significant = r.p < alpha;
  return r;
}

// ---- reports -------------------------------------------------------------------

std::vector<double> EvalReport::f_values() const {
  std::vector<double> out;
  for (const auto& f : folds) out.push_back(f.scores.f);
  return out;
}

double EvalReport::mean_f() const {
  if (folds.empty()) return 0;
  const auto f = f_values();
  return std::accumulate(f.begin(), f.end(), 0.0) / double(f.size());
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["language_pair"] = language_pair;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["mean_f"] = mean_f();
  auto& arr = j["folds"] = nlohmann::ordered_json::array();
  for (const auto& f : folds) {
    nlohmann::ordered_json o;
    o["fold"] = f.fold;
    o["seed"] = f.seed;
    o["tp"] = f.counts.tp;
    o["fp"] = f.counts.fp;
    o["fn"] = f.counts.fn;
    o["tn"] = f.counts.tn;
    o["precision"] = f.scores.precision;
    o["recall"] = f.scores.recall;
    o["f"] = f.scores.f;
    arr.push_back(std::move(o));
  }
  j["notes"] = notes;
  return j.dump(2);
}

EvalReport EvalReport::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvalReport r;
    r.method = j.at("method").get<std::string>();
    r.language_pair = j.at("language_pair").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& o : j.at("folds")) {
      FoldResult f;
      f.fold = o.at("fold").get<std::size_t>();
      f.seed = o.at("seed").get<std::uint64_t>();
      f.counts = {o.at("tp").get<std::size_t>(), o.at("fp").get<std::size_t>(),
                  o.at("fn").get<std::size_t>(), o.at("tn").get<std::size_t>()};
      f.scores = f_score(f.counts);
      r.folds.push_back(f);
    }
    r.notes = j.value("notes", std::vector<std::string>{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("eval report: ") + e.what());
  }
}

void ResultTable::add(const std::string& method, const std::string& column, double f) {
  if (std::find(methods_.begin(), methods_.end(), method) == methods_.end())
    methods_.push_back(method);
  if (std::find(columns_.begin(), columns_.end(), column) == columns_.end())
    columns_.push_back(column);
  cells_[{method, column}] = f;
}

std::string ResultTable::render(int precision) const {
  std::size_t first = std::string("Method").size();
  for (const auto& m : methods_) first = std::max(first, m.size());
  std::vector<std::size_t> widths;
  for (const auto& c : columns_) widths.push_back(std::max<std::size_t>(c.size(), precision + 2));

  std::ostringstream out;
  out << std::left << std::setw(int(first)) << "Method";
  for (std::size_t i = 0; i < columns_.size(); ++i)
    out << "  " << std::right << std::setw(int(widths[i])) << columns_[i];
  out << '\n' << std::string(first, '-');
  for (std::size_t w : widths) out << "  " << std::string(w, '-');
  out << '\n';
  for (const auto& m : methods_) {
    out << std::left << std::setw(int(first)) << m;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      out << "  " << std::right << std::setw(int(widths[i]));
      if (auto it = cells_.find({m, columns_[i]}); it != cells_.end())
        out << std::fixed << std::setprecision(precision) << it->second;
      else
        out << "-";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace wscd::eval
