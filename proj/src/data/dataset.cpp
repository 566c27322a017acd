#include "wscd/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wscd/error.hpp"
#include "wscd/text/utf8.hpp"

namespace wscd::data {

// ---- types ------------------------------------------------------------------

std::size_t CognateDataset::count(Label label) const {
  return static_cast<std::size_t>(std::count_if(
      pairs.begin(), pairs.end(), [label](const CandidatePair& p) { return p.label == label; }));
}

std::size_t CognateDataset::unlabeled() const {
  return static_cast<std::size_t>(std::count_if(
      pairs.begin(), pairs.end(), [](const CandidatePair& p) { return !p.label; }));
}

std::vector<Label> CognateDataset::labels() const {
  std::vector<Label> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!p.label) throw DataError("dataset contains unlabeled pairs");
    out.push_back(*p.label);
  }
  return out;
}

std::vector<WordPair> CognateDataset::word_pairs() const { return strip_labels(pairs); }

std::vector<WordPair> CognateDataset::word_pairs(std::span<const std::size_t> indices) const {
  std::vector<WordPair> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(pairs.at(i).words);
  return out;
}

std::vector<WordPair> strip_labels(std::span<const CandidatePair> pairs) {
  std::vector<WordPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.words);
  return out;
}

LanguageFamily parse_family(const std::string& name) {
  if (name == "indian") return LanguageFamily::indian;
  if (name == "celtic") return LanguageFamily::celtic;
  if (name == "south-african" || name == "south_african") return LanguageFamily::south_african;
  throw ConfigError("unknown language family: " + name);
}

std::string family_name(LanguageFamily family) {
  switch (family) {
    case LanguageFamily::indian: return "indian";
    case LanguageFamily::celtic: return "celtic";
    case LanguageFamily::south_african: return "south-african";
  }
  return "?";
}

// ---- negatives --------------------------------------------------------------

NegativeRatio NegativeRatio::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("ratio must look like A:B, got " + text);
  NegativeRatio r;
  try {
    std::size_t used = 0;
    r.cognate = std::stod(text.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("trailing");
    const std::string rest = text.substr(colon + 1);
    r.non_cognate = std::stod(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ConfigError("ratio must look like A:B, got " + text);
  }
  if (!(r.cognate > 0) || !(r.non_cognate >= 0))
    throw ConfigError("ratio parts must be positive: " + text);
  return r;
}

std::size_t NegativeRatio::negatives_for(std::size_t positives) const {
  return static_cast<std::size_t>(
      std::llround(static_cast<double>(positives) * non_cognate / cognate));
}

NegativeSet build_negatives(std::span<const WordPair> cognates, NegativeRatio ratio, Rng& rng) {
  const std::size_t n = cognates.size();
  if (n < 2) throw PreconditionError("build_negatives needs at least two cognate pairs");

  NegativeSet out;
  out.requested = ratio.negatives_for(n);
  const std::set<WordPair> positives(cognates.begin(), cognates.end());
  std::set<WordPair> emitted;
  for (const auto& c : cognates) out.pairs.push_back({c, Label::cognate});

  auto try_emit = [&](std::size_t i, std::size_t j) {
    WordPair cand{cognates[i].first, cognates[j].second};
    if (positives.contains(cand) || emitted.contains(cand)) return;
    emitted.insert(cand);
    out.pairs.push_back({std::move(cand), Label::non_cognate});
  };

  const std::size_t attempts = std::max<std::size_t>(20 * out.requested, 1000);
  for (std::size_t a = 0; a < attempts && emitted.size() < out.requested; ++a) {
    const std::size_t i = rng.index(n);
    std::size_t j = rng.index(n - 1);
    if (j >= i) ++j;
    try_emit(i, j);
  }

  constexpr std::size_t kEnumerationLimit = 4'000'000;
  if (emitted.size() < out.requested && n * (n - 1) <= kEnumerationLimit) {
    std::vector<std::pair<std::size_t, std::size_t>> all;
    all.reserve(n * (n - 1));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) all.emplace_back(i, j);
    rng.shuffle(std::span(all));
    for (const auto& [i, j] : all) {
      if (emitted.size() >= out.requested) break;
      try_emit(i, j);
    }
  }

  out.generated = emitted.size();
  if (out.generated < out.requested) {
    out.warnings.push_back("only " + std::to_string(out.generated) + " of " +
                           std::to_string(out.requested) +
                           " negatives could be formed without duplicates");
  }
  return out;
}

// ---- folds ------------------------------------------------------------------

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (f == fold) continue;
    out.insert(out.end(), folds[f].begin(), folds[f].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

void deal(std::vector<std::size_t>& members, FoldPlan& plan, std::size_t& offset, Rng& rng) {
  rng.shuffle(std::span(members));
  for (std::size_t i = 0; i < members.size(); ++i)
    plan.folds[(offset + i) % plan.k].push_back(members[i]);
  offset += members.size();
}

}  // namespace

FoldPlan stratified_kfold(std::span<const Label> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw PreconditionError("stratified_kfold needs k >= 2");
  FoldPlan plan{k, seed, std::vector<std::vector<std::size_t>>(k)};
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[label_index(labels[i])].push_back(i);
  for (const auto& members : by_class) {
    if (!members.empty() && members.size() < k) {
      throw PreconditionError("class with " + std::to_string(members.size()) +
                              " members cannot be stratified into " + std::to_string(k) +
                              " folds");
    }
  }
  Rng rng(seed);
  std::size_t offset = 0;
  for (auto& members : by_class) deal(members, plan, offset, rng);
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

FoldPlan kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw PreconditionError("kfold needs k >= 2");
  if (n < k) throw PreconditionError("kfold: fewer items than folds");
  FoldPlan plan{k, seed, std::vector<std::vector<std::size_t>>(k)};
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  Rng rng(seed);
  std::size_t offset = 0;
  deal(all, plan, offset, rng);
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

// ---- synthetic ----------------------------------------------------------------

void SyntheticSpec::validate() const {
  if (lexicon_size < 2) throw ConfigError("synthetic lexicon needs at least 2 words");
  if (min_len < 2 || min_len > max_len) throw ConfigError("synthetic word length range invalid");
  if (consonants.empty() || vowels.empty()) throw ConfigError("synthetic alphabet empty");
  if (!(cognate_ratio > 0 && cognate_ratio <= 1)) throw ConfigError("cognate_ratio must be in (0,1]");
  if (inflection_rate < 0 || inflection_rate > 1)
    throw ConfigError("inflection_rate must be in [0,1]");
  if (suffixes.empty() && (inflection_rate > 0 || morph_stems > 0))
    throw ConfigError("suffix list is empty");
}

std::string apply_shift(const std::string& word, const std::map<char32_t, char32_t>& shift) {
  std::u32string cps = text::decode_utf8(word);
  for (auto& cp : cps)
    if (auto it = shift.find(cp); it != shift.end()) cp = it->second;
  return text::encode_utf8(cps);
}

namespace {

std::string random_stem(const SyntheticSpec& spec, Rng& rng) {
  const std::size_t len = spec.min_len + rng.index(spec.max_len - spec.min_len + 1);
  std::string w;
  // Alternating consonant/vowel syllables, random start.
  bool consonant = rng.bernoulli(0.7);
  while (w.size() < len) {
    const std::string& pool = consonant ? spec.consonants : spec.vowels;
    w.push_back(pool[rng.index(pool.size())]);
    consonant = !consonant;
  }
  return w;
}

std::vector<std::string> unique_stems(const SyntheticSpec& spec, std::size_t count, Rng& rng,
                                      std::set<std::string>& taken) {
  std::vector<std::string> out;
  std::size_t guard = 0;
  while (out.size() < count) {
    std::string w = random_stem(spec, rng);
    if (taken.insert(w).second) out.push_back(std::move(w));
    if (++guard > count * 1000) throw ConfigError("synthetic alphabet too small for lexicon size");
  }
  return out;
}

std::string random_edits(std::string word, const SyntheticSpec& spec, Rng& rng) {
  const std::string alphabet = spec.consonants + spec.vowels;
  const std::size_t edits = rng.index(spec.edit_budget + 1);
  for (std::size_t e = 0; e < edits; ++e) {
    const std::size_t kind = rng.index(3);
    const char letter = apply_shift(std::string(1, alphabet[rng.index(alphabet.size())]),
                                    spec.shift)[0];
    if (kind == 0 || word.size() <= 2) {
      word[rng.index(word.size())] = letter;
    } else if (kind == 1) {
      word.insert(word.begin() + static_cast<std::ptrdiff_t>(rng.index(word.size() + 1)), letter);
    } else {
      word.erase(word.begin() + static_cast<std::ptrdiff_t>(rng.index(word.size())));
    }
  }
  return word;
}

}  // namespace

SyntheticCorpus gen_synthetic(const SyntheticSpec& spec, Rng& rng) {
  spec.validate();
  for (const auto& [from, to] : spec.shift) {
    if (from > 0x7F || to > 0x7F) throw ConfigError("synthetic shift map must stay in ASCII");
  }

  SyntheticCorpus corpus;
  corpus.dataset.lang_a = spec.lang_a;
  corpus.dataset.lang_b = spec.lang_b;
  corpus.dataset.source = Source::synthetic;

  std::set<std::string> taken;
  const auto stems = unique_stems(spec, spec.lexicon_size, rng, taken);

  std::vector<WordPair> cognates;
  std::set<WordPair> seen;
  for (const auto& stem : stems) {
    std::string a = stem;
    std::string b = random_edits(apply_shift(stem, spec.shift), spec, rng);
    if (rng.bernoulli(spec.inflection_rate))
      a += spec.suffixes[rng.index(spec.suffixes.size())];
    if (rng.bernoulli(spec.inflection_rate))
      b += apply_shift(spec.suffixes[rng.index(spec.suffixes.size())], spec.shift);
    WordPair p{std::move(a), std::move(b)};
    if (seen.insert(p).second) cognates.push_back(std::move(p));
  }

  const NegativeRatio ratio{spec.cognate_ratio, 1.0 - spec.cognate_ratio};
  auto negatives = build_negatives(cognates, ratio, rng);
  corpus.dataset.pairs = std::move(negatives.pairs);

  const auto morph_stems = unique_stems(spec, spec.morph_stems, rng, taken);
  for (const auto& stem : morph_stems) {
    const std::size_t first = rng.index(spec.suffixes.size());
    corpus.morphology.push_back({stem, stem + spec.suffixes[first], spec.lang_a});
    if (spec.suffixes.size() > 1 && rng.bernoulli(0.5)) {
      std::size_t second = rng.index(spec.suffixes.size() - 1);
      if (second >= first) ++second;
      corpus.morphology.push_back({stem, stem + spec.suffixes[second], spec.lang_a});
    }
  }
  return corpus;
}

// ---- manifest -----------------------------------------------------------------

Manifest Manifest::of(const CognateDataset& ds) {
  return {ds.lang_a, ds.lang_b, ds.count(Label::cognate), ds.count(Label::non_cognate),
          ds.source};
}

std::string Manifest::to_json() const {
  nlohmann::ordered_json j;
  j["language_pair"] = {lang_a, lang_b};
  j["cognates"] = cognates;
  j["non_cognates"] = non_cognates;
  j["source"] = source == Source::real ? "real" : "synthetic";
  return j.dump(2);
}

Manifest Manifest::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Manifest m;
    const auto& langs = j.at("language_pair");
    m.lang_a = langs.at(0).get<std::string>();
    m.lang_b = langs.at(1).get<std::string>();
    m.cognates = j.at("cognates").get<std::size_t>();
    m.non_cognates = j.at("non_cognates").get<std::size_t>();
    const std::string source = j.value("source", "real");
    if (source != "real" && source != "synthetic") throw FormatError("unknown source " + source);
    m.source = source == "real" ? Source::real : Source::synthetic;
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

Manifest Manifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read manifest: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void Manifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write manifest: " + path.string());
  out << to_json() << '\n';
}

// ---- TSV I/O --------------------------------------------------------------------

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \r");
  return s.substr(b, e - b + 1);
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

CognateDataset read_cognates(std::istream& in, LoadReport* report) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  CognateDataset ds;
  std::set<WordPair> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (!text::is_valid_utf8(line))
      throw InputError("cognate file line " + std::to_string(lineno) + ": malformed UTF-8");
    if (trim(line).empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty()) {
      ++rep.skipped_malformed;
      continue;
    }
    CandidatePair pair{{fields[0], fields[1]}, std::nullopt};
    if (fields.size() == 3) {
      const std::string label = trim(fields[2]);
      if (label == "1") {
        pair.label = Label::cognate;
      } else if (label == "0") {
        pair.label = Label::non_cognate;
      } else {
        ++rep.skipped_malformed;
        continue;
      }
    }
    if (!seen.insert(pair.words).second) {
      ++rep.duplicates;
      continue;
    }
    ds.pairs.push_back(std::move(pair));
  }
  if (ds.pairs.empty()) rep.warnings.push_back("cognate file contains no pairs");
  if (rep.skipped_malformed)
    rep.warnings.push_back("skipped " + std::to_string(rep.skipped_malformed) + " malformed rows");
  if (rep.duplicates)
    rep.warnings.push_back("dropped " + std::to_string(rep.duplicates) + " duplicate pairs");
  return ds;
}

CognateDataset load_cognates(const std::filesystem::path& path, LoadReport* report,
                             const std::optional<Manifest>& manifest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read cognate file: " + path.string());
  CognateDataset ds = read_cognates(in, report);
  if (manifest) {
    ds.lang_a = manifest->lang_a;
    ds.lang_b = manifest->lang_b;
    ds.source = manifest->source;
    const std::size_t pos = ds.count(Label::cognate), neg = ds.count(Label::non_cognate);
    if (pos != manifest->cognates || neg != manifest->non_cognates) {
      throw DataError("manifest expects " + std::to_string(manifest->cognates) + " cognates / " +
                      std::to_string(manifest->non_cognates) + " non-cognates, file has " +
                      std::to_string(pos) + " / " + std::to_string(neg));
    }
  }
  return ds;
}

void write_cognates(std::ostream& out, const CognateDataset& ds) {
  for (const auto& p : ds.pairs) {
    out << p.words.first << '\t' << p.words.second;
    if (p.label) out << '\t' << label_index(*p.label);
    out << '\n';
  }
}

void save_cognates(const std::filesystem::path& path, const CognateDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write cognate file: " + path.string());
  write_cognates(out, ds);
}

std::vector<MorphPair> pairs_from_unimorph(std::istream& in, const std::string& language,
                                           LoadReport* report) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  if (!in) throw InputError("unreadable UniMorph stream");
  std::vector<MorphPair> out;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (!text::is_valid_utf8(line))
      throw InputError("UniMorph line " + std::to_string(lineno) + ": malformed UTF-8");
    if (trim(line).empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
      ++rep.skipped_malformed;
      continue;
    }
    if (!seen.emplace(fields[0], fields[1]).second) {
      ++rep.duplicates;
      continue;
    }
    out.push_back({fields[0], fields[1], language});
  }
  if (in.bad()) throw InputError("I/O error while reading UniMorph data");
  if (rep.skipped_malformed)
    rep.warnings.push_back("skipped " + std::to_string(rep.skipped_malformed) + " malformed lines");
  if (rep.duplicates)
    rep.warnings.push_back("dropped " + std::to_string(rep.duplicates) + " duplicate lines");
  return out;
}

std::vector<MorphPair> load_unimorph(const std::filesystem::path& path,
                                     const std::string& language, LoadReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read UniMorph file: " + path.string());
  return pairs_from_unimorph(in, language, report);
}

void write_unimorph(std::ostream& out, std::span<const MorphPair> pairs) {
  for (const auto& p : pairs) out << p.word1 << '\t' << p.word2 << '\n';
}

std::vector<MorphPair> morph_resample(std::span<const MorphPair> pairs, int percent, Rng& rng) {
  if (percent <= -100) throw PreconditionError("morph_resample: percent must exceed -100");
  const std::size_t n = pairs.size();
  const auto target = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * (100.0 + percent) / 100.0));
  if (target <= n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates picks a uniform subset.
    for (std::size_t i = 0; i < target; ++i) std::swap(idx[i], idx[i + rng.index(n - i)]);
    idx.resize(target);
    std::sort(idx.begin(), idx.end());
    std::vector<MorphPair> out;
    out.reserve(target);
    for (std::size_t i : idx) out.push_back(pairs[i]);
    return out;
  }
  std::vector<MorphPair> out(pairs.begin(), pairs.end());
  if (n == 0) return out;
  while (out.size() < target) out.push_back(pairs[rng.index(n)]);
  return out;
}

}  // namespace wscd::data
