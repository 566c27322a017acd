#include "wscd/cli/run_config.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <sstream>

#include "wscd/error.hpp"
#include "wscd/text/utf8.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace pipeline {

namespace {

// Every key a command can read, with its default. Learning rates default to
// the generic values; `family` swaps in the per-family ones.
const std::map<std::string, std::string>& default_values() {
  static const std::map<std::string, std::string> d = {
      {"seed", "1"},
      {"folds", "5"},
      {"mode", "weakly"},
      {"family", ""},
      {"language", "und"},
      {"lang_a", ""},
      {"lang_b", ""},
      {"neg_ratio", "1:1"},
      {"resample", "0"},
      {"data", ""},
      {"init", ""},
      {"unimorph", ""},
      {"cognates", ""},
      {"synthetic", ""},
      {"encoder.char_dim", "64"},
      {"encoder.filters", "64"},
      {"encoder.orders", "2,3,4,5,6"},
      {"encoder.max_len", "40"},
      {"encoder.positional", "true"},
      {"detector.proj_dim", "2"},
      {"sup.lr", "0.01"},
      {"sup.decay", "0.95"},
      {"sup.epochs", "20"},
      {"sup.batch", "32"},
      {"sup.clip", "0"},
      {"pretrain.lr", "0.01"},
      {"pretrain.decay", "0.95"},
      {"pretrain.epochs", "10"},
      {"pretrain.batch", "32"},
      {"pretrain.clip", "0"},
      {"self.lr", "0.01"},
      {"self.decay", "0.95"},
      {"self.batch", "32"},
      {"self.max_epochs", "50"},
      {"self.update_interval", "1"},
      {"self.tol", "0.001"},
      {"kmeans.batch", "256"},
      {"kmeans.epochs", "20"},
      {"morph.lr", "0.002"},
      {"morph.epochs", "20"},
      {"morph.batch", "32"},
      {"morph.decay", "0.95"},
      {"morph.proj_dim", "128"},
      {"morph.weight_decay", "1e-05"},
      {"morph.heldout", "0.1"},
      {"morph.patience", "5"},
      {"synthetic.lexicon_size", "240"},
      {"synthetic.min_len", "4"},
      {"synthetic.max_len", "8"},
      {"synthetic.edit_budget", "1"},
      {"synthetic.inflection_rate", "0"},
      {"synthetic.morph_stems", "300"},
      {"ablate.from", "-30"},
      {"ablate.to", "30"},
      {"ablate.step", "15"},
      {"ablate.seeds", "1"},
  };
  return d;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Shortest text that parses back to the same `real`.
std::string format_real(real v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

RunConfig::RunConfig() : values_(default_values()) {}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key: " + key);
  if (!text::is_valid_utf8(value)) throw ConfigError("invalid UTF-8 in value of " + key);
  if (value.find('\n') != std::string::npos) throw ConfigError("newline in value of " + key);
  it->second = value;
  explicit_.insert(key);
}

void RunConfig::parse(std::istream& in, const std::string& origin) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto where = origin + ":" + std::to_string(lineno);
    if (!text::is_valid_utf8(line)) throw ConfigError(where + ": invalid UTF-8");
    for (std::size_t i = 1; i < line.size(); ++i) {
      if (line[i] == '#' && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.resize(i);
        break;
      }
    }
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected `key = value`");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    try {
      set(key, trim(std::string_view(t).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
}

void RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  parse(in, path.string());
}

const std::string& RunConfig::str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key: " + key);
  return it->second;
}

std::int64_t RunConfig::integer(const std::string& key) const {
  const std::string& v = str(key);
  std::int64_t out = 0;
  const char* begin = v.data();
  if (!v.empty() && v.front() == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": not an integer: '" + v + "'");
  return out;
}

std::size_t RunConfig::count(const std::string& key) const {
  const auto v = integer(key);
  if (v < 0) throw ConfigError(key + ": must be non-negative");
  return static_cast<std::size_t>(v);
}

double RunConfig::number(const std::string& key) const {
  const std::string& v = str(key);
  std::istringstream in(v);
  in.imbue(std::locale::classic());
  double out = 0;
  in >> out;
  if (v.empty() || in.fail() || !in.eof()) throw ConfigError(key + ": not a number: '" + v + "'");
  return out;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& v = str(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": not a boolean: '" + v + "'");
}

std::vector<std::size_t> RunConfig::counts(const std::string& key) const {
  std::vector<std::size_t> out;
  std::stringstream in(str(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
      throw ConfigError(key + ": not a list of non-negative integers: '" + str(key) + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

void RunConfig::apply_family_defaults() {
  const std::string& name = str("family");
  if (name.empty()) return;
  const auto family = data::parse_family(name);
  auto fill = [&](const std::string& key, real lr) {
    if (!explicitly_set(key)) values_[key] = format_real(lr);
  };
  fill("morph.lr", morphology::default_lr(family));
  for (const char* key : {"sup.lr", "pretrain.lr", "self.lr"})
    fill(key, detector::default_lr(family));
}

std::string RunConfig::snapshot() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::string RunConfig::hash() const { return git_blob_id(snapshot()); }

std::string RunConfig::write_snapshot(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << snapshot();
  if (!out) throw InputError("failed writing " + path.string());
  return hash();
}

std::string sha1_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha1(), nullptr))
    throw StateError("SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::string git_blob_id(const std::string& content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  return sha1_hex(blob + content);
}

encoder::EncoderConfig encoder_config(const RunConfig& rc) {
  encoder::EncoderConfig c;
  c.char_dim = rc.count("encoder.char_dim");
  c.filters_per_order = rc.count("encoder.filters");
  c.ngram_orders = rc.counts("encoder.orders");
  c.max_word_len = rc.count("encoder.max_len");
  c.positional = rc.flag("encoder.positional");
  c.validate();
  return c;
}

namespace {

detector::TrainConfig train_config(const RunConfig& rc, const std::string& p) {
  detector::TrainConfig t;
  t.lr = real(rc.number(p + ".lr"));
  t.decay = real(rc.number(p + ".decay"));
  t.epochs = rc.count(p + ".epochs");
  t.batch = rc.count(p + ".batch");
  t.clip_norm = real(rc.number(p + ".clip"));
  if (!(t.lr > 0)) throw ConfigError(p + ".lr must be positive");
  if (!(t.decay > 0 && t.decay <= 1)) throw ConfigError(p + ".decay must be in (0, 1]");
  if (t.batch == 0) throw ConfigError(p + ".batch must be positive");
  if (!(t.clip_norm >= 0)) throw ConfigError(p + ".clip must be non-negative");
  return t;
}

}  // namespace

ExperimentConfig experiment_config(const RunConfig& rc) {
  ExperimentConfig c;
  c.encoder = encoder_config(rc);
  c.detector.proj_dim = rc.count("detector.proj_dim");
  c.detector.validate();
  c.supervised = train_config(rc, "sup");
  c.pretrain = train_config(rc, "pretrain");
  c.self_train.lr = real(rc.number("self.lr"));
  c.self_train.decay = real(rc.number("self.decay"));
  c.self_train.batch = rc.count("self.batch");
  c.self_train.max_epochs = rc.count("self.max_epochs");
  c.self_train.update_interval = rc.count("self.update_interval");
  c.self_train.tol = rc.number("self.tol");
  if (!(c.self_train.lr > 0)) throw ConfigError("self.lr must be positive");
  if (c.self_train.batch == 0 || c.self_train.update_interval == 0 || c.self_train.max_epochs == 0)
    throw ConfigError("self.batch, self.update_interval and self.max_epochs must be positive");
  if (!(c.self_train.tol >= 0 && c.self_train.tol <= 1))
    throw ConfigError("self.tol must be in [0, 1]");
  c.kmeans.k = c.detector.classes;
  c.kmeans.batch = rc.count("kmeans.batch");
  c.kmeans.epochs = rc.count("kmeans.epochs");
  if (c.kmeans.batch == 0) throw ConfigError("kmeans.batch must be positive");
  c.folds = rc.count("folds");
  if (c.folds < 2) throw ConfigError("folds must be at least 2");
  c.seed = static_cast<std::uint64_t>(rc.integer("seed"));
  return c;
}

morphology::MorphTrainConfig morph_config(const RunConfig& rc) {
  morphology::MorphTrainConfig c;
  c.lr = real(rc.number("morph.lr"));
  c.epochs = rc.count("morph.epochs");
  c.batch = rc.count("morph.batch");
  c.decay = real(rc.number("morph.decay"));
  c.proj_dim = rc.count("morph.proj_dim");
  c.weight_decay = real(rc.number("morph.weight_decay"));
  c.heldout_fraction = rc.number("morph.heldout");
  c.patience = rc.count("morph.patience");
  c.validate();
  return c;
}

data::SyntheticSpec synthetic_spec(const RunConfig& rc) {
  data::SyntheticSpec s;
  s.lexicon_size = rc.count("synthetic.lexicon_size");
  s.min_len = rc.count("synthetic.min_len");
  s.max_len = rc.count("synthetic.max_len");
  s.edit_budget = rc.count("synthetic.edit_budget");
  s.inflection_rate = rc.number("synthetic.inflection_rate");
  s.morph_stems = rc.count("synthetic.morph_stems");
  const auto ratio = data::NegativeRatio::parse(rc.str("neg_ratio"));
  s.cognate_ratio = ratio.cognate / (ratio.cognate + ratio.non_cognate);
  if (!rc.str("lang_a").empty()) s.lang_a = rc.str("lang_a");
  if (!rc.str("lang_b").empty()) s.lang_b = rc.str("lang_b");
  s.validate();
  return s;
}

std::string encoder_config_json(const encoder::EncoderConfig& c) {
  nlohmann::ordered_json j;
  j["char_dim"] = c.char_dim;
  j["filters_per_order"] = c.filters_per_order;
  j["ngram_orders"] = c.ngram_orders;
  j["max_word_len"] = c.max_word_len;
  j["positional"] = c.positional;
  j["activation"] = c.activation == kernels::Activation::tanh ? "tanh" : "identity";
  return j.dump(2) + "\n";
}

encoder::EncoderConfig encoder_config_from_json(const std::string& text) {
  encoder::EncoderConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.char_dim = j.at("char_dim").get<std::size_t>();
    c.filters_per_order = j.at("filters_per_order").get<std::size_t>();
    c.ngram_orders = j.at("ngram_orders").get<std::vector<std::size_t>>();
    c.max_word_len = j.at("max_word_len").get<std::size_t>();
    c.positional = j.at("positional").get<bool>();
    const auto act = j.at("activation").get<std::string>();
    if (act == "tanh") c.activation = kernels::Activation::tanh;
    else if (act == "identity") c.activation = kernels::Activation::identity;
    else throw FormatError("unknown activation: " + act);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad encoder config: ") + e.what());
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("bad encoder config: ") + e.what());
  }
  return c;
}

void set_encoder_keys(RunConfig& rc, const encoder::EncoderConfig& c) {
  std::string orders;
  for (std::size_t n : c.ngram_orders) orders += (orders.empty() ? "" : ",") + std::to_string(n);
  rc.set("encoder.char_dim", std::to_string(c.char_dim));
  rc.set("encoder.filters", std::to_string(c.filters_per_order));
  rc.set("encoder.orders", orders);
  rc.set("encoder.max_len", std::to_string(c.max_word_len));
  rc.set("encoder.positional", c.positional ? "true" : "false");
}

}  // namespace pipeline
WSCD_MODEL_NAMESPACE_END
