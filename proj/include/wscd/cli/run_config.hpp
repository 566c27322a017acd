#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wscd/cli/pipeline.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace pipeline {

// Flat `key = value` settings for every command. Keys are fixed: unknown
// keys, malformed lines and unparsable values are ConfigErrors. Values set
// explicitly (from a file or a flag) are remembered so that family-specific
// learning-rate defaults only fill the gaps.
class RunConfig {
 public:
  RunConfig();  // all keys at their defaults

  // `key = value` lines; blank lines and lines starting with '#' are skipped,
  // as is anything after a '#' that follows whitespace.
  void parse(std::istream& in, const std::string& origin = "<config>");
  void load(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);

  bool known(const std::string& key) const { return values_.contains(key); }
  bool explicitly_set(const std::string& key) const { return explicit_.contains(key); }

  const std::string& str(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;  // non-negative integer
  double number(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<std::size_t> counts(const std::string& key) const;  // comma list

  // Fills unset learning rates from the `family` key (no-op when empty).
  void apply_family_defaults();

  // Canonical text: one sorted `key = value` line per key. Loading it gives
  // back an equal configuration.
  std::string snapshot() const;
  // Git blob id of the snapshot: SHA-1 over "blob <len>\0" + snapshot.
  std::string hash() const;
  // Writes the snapshot to `path` and returns its hash.
  std::string write_snapshot(const std::filesystem::path& path) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
};

std::string sha1_hex(const std::string& bytes);
std::string git_blob_id(const std::string& content);

encoder::EncoderConfig encoder_config(const RunConfig& rc);
ExperimentConfig experiment_config(const RunConfig& rc);
morphology::MorphTrainConfig morph_config(const RunConfig& rc);
// The cognate share comes from `neg_ratio`.
data::SyntheticSpec synthetic_spec(const RunConfig& rc);

// Architecture sidecar written next to a morphology checkpoint.
std::string encoder_config_json(const encoder::EncoderConfig& config);
encoder::EncoderConfig encoder_config_from_json(const std::string& text);  // FormatError
// Copies an encoder architecture into the `encoder.*` keys.
void set_encoder_keys(RunConfig& rc, const encoder::EncoderConfig& config);

}  // namespace pipeline
WSCD_MODEL_NAMESPACE_END
