#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wscd::text {

// Codepoint <-> index map. Index 0 is PAD, 1 is UNK; known codepoints start
// at 2 in insertion order.
class CharVocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kReserved = 2;

  CharVocab() = default;
  // All codepoints of the NFC-normalized words, in ascending codepoint order.
  static CharVocab from_words(std::span<const std::string> words);

  // Adds the codepoint if unseen; returns its index.
  std::size_t add(char32_t cp);
  std::size_t index_of(char32_t cp) const;  // kUnk when unknown
  bool contains(char32_t cp) const { return index_.contains(cp); }
  char32_t codepoint(std::size_t index) const;

  std::size_t size() const { return kReserved + codepoints_.size(); }
  std::span<const char32_t> codepoints() const { return codepoints_; }

  // One codepoint per line, UTF-8; line i holds index i + 2.
  void write(std::ostream& out) const;
  static CharVocab read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static CharVocab load(const std::filesystem::path& path);

  friend bool operator==(const CharVocab& a, const CharVocab& b) {
    return a.codepoints_ == b.codepoints_;
  }

 private:
  std::vector<char32_t> codepoints_;
  std::map<char32_t, std::size_t> index_;
};

// NFC-normalizes `raw` and maps each codepoint through `vocab`, unknowns to
// UNK. The result is truncated to `max_len` and right-padded with PAD to at
// least `min_len`. Empty input throws InputError.
std::vector<std::size_t> normalize_word(std::string_view raw, const CharVocab& vocab,
                                        std::size_t min_len, std::size_t max_len);

}  // namespace wscd::text
