#include "wscd/text/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "wscd/error.hpp"
#include "wscd/text/utf8.hpp"

namespace wscd::text {

CharVocab CharVocab::from_words(std::span<const std::string> words) {
  std::set<char32_t> seen;
  for (const auto& w : words)
    for (char32_t cp : decode_utf8(nfc(w))) seen.insert(cp);
  CharVocab vocab;
  for (char32_t cp : seen) vocab.add(cp);
  return vocab;
}

std::size_t CharVocab::add(char32_t cp) {
  if (cp == U'\n') throw InputError("vocabulary cannot hold a newline codepoint");
  if (auto it = index_.find(cp); it != index_.end()) return it->second;
  const std::size_t idx = size();
  codepoints_.push_back(cp);
  index_.emplace(cp, idx);
  return idx;
}

std::size_t CharVocab::index_of(char32_t cp) const {
  auto it = index_.find(cp);
  return it == index_.end() ? kUnk : it->second;
}

char32_t CharVocab::codepoint(std::size_t index) const {
  if (index < kReserved || index >= size())
    throw PreconditionError("CharVocab: index " + std::to_string(index) + " has no codepoint");
  return codepoints_[index - kReserved];
}

void CharVocab::write(std::ostream& out) const {
  for (char32_t cp : codepoints_) out << encode_utf8(std::u32string(1, cp)) << '\n';
}

CharVocab CharVocab::read(std::istream& in) {
  CharVocab vocab;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cps = decode_utf8(line);
    if (cps.size() != 1) {
      throw FormatError("vocab line " + std::to_string(lineno) +
                        " must hold exactly one codepoint");
    }
    if (vocab.contains(cps[0]))
      throw FormatError("vocab line " + std::to_string(lineno) + " repeats a codepoint");
    vocab.add(cps[0]);
  }
  return vocab;
}

void CharVocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write vocabulary: " + path.string());
  write(out);
}

CharVocab CharVocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read vocabulary: " + path.string());
  return read(in);
}

std::vector<std::size_t> normalize_word(std::string_view raw, const CharVocab& vocab,
                                        std::size_t min_len, std::size_t max_len) {
  if (raw.empty()) throw InputError("empty word");
  const std::u32string cps = decode_utf8(nfc(raw));
  std::vector<std::size_t> seq;
  seq.reserve(std::max(min_len, cps.size()));
  for (char32_t cp : cps) {
    if (seq.size() == max_len) break;
    seq.push_back(vocab.index_of(cp));
  }
  while (seq.size() < min_len) seq.push_back(CharVocab::kPad);
  return seq;
}

}  // namespace wscd::text
