#pragma once

#include <string>
#include <string_view>

namespace wscd::text {

bool is_valid_utf8(std::string_view bytes);
// Throws InputError on malformed UTF-8.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view codepoints);
// Unicode canonical composition (NFC). Throws InputError on malformed UTF-8.
std::string nfc(std::string_view utf8);

}  // namespace wscd::text
