#pragma once

// UTF-8 handling, case folding, tokenization and text normalization.
// All offsets in this library count Unicode code points.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace eot {

/// Decodes UTF-8; each invalid or truncated sequence becomes U+FFFD.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);
std::size_t codepoint_length(std::string_view text);

char32_t fold_case(char32_t c) noexcept;
bool is_space(char32_t c) noexcept;
bool is_punct(char32_t c) noexcept;

struct Token {
  std::string text;   // lowercased, edge punctuation stripped
  std::size_t start;  // code point offset of the first kept character
  std::size_t end;    // exclusive
};

/// Lowercased whitespace units with leading and trailing punctuation
/// removed; units that are punctuation only are dropped.
std::vector<std::string> tokenize(std::string_view text);
std::vector<Token> tokenize_with_offsets(std::string_view text);

/// Lowercase, collapse whitespace runs to one space, trim. Used as the
/// dedup key for triggers and for exact-match comparison.
std::string normalize_text(std::string_view text);

}  // namespace eot
