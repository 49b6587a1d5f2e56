#ifndef CBT_TEXT_HPP
#define CBT_TEXT_HPP

// Text primitives shared by every module: NFC normalization, ASCII
// case-folding, whole-word matching and tokenization.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace cbt {

inline constexpr std::string_view kMaskToken = "[MASK]";

namespace text_detail {

inline bool is_ascii(std::string_view s) {
  for (unsigned char c : s)
    if (c >= 0x80) return false;
  return true;
}

}  // namespace text_detail

/// Unicode NFC normalization. ASCII input is returned unchanged.
inline std::string nfc(std::string_view s) {
  if (text_detail::is_ascii(s)) return std::string(s);
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) return std::string(s);
  icu::UnicodeString input = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  icu::UnicodeString output = normalizer->normalize(input, status);
  if (U_FAILURE(status)) return std::string(s);
  std::string result;
  output.toUTF8String(result);
  return result;
}

inline char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string ascii_fold(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = ascii_lower(c);
  return out;
}

/// Word bytes are ASCII alphanumerics and every byte of a non-ASCII code
/// point, so a boundary never falls inside a multibyte character.
inline bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

inline bool equals_fold_at(std::string_view text, std::size_t pos,
                           std::string_view needle) {
  if (pos + needle.size() > text.size()) return false;
  for (std::size_t i = 0; i < needle.size(); ++i)
    if (ascii_lower(text[pos + i]) != ascii_lower(needle[i])) return false;
  return true;
}

inline bool is_boundary_before(std::string_view text, std::size_t pos) {
  return pos == 0 || !is_word_byte(static_cast<unsigned char>(text[pos - 1]));
}

inline bool is_boundary_after(std::string_view text, std::size_t end) {
  return end >= text.size() ||
         !is_word_byte(static_cast<unsigned char>(text[end]));
}

/// Next whole-word, ASCII-case-insensitive occurrence of `needle` at or
/// after `from`.
inline std::optional<std::size_t> find_whole_word(std::string_view text,
                                                  std::string_view needle,
                                                  std::size_t from = 0) {
  if (needle.empty()) return std::nullopt;
  for (std::size_t pos = from; pos + needle.size() <= text.size(); ++pos) {
    if (equals_fold_at(text, pos, needle) && is_boundary_before(text, pos) &&
        is_boundary_after(text, pos + needle.size()))
      return pos;
  }
  return std::nullopt;
}

inline bool contains_whole_word(std::string_view text, std::string_view needle) {
  return find_whole_word(text, needle).has_value();
}

/// Replaces every whole-word occurrence; returns the number of replacements.
inline std::size_t replace_whole_word(std::string& text, std::string_view needle,
                                      std::string_view replacement) {
  std::size_t count = 0;
  std::size_t from = 0;
  while (auto pos = find_whole_word(text, needle, from)) {
    text.replace(*pos, needle.size(), replacement);
    from = *pos + replacement.size();
    ++count;
  }
  return count;
}

namespace text_detail {

inline UChar32 first_code_point(std::string_view s, int32_t& length) {
  int32_t offset = 0;
  UChar32 c = 0;
  U8_NEXT(s.data(), offset, static_cast<int32_t>(s.size()), c);
  length = offset;
  return c;
}

inline std::string with_first_code_point(std::string_view s, UChar32 c,
                                         int32_t old_length) {
  char buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), n, U8_MAX_LENGTH, c, error);
  if (error) return std::string(s);
  std::string out(buf, static_cast<std::size_t>(n));
  out.append(s.substr(static_cast<std::size_t>(old_length)));
  return out;
}

}  // namespace text_detail

inline bool starts_upper(std::string_view s) {
  if (s.empty()) return false;
  int32_t length = 0;
  UChar32 c = text_detail::first_code_point(s, length);
  return c >= 0 && u_isupper(c);
}

/// Mirrors the case of the first letter only; the rest of `replacement`
/// is kept verbatim.
inline std::string with_first_case(std::string_view replacement, bool upper) {
  if (replacement.empty()) return std::string(replacement);
  int32_t length = 0;
  UChar32 c = text_detail::first_code_point(replacement, length);
  if (c < 0) return std::string(replacement);
  UChar32 mapped = upper ? u_toupper(c) : u_tolower(c);
  if (mapped == c) return std::string(replacement);
  return text_detail::with_first_code_point(replacement, mapped, length);
}

/// NFC-normalize, case-fold and split on runs of non-alphanumeric code
/// points. The literal mask token is kept as one token.
inline std::vector<std::string> tokenize(std::string_view raw) {
  const std::string normalized = nfc(raw);
  const std::string_view text = normalized;
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    if (text_detail::is_ascii(current)) {
      tokens.push_back(ascii_fold(current));
    } else {
      icu::UnicodeString u = icu::UnicodeString::fromUTF8(current);
      u.foldCase();
      std::string folded;
      u.toUTF8String(folded);
      tokens.push_back(std::move(folded));
    }
    current.clear();
  };
  const auto size = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < size) {
    if (text.compare(static_cast<std::size_t>(i), kMaskToken.size(), kMaskToken) == 0) {
      flush();
      tokens.emplace_back(kMaskToken);
      i += static_cast<int32_t>(kMaskToken.size());
      continue;
    }
    const int32_t start = i;
    UChar32 c = 0;
    U8_NEXT(text.data(), i, size, c);
    if (c >= 0 && u_isalnum(c)) {
      current.append(text.substr(static_cast<std::size_t>(start),
                                 static_cast<std::size_t>(i - start)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  auto space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
  };
  while (b < e && space(s[b])) ++b;
  while (e > b && space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(s.substr(start));
      return parts;
    }
    parts.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace cbt

#endif  // CBT_TEXT_HPP
