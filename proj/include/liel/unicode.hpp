#pragma once

// Thin UTF-8 helpers over ICU. Everything here is script-agnostic: no word
// lists, no language-specific rules.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <unicode/uchar.h>
#include <unicode/uscript.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace liel::unicode {

// Decodes the code point at byte position `pos` and advances `pos`. Invalid
// sequences decode to a negative value and consume one byte.
inline std::int32_t next_code_point(std::string_view s, std::size_t& pos) {
  std::int32_t c = 0;
  auto i = static_cast<std::int32_t>(pos);
  const auto n = static_cast<std::int32_t>(s.size());
  U8_NEXT(reinterpret_cast<const std::uint8_t*>(s.data()), i, n, c);
  pos = static_cast<std::size_t>(i);
  return c;
}

inline void append_code_point(std::string& out, std::int32_t c) {
  icu::UnicodeString(static_cast<UChar32>(c)).toUTF8String(out);
}

inline std::string fold_case(std::string_view s) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<std::int32_t>(s.size())));
  u.foldCase();
  std::string out;
  u.toUTF8String(out);
  return out;
}

inline bool is_space(std::int32_t c) { return c >= 0 && u_isUWhiteSpace(c); }

inline bool is_punct(std::int32_t c) { return c >= 0 && u_ispunct(c); }

inline bool is_mark(std::int32_t c) {
  if (c < 0) return false;
  const auto type = u_charType(c);
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK ||
         type == U_ENCLOSING_MARK;
}

// Scripts written without spaces between words; tokenized per character.
inline bool is_unsegmented(std::int32_t c) {
  if (c < 0) return false;
  UErrorCode status = U_ZERO_ERROR;
  const UScriptCode script = uscript_getScript(c, &status);
  if (U_FAILURE(status)) return false;
  return script == USCRIPT_HAN || script == USCRIPT_HIRAGANA ||
         script == USCRIPT_KATAKANA || script == USCRIPT_BOPOMOFO ||
         u_hasBinaryProperty(c, UCHAR_IDEOGRAPHIC);
}

inline bool is_word_char(std::int32_t c) {
  return c >= 0 && (u_isalnum(c) || is_mark(c));
}

// Script of `c`, or USCRIPT_COMMON for characters shared by many scripts
// (digits, marks, punctuation).
inline int script_of(std::int32_t c) {
  if (c < 0) return USCRIPT_COMMON;
  UErrorCode status = U_ZERO_ERROR;
  const UScriptCode script = uscript_getScript(c, &status);
  if (U_FAILURE(status) || script == USCRIPT_INHERITED) return USCRIPT_COMMON;
  return script;
}

inline bool is_upper(std::int32_t c) { return c >= 0 && u_isUUppercase(c); }
inline bool is_lower(std::int32_t c) { return c >= 0 && u_isULowercase(c); }
inline bool is_alpha(std::int32_t c) { return c >= 0 && u_isUAlphabetic(c); }

// Case-folds, collapses internal whitespace to one space and strips
// leading/trailing whitespace and punctuation. Used for every anchor, title,
// redirect and surface-form comparison.
inline std::string normalize_name(std::string_view s) {
  const std::string folded = fold_case(s);
  std::string out;
  out.reserve(folded.size());
  bool pending_space = false;
  std::size_t pos = 0;
  // Byte length of `out` up to the last non-punctuation code point.
  std::size_t keep = 0;
  while (pos < folded.size()) {
    const std::size_t start = pos;
    const std::int32_t c = next_code_point(folded, pos);
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (out.empty() && is_punct(c)) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.append(folded, start, pos - start);
    if (!is_punct(c)) keep = out.size();
  }
  out.resize(keep);
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace liel::unicode
