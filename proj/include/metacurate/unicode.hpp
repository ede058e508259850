#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string_view>

namespace metacurate::unicode {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes the scalar value starting at byte offset `pos`. Malformed
// sequences decode to U+FFFD and consume a single byte, so iteration
// always makes progress. Returns the codepoint and advances `pos`.
inline char32_t decode(std::string_view s, std::size_t& pos) {
  unsigned char b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  auto cont = [&](std::size_t i) {
    return i < s.size() && (static_cast<unsigned char>(s[i]) & 0xC0) == 0x80;
  };
  if ((b0 & 0xE0) == 0xC0 && cont(pos + 1)) {
    char32_t cp = (char32_t(b0 & 0x1F) << 6) |
                  (static_cast<unsigned char>(s[pos + 1]) & 0x3F);
    pos += 2;
    return cp < 0x80 ? kReplacement : cp;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(pos + 1) && cont(pos + 2)) {
    char32_t cp = (char32_t(b0 & 0x0F) << 12) |
                  (char32_t(static_cast<unsigned char>(s[pos + 1]) & 0x3F) << 6) |
                  (static_cast<unsigned char>(s[pos + 2]) & 0x3F);
    pos += 3;
    if (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF)) return kReplacement;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(pos + 1) && cont(pos + 2) && cont(pos + 3)) {
    char32_t cp = (char32_t(b0 & 0x07) << 18) |
                  (char32_t(static_cast<unsigned char>(s[pos + 1]) & 0x3F) << 12) |
                  (char32_t(static_cast<unsigned char>(s[pos + 2]) & 0x3F) << 6) |
                  (static_cast<unsigned char>(s[pos + 3]) & 0x3F);
    pos += 4;
    if (cp < 0x10000 || cp > 0x10FFFF) return kReplacement;
    return cp;
  }
  ++pos;
  return kReplacement;
}

// Decodes the scalar value whose encoding covers byte offset `pos`
// (stepping back over continuation bytes first).
inline char32_t decode_before(std::string_view s, std::size_t pos) {
  // Caller guarantees pos > 0; we look at the scalar ending at pos-1.
  std::size_t i = pos - 1;
  std::size_t back = 0;
  while (i > 0 && back < 3 &&
         (static_cast<unsigned char>(s[i]) & 0xC0) == 0x80) {
    --i;
    ++back;
  }
  std::size_t p = i;
  return decode(s, p);
}

// Approximate Unicode alphanumeric test over the major Letter/Number
// blocks. Word-boundary matching only needs a consistent classifier;
// unassigned codepoints inside a listed block classify as alphanumeric.
inline bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') ||
           (cp >= 'a' && cp <= 'z');
  }
  struct Range {
    char32_t lo, hi;
  };
  static constexpr std::array<Range, 40> kRanges{{
      {0x00AA, 0x00AA},  // feminine ordinal
      {0x00B2, 0x00B3},  // superscript 2, 3
      {0x00B5, 0x00B5},  // micro sign
      {0x00B9, 0x00BA},  // superscript 1, masculine ordinal
      {0x00BC, 0x00BE},  // vulgar fractions
      {0x00C0, 0x00D6},
      {0x00D8, 0x00F6},
      {0x00F8, 0x02C1},  // Latin extended + IPA
      {0x0370, 0x0377},
      {0x037A, 0x037D},
      {0x037F, 0x037F},
      {0x0386, 0x0386},
      {0x0388, 0x03FF},  // Greek
      {0x0400, 0x0481},
      {0x048A, 0x052F},  // Cyrillic
      {0x0531, 0x0556},
      {0x0561, 0x0587},  // Armenian
      {0x05D0, 0x05EA},
      {0x05EF, 0x05F2},  // Hebrew
      {0x0620, 0x064A},
      {0x0660, 0x0669},  // Arabic letters + digits
      {0x066E, 0x06D3},
      {0x06F0, 0x06FC},
      {0x0900, 0x0963},
      {0x0966, 0x096F},
      {0x0971, 0x097F},  // Devanagari
      {0x0E01, 0x0E3A},
      {0x0E40, 0x0E4E},
      {0x0E50, 0x0E59},  // Thai
      {0x10A0, 0x10FA},  // Georgian
      {0x1100, 0x11FF},  // Hangul jamo
      {0x1E00, 0x1FFF},  // Latin additional, Greek extended
      {0x3040, 0x30FA},  // Hiragana, Katakana
      {0x30FC, 0x30FF},
      {0x3400, 0x4DBF},
      {0x4E00, 0x9FFF},  // CJK
      {0xAC00, 0xD7A3},  // Hangul syllables
      {0xF900, 0xFAD9},  // CJK compatibility
      {0xFF10, 0xFF19},  // fullwidth digits
      {0xFF21, 0xFF5A},  // fullwidth Latin (gap at 0xFF3B..0xFF40 accepted)
  }};
  if (cp >= 0xFF3B && cp <= 0xFF40) return false;
  if (cp >= 0x20000 && cp <= 0x2A6DF) return true;  // CJK extension B
  auto it = std::upper_bound(
      kRanges.begin(), kRanges.end(), cp,
      [](char32_t v, const Range& r) { return v < r.lo; });
  if (it == kRanges.begin()) return false;
  --it;
  return cp <= it->hi;
}

}  // namespace metacurate::unicode
