#pragma once

// Thin RAII wrappers over ICU for the handful of Unicode services the text
// pipeline needs: UTF-8 <-> UTF-32, NFKD, lowercasing, character classes and
// Perl-style regular expressions with Unicode-aware \w and \S.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/regex.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "credscore/error.hpp"

namespace credscore::unicode {

inline icu::UnicodeString to_icu(std::string_view utf8) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
}

inline std::string to_utf8(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

inline std::u32string to_u32(std::string_view utf8) {
  icu::UnicodeString s = to_icu(utf8);
  std::u32string out;
  out.reserve(static_cast<std::size_t>(s.length()));
  for (int32_t i = 0; i < s.length(); i = s.moveIndex32(i, 1)) out.push_back(static_cast<char32_t>(s.char32At(i)));
  return out;
}

inline std::string from_u32(std::u32string_view cps) {
  icu::UnicodeString s;
  for (char32_t c : cps) s.append(static_cast<UChar32>(c));
  return to_utf8(s);
}

inline std::string from_u32(char32_t c) { return from_u32(std::u32string_view(&c, 1)); }

/// Number of code points.
inline std::size_t length(std::string_view utf8) { return to_u32(utf8).size(); }

inline std::string nfkd(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFKDInstance(status);
  if (U_FAILURE(status)) throw Error(std::string("ICU NFKD unavailable: ") + u_errorName(status));
  icu::UnicodeString out = norm->normalize(to_icu(utf8), status);
  if (U_FAILURE(status)) throw Error(std::string("NFKD normalization failed: ") + u_errorName(status));
  return to_utf8(out);
}

inline std::string to_lower(std::string_view utf8) {
  icu::UnicodeString s = to_icu(utf8);
  s.toLower(icu::Locale::getRoot());
  return to_utf8(s);
}

inline std::string to_upper(std::string_view utf8) {
  icu::UnicodeString s = to_icu(utf8);
  s.toUpper(icu::Locale::getRoot());
  return to_utf8(s);
}

inline bool is_letter(char32_t c) { return u_isalpha(static_cast<UChar32>(c)); }
inline bool is_digit(char32_t c) { return u_isdigit(static_cast<UChar32>(c)); }
inline bool is_alnum(char32_t c) { return is_letter(c) || is_digit(c); }
inline bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }
inline bool is_punct(char32_t c) { return u_ispunct(static_cast<UChar32>(c)); }

/// Splits on Unicode whitespace, dropping empty pieces.
inline std::vector<std::string> split_whitespace(std::string_view utf8) {
  std::vector<std::string> out;
  std::u32string cur;
  for (char32_t c : to_u32(utf8)) {
    if (is_space(c)) {
      if (!cur.empty()) out.push_back(from_u32(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(from_u32(cur));
  return out;
}

/// Collapses whitespace runs to a single ASCII space and trims both ends.
inline std::string collapse_whitespace(std::string_view utf8) {
  std::string out;
  for (const auto& piece : split_whitespace(utf8)) {
    if (!out.empty()) out.push_back(' ');
    out += piece;
  }
  return out;
}

/// Compiled ICU regular expression. Immutable after construction and safe to
/// share between threads (a matcher is created per call).
class Regex {
 public:
  explicit Regex(std::string_view pattern, uint32_t flags = 0) : source_(pattern) {
    UParseError perr{};
    UErrorCode status = U_ZERO_ERROR;
    pattern_.reset(icu::RegexPattern::compile(to_icu(pattern), flags, perr, status));
    if (U_FAILURE(status)) throw Error("bad regex '" + source_ + "': " + u_errorName(status));
  }

  const std::string& source() const { return source_; }

  /// All non-overlapping matches, left to right.
  std::vector<std::string> find_all(std::string_view text) const {
    icu::UnicodeString input = to_icu(text);
    auto m = matcher(input);
    std::vector<std::string> out;
    UErrorCode status = U_ZERO_ERROR;
    while (m->find(status) && U_SUCCESS(status)) out.push_back(to_utf8(m->group(status)));
    check(status);
    return out;
  }

  std::size_t count(std::string_view text) const { return find_all(text).size(); }

  std::string replace_all(std::string_view text, std::string_view replacement) const {
    icu::UnicodeString input = to_icu(text);
    auto m = matcher(input);
    UErrorCode status = U_ZERO_ERROR;
    icu::UnicodeString out = m->replaceAll(to_icu(replacement), status);
    check(status);
    return to_utf8(out);
  }

 private:
  std::unique_ptr<icu::RegexMatcher> matcher(const icu::UnicodeString& input) const {
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::RegexMatcher> m(pattern_->matcher(input, status));
    check(status);
    return m;
  }

  void check(UErrorCode status) const {
    if (U_FAILURE(status)) throw Error("regex '" + source_ + "' failed: " + u_errorName(status));
  }

  std::string source_;
  std::unique_ptr<icu::RegexPattern> pattern_;
};

}  // namespace credscore::unicode
