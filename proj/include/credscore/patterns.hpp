#pragma once

// Regular expressions used to pick apart raw post text. The cashtag,
// link and special-character patterns are applied verbatim; note that the
// link pattern also consumes any `word:`-prefixed token (e.g. "nota:xyz").

#include "credscore/unicode.hpp"

namespace credscore::patterns {

inline const unicode::Regex& cashtag() {
  static const unicode::Regex re(R"(\$[a-zA-Z0-9=][a-zA-Z][a-zA-Z0-9=]+)");
  return re;
}

inline const unicode::Regex& caret_ticker() {
  static const unicode::Regex re(R"(\^[a-zA-Z0-9=][a-zA-Z][a-zA-Z0-9=]+)");
  return re;
}

/// Both ticker forms in a single left-to-right scan.
inline const unicode::Regex& any_ticker() {
  static const unicode::Regex re(R"([\$\^][a-zA-Z0-9=][a-zA-Z][a-zA-Z0-9=]+)");
  return re;
}

inline const unicode::Regex& links() {
  static const unicode::Regex re(R"((?:(pic.|http|www|\w+)?\:(//)*)\S+)");
  return re;
}

inline const unicode::Regex& special_chars() {
  static const unicode::Regex re("(\\*|\\[|\\]|=|\\(|\\)|\\$|\\\"|\\}|\\{|\\||\\+|&|€|£|/|°)+");
  return re;
}

inline const unicode::Regex& hashtag() {
  static const unicode::Regex re(R"(\#[a-zA-Z0-9]+)");
  return re;
}

/// Signed quantity followed by a currency or percent sign.
inline const unicode::Regex& signed_quantity() {
  static const unicode::Regex re("-?[0-9.,]+[\\$€\\%]");
  return re;
}

/// Optional extension: quantities followed by a spelled-out currency word.
inline const unicode::Regex& signed_quantity_currency_word() {
  static const unicode::Regex re(
      "-?[0-9.,]+\\s*(?:euros?|dólares|dolares|dólar|dolar|dollars?|usd|eur)\\b",
      UREGEX_CASE_INSENSITIVE);
  return re;
}

}  // namespace credscore::patterns
