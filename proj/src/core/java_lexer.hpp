#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace repro::analyzer::java {

enum class TokenKind {
  kIdentifier,
  kKeyword,
  kNumber,
  kChar,
  kString,
  kOperator,
  kError,
  kEnd,
};

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string text;
  std::size_t begin = 0;  // byte offsets into the snippet
  std::size_t end = 0;
  // Inserted by a wrapping stage; never part of the user's code.
  bool synthetic = false;

  bool Is(std::string_view t) const {
    return (kind == TokenKind::kOperator || kind == TokenKind::kKeyword) && text == t;
  }
  bool IsIdent() const { return kind == TokenKind::kIdentifier; }
  bool IsIdent(std::string_view t) const { return kind == TokenKind::kIdentifier && text == t; }
};

struct LexResult {
  std::vector<Token> tokens;  // always terminated by a kEnd token
  bool ok = true;             // false when any kError token was produced
};

// Comments and whitespace are dropped. '>' is always a single token (or
// ">=") so that nested generic closers need no splitting; the parser
// reassembles shift operators from adjacent tokens.
LexResult Lex(std::string_view source);

bool IsPrimitiveType(std::string_view word);

// Adjacent in the source (no whitespace or comment in between).
inline bool Adjacent(const Token& a, const Token& b) {
  return !a.synthetic && !b.synthetic && a.end == b.begin;
}

}  // namespace repro::analyzer::java
