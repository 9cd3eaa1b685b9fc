#include "java_lexer.hpp"

#include <array>
#include <cctype>

namespace repro::analyzer::java {

namespace {

constexpr std::array<std::string_view, 53> kKeywords = {
    "abstract", "assert",     "boolean",   "break",      "byte",      "case",
    "catch",    "char",       "class",     "const",      "continue",  "default",
    "do",       "double",     "else",      "enum",       "extends",   "final",
    "finally",  "float",      "for",       "goto",       "if",        "implements",
    "import",   "instanceof", "int",       "interface",  "long",      "native",
    "new",      "package",    "private",   "protected",  "public",    "return",
    "short",    "static",     "strictfp",  "super",      "switch",    "synchronized",
    "this",     "throw",      "throws",    "transient",  "try",       "void",
    "volatile", "while",      "true",      "false",      "null",
};

// Longest first; '>' variants deliberately absent except ">=".
constexpr std::array<std::string_view, 23> kMultiCharOps = {
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=",
    "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "<<", "@",  "#",
};

bool IsKeyword(std::string_view word) {
  for (auto k : kKeywords) {
    if (k == word) return true;
  }
  return false;
}

bool IsIdentStart(unsigned char c) {
  return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}

bool IsIdentPart(unsigned char c) { return IsIdentStart(c) || std::isdigit(c); }

}  // namespace

bool IsPrimitiveType(std::string_view word) {
  return word == "boolean" || word == "byte" || word == "char" || word == "short" ||
         word == "int" || word == "long" || word == "float" || word == "double";
}

LexResult Lex(std::string_view src) {
  LexResult result;
  auto& out = result.tokens;
  std::size_t i = 0;
  const std::size_t n = src.size();

  auto push = [&](TokenKind kind, std::size_t begin, std::size_t end) {
    out.push_back({kind, std::string(src.substr(begin, end - begin)), begin, end, false});
    if (kind == TokenKind::kError) result.ok = false;
  };

  while (i < n) {
    const auto c = static_cast<unsigned char>(src[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      const auto close = src.find("*/", i + 2);
      if (close == std::string_view::npos) {
        push(TokenKind::kError, i, n);
        i = n;
      } else {
        i = close + 2;
      }
      continue;
    }
    const std::size_t start = i;
    if (IsIdentStart(c)) {
      while (i < n && IsIdentPart(static_cast<unsigned char>(src[i]))) ++i;
      const auto word = src.substr(start, i - start);
      push(IsKeyword(word) ? TokenKind::kKeyword : TokenKind::kIdentifier, start, i);
      continue;
    }
    if (std::isdigit(c) || (c == '.' && i + 1 < n &&
                            std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      const bool hex = c == '0' && i + 1 < n && (src[i + 1] == 'x' || src[i + 1] == 'X');
      ++i;
      while (i < n) {
        const auto d = static_cast<unsigned char>(src[i]);
        if (std::isalnum(d) || d == '_') {
          ++i;
        } else if (d == '.' && !(i + 1 < n && src[i + 1] == '.')) {
          ++i;
        } else if ((d == '+' || d == '-') &&
                   ((!hex && (src[i - 1] == 'e' || src[i - 1] == 'E')) ||
                    (hex && (src[i - 1] == 'p' || src[i - 1] == 'P')))) {
          ++i;
        } else {
          break;
        }
      }
      push(TokenKind::kNumber, start, i);
      continue;
    }
    if (c == '"') {
      if (src.substr(i, 3) == "\"\"\"") {
        const auto close = src.find("\"\"\"", i + 3);
        if (close == std::string_view::npos) {
          push(TokenKind::kError, i, n);
          i = n;
        } else {
          i = close + 3;
          push(TokenKind::kString, start, i);
        }
        continue;
      }
      ++i;
      bool closed = false;
      while (i < n && src[i] != '\n') {
        if (src[i] == '\\') {
          i += 2;
          continue;
        }
        if (src[i] == '"') {
          closed = true;
          ++i;
          break;
        }
        ++i;
      }
      push(closed ? TokenKind::kString : TokenKind::kError, start, std::min(i, n));
      continue;
    }
    if (c == '\'') {
      ++i;
      bool closed = false;
      while (i < n && src[i] != '\n') {
        if (src[i] == '\\') {
          i += 2;
          continue;
        }
        if (src[i] == '\'') {
          closed = true;
          ++i;
          break;
        }
        ++i;
      }
      // A char literal holds exactly one character or escape.
      const auto len = i - start;
      const bool valid = closed && len >= 3 && (len == 3 || src[start + 1] == '\\' ||
                                                static_cast<unsigned char>(src[start + 1]) >= 0x80);
      push(valid ? TokenKind::kChar : TokenKind::kError, start, std::min(i, n));
      continue;
    }
    bool matched = false;
    for (auto op : kMultiCharOps) {
      if (src.substr(i, op.size()) == op) {
        i += op.size();
        push(op == "#" ? TokenKind::kError : TokenKind::kOperator, start, i);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static constexpr std::string_view kSingles = "(){}[];,.=><!~?:+-*/&|^%";
    if (kSingles.find(static_cast<char>(c)) != std::string_view::npos) {
      ++i;
      push(TokenKind::kOperator, start, i);
      continue;
    }
    ++i;
    push(TokenKind::kError, start, i);
  }
  out.push_back({TokenKind::kEnd, "", n, n, false});
  return result;
}

}  // namespace repro::analyzer::java
