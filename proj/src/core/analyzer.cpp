#include <cctype>

#include "java_lexer.hpp"
#include "java_parser.hpp"
#include "repro/analyzer.hpp"
#include "repro/error.hpp"
#include "repro/ingest.hpp"

namespace repro::analyzer {

namespace {

using java::Token;
using java::TokenKind;

constexpr std::string_view kWrapperClass = "SnippetWrapper";
constexpr std::string_view kWrapperMethod = "snippet";

Token Synthetic(TokenKind kind, std::string_view text) {
  Token t;
  t.kind = kind;
  t.text = std::string(text);
  t.synthetic = true;
  return t;
}

// header + prefix + body + suffix, where the header is the leading
// package/import block.
std::vector<Token> Wrap(const std::vector<Token>& tokens, std::size_t header_end,
                        bool with_method) {
  std::vector<Token> out(tokens.begin(), tokens.begin() + static_cast<long>(header_end));
  out.push_back(Synthetic(TokenKind::kKeyword, "class"));
  out.push_back(Synthetic(TokenKind::kIdentifier, kWrapperClass));
  out.push_back(Synthetic(TokenKind::kOperator, "{"));
  if (with_method) {
    out.push_back(Synthetic(TokenKind::kKeyword, "void"));
    out.push_back(Synthetic(TokenKind::kIdentifier, kWrapperMethod));
    out.push_back(Synthetic(TokenKind::kOperator, "("));
    out.push_back(Synthetic(TokenKind::kOperator, ")"));
    out.push_back(Synthetic(TokenKind::kOperator, "{"));
  }
  out.insert(out.end(), tokens.begin() + static_cast<long>(header_end), tokens.end() - 1);
  if (with_method) out.push_back(Synthetic(TokenKind::kOperator, "}"));
  out.push_back(Synthetic(TokenKind::kOperator, "}"));
  out.push_back(tokens.back());
  return out;
}

void Fill(StructuralSummary& s, java::ParseFacts&& f) {
  s.class_count = f.class_count;
  s.method_count = f.method_count;
  s.has_main = f.has_main;
  s.imports = std::move(f.imports);
  s.try_catch_count = f.try_catch_count;
  s.throws_declared = f.throws_declared;
  s.referenced_types = std::move(f.referenced_types);
  s.defined_types = std::move(f.defined_types);
  s.type_parameters = std::move(f.type_parameters);
  s.invoked_callees = std::move(f.invoked_callees);
}

// Name of a public top-level type, which javac requires as the file name.
std::string PublicTopLevelType(const std::vector<Token>& tokens) {
  int depth = 0;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (t.Is("{")) ++depth;
    if (t.Is("}")) --depth;
    if (depth != 0 || !t.Is("public")) continue;
    for (std::size_t j = i + 1; j + 1 < tokens.size(); ++j) {
      const Token& k = tokens[j];
      if (k.Is("class") || k.Is("interface") || k.Is("enum") ||
          (k.IsIdent("record") && tokens[j + 1].IsIdent())) {
        if (tokens[j + 1].IsIdent()) return tokens[j + 1].text;
        break;
      }
      if (k.Is("@") && tokens[j + 1].Is("interface")) {
        if (j + 2 < tokens.size() && tokens[j + 2].IsIdent()) return tokens[j + 2].text;
        break;
      }
      if (!(k.kind == TokenKind::kKeyword || k.IsIdent("sealed") || k.IsIdent("non") ||
            k.Is("-"))) {
        break;
      }
    }
  }
  return {};
}

bool IsWordChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

std::string_view ToString(WrapLevel level) {
  switch (level) {
    case WrapLevel::kNone:
      return "none";
    case WrapLevel::kMethodWrapped:
      return "method_wrapped";
    case WrapLevel::kClassWrapped:
      return "class_wrapped";
  }
  return "none";
}

StructuralSummary AnalyzeStructure(std::string_view snippet) {
  StructuralSummary s;
  auto lexed = java::Lex(snippet);
  if (lexed.ok) {
    java::ParseFacts facts;
    if (java::ParseCompilationUnit(lexed.tokens, facts)) {
      s.parse_ok = true;
      s.wrap_level = WrapLevel::kNone;
    } else {
      const std::size_t header = java::HeaderEnd(lexed.tokens);
      if (java::ParseCompilationUnit(Wrap(lexed.tokens, header, true), facts)) {
        s.parse_ok = true;
        s.wrap_level = WrapLevel::kMethodWrapped;
      } else if (java::ParseCompilationUnit(Wrap(lexed.tokens, header, false), facts)) {
        s.parse_ok = true;
        s.wrap_level = WrapLevel::kClassWrapped;
      }
    }
    if (s.parse_ok) {
      Fill(s, std::move(facts));
      return s;
    }
  }
  std::vector<Token> clean;
  clean.reserve(lexed.tokens.size());
  for (auto& t : lexed.tokens) {
    if (t.kind != TokenKind::kError) clean.push_back(std::move(t));
  }
  Fill(s, java::TokenScan(clean));
  s.from_token_scan = true;
  return s;
}

bool CheckParsability(std::string_view snippet) { return AnalyzeStructure(snippet).parse_ok; }

CompilationUnit WrappedSource(std::string_view snippet, const StructuralSummary& summary) {
  const auto lexed = java::Lex(snippet);
  if (summary.wrap_level == WrapLevel::kNone) {
    std::string type = PublicTopLevelType(lexed.tokens);
    return {(type.empty() ? std::string("Snippet") : type) + ".java", std::string(snippet)};
  }
  const std::size_t header = java::HeaderEnd(lexed.tokens);
  const std::size_t cut = lexed.tokens[header].kind == TokenKind::kEnd
                              ? snippet.size()
                              : lexed.tokens[header].begin;
  std::string source(snippet.substr(0, cut));
  if (!source.empty() && source.back() != '\n') source += '\n';
  source += "class " + std::string(kWrapperClass) + " {\n";
  if (summary.wrap_level == WrapLevel::kMethodWrapped) {
    source += "void " + std::string(kWrapperMethod) + "() {\n";
  }
  source += snippet.substr(cut);
  if (source.back() != '\n') source += '\n';
  if (summary.wrap_level == WrapLevel::kMethodWrapped) source += "}\n";
  source += "}\n";
  return {std::string(kWrapperClass) + ".java", std::move(source)};
}

ImportClassification ClassifyImports(const StructuralSummary& summary, const JdkIndex& index) {
  ImportClassification out;
  std::set<std::string, std::less<>> explicit_names;
  std::set<std::string, std::less<>> wildcard_packages;
  bool any_native = false;
  bool any_external = false;
  bool external_wildcard = false;
  for (const auto& path : summary.imports) {
    const bool native = index.IsNativePath(path);
    (native ? any_native : any_external) = true;
    const auto dot = path.rfind('.');
    const std::string last = dot == std::string::npos ? path : path.substr(dot + 1);
    if (last == "*") {
      wildcard_packages.insert(path.substr(0, dot));
      if (!native) external_wildcard = true;
    } else {
      explicit_names.insert(last);
    }
  }
  for (const auto& type : summary.referenced_types) {
    if (summary.defined_types.count(type) || summary.type_parameters.count(type)) continue;
    if (explicit_names.count(type)) continue;
    const std::string pkg = index.PackageOf(type);
    if (!pkg.empty()) {
      if (pkg != "java.lang" && !wildcard_packages.count(pkg)) {
        out.missing_jdk_imports.push_back(type + " (" + pkg + ")");
      }
      continue;
    }
    if (!external_wildcard) out.unresolved_types.push_back(type);
  }
  out.native_import = !out.missing_jdk_imports.empty() ? TriState::kAbsent
                      : any_native                     ? TriState::kPresent
                                                       : TriState::kNeutral;
  out.external_import = !out.unresolved_types.empty() ? TriState::kAbsent
                        : any_external                ? TriState::kPresent
                                                      : TriState::kNeutral;
  return out;
}

bool MentionsExceptionToken(std::string_view text) {
  for (std::string_view word : {std::string_view("Exception"), std::string_view("Error")}) {
    for (auto pos = text.find(word); pos != std::string_view::npos;
         pos = text.find(word, pos + 1)) {
      if (pos > 0 && IsWordChar(text[pos - 1])) return true;
    }
  }
  return false;
}

TriState AssessExceptionHandling(const StructuralSummary& summary,
                                 std::string_view question_text, const JdkIndex& index) {
  if (summary.try_catch_count >= 1 || summary.throws_declared ||
      MentionsExceptionToken(question_text)) {
    return TriState::kPresent;
  }
  for (const auto& callee : summary.invoked_callees) {
    if (!index.CheckedExceptionOf(callee).empty()) return TriState::kAbsent;
  }
  return TriState::kNeutral;
}

FeatureExtraction ExtractFeatures(std::string_view snippet, std::string_view question_text,
                                  const AnalyzerConfig& config) {
  const int loc = ingest::CountLoc(snippet);
  if (loc == 0) Fail(ErrorCode::kInvalidArgument, "snippet has no non-blank line");
  FeatureExtraction out;
  out.summary = AnalyzeStructure(snippet);
  out.compile = CheckCompilability(snippet, out.summary, config.compiler);
  const JdkIndex& index = config.jdk();
  out.imports = ClassifyImports(out.summary, index);

  FeatureVector& f = out.features;
  f.loc = loc;
  f.has_method = out.summary.method_count >= 1;
  f.has_main = out.summary.has_main;
  f.has_class = out.summary.class_count >= 1;
  f.parsable = out.summary.parse_ok;
  f.compilable = f.parsable && out.compile.status == CompileStatus::kSuccess;
  f.native_import = out.imports.native_import;
  f.external_import = out.imports.external_import;
  f.exception_handling = AssessExceptionHandling(out.summary, question_text, index);
  return out;
}

}  // namespace repro::analyzer
