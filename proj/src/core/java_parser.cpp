#include "java_parser.hpp"

#include <algorithm>
#include <cctype>

namespace repro::analyzer::java {

namespace {

struct SyntaxError {};

enum class ExprKind { kOther, kAssignment, kIncrement, kCall, kNew };

bool IsStatementExpression(ExprKind k) { return k != ExprKind::kOther; }

bool StartsUpper(const std::string& s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

bool IsModifierKeyword(const Token& t) {
  static constexpr std::string_view kMods[] = {
      "public",   "protected", "private",   "static",       "abstract", "final",
      "native",   "transient", "volatile",  "synchronized", "strictfp",
  };
  if (t.kind != TokenKind::kKeyword) return false;
  return std::find(std::begin(kMods), std::end(kMods), t.text) != std::end(kMods);
}

bool IsLiteral(const Token& t) {
  return t.kind == TokenKind::kNumber || t.kind == TokenKind::kString ||
         t.kind == TokenKind::kChar || t.Is("true") || t.Is("false") || t.Is("null");
}

bool IsPrimitiveKeyword(const Token& t) {
  return t.kind == TokenKind::kKeyword && IsPrimitiveType(t.text);
}

struct Modifiers {
  bool is_public = false;
  bool is_static = false;
  bool any = false;
};

struct TypeInfo {
  std::string name;  // dotted, without type arguments
  int dims = 0;
};

struct Param {
  TypeInfo type;
  bool varargs = false;
  int extra_dims = 0;

  bool IsStringArray() const {
    if (type.name != "String" && type.name != "java.lang.String") return false;
    const int dims = type.dims + extra_dims;
    return varargs ? dims == 0 : dims == 1;
  }
};

enum class BodyKind { kClass, kInterface, kEnum, kRecord, kAnnotation };

constexpr int kMaxDepth = 400;

// Read-only lookahead over the token vector. Each Scan* advances `j` past
// the construct and returns false without side effects elsewhere.
class Scanner {
 public:
  explicit Scanner(const std::vector<Token>& t) : t_(t) {}

  const Token& At(std::size_t j) const { return t_[std::min(j, t_.size() - 1)]; }

  bool ScanTypeArgs(std::size_t& j) const {
    if (!At(j).Is("<")) return false;
    int depth = 0;
    while (true) {
      const Token& tok = At(j);
      if (tok.Is("<")) {
        ++depth;
      } else if (tok.Is(">")) {
        if (--depth == 0) {
          ++j;
          return true;
        }
      } else if (!(tok.IsIdent() || IsPrimitiveKeyword(tok) || tok.Is(".") || tok.Is(",") ||
                   tok.Is("?") || tok.Is("extends") || tok.Is("super") || tok.Is("[") ||
                   tok.Is("]") || tok.Is("&") || tok.Is("@"))) {
        return false;
      }
      ++j;
    }
  }

  bool ScanAnnotation(std::size_t& j) const {
    if (!At(j).Is("@") || At(j + 1).Is("interface")) return false;
    ++j;
    if (!At(j).IsIdent()) return false;
    ++j;
    while (At(j).Is(".") && At(j + 1).IsIdent()) j += 2;
    if (At(j).Is("(")) return SkipBalanced(j, "(", ")");
    return true;
  }

  bool SkipBalanced(std::size_t& j, std::string_view open, std::string_view close) const {
    int depth = 0;
    while (At(j).kind != TokenKind::kEnd) {
      if (At(j).Is(open)) ++depth;
      if (At(j).Is(close) && --depth == 0) {
        ++j;
        return true;
      }
      ++j;
    }
    return false;
  }

  bool ScanType(std::size_t& j) const {
    while (At(j).Is("@")) {
      if (!ScanAnnotation(j)) return false;
    }
    if (IsPrimitiveKeyword(At(j))) {
      ++j;
    } else if (At(j).IsIdent()) {
      ++j;
      if (At(j).Is("<") && !ScanTypeArgs(j)) return false;
      while (At(j).Is(".") && At(j + 1).IsIdent()) {
        j += 2;
        if (At(j).Is("<") && !ScanTypeArgs(j)) return false;
      }
    } else {
      return false;
    }
    while (At(j).Is("[") && At(j + 1).Is("]")) j += 2;
    return true;
  }

  void ScanModifiers(std::size_t& j) const {
    while (true) {
      if (At(j).Is("final")) {
        ++j;
      } else if (At(j).Is("@") && !At(j + 1).Is("interface")) {
        if (!ScanAnnotation(j)) return;
      } else {
        return;
      }
    }
  }

 private:
  const std::vector<Token>& t_;
};

class Parser {
 public:
  Parser(const std::vector<Token>& tokens, ParseFacts& facts)
      : t_(tokens), scan_(tokens), facts_(facts) {}

  void CompilationUnit() {
    const std::size_t save = pos_;
    while (Peek().Is("@") && !Peek(1).Is("interface")) Annotation();
    if (Accept("package")) {
      QualifiedName();
      Expect(";");
    } else {
      pos_ = save;
    }
    while (Peek().Is("import")) ImportDecl();
    while (!AtEnd()) {
      if (Accept(";")) continue;
      const Modifiers m = ParseModifiers();
      (void)m;
      TypeDeclaration();
    }
  }

 private:
  // ---- token helpers ----
  const Token& Peek(std::size_t k = 0) const { return scan_.At(pos_ + k); }
  bool AtEnd() const { return Peek().kind == TokenKind::kEnd; }
  bool Accept(std::string_view op) {
    if (Peek().Is(op)) {
      ++pos_;
      return true;
    }
    return false;
  }
  void Expect(std::string_view op) {
    if (!Accept(op)) throw SyntaxError{};
  }
  const Token& ExpectIdent() {
    if (!Peek().IsIdent()) throw SyntaxError{};
    return t_[pos_++];
  }

  struct DepthGuard {
    explicit DepthGuard(int& d) : d_(d) {
      if (++d_ > kMaxDepth) throw SyntaxError{};
    }
    ~DepthGuard() { --d_; }
    int& d_;
  };

  void RecordType(const std::string& name) {
    if (StartsUpper(name)) facts_.referenced_types.insert(name);
  }

  std::string QualifiedName() {
    std::string name = ExpectIdent().text;
    while (Peek().Is(".") && Peek(1).IsIdent()) {
      ++pos_;
      name += "." + t_[pos_++].text;
    }
    return name;
  }

  // ---- declarations ----
  void ImportDecl() {
    Expect("import");
    Accept("static");
    std::string path = ExpectIdent().text;
    while (Accept(".")) {
      if (Accept("*")) {
        path += ".*";
        break;
      }
      path += "." + ExpectIdent().text;
    }
    Expect(";");
    facts_.imports.push_back(path);
  }

  void Annotation() {
    Expect("@");
    const std::string name = QualifiedName();
    if (name.find('.') == std::string::npos) RecordType(name);
    if (Accept("(")) {
      if (!Accept(")")) {
        if (Peek().IsIdent() && Peek(1).Is("=")) {
          do {
            ExpectIdent();
            Expect("=");
            ElementValue();
          } while (Accept(","));
        } else {
          ElementValue();
        }
        Expect(")");
      }
    }
  }

  void ElementValue() {
    if (Peek().Is("@")) {
      Annotation();
    } else if (Accept("{")) {
      while (!Accept("}")) {
        ElementValue();
        if (!Accept(",")) {
          Expect("}");
          break;
        }
      }
    } else {
      Ternary();
    }
  }

  Modifiers ParseModifiers() {
    Modifiers m;
    while (true) {
      const Token& tok = Peek();
      if (tok.Is("@") && !Peek(1).Is("interface")) {
        Annotation();
      } else if (IsModifierKeyword(tok)) {
        if (tok.Is("public")) m.is_public = true;
        if (tok.Is("static")) m.is_static = true;
        ++pos_;
      } else if (tok.Is("default") && !Peek(1).Is(":") && !Peek(1).Is("->")) {
        ++pos_;
      } else if (tok.IsIdent("sealed") && (Peek(1).kind == TokenKind::kKeyword ||
                                            Peek(1).IsIdent("record"))) {
        ++pos_;
      } else if (tok.IsIdent("non") && Peek(1).Is("-") && Peek(2).IsIdent("sealed")) {
        pos_ += 3;
      } else {
        return m;
      }
      m.any = true;
    }
  }

  bool IsTypeDeclStart() const {
    const Token& tok = Peek();
    if (tok.Is("class") || tok.Is("interface") || tok.Is("enum")) return true;
    if (tok.Is("@") && Peek(1).Is("interface")) return true;
    return tok.IsIdent("record") && Peek(1).IsIdent() && (Peek(2).Is("(") || Peek(2).Is("<"));
  }

  void DeclareType(const Token& name) {
    if (name.synthetic) return;
    ++facts_.class_count;
    facts_.defined_types.insert(name.text);
  }

  void TypeDeclaration() {
    DepthGuard guard(depth_);
    if (Accept("class")) {
      DeclareType(ExpectIdent());
      if (Peek().Is("<")) TypeParameters();
      if (Accept("extends")) Type();
      if (Accept("implements")) TypeList();
      Permits();
      ClassBody(BodyKind::kClass);
    } else if (Accept("interface")) {
      DeclareType(ExpectIdent());
      if (Peek().Is("<")) TypeParameters();
      if (Accept("extends")) TypeList();
      Permits();
      ClassBody(BodyKind::kInterface);
    } else if (Accept("enum")) {
      DeclareType(ExpectIdent());
      if (Accept("implements")) TypeList();
      EnumBody();
    } else if (Peek().IsIdent("record")) {
      ++pos_;
      DeclareType(ExpectIdent());
      if (Peek().Is("<")) TypeParameters();
      Expect("(");
      if (!Accept(")")) {
        do {
          ParseModifiers();
          Type();
          Accept("...");
          ExpectIdent();
        } while (Accept(","));
        Expect(")");
      }
      if (Accept("implements")) TypeList();
      ClassBody(BodyKind::kRecord);
    } else if (Peek().Is("@") && Peek(1).Is("interface")) {
      pos_ += 2;
      DeclareType(ExpectIdent());
      ClassBody(BodyKind::kAnnotation);
    } else {
      throw SyntaxError{};
    }
  }

  void Permits() {
    if (Peek().IsIdent("permits")) {
      ++pos_;
      TypeList();
    }
  }

  void ClassBody(BodyKind kind) {
    Expect("{");
    while (!Accept("}")) {
      if (AtEnd()) throw SyntaxError{};
      ClassBodyDecl(kind);
    }
  }

  void EnumBody() {
    Expect("{");
    if (!Peek().Is(";") && !Peek().Is("}")) {
      EnumConstant();
      while (Accept(",")) {
        if (Peek().Is(";") || Peek().Is("}")) break;
        EnumConstant();
      }
    }
    if (Accept(";")) {
      while (!Peek().Is("}")) {
        if (AtEnd()) throw SyntaxError{};
        ClassBodyDecl(BodyKind::kEnum);
      }
    }
    Expect("}");
  }

  void EnumConstant() {
    while (Peek().Is("@")) Annotation();
    ExpectIdent();
    if (Peek().Is("(")) Arguments();
    if (Peek().Is("{")) ClassBody(BodyKind::kClass);
  }

  void ClassBodyDecl(BodyKind kind) {
    DepthGuard guard(depth_);
    if (Accept(";")) return;
    if (Peek().Is("{")) {
      Block();
      return;
    }
    if (Peek().Is("static") && Peek(1).Is("{")) {
      ++pos_;
      Block();
      return;
    }
    const Modifiers m = ParseModifiers();
    if (IsTypeDeclStart()) {
      TypeDeclaration();
      return;
    }
    if (Peek().Is("<")) TypeParameters();
    if (Peek().IsIdent() && Peek(1).Is("(")) {
      // constructor
      ExpectIdent();
      FormalParameters();
      if (Accept("throws")) {
        TypeList();
        facts_.throws_declared = true;
      }
      Block();
      return;
    }
    if (kind == BodyKind::kRecord && Peek().IsIdent() && Peek(1).Is("{")) {
      ++pos_;
      Block();
      return;
    }
    const bool is_void = Accept("void");
    if (!is_void) Type();
    const Token& name = ExpectIdent();
    if (Peek().Is("(")) {
      MethodRest(m, is_void, name);
      return;
    }
    if (is_void) throw SyntaxError{};
    Dims();
    if (Accept("=")) VariableInitializer();
    while (Accept(",")) VariableDeclarator();
    Expect(";");
  }

  void MethodRest(const Modifiers& m, bool is_void, const Token& name) {
    const auto params = FormalParameters();
    Dims();
    if (Accept("throws")) {
      TypeList();
      if (!name.synthetic) facts_.throws_declared = true;
    }
    if (Peek().Is("{")) {
      Block();
    } else if (Accept("default")) {
      ElementValue();
      Expect(";");
    } else {
      Expect(";");
    }
    if (name.synthetic) return;
    ++facts_.method_count;
    if (name.text == "main" && m.is_public && m.is_static && is_void && params.size() == 1 &&
        params[0].IsStringArray()) {
      facts_.has_main = true;
    }
  }

  std::vector<Param> FormalParameters() {
    std::vector<Param> params;
    Expect("(");
    if (Accept(")")) return params;
    do {
      ParseModifiers();
      Param p;
      p.type = Type();
      p.varargs = Accept("...");
      if (Accept("this")) continue;  // receiver parameter
      ExpectIdent();
      p.extra_dims = Dims();
      params.push_back(std::move(p));
    } while (Accept(","));
    Expect(")");
    return params;
  }

  int Dims() {
    int dims = 0;
    while (Peek().Is("[") && Peek(1).Is("]")) {
      pos_ += 2;
      ++dims;
    }
    return dims;
  }

  TypeInfo Type() {
    TypeInfo info;
    while (Peek().Is("@")) Annotation();
    if (IsPrimitiveKeyword(Peek())) {
      info.name = t_[pos_++].text;
    } else {
      const std::string first = ExpectIdent().text;
      info.name = first;
      if (Peek().Is("<")) TypeArguments();
      bool qualified_by_package = !StartsUpper(first);
      while (Peek().Is(".") && (Peek(1).IsIdent() || Peek(1).Is("@"))) {
        ++pos_;
        while (Peek().Is("@")) Annotation();
        info.name += "." + ExpectIdent().text;
        if (Peek().Is("<")) TypeArguments();
      }
      // Outer-qualified types reference the outer name; package-qualified
      // names resolve themselves.
      if (!qualified_by_package || info.name == first) RecordType(first);
    }
    while (Peek().Is("@")) Annotation();
    info.dims = Dims();
    return info;
  }

  void TypeArguments() {
    Expect("<");
    if (Accept(">")) return;  // diamond
    do {
      while (Peek().Is("@")) Annotation();
      if (Accept("?")) {
        if (Accept("extends") || Accept("super")) Type();
      } else {
        Type();
      }
    } while (Accept(","));
    Expect(">");
  }

  void TypeParameters() {
    Expect("<");
    do {
      while (Peek().Is("@")) Annotation();
      facts_.type_parameters.insert(ExpectIdent().text);
      if (Accept("extends")) {
        Type();
        while (Accept("&")) Type();
      }
    } while (Accept(","));
    Expect(">");
  }

  void TypeList() {
    do {
      Type();
    } while (Accept(","));
  }

  // ---- statements ----
  void Block() {
    DepthGuard guard(depth_);
    Expect("{");
    while (!Accept("}")) {
      if (AtEnd()) throw SyntaxError{};
      BlockStatement();
    }
  }

  bool LooksLikeLocalVarDecl(bool allow_colon) const {
    std::size_t j = pos_;
    scan_.ScanModifiers(j);
    if (!scan_.ScanType(j)) return false;
    if (!scan_.At(j).IsIdent()) return false;
    const Token& next = scan_.At(j + 1);
    return next.Is("=") || next.Is(";") || next.Is(",") || next.Is("[") ||
           (allow_colon && next.Is(":"));
  }

  bool IsYieldStatement() const {
    if (!Peek().IsIdent("yield")) return false;
    const Token& next = Peek(1);
    return !(next.Is("=") || next.Is(".") || next.Is("[") || next.Is("++") || next.Is("--") ||
             next.Is("+=") || next.Is("-=") || next.Is("*=") || next.Is("/=") ||
             next.Is(";") || next.Is("("));
  }

  void BlockStatement() {
    if (IsTypeDeclStart()) {
      TypeDeclaration();
      return;
    }
    const Token& tok = Peek();
    if (tok.Is("final") || tok.Is("abstract") || tok.Is("static") || tok.Is("strictfp") ||
        (tok.Is("@") && !Peek(1).Is("interface"))) {
      ParseModifiers();
      if (IsTypeDeclStart()) {
        TypeDeclaration();
        return;
      }
      LocalVariableDeclaration();
      Expect(";");
      return;
    }
    if (!IsYieldStatement() && LooksLikeLocalVarDecl(false)) {
      LocalVariableDeclaration();
      Expect(";");
      return;
    }
    Statement();
  }

  void LocalVariableDeclaration() {
    ParseModifiers();
    Type();
    VariableDeclarator();
    while (Accept(",")) VariableDeclarator();
  }

  void VariableDeclarator() {
    ExpectIdent();
    Dims();
    if (Accept("=")) VariableInitializer();
  }

  void VariableInitializer() {
    if (Peek().Is("{")) {
      ArrayInitializer();
    } else {
      Expression();
    }
  }

  void ArrayInitializer() {
    Expect("{");
    while (!Accept("}")) {
      VariableInitializer();
      if (!Accept(",")) {
        Expect("}");
        break;
      }
    }
  }

  void ParExpr() {
    Expect("(");
    Expression();
    Expect(")");
  }

  void Statement() {
    DepthGuard guard(depth_);
    const Token& tok = Peek();
    if (tok.Is("{")) {
      Block();
    } else if (Accept(";")) {
    } else if (Accept("if")) {
      ParExpr();
      Statement();
      if (Accept("else")) Statement();
    } else if (Accept("while")) {
      ParExpr();
      Statement();
    } else if (Accept("do")) {
      Statement();
      Expect("while");
      ParExpr();
      Expect(";");
    } else if (tok.Is("for")) {
      ForStatement();
    } else if (tok.Is("try")) {
      TryStatement();
    } else if (tok.Is("switch")) {
      Switch();
    } else if (Accept("return")) {
      if (!Accept(";")) {
        Expression();
        Expect(";");
      }
    } else if (Accept("throw")) {
      Expression();
      Expect(";");
    } else if (Accept("break") || Accept("continue")) {
      if (Peek().IsIdent()) ++pos_;
      Expect(";");
    } else if (Accept("synchronized")) {
      ParExpr();
      Block();
    } else if (Accept("assert")) {
      Expression();
      if (Accept(":")) Expression();
      Expect(";");
    } else if (tok.IsIdent() && Peek(1).Is(":")) {
      pos_ += 2;
      Statement();
    } else if (IsYieldStatement()) {
      ++pos_;
      Expression();
      Expect(";");
    } else {
      if (!IsStatementExpression(Expression())) throw SyntaxError{};
      Expect(";");
    }
  }

  void StatementExpressionList() {
    do {
      if (!IsStatementExpression(Expression())) throw SyntaxError{};
    } while (Accept(","));
  }

  void ForStatement() {
    Expect("for");
    Expect("(");
    if (LooksLikeLocalVarDecl(true)) {
      std::size_t j = pos_;
      scan_.ScanModifiers(j);
      scan_.ScanType(j);
      if (scan_.At(j + 1).Is(":")) {
        ParseModifiers();
        Type();
        ExpectIdent();
        Expect(":");
        Expression();
        Expect(")");
        Statement();
        return;
      }
      LocalVariableDeclaration();
      Expect(";");
    } else if (!Accept(";")) {
      StatementExpressionList();
      Expect(";");
    }
    if (!Accept(";")) {
      Expression();
      Expect(";");
    }
    if (!Accept(")")) {
      StatementExpressionList();
      Expect(")");
    }
    Statement();
  }

  void TryStatement() {
    Expect("try");
    bool resources = false;
    if (Accept("(")) {
      resources = true;
      while (!Accept(")")) {
        if (LooksLikeLocalVarDecl(false)) {
          ParseModifiers();
          Type();
          ExpectIdent();
          Expect("=");
          Expression();
        } else {
          Expression();
        }
        if (!Accept(";")) {
          Expect(")");
          break;
        }
      }
    }
    Block();
    int catches = 0;
    while (Accept("catch")) {
      Expect("(");
      ParseModifiers();
      Type();
      while (Accept("|")) Type();
      ExpectIdent();
      Expect(")");
      Block();
      ++catches;
    }
    bool has_finally = false;
    if (Accept("finally")) {
      Block();
      has_finally = true;
    }
    if (catches == 0 && !has_finally && !resources) throw SyntaxError{};
    if (catches > 0) ++facts_.try_catch_count;
  }

  void Switch() {
    Expect("switch");
    ParExpr();
    Expect("{");
    while (!Accept("}")) {
      if (AtEnd()) throw SyntaxError{};
      if (Accept("default")) {
      } else if (Accept("case")) {
        CaseLabel();
        while (Accept(",")) CaseLabel();
      } else {
        throw SyntaxError{};
      }
      if (Accept("->")) {
        if (Peek().Is("{")) {
          Block();
        } else if (Peek().Is("throw")) {
          Statement();
        } else {
          Expression();
          Expect(";");
        }
      } else {
        Expect(":");
        while (!Peek().Is("case") && !Peek().Is("default") && !Peek().Is("}")) {
          if (AtEnd()) throw SyntaxError{};
          BlockStatement();
        }
      }
    }
  }

  void CaseLabel() {
    if (Accept("null") || Accept("default")) return;
    std::size_t j = pos_;
    if (scan_.ScanType(j) && scan_.At(j).IsIdent()) {
      const Token& after = scan_.At(j + 1);
      if (after.Is("->") || after.Is(":") || after.Is(",") || after.IsIdent("when")) {
        Type();
        ExpectIdent();
        if (Peek().IsIdent("when")) {
          ++pos_;
          Expression();
        }
        return;
      }
    }
    Ternary();
  }

  // ---- expressions ----
  bool LooksLikeLambda() const {
    if (Peek().IsIdent() && Peek(1).Is("->")) return true;
    if (!Peek().Is("(")) return false;
    std::size_t j = pos_;
    if (!scan_.SkipBalanced(j, "(", ")")) return false;
    return scan_.At(j).Is("->");
  }

  void Lambda() {
    if (Peek().IsIdent()) {
      ++pos_;
    } else {
      Expect("(");
      if (!Accept(")")) {
        if (Peek().IsIdent() && (Peek(1).Is(",") || Peek(1).Is(")"))) {
          do {
            ExpectIdent();
          } while (Accept(","));
        } else {
          do {
            ParseModifiers();
            Type();
            Accept("...");
            ExpectIdent();
            Dims();
          } while (Accept(","));
        }
        Expect(")");
      }
    }
    Expect("->");
    if (Peek().Is("{")) {
      Block();
    } else {
      Expression();
    }
  }

  bool AssignmentOperator() {
    static constexpr std::string_view kOps[] = {"=",  "+=", "-=", "*=", "/=",
                                                "%=", "&=", "|=", "^=", "<<="};
    for (auto op : kOps) {
      if (Accept(op)) return true;
    }
    // >>= and >>>= arrive as '>' '>=' and '>' '>' '>='.
    if (Peek().Is(">") && Peek(1).Is(">=") && Adjacent(Peek(), Peek(1))) {
      pos_ += 2;
      return true;
    }
    if (Peek().Is(">") && Peek(1).Is(">") && Peek(2).Is(">=") && Adjacent(Peek(), Peek(1)) &&
        Adjacent(Peek(1), Peek(2))) {
      pos_ += 3;
      return true;
    }
    return false;
  }

  ExprKind Expression() {
    DepthGuard guard(depth_);
    if (LooksLikeLambda()) {
      Lambda();
      return ExprKind::kOther;
    }
    const ExprKind k = Ternary();
    if (AssignmentOperator()) {
      if (Peek().Is("{")) throw SyntaxError{};
      Expression();
      return ExprKind::kAssignment;
    }
    return k;
  }

  ExprKind Ternary() {
    const ExprKind k = Binary(1);
    if (!Accept("?")) return k;
    Expression();
    Expect(":");
    if (LooksLikeLambda()) {
      Lambda();
    } else {
      Ternary();
    }
    return ExprKind::kOther;
  }

  // Returns {precedence, token count}; precedence 0 when no binary operator.
  std::pair<int, int> BinaryOperator() const {
    const Token& tok = Peek();
    if (tok.kind != TokenKind::kOperator && !tok.Is("instanceof")) return {0, 0};
    const std::string& s = tok.text;
    if (s == "||") return {1, 1};
    if (s == "&&") return {2, 1};
    if (s == "|") return {3, 1};
    if (s == "^") return {4, 1};
    if (s == "&") return {5, 1};
    if (s == "==" || s == "!=") return {6, 1};
    if (s == "<" || s == "<=" || s == ">=" || s == "instanceof") return {7, 1};
    if (s == "<<") return {8, 1};
    if (s == "+" || s == "-") return {9, 1};
    if (s == "*" || s == "/" || s == "%") return {10, 1};
    if (s == ">") {
      const Token& b = Peek(1);
      if (!Adjacent(tok, b)) return {7, 1};
      if (b.Is(">=")) return {0, 0};
      if (!b.Is(">")) return {7, 1};
      const Token& c = Peek(2);
      if (Adjacent(b, c) && c.Is(">=")) return {0, 0};
      if (Adjacent(b, c) && c.Is(">")) return {8, 3};
      return {8, 2};
    }
    return {0, 0};
  }

  ExprKind Binary(int min_prec) {
    ExprKind k = Unary();
    while (true) {
      const auto [prec, len] = BinaryOperator();
      if (prec == 0 || prec < min_prec) return k;
      if (Accept("instanceof")) {
        Accept("final");
        Type();
        if (Peek().IsIdent()) ++pos_;
      } else {
        pos_ += static_cast<std::size_t>(len);
        Binary(prec + 1);
      }
      k = ExprKind::kOther;
    }
  }

  bool LooksLikeCast() const {
    std::size_t j = pos_ + 1;
    if (IsPrimitiveKeyword(scan_.At(j))) {
      return scan_.ScanType(j) && scan_.At(j).Is(")");
    }
    if (!scan_.ScanType(j)) return false;
    while (scan_.At(j).Is("&")) {
      ++j;
      if (!scan_.ScanType(j)) return false;
    }
    if (!scan_.At(j).Is(")")) return false;
    const Token& next = scan_.At(j + 1);
    return next.IsIdent() || next.kind == TokenKind::kNumber ||
           next.kind == TokenKind::kString || next.kind == TokenKind::kChar ||
           next.Is("this") || next.Is("super") || next.Is("new") || next.Is("true") ||
           next.Is("false") || next.Is("null") || next.Is("switch") || next.Is("(") ||
           next.Is("!") || next.Is("~") || IsPrimitiveKeyword(next);
  }

  ExprKind Unary() {
    DepthGuard guard(depth_);
    if (Accept("++") || Accept("--")) {
      Unary();
      return ExprKind::kIncrement;
    }
    if (Accept("+") || Accept("-") || Accept("!") || Accept("~")) {
      Unary();
      return ExprKind::kOther;
    }
    if (Peek().Is("(") && LooksLikeCast()) {
      Expect("(");
      Type();
      while (Accept("&")) Type();
      Expect(")");
      if (LooksLikeLambda()) {
        Lambda();
      } else {
        Unary();
      }
      return ExprKind::kOther;
    }
    ExprKind k = Selectors(Primary());
    while (Accept("++") || Accept("--")) k = ExprKind::kIncrement;
    return k;
  }

  ExprKind Primary() {
    const Token& tok = Peek();
    if (IsLiteral(tok)) {
      ++pos_;
      return ExprKind::kOther;
    }
    if (Accept("this")) {
      if (Peek().Is("(")) {
        Arguments();
        return ExprKind::kCall;
      }
      return ExprKind::kOther;
    }
    if (Accept("super")) {
      if (Peek().Is("(")) {
        Arguments();
        return ExprKind::kCall;
      }
      if (Accept("::")) {
        ExpectIdent();
        return ExprKind::kOther;
      }
      Expect(".");
      if (Peek().Is("<")) TypeArguments();
      ExpectIdent();
      if (Peek().Is("(")) {
        Arguments();
        return ExprKind::kCall;
      }
      return ExprKind::kOther;
    }
    if (tok.Is("new")) return Creator();
    if (Accept("(")) {
      Expression();
      Expect(")");
      return ExprKind::kOther;
    }
    if (tok.Is("switch")) {
      Switch();
      return ExprKind::kOther;
    }
    if (IsPrimitiveKeyword(tok) || tok.Is("void")) {
      ++pos_;
      Dims();
      if (Accept("::")) {
        Expect("new");
      } else {
        Expect(".");
        Expect("class");
      }
      return ExprKind::kOther;
    }
    if (tok.IsIdent()) {
      const std::string name = tok.text;
      ++pos_;
      if (Peek().Is("(")) {
        Arguments();
        return ExprKind::kCall;
      }
      if (Peek().Is("[") && Peek(1).Is("]")) {
        Dims();
        RecordType(name);
        if (Accept("::")) {
          Expect("new");
        } else {
          Expect(".");
          Expect("class");
        }
        return ExprKind::kOther;
      }
      if (Peek().Is("<")) {
        std::size_t j = pos_;
        if (scan_.ScanTypeArgs(j) && scan_.At(j).Is("::")) {
          TypeArguments();
          RecordType(name);
          return ExprKind::kOther;  // selectors consume '::'
        }
      }
      if (Peek().Is(".") || Peek().Is("::")) {
        if (IsTypeLikeName(name) || (StartsUpper(name) && Peek(1).Is("class"))) {
          RecordType(name);
          if (Peek().Is(".") && Peek(1).IsIdent() && Peek(2).Is("(")) {
            facts_.invoked_callees.insert(name + "." + Peek(1).text);
          }
        }
      }
      return ExprKind::kOther;
    }
    throw SyntaxError{};
  }

  ExprKind Selectors(ExprKind k) {
    while (true) {
      if (Accept(".")) {
        if (Peek().Is("<")) {
          TypeArguments();
          ExpectIdent();
          Arguments();
          k = ExprKind::kCall;
        } else if (Peek().Is("new")) {
          k = Creator();
        } else if (Accept("this") || Accept("class")) {
          k = ExprKind::kOther;
        } else if (Accept("super")) {
          if (Accept("::")) {
            ExpectIdent();
            k = ExprKind::kOther;
          } else {
            Expect(".");
            ExpectIdent();
            Arguments();
            k = ExprKind::kCall;
          }
        } else {
          ExpectIdent();
          if (Peek().Is("(")) {
            Arguments();
            k = ExprKind::kCall;
          } else {
            k = ExprKind::kOther;
          }
        }
      } else if (Peek().Is("[") && !Peek(1).Is("]")) {
        ++pos_;
        Expression();
        Expect("]");
        k = ExprKind::kOther;
      } else if (Accept("::")) {
        if (!Accept("new")) ExpectIdent();
        k = ExprKind::kOther;
      } else {
        return k;
      }
    }
  }

  ExprKind Creator() {
    Expect("new");
    if (Peek().Is("<")) TypeArguments();
    while (Peek().Is("@")) Annotation();
    if (IsPrimitiveKeyword(Peek())) {
      ++pos_;
      ArrayCreatorRest();
      return ExprKind::kNew;
    }
    const std::string first = ExpectIdent().text;
    std::string last = first;
    if (Peek().Is("<")) TypeArguments();
    while (Peek().Is(".") && Peek(1).IsIdent()) {
      ++pos_;
      last = ExpectIdent().text;
      if (Peek().Is("<")) TypeArguments();
    }
    if (StartsUpper(first)) RecordType(first);
    if (Peek().Is("[")) {
      ArrayCreatorRest();
      return ExprKind::kNew;
    }
    if (StartsUpper(first) || last == first) facts_.invoked_callees.insert(last);
    Arguments();
    if (Peek().Is("{")) ClassBody(BodyKind::kClass);
    return ExprKind::kNew;
  }

  void ArrayCreatorRest() {
    if (Peek().Is("[") && Peek(1).Is("]")) {
      Dims();
      ArrayInitializer();
      return;
    }
    bool any = false;
    while (Peek().Is("[") && !Peek(1).Is("]")) {
      ++pos_;
      Expression();
      Expect("]");
      any = true;
    }
    if (!any) throw SyntaxError{};
    Dims();
  }

  void Arguments() {
    Expect("(");
    if (Accept(")")) return;
    do {
      Expression();
    } while (Accept(","));
    Expect(")");
  }

  const std::vector<Token>& t_;
  Scanner scan_;
  ParseFacts& facts_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

bool IsTypeLikeName(const std::string& name) {
  if (!StartsUpper(name)) return false;
  return std::any_of(name.begin(), name.end(),
                     [](char c) { return std::islower(static_cast<unsigned char>(c)); });
}

bool ParseCompilationUnit(const std::vector<Token>& tokens, ParseFacts& facts) {
  if (tokens.empty() || tokens.back().kind != TokenKind::kEnd) return false;
  facts = ParseFacts{};
  try {
    Parser parser(tokens, facts);
    parser.CompilationUnit();
  } catch (const SyntaxError&) {
    facts = ParseFacts{};
    return false;
  }
  return true;
}

std::size_t HeaderEnd(const std::vector<Token>& tokens) {
  std::size_t i = 0;
  while (i < tokens.size() && (tokens[i].Is("package") || tokens[i].Is("import"))) {
    std::size_t j = i;
    while (j < tokens.size() && !tokens[j].Is(";") && tokens[j].kind != TokenKind::kEnd) ++j;
    if (j >= tokens.size() || !tokens[j].Is(";")) return i;
    i = j + 1;
  }
  return i;
}

ParseFacts TokenScan(const std::vector<Token>& tokens) {
  ParseFacts facts;
  Scanner scan(tokens);
  int tries = 0;
  int catches = 0;
  const std::size_t n = tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Token& tok = tokens[i];
    const Token& prev = i > 0 ? tokens[i - 1] : scan.At(n);
    const Token& next = scan.At(i + 1);
    if (tok.Is("import")) {
      std::string path;
      std::size_t j = i + 1;
      if (scan.At(j).Is("static")) ++j;
      while (scan.At(j).IsIdent() || scan.At(j).Is(".") || scan.At(j).Is("*")) {
        path += scan.At(j).text;
        ++j;
      }
      if (!path.empty()) facts.imports.push_back(path);
      i = j - 1;
      continue;
    }
    if ((tok.Is("class") || tok.Is("interface") || tok.Is("enum")) && next.IsIdent() &&
        !prev.Is(".")) {
      ++facts.class_count;
      facts.defined_types.insert(next.text);
      ++i;
      continue;
    }
    if (tok.IsIdent("record") && next.IsIdent() && scan.At(i + 2).Is("(")) {
      ++facts.class_count;
      facts.defined_types.insert(next.text);
      ++i;
      continue;
    }
    if (tok.Is("throws")) facts.throws_declared = true;
    if (tok.Is("try")) ++tries;
    if (tok.Is("catch")) ++catches;
    if (tok.Is("new")) {
      std::size_t j = i + 1;
      if (!scan.At(j).IsIdent()) continue;
      const std::string first = scan.At(j).text;
      std::string last = first;
      ++j;
      while (scan.At(j).Is(".") && scan.At(j + 1).IsIdent()) {
        last = scan.At(j + 1).text;
        j += 2;
      }
      if (scan.At(j).Is("<")) scan.ScanTypeArgs(j);
      if (StartsUpper(first)) facts.referenced_types.insert(first);
      if (scan.At(j).Is("(") && (StartsUpper(first) || last == first)) {
        facts.invoked_callees.insert(last);
      }
      continue;
    }
    if (!tok.IsIdent()) continue;
    if (next.Is("(") && (prev.IsIdent() || prev.Is("void") || IsPrimitiveKeyword(prev) ||
                         prev.Is(">") || prev.Is("]"))) {
      // Method declaration when the parameter list is followed by a body.
      std::size_t j = i + 1;
      if (scan.SkipBalanced(j, "(", ")") && (scan.At(j).Is("{") || scan.At(j).Is("throws"))) {
        const std::size_t before = i >= 1 ? i - 1 : 0;
        if (!(before >= 1 && tokens[before - 1].Is("new")) &&
            !(before >= 1 && tokens[before - 1].Is("."))) {
          ++facts.method_count;
          if (tok.text == "main" && prev.Is("void")) {
            bool is_public = false;
            bool is_static = false;
            for (std::size_t k = before; k > 0 && k + 4 > before; --k) {
              if (tokens[k - 1].Is("public")) is_public = true;
              if (tokens[k - 1].Is("static")) is_static = true;
            }
            bool string_array = false;
            for (std::size_t k = i + 2; k + 1 < j; ++k) {
              if (tokens[k].IsIdent("String") &&
                  ((tokens[k + 1].Is("[") && scan.At(k + 2).Is("]")) ||
                   tokens[k + 1].Is("..."))) {
                string_array = true;
              }
            }
            if (is_public && is_static && string_array) facts.has_main = true;
          }
        }
      }
    }
    if (!StartsUpper(tok.text) || prev.Is(".")) continue;
    if (prev.Is("class") || prev.Is("interface") || prev.Is("enum") || prev.Is("package")) {
      continue;
    }
    const bool qualifier = (next.Is(".") || next.Is("::")) && IsTypeLikeName(tok.text);
    if (next.IsIdent() || next.Is("<") || (next.Is("[") && scan.At(i + 2).Is("]")) ||
        next.Is("...") || prev.Is("@") || qualifier || (prev.Is("(") && next.Is(")")) ||
        prev.Is("throws") || prev.Is("extends") || prev.Is("implements") || prev.Is("|")) {
      facts.referenced_types.insert(tok.text);
    }
    if (qualifier && next.Is(".") && scan.At(i + 2).IsIdent() && scan.At(i + 3).Is("(")) {
      facts.invoked_callees.insert(tok.text + "." + scan.At(i + 2).text);
    }
  }
  facts.try_catch_count = std::min(tries, catches);
  return facts;
}

}  // namespace repro::analyzer::java
