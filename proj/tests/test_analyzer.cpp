#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "java_lexer.hpp"
#include "java_parser.hpp"
#include "repro/analyzer.hpp"
#include "repro/error.hpp"
#include "repro/ingest.hpp"
#include "repro/rng.hpp"

using namespace repro;
using namespace repro::analyzer;
namespace fs = std::filesystem;

namespace {

CompilerConfig Stub(const std::string& script, int timeout_ms = 10000) {
  CompilerConfig c;
  c.command = std::string("sh ") + REPRO_TEST_STUBS + "/" + script;
  c.timeout = std::chrono::milliseconds(timeout_ms);
  return c;
}

AnalyzerConfig NoCompiler() {
  AnalyzerConfig a;
  a.compiler.command = "none";
  return a;
}

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kHello =
    "public class Hello {\n"
    "    public static void main(String[] args) {\n"
    "        System.out.println(\"hi\");\n"
    "    }\n"
    "}\n";

}  // namespace

TEST_CASE("lexer drops comments and keeps offsets") {
  const auto r = java::Lex("int /* c */ x = 1; // tail\nString s = \"a\\\"b\";");
  REQUIRE(r.ok);
  std::vector<std::string> texts;
  for (const auto& t : r.tokens) {
    if (t.kind != java::TokenKind::kEnd) texts.push_back(t.text);
  }
  CHECK(texts == std::vector<std::string>{"int", "x", "=", "1", ";", "String", "s", "=",
                                          "\"a\\\"b\"", ";"});
  CHECK(r.tokens.back().kind == java::TokenKind::kEnd);
  CHECK(r.tokens[1].begin == 12);
}

TEST_CASE("lexer splits generic closers") {
  const auto r = java::Lex("Map<String, List<Integer>> m;");
  REQUIRE(r.ok);
  int closers = 0;
  for (const auto& t : r.tokens) closers += t.Is(">");
  CHECK(closers == 2);
}

TEST_CASE("lexer flags unterminated strings") {
  CHECK_FALSE(java::Lex("String s = \"abc;").ok);
  CHECK_FALSE(java::Lex("int x = 1; /* open").ok);
}

TEST_CASE("structure of a full class") {
  const auto s = AnalyzeStructure(kHello);
  CHECK(s.parse_ok);
  CHECK(s.wrap_level == WrapLevel::kNone);
  CHECK(s.class_count == 1);
  CHECK(s.method_count == 1);
  CHECK(s.has_main);
  CHECK_FALSE(s.from_token_scan);
}

TEST_CASE("statements get method and class wrappers") {
  const auto s = AnalyzeStructure("int x = 1;\nx++;");
  CHECK(s.parse_ok);
  CHECK(s.wrap_level == WrapLevel::kMethodWrapped);
  CHECK(s.class_count == 0);
  CHECK(s.method_count == 0);
  CHECK_FALSE(s.has_main);

  const auto m = AnalyzeStructure("void f() { g(); }\nint g() { return 1; }");
  CHECK(m.parse_ok);
  CHECK(m.wrap_level == WrapLevel::kClassWrapped);
  CHECK(m.method_count == 2);
  CHECK(m.class_count == 0);
}

TEST_CASE("main detection") {
  CHECK(AnalyzeStructure("class A { public static void main(String[] a) {} }").has_main);
  CHECK(AnalyzeStructure("class A { public static void main(String... a) {} }").has_main);
  CHECK(AnalyzeStructure("class A { public static void main(String a[]) {} }").has_main);
  CHECK(AnalyzeStructure("class A { public  static\tvoid main ( String [ ] a ) {} }").has_main);
  CHECK_FALSE(AnalyzeStructure("class A { static void main(String[] a) {} }").has_main);
  CHECK_FALSE(AnalyzeStructure("class A { public static void main(int a) {} }").has_main);
  CHECK_FALSE(AnalyzeStructure("class A { public static int main(String[] a) { return 0; } }").has_main);
}

TEST_CASE("parse failures") {
  CHECK_FALSE(CheckParsability("int x = ;"));
  CHECK_FALSE(CheckParsability("class A {"));
  CHECK(CheckParsability("x = 1;"));
  CHECK(CheckParsability(kHello));
}

TEST_CASE("imports are collected in order") {
  const auto s = AnalyzeStructure(
      "import java.util.List;\nimport java.io.*;\nimport static java.lang.Math.max;\n"
      "class A { List<String> l; }");
  REQUIRE(s.parse_ok);
  REQUIRE(s.imports.size() >= 2);
  CHECK(s.imports[0] == "java.util.List");
  CHECK(s.imports[1] == "java.io.*");
}

TEST_CASE("wrapping keeps imports, referenced types and LOC") {
  const std::string code = "import java.util.List;\nList<String> xs = null;\nFoo f = new Foo();";
  const auto s = AnalyzeStructure(code);
  REQUIRE(s.parse_ok);
  CHECK(s.wrap_level != WrapLevel::kNone);
  CHECK(s.imports == std::vector<std::string>{"java.util.List"});
  CHECK(s.referenced_types.count("List"));
  CHECK(s.referenced_types.count("Foo"));
  const auto unit = WrappedSource(code, s);
  CHECK(unit.source.find("import java.util.List;") < unit.source.find("class"));
  const auto fv = ExtractFeatures(code, "", NoCompiler()).features;
  CHECK(fv.loc == 3);
}

TEST_CASE("import classification examples") {
  const auto& idx = JdkIndex::Builtin();
  {
    const auto s = AnalyzeStructure("import java.util.List;\nclass A { List<String> l; }");
    const auto c = ClassifyImports(s, idx);
    CHECK(c.native_import == TriState::kPresent);
    CHECK(c.external_import == TriState::kNeutral);
  }
  {
    const auto s = AnalyzeStructure("XMLType t = new XMLType();");
    const auto c = ClassifyImports(s, idx);
    CHECK(c.external_import == TriState::kAbsent);
    CHECK(std::find(c.unresolved_types.begin(), c.unresolved_types.end(), "XMLType") !=
          c.unresolved_types.end());
  }
  {
    const auto s = AnalyzeStructure("int a = 1;\nint b = a * 2;");
    const auto c = ClassifyImports(s, idx);
    CHECK(c.native_import == TriState::kNeutral);
    CHECK(c.external_import == TriState::kNeutral);
  }
  {
    const auto s = AnalyzeStructure("List<String> l = new ArrayList<>();");
    const auto c = ClassifyImports(s, idx);
    CHECK(c.native_import == TriState::kAbsent);
    CHECK(!c.missing_jdk_imports.empty());
  }
  {
    // missing requirement dominates a present import
    const auto s = AnalyzeStructure("import java.util.List;\nList<String> l = new ArrayList<>();");
    CHECK(ClassifyImports(s, idx).native_import == TriState::kAbsent);
  }
  {
    const auto s = AnalyzeStructure("import org.json.JSONObject;\nJSONObject o = new JSONObject();");
    CHECK(ClassifyImports(s, idx).external_import == TriState::kPresent);
  }
  {
    // java.lang needs no import
    const auto s = AnalyzeStructure("String s = Integer.toString(3);");
    CHECK(ClassifyImports(s, idx).native_import == TriState::kNeutral);
  }
}

TEST_CASE("exception handling examples") {
  const auto& idx = JdkIndex::Builtin();
  CHECK(AssessExceptionHandling(AnalyzeStructure("try { f(); } catch (Exception e) {}"), "", idx) ==
        TriState::kPresent);
  CHECK(AssessExceptionHandling(AnalyzeStructure("int x = 1;"), "I get a NullPointerException",
                                idx) == TriState::kPresent);
  CHECK(AssessExceptionHandling(AnalyzeStructure("FileReader r = new FileReader(\"a\");"), "", idx) ==
        TriState::kAbsent);
  CHECK(AssessExceptionHandling(
            AnalyzeStructure("void f() throws IOException { FileReader r = new FileReader(\"a\"); }"),
            "", idx) == TriState::kPresent);
  CHECK(AssessExceptionHandling(AnalyzeStructure("int x = 1;"), "", idx) == TriState::kNeutral);
  CHECK(MentionsExceptionToken("why StackOverflowError here"));
  CHECK_FALSE(MentionsExceptionToken("an exception is thrown"));
}

TEST_CASE("blank snippet is rejected") {
  try {
    ExtractFeatures(" \n\t\n", "", NoCompiler());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("loc ignores blank lines") {
  CHECK(ExtractFeatures("a();\n\nb();\n   \nc();\n", "", NoCompiler()).features.loc == 3);
}

TEST_CASE("JDK index loading") {
  const auto& idx = JdkIndex::Builtin();
  CHECK(idx.IsNativePath("java.util.List"));
  CHECK(idx.IsNativePath("javax.swing.JFrame"));
  CHECK_FALSE(idx.IsNativePath("org.json.JSONObject"));
  CHECK(idx.PackageOf("ArrayList") == "java.util");
  CHECK_FALSE(idx.CheckedExceptionOf("FileReader").empty());
  CHECK(idx.hash().size() == 16);
  const auto same = JdkIndex::FromJson(JdkIndex::BuiltinText());
  CHECK(same.hash() == idx.hash());
  CHECK_THROWS_AS(JdkIndex::FromJson("{not json"), Error);
  CHECK_THROWS_AS(JdkIndex::Load("/nonexistent/jdk.json"), Error);
}

TEST_CASE("custom JDK index changes classification") {
  auto idx = std::make_shared<JdkIndex>(JdkIndex::FromJson(
      R"({"version":"t","prefixes":["java."],"classes":{"Widget":"java.widgets"},"checked_throwers":{}})"));
  const auto s = AnalyzeStructure("Widget w = new Widget();");
  CHECK(ClassifyImports(s, *idx).native_import == TriState::kAbsent);
  CHECK(ClassifyImports(s, JdkIndex::Builtin()).external_import == TriState::kAbsent);
}

TEST_CASE("compiler: none and missing binary are unavailable") {
  CompilerConfig c;
  c.command = "none";
  CHECK(CheckCompilability(kHello, c).status == CompileStatus::kUnavailable);
  c.command = "";
  CHECK(CheckCompilability(kHello, c).status == CompileStatus::kUnavailable);
  c.command = "nonexistent-cc-for-tests";
  CHECK(CheckCompilability(kHello, c).status == CompileStatus::kUnavailable);
}

TEST_CASE("compiler: stub success") {
  const auto r = CheckCompilability(kHello, Stub("javac_ok.sh"));
  CHECK(r.status == CompileStatus::kSuccess);
  CHECK(r.diagnostics.empty());
}

TEST_CASE("compiler: stub failure yields diagnostics") {
  const auto r = CheckCompilability("Game game = new Game();\ngame.start();", Stub("javac_fail.sh"));
  CHECK(r.status == CompileStatus::kFailure);
  REQUIRE(r.diagnostics.size() == 2);
  CHECK(r.diagnostics[0].line == 3);
  CHECK(r.diagnostics[0].message == "cannot find symbol");
  CHECK(r.diagnostics[1].line == 5);
}

TEST_CASE("compiler: timeout") {
  const auto start = std::chrono::steady_clock::now();
  const auto r = CheckCompilability(kHello, Stub("javac_slow.sh", 300));
  const auto took = std::chrono::steady_clock::now() - start;
  CHECK(r.status == CompileStatus::kTimeout);
  CHECK(took < std::chrono::seconds(10));
}

TEST_CASE("compiler: unparsable snippets are not compiled") {
  const auto r = CheckCompilability("int x = ;", Stub("javac_ok.sh"));
  CHECK(r.status == CompileStatus::kFailure);
}

TEST_CASE("compiler receives the wrapped source with hoisted imports") {
  const auto out = fs::temp_directory_path() / ("repro-record-" + std::to_string(::getpid()) + ".java");
  ::setenv("REPRO_STUB_OUT", out.c_str(), 1);
  const std::string code = "import java.util.List;\nList<String> xs = null;";
  const auto r = CheckCompilability(code, Stub("javac_record.sh"));
  CHECK(r.status == CompileStatus::kSuccess);
  const auto text = ReadFile(out);
  const auto imp = text.find("import java.util.List;");
  REQUIRE(imp != std::string::npos);
  CHECK(imp < text.find("class"));
  CHECK(text.find("List<String> xs = null;") != std::string::npos);
  fs::remove(out);
}

TEST_CASE("scratch directory that cannot be created is a configuration error") {
  auto c = Stub("javac_ok.sh");
  c.scratch_dir = "/proc/definitely/not/writable";
  try {
    CheckCompilability(kHello, c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfiguration);
  }
}

TEST_CASE("compilable feature follows the compiler") {
  AnalyzerConfig a;
  a.compiler = Stub("javac_ok.sh");
  CHECK(ExtractFeatures(kHello, "", a).features.compilable);
  a.compiler = Stub("javac_fail.sh");
  CHECK_FALSE(ExtractFeatures(kHello, "", a).features.compilable);
  const auto none = ExtractFeatures(kHello, "", NoCompiler());
  CHECK_FALSE(none.features.compilable);
  CHECK(none.compile.status == CompileStatus::kUnavailable);
}

TEST_CASE("hello world feature vector") {
  AnalyzerConfig a;
  a.compiler = Stub("javac_ok.sh");
  const auto f = ExtractFeatures(kHello, "", a).features;
  CHECK(f.loc == 5);
  CHECK(f.has_method);
  CHECK(f.has_main);
  CHECK(f.has_class);
  CHECK(f.parsable);
  CHECK(f.compilable);
  CHECK(f.native_import == TriState::kNeutral);
  CHECK(f.external_import == TriState::kNeutral);
  CHECK(f.exception_handling == TriState::kNeutral);
  CHECK(ExtractFeatures("int x = ;", "", a).features.parsable == false);
  CHECK(ExtractFeatures("int x = ;", "", a).features.compilable == false);
}

namespace {

// Random snippets assembled from plausible and broken fragments.
std::string RandomSnippet(Rng& rng) {
  static const std::vector<std::string> pieces = {
      "int x = 1;",  "x++;", "String s = \"a\";", "List<String> l = new ArrayList<>();",
      "import java.util.List;", "class A {", "}", "void f() {", "public static void main(String[] a) {",
      "try {", "} catch (Exception e) {", "Foo f = new Foo();", "int y = ;", "(", ")", "{", ";",
      "new FileReader(\"a\");", "return;", "if (x > 1) {", "for (int i = 0; i < 3; i++) {",
      "System.out.println(x);", "@Override", "interface I { void g(); }", "enum E { A, B }"};
  std::string s;
  const auto n = 1 + rng.Below(8);
  for (std::uint64_t i = 0; i < n; ++i) {
    s += pieces[rng.Below(pieces.size())];
    s += rng.Bernoulli(0.7) ? "\n" : " ";
  }
  return s;
}

}  // namespace

TEST_CASE("compilable implies parsable and external +1 needs imports") {
  Rng rng(21);
  AnalyzerConfig a;
  a.compiler = Stub("javac_ok.sh");
  for (int i = 0; i < 150; ++i) {
    const auto code = RandomSnippet(rng);
    const auto ex = ExtractFeatures(code, "", a);
    CHECK_MESSAGE((!ex.features.compilable || ex.features.parsable), code);
    if (ex.summary.imports.empty()) {
      CHECK(ex.features.external_import != TriState::kPresent);
    }
    CHECK(ex.features.loc == ingest::CountLoc(code));
  }
}

TEST_CASE("extraction is deterministic across threads") {
  Rng rng(8);
  std::vector<std::string> corpus;
  for (int i = 0; i < 60; ++i) corpus.push_back(RandomSnippet(rng));
  const auto cfg = NoCompiler();
  std::vector<FeatureVector> serial;
  std::vector<StructuralSummary> summaries;
  for (const auto& c : corpus) {
    const auto ex = ExtractFeatures(c, "why IOException", cfg);
    serial.push_back(ex.features);
    summaries.push_back(ex.summary);
  }
  std::vector<std::future<std::pair<FeatureVector, StructuralSummary>>> futures;
  for (const auto& c : corpus) {
    futures.push_back(std::async(std::launch::async, [&cfg, c] {
      const auto ex = ExtractFeatures(c, "why IOException", cfg);
      return std::make_pair(ex.features, ex.summary);
    }));
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto [f, s] = futures[i].get();
    CHECK(f == serial[i]);
    CHECK(s == summaries[i]);
  }
}

TEST_CASE("golden corpus") {
  const fs::path dir = fs::path(REPRO_TEST_DATA) / "golden";
  const auto doc = nlohmann::json::parse(ReadFile(dir / "expected.json"));
  AnalyzerConfig cfg;
  cfg.compiler = CompilerConfig::FromEnvironment();
  const bool have_compiler =
      CheckCompilability(kHello, cfg.compiler).status == CompileStatus::kSuccess;
  if (!have_compiler) MESSAGE("no working javac; compilable expected to be 0");
  int checked = 0;
  for (const auto& item : doc.at("snippets")) {
    const std::string file = item.at("file");
    const auto code = ReadFile(dir / file);
    const auto ex = ExtractFeatures(code, item.value("question_text", ""), cfg);
    const auto row = Encode(ex.features);
    auto expected = item.at("features").get<std::vector<double>>();
    if (!have_compiler) expected[5] = 0;
    CHECK_MESSAGE(std::vector<double>(row.begin(), row.end()) == expected, file);
    ++checked;
  }
  CHECK(checked >= 20);
}
