#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "repro/features.hpp"

namespace repro::analyzer {

enum class WrapLevel { kNone, kMethodWrapped, kClassWrapped };

std::string_view ToString(WrapLevel level);

struct StructuralSummary {
  bool parse_ok = false;
  WrapLevel wrap_level = WrapLevel::kNone;
  int class_count = 0;
  int method_count = 0;  // user-defined; synthetic wrappers excluded
  bool has_main = false;
  std::vector<std::string> imports;  // dotted; wildcard kept as "a.b.*"
  int try_catch_count = 0;
  bool throws_declared = false;
  std::set<std::string> referenced_types;
  std::set<std::string> defined_types;
  std::set<std::string> type_parameters;
  // "Type" for constructor calls, "Type.method" for type-qualified calls.
  std::set<std::string> invoked_callees;
  // True when the grammar rejected every stage and the fields above come
  // from a lenient token scan.
  bool from_token_scan = false;

  friend bool operator==(const StructuralSummary&, const StructuralSummary&) = default;
};

// Immutable after construction. Backed by a JSON document:
// {"version":..., "prefixes":[...], "classes":{name:package},
//  "checked_throwers":{callee:exception}}.
class JdkIndex {
 public:
  static JdkIndex FromJson(std::string_view json_text);
  static JdkIndex Load(const std::filesystem::path& path);
  // The index shipped with the library (data/jdk_index.json, compiled in).
  static const JdkIndex& Builtin();
  static std::string_view BuiltinText();

  bool IsNativePath(std::string_view dotted) const;
  // Package of a known JDK class, or empty.
  std::string PackageOf(std::string_view simple_name) const;
  bool Knows(std::string_view simple_name) const;
  // Checked exception thrown by a constructor/static call, or empty.
  std::string CheckedExceptionOf(std::string_view callee) const;

  const std::vector<std::string>& prefixes() const { return prefixes_; }
  const std::map<std::string, std::string, std::less<>>& classes() const { return classes_; }
  const std::map<std::string, std::string, std::less<>>& checked_throwers() const {
    return checked_throwers_;
  }
  const std::string& version() const { return version_; }
  // FNV-1a of the source document.
  const std::string& hash() const { return hash_; }

 private:
  std::vector<std::string> prefixes_;
  std::map<std::string, std::string, std::less<>> classes_;
  std::map<std::string, std::string, std::less<>> checked_throwers_;
  std::string version_;
  std::string hash_;
};

StructuralSummary AnalyzeStructure(std::string_view snippet);

bool CheckParsability(std::string_view snippet);

// Text handed to the compiler: the snippet itself at WrapLevel::kNone, else
// the synthetic wrapper with imports hoisted above it.
struct CompilationUnit {
  std::string file_name;
  std::string source;
};
CompilationUnit WrappedSource(std::string_view snippet, const StructuralSummary& summary);

enum class CompileStatus { kSuccess, kFailure, kUnavailable, kTimeout };
std::string_view ToString(CompileStatus status);

struct Diagnostic {
  int line = 0;
  std::string message;
};

struct CompileResult {
  CompileStatus status = CompileStatus::kUnavailable;
  std::vector<Diagnostic> diagnostics;
  std::string note;
};

struct CompilerConfig {
  // Whitespace-separated executable plus fixed args; the source file name is
  // appended. Empty or "none" disables compilation (status kUnavailable).
  std::string command = "javac";
  std::chrono::milliseconds timeout{30000};
  std::filesystem::path scratch_dir;  // empty: system temp dir

  // REPRO_JAVAC overrides the command when set.
  static CompilerConfig FromEnvironment();
};

// Writes the wrapped form into a fresh scratch subdirectory and runs the
// compiler there. Throws Error(kConfiguration) when the scratch directory
// cannot be created or written.
CompileResult CheckCompilability(std::string_view snippet, const CompilerConfig& compiler);
CompileResult CheckCompilability(std::string_view snippet, const StructuralSummary& summary,
                                 const CompilerConfig& compiler);

struct ImportClassification {
  TriState native_import = TriState::kNeutral;
  TriState external_import = TriState::kNeutral;
  std::vector<std::string> missing_jdk_imports;  // "List (java.util)"
  std::vector<std::string> unresolved_types;
};

ImportClassification ClassifyImports(const StructuralSummary& summary, const JdkIndex& index);

bool MentionsExceptionToken(std::string_view question_text);

TriState AssessExceptionHandling(const StructuralSummary& summary,
                                 std::string_view question_text, const JdkIndex& index);

struct AnalyzerConfig {
  CompilerConfig compiler;
  std::shared_ptr<const JdkIndex> index;  // null: JdkIndex::Builtin()

  const JdkIndex& jdk() const { return index ? *index : JdkIndex::Builtin(); }
};

struct FeatureExtraction {
  FeatureVector features;
  StructuralSummary summary;
  ImportClassification imports;
  CompileResult compile;
};

// Throws Error(kInvalidArgument) for a snippet with no non-blank line.
FeatureExtraction ExtractFeatures(std::string_view snippet, std::string_view question_text,
                                  const AnalyzerConfig& config);

}  // namespace repro::analyzer
