#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "java_lexer.hpp"

namespace repro::analyzer::java {

struct ParseFacts {
  int class_count = 0;
  int method_count = 0;
  bool has_main = false;
  std::vector<std::string> imports;
  int try_catch_count = 0;
  bool throws_declared = false;
  std::set<std::string> referenced_types;
  std::set<std::string> defined_types;
  std::set<std::string> type_parameters;
  std::set<std::string> invoked_callees;
};

// Parses `tokens` as a compilation unit. Declarations whose name token is
// synthetic are not counted. Returns false on any syntax error; `facts` is
// only meaningful on success.
bool ParseCompilationUnit(const std::vector<Token>& tokens, ParseFacts& facts);

// Index of the first token after the leading package/import declarations.
std::size_t HeaderEnd(const std::vector<Token>& tokens);

// Best-effort facts from a token stream the grammar rejected.
ParseFacts TokenScan(const std::vector<Token>& tokens);

// Capitalized and containing a lowercase letter ("Arrays", not "MAX").
bool IsTypeLikeName(const std::string& name);

}  // namespace repro::analyzer::java
