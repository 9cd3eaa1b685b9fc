#include <fstream>
#include <sstream>

#include <json.hpp>

#include "repro/analyzer.hpp"
#include "repro/error.hpp"
#include "repro/hash.hpp"

namespace repro::analyzer {

namespace detail {
extern const std::string_view kBuiltinJdkIndex;
}

namespace {

using nlohmann::json;

bool StartsWith(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

}  // namespace

JdkIndex JdkIndex::FromJson(std::string_view json_text) {
  JdkIndex index;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kParse, std::string("jdk index: ") + e.what());
  }
  try {
    index.version_ = doc.value("version", "");
    for (const auto& p : doc.at("prefixes")) index.prefixes_.push_back(p.get<std::string>());
    for (const auto& [name, pkg] : doc.at("classes").items()) {
      index.classes_.emplace(name, pkg.get<std::string>());
    }
    if (doc.contains("checked_throwers")) {
      for (const auto& [callee, exc] : doc.at("checked_throwers").items()) {
        index.checked_throwers_.emplace(callee, exc.get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("jdk index: ") + e.what());
  }
  for (const auto& [name, pkg] : index.classes_) {
    if (!index.IsNativePath(pkg + ".")) {
      Fail(ErrorCode::kParse, "jdk index: package of " + name + " is not native: " + pkg);
    }
  }
  index.hash_ = Fnv1aHex(json_text);
  return index;
}

JdkIndex JdkIndex::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open jdk index: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return FromJson(buf.str());
}

const JdkIndex& JdkIndex::Builtin() {
  static const JdkIndex index = FromJson(detail::kBuiltinJdkIndex);
  return index;
}

std::string_view JdkIndex::BuiltinText() { return detail::kBuiltinJdkIndex; }

bool JdkIndex::IsNativePath(std::string_view dotted) const {
  for (const auto& p : prefixes_) {
    if (StartsWith(dotted, p)) return true;
  }
  return false;
}

std::string JdkIndex::PackageOf(std::string_view simple_name) const {
  auto it = classes_.find(simple_name);
  return it == classes_.end() ? std::string() : it->second;
}

bool JdkIndex::Knows(std::string_view simple_name) const {
  return classes_.find(simple_name) != classes_.end();
}

std::string JdkIndex::CheckedExceptionOf(std::string_view callee) const {
  auto it = checked_throwers_.find(callee);
  return it == checked_throwers_.end() ? std::string() : it->second;
}

}  // namespace repro::analyzer
