#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace repro {

inline constexpr std::size_t kFeatureCount = 9;

// Encoded feature row. Column order is fixed and is the on-disk CSV order.
using Row = std::array<double, kFeatureCount>;

enum class Feature : std::size_t {
  kLoc = 0,
  kHasMethod,
  kHasMain,
  kHasClass,
  kParsable,
  kCompilable,
  kNativeImport,
  kExternalImport,
  kExceptionHandling,
};

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "loc",      "has_method",  "has_main",      "has_class",         "parsable",
    "compilable", "native_import", "external_import", "exception_handling",
};

enum class FeatureKind { kCount, kBoolean, kTriState };

constexpr FeatureKind KindOf(std::size_t index) {
  if (index == 0) return FeatureKind::kCount;
  if (index <= 5) return FeatureKind::kBoolean;
  return FeatureKind::kTriState;
}

std::optional<std::size_t> FeatureIndex(std::string_view name);

// -1: required element absent, 0: not needed or undecidable, +1: present.
enum class TriState : int { kAbsent = -1, kNeutral = 0, kPresent = 1 };

struct FeatureVector {
  int loc = 1;
  bool has_method = false;
  bool has_main = false;
  bool has_class = false;
  bool parsable = false;
  bool compilable = false;
  TriState native_import = TriState::kNeutral;
  TriState external_import = TriState::kNeutral;
  TriState exception_handling = TriState::kNeutral;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Booleans become {0,1}; tri-states pass through; loc is not scaled.
Row Encode(const FeatureVector& v);

// Inverse of Encode for rows holding legal values; throws otherwise.
FeatureVector Decode(const Row& row);

// Snaps each coordinate to the nearest legal value (loc >= 1 integer,
// booleans {0,1}, tri-states {-1,0,1}).
Row SnapToLegal(const Row& row);

std::string ToString(TriState t);

}  // namespace repro
