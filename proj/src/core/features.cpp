#include <algorithm>
#include <cmath>

#include "repro/error.hpp"
#include "repro/features.hpp"

namespace repro {

std::optional<std::size_t> FeatureIndex(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (kFeatureNames[i] == name) return i;
  }
  return std::nullopt;
}

Row Encode(const FeatureVector& v) {
  auto b = [](bool x) { return x ? 1.0 : 0.0; };
  auto t = [](TriState x) { return static_cast<double>(static_cast<int>(x)); };
  return {static_cast<double>(v.loc), b(v.has_method),       b(v.has_main),
          b(v.has_class),             b(v.parsable),         b(v.compilable),
          t(v.native_import),         t(v.external_import),  t(v.exception_handling)};
}

FeatureVector Decode(const Row& row) {
  auto bad = [&](std::size_t i) {
    Fail(ErrorCode::kInvalidArgument, "illegal value " + std::to_string(row[i]) + " for " +
                                          std::string(kFeatureNames[i]));
  };
  FeatureVector v;
  if (!(row[0] >= 1) || row[0] != std::floor(row[0]) || row[0] > 1e9) bad(0);
  v.loc = static_cast<int>(row[0]);
  bool* flags[] = {&v.has_method, &v.has_main, &v.has_class, &v.parsable, &v.compilable};
  for (std::size_t i = 1; i <= 5; ++i) {
    if (row[i] != 0.0 && row[i] != 1.0) bad(i);
    *flags[i - 1] = row[i] == 1.0;
  }
  TriState* tris[] = {&v.native_import, &v.external_import, &v.exception_handling};
  for (std::size_t i = 6; i < kFeatureCount; ++i) {
    if (row[i] != -1.0 && row[i] != 0.0 && row[i] != 1.0) bad(i);
    *tris[i - 6] = static_cast<TriState>(static_cast<int>(row[i]));
  }
  return v;
}

Row SnapToLegal(const Row& row) {
  Row out;
  out[0] = std::max(1.0, std::round(row[0]));
  for (std::size_t i = 1; i < kFeatureCount; ++i) {
    const double lo = KindOf(i) == FeatureKind::kBoolean ? 0.0 : -1.0;
    out[i] = std::clamp(std::round(row[i]), lo, 1.0);
  }
  return out;
}

std::string ToString(TriState t) {
  switch (t) {
    case TriState::kAbsent:
      return "-1";
    case TriState::kNeutral:
      return "0";
    case TriState::kPresent:
      return "+1";
  }
  return "0";
}

}  // namespace repro
