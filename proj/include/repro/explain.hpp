#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "repro/dataset.hpp"
#include "repro/features.hpp"
#include "repro/models.hpp"

namespace repro::explain {

inline constexpr std::size_t kCoalitions = std::size_t{1} << kFeatureCount;

struct ShapleyExplanation {
  std::array<double, kFeatureCount> phi{};
  double base_value = 0;  // v(empty set)
  double prediction = 0;  // f(instance)
  Row instance{};
};

using ValueFunction = std::function<double(const Row&)>;

// Interventional Shapley values by full enumeration of the 512 coalitions:
// v(S) is the mean over background rows b of f(x on S, b elsewhere).
// Calls f exactly 512 * background.size() times. Throws kInvalidArgument on an
// empty background.
ShapleyExplanation ExactShapley(const ValueFunction& f, const Row& x,
                                const std::vector<Row>& background);
ShapleyExplanation ExactShapley(const models::TrainedModel& model, const Row& x,
                                const std::vector<Row>& background);

// Up to n rows drawn without replacement (all rows when fewer), in a seeded
// order.
std::vector<Row> SampleBackground(const Dataset& ds, std::size_t n, std::uint64_t seed);

struct GlobalImportance {
  std::array<double, kFeatureCount> mean_abs_phi{};
  std::array<std::size_t, kFeatureCount> ranking{};  // feature indices, most important first
};

GlobalImportance ComputeGlobalImportance(const std::vector<ShapleyExplanation>& explanations);

enum class PlotKind { kBeeswarm, kWaterfall, kForce };
PlotKind ParsePlotKind(std::string_view name);
std::string_view ToString(PlotKind kind);

struct PlotExport {
  std::string json;
  std::string csv;  // beeswarm only
  std::string svg;  // waterfall only
};

// Beeswarm takes any non-empty list; waterfall and force take exactly one
// explanation. Throws kInvalidArgument on a mismatch.
PlotExport ExportPlotData(PlotKind kind, const std::vector<ShapleyExplanation>& explanations);

std::string ExplanationToJson(const ShapleyExplanation& e);

}  // namespace repro::explain
