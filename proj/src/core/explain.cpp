#include "repro/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "repro/error.hpp"
#include "repro/rng.hpp"

namespace repro::explain {

namespace {

using nlohmann::json;

// |S|! (n - |S| - 1)! / n! for n = 9.
std::array<double, kFeatureCount> CoalitionWeights() {
  std::array<double, kFeatureCount + 1> fact{};
  fact[0] = 1;
  for (std::size_t i = 1; i <= kFeatureCount; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
  std::array<double, kFeatureCount> w{};
  for (std::size_t s = 0; s < kFeatureCount; ++s) {
    w[s] = fact[s] * fact[kFeatureCount - s - 1] / fact[kFeatureCount];
  }
  return w;
}

// Most important first; ties keep feature order.
std::array<std::size_t, kFeatureCount> ByMagnitude(const std::array<double, kFeatureCount>& v) {
  std::array<std::size_t, kFeatureCount> order;
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::fabs(v[a]) > std::fabs(v[b]); });
  return order;
}

std::string Num(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string WaterfallSvg(const ShapleyExplanation& e) {
  const auto order = ByMagnitude(e.phi);
  // Bars run from the base value to the prediction, largest |phi| first.
  std::vector<std::pair<double, double>> spans;
  double level = e.base_value;
  double lo = std::min(e.base_value, e.prediction);
  double hi = std::max(e.base_value, e.prediction);
  for (auto f : order) {
    spans.emplace_back(level, level + e.phi[f]);
    level += e.phi[f];
    lo = std::min(lo, level);
    hi = std::max(hi, level);
  }
  if (hi - lo < 1e-12) hi = lo + 1e-12;
  const double left = 170;
  const double width = 420;
  const double row = 26;
  auto x = [&](double v) { return left + (v - lo) / (hi - lo) * width; };
  std::ostringstream out;
  const double height = row * (kFeatureCount + 2) + 20;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  double y = 10;
  out << "<text x=\"10\" y=\"" << y + 16 << "\">base value " << Num(e.base_value) << "</text>\n";
  y += row;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto f = order[i];
    const auto [a, b] = spans[i];
    const double x0 = x(std::min(a, b));
    const double w = std::max(1.0, x(std::max(a, b)) - x0);
    const char* color = e.phi[f] >= 0 ? "#d6204e" : "#1e88e5";
    out << "<text x=\"10\" y=\"" << y + 16 << "\">" << kFeatureNames[f] << " = "
        << Num(e.instance[f], 2) << "</text>\n";
    out << "<rect x=\"" << Num(x0, 1) << "\" y=\"" << y + 4 << "\" width=\"" << Num(w, 1)
        << "\" height=\"" << row - 8 << "\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << Num(x0 + w + 4, 1) << "\" y=\"" << y + 16 << "\">"
        << (e.phi[f] >= 0 ? "+" : "") << Num(e.phi[f]) << "</text>\n";
    y += row;
  }
  out << "<text x=\"10\" y=\"" << y + 16 << "\">f(x) = " << Num(e.prediction) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace

ShapleyExplanation ExactShapley(const ValueFunction& f, const Row& x,
                                const std::vector<Row>& background) {
  if (background.empty()) Fail(ErrorCode::kInvalidArgument, "empty background sample");
  std::array<double, kCoalitions> v{};
  Row composite;
  for (std::size_t mask = 0; mask < kCoalitions; ++mask) {
    double sum = 0;
    for (const auto& b : background) {
      for (std::size_t i = 0; i < kFeatureCount; ++i) composite[i] = (mask >> i) & 1 ? x[i] : b[i];
      sum += f(composite);
    }
    v[mask] = sum / static_cast<double>(background.size());
  }
  static const auto weights = CoalitionWeights();
  ShapleyExplanation e;
  e.instance = x;
  e.base_value = v[0];
  e.prediction = v[kCoalitions - 1];
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    double phi = 0;
    for (std::size_t mask = 0; mask < kCoalitions; ++mask) {
      if (mask & bit) continue;
      phi += weights[static_cast<std::size_t>(std::popcount(mask))] * (v[mask | bit] - v[mask]);
    }
    e.phi[i] = phi;
  }
  return e;
}

ShapleyExplanation ExactShapley(const models::TrainedModel& model, const Row& x,
                                const std::vector<Row>& background) {
  auto e = ExactShapley([&](const Row& r) { return model.PredictProba(r); }, x, background);
  return e;
}

std::vector<Row> SampleBackground(const Dataset& ds, std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.Shuffle(idx.begin(), idx.end());
  idx.resize(std::min(n, idx.size()));
  std::vector<Row> rows;
  rows.reserve(idx.size());
  for (auto i : idx) rows.push_back(ds.examples[i].features);
  return rows;
}

GlobalImportance ComputeGlobalImportance(const std::vector<ShapleyExplanation>& explanations) {
  if (explanations.empty()) Fail(ErrorCode::kInvalidArgument, "no explanations");
  GlobalImportance g;
  for (const auto& e : explanations) {
    for (std::size_t i = 0; i < kFeatureCount; ++i) g.mean_abs_phi[i] += std::fabs(e.phi[i]);
  }
  for (auto& m : g.mean_abs_phi) m /= static_cast<double>(explanations.size());
  g.ranking = ByMagnitude(g.mean_abs_phi);
  return g;
}

PlotKind ParsePlotKind(std::string_view name) {
  if (name == "beeswarm") return PlotKind::kBeeswarm;
  if (name == "waterfall") return PlotKind::kWaterfall;
  if (name == "force") return PlotKind::kForce;
  Fail(ErrorCode::kInvalidArgument, "unknown plot kind: " + std::string(name));
}

std::string_view ToString(PlotKind kind) {
  switch (kind) {
    case PlotKind::kBeeswarm:
      return "beeswarm";
    case PlotKind::kWaterfall:
      return "waterfall";
    case PlotKind::kForce:
      return "force";
  }
  return "";
}

std::string ExplanationToJson(const ShapleyExplanation& e) {
  json phi = json::object();
  for (std::size_t i = 0; i < kFeatureCount; ++i) phi[std::string(kFeatureNames[i])] = e.phi[i];
  return json{{"phi", phi},
              {"base_value", e.base_value},
              {"prediction", e.prediction},
              {"instance", e.instance}}
      .dump();
}

PlotExport ExportPlotData(PlotKind kind, const std::vector<ShapleyExplanation>& explanations) {
  if (explanations.empty()) Fail(ErrorCode::kInvalidArgument, "nothing to export");
  if (kind != PlotKind::kBeeswarm && explanations.size() != 1) {
    Fail(ErrorCode::kInvalidArgument,
         std::string(ToString(kind)) + " export takes exactly one explanation");
  }
  PlotExport out;
  if (kind == PlotKind::kBeeswarm) {
    const auto g = ComputeGlobalImportance(explanations);
    json order = json::array();
    for (auto f : g.ranking) order.push_back(kFeatureNames[f]);
    json points = json::array();
    std::ostringstream csv;
    csv << "explanation,feature,feature_value,phi\n";
    for (std::size_t n = 0; n < explanations.size(); ++n) {
      const auto& e = explanations[n];
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        points.push_back({{"explanation", n},
                          {"feature", kFeatureNames[f]},
                          {"feature_value", e.instance[f]},
                          {"phi", e.phi[f]}});
        csv << n << ',' << kFeatureNames[f] << ',' << dataset::FormatNumber(e.instance[f]) << ','
            << dataset::FormatNumber(e.phi[f]) << '\n';
      }
    }
    json importance = json::object();
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      importance[std::string(kFeatureNames[f])] = g.mean_abs_phi[f];
    }
    out.json = json{{"schema", "repro-plot/beeswarm/1"},
                    {"feature_order", order},
                    {"mean_abs_phi", importance},
                    {"points", points}}
                   .dump();
    out.csv = csv.str();
    return out;
  }

  const auto& e = explanations.front();
  const auto order = ByMagnitude(e.phi);
  double sum = 0;
  for (double p : e.phi) sum += p;
  if (kind == PlotKind::kWaterfall) {
    json rows = json::array();
    rows.push_back({{"kind", "base"}, {"value", e.base_value}});
    double level = e.base_value;
    for (auto f : order) {
      rows.push_back({{"kind", "feature"},
                      {"feature", kFeatureNames[f]},
                      {"feature_value", e.instance[f]},
                      {"phi", e.phi[f]},
                      {"start", level},
                      {"end", level + e.phi[f]}});
      level += e.phi[f];
    }
    rows.push_back({{"kind", "prediction"}, {"value", e.prediction}});
    out.json = json{{"schema", "repro-plot/waterfall/1"},
                    {"base_value", e.base_value},
                    {"prediction", e.prediction},
                    {"rows", rows}}
                   .dump();
    out.svg = WaterfallSvg(e);
    return out;
  }

  json positive = json::array();
  json negative = json::array();
  for (auto f : order) {
    json item{{"feature", kFeatureNames[f]}, {"feature_value", e.instance[f]}, {"phi", e.phi[f]}};
    (e.phi[f] >= 0 ? positive : negative).push_back(item);
  }
  out.json = json{{"schema", "repro-plot/force/1"},
                  {"base_value", e.base_value},
                  {"prediction", e.prediction},
                  {"sum_phi", sum},
                  {"base_plus_sum_phi", e.base_value + sum},
                  {"positive", positive},
                  {"negative", negative}}
                 .dump();
  return out;
}

}  // namespace repro::explain
