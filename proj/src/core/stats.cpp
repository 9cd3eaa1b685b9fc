#include "repro/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "repro/error.hpp"

namespace repro::stats {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 100000;

// P(a, x) by the power series; valid for x < a + 1.
double GammaPSeries(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the continued fraction (modified Lentz); valid for x >= a + 1.
double GammaQContinuedFraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1 - a;
  double c = 1 / tiny;
  double d = 1 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

std::string TriLabel(double v) {
  if (v > 0) return "+1";
  if (v < 0) return "-1";
  return "0";
}

}  // namespace

std::int64_t ContingencyTable::Total() const {
  std::int64_t total = 0;
  for (const auto& row : counts) {
    for (auto c : row) total += c;
  }
  return total;
}

void ContingencyTable::Validate() const {
  if (counts.size() < 2) Fail(ErrorCode::kInvalidArgument, "contingency table needs at least 2 rows");
  const std::size_t cols = counts.front().size();
  if (cols < 2) Fail(ErrorCode::kInvalidArgument, "contingency table needs at least 2 columns");
  if (!row_labels.empty() && row_labels.size() != counts.size()) {
    Fail(ErrorCode::kInvalidArgument, "row label count does not match the table");
  }
  if (!col_labels.empty() && col_labels.size() != cols) {
    Fail(ErrorCode::kInvalidArgument, "column label count does not match the table");
  }
  std::vector<std::int64_t> col_sum(cols, 0);
  for (const auto& row : counts) {
    if (row.size() != cols) Fail(ErrorCode::kInvalidArgument, "ragged contingency table");
    std::int64_t row_sum = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      if (row[j] < 0) Fail(ErrorCode::kInvalidArgument, "negative count");
      row_sum += row[j];
      col_sum[j] += row[j];
    }
    if (row_sum == 0) Fail(ErrorCode::kInvalidArgument, "all-zero row in contingency table");
  }
  for (auto s : col_sum) {
    if (s == 0) Fail(ErrorCode::kInvalidArgument, "all-zero column in contingency table");
  }
}

ContingencyTable Contingency(const Dataset& ds, std::string_view feature) {
  const auto index = FeatureIndex(feature);
  if (!index) Fail(ErrorCode::kInvalidArgument, "unknown feature: " + std::string(feature));

  std::vector<std::size_t> real;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.examples[i].origin == Origin::kReal) real.push_back(i);
  }
  if (real.empty()) Fail(ErrorCode::kEmptySnippetSet, "no real examples to tabulate");
  const Dataset sub = ds.Subset(real);

  std::vector<std::string> labels;
  std::vector<std::size_t> category(sub.size());
  switch (KindOf(*index)) {
    case FeatureKind::kCount: {
      labels = {"short", "medium", "long"};
      const auto binning = dataset::LocBins(sub);
      for (std::size_t i = 0; i < sub.size(); ++i) {
        category[i] = static_cast<std::size_t>(binning.bins[i]);
      }
      break;
    }
    case FeatureKind::kBoolean:
      labels = {"true", "false"};
      for (std::size_t i = 0; i < sub.size(); ++i) {
        category[i] = sub.examples[i].features[*index] >= 0.5 ? 0 : 1;
      }
      break;
    case FeatureKind::kTriState:
      labels = {"+1", "0", "-1"};
      for (std::size_t i = 0; i < sub.size(); ++i) {
        const auto l = TriLabel(std::round(sub.examples[i].features[*index]));
        category[i] = static_cast<std::size_t>(std::find(labels.begin(), labels.end(), l) - labels.begin());
      }
      break;
  }

  std::vector<std::vector<std::int64_t>> counts(labels.size(), std::vector<std::int64_t>(2, 0));
  for (std::size_t i = 0; i < sub.size(); ++i) {
    counts[category[i]][sub.examples[i].label == Label::kReproducible ? 0 : 1] += 1;
  }

  ContingencyTable t;
  t.col_labels = {std::string(ToString(Label::kReproducible)),
                  std::string(ToString(Label::kIrreproducible))};
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (counts[r][0] + counts[r][1] == 0) continue;
    t.row_labels.push_back(labels[r]);
    t.counts.push_back(counts[r]);
  }
  if (sub.Count(Label::kReproducible) == 0 || sub.Count(Label::kIrreproducible) == 0) {
    Fail(ErrorCode::kSingleClass, "contingency needs both labels");
  }
  if (t.counts.size() < 2) {
    Fail(ErrorCode::kInvalidArgument,
         "feature " + std::string(feature) + " takes a single value; nothing to test");
  }
  return t;
}

namespace {

double Statistic(const ContingencyTable& t, bool yates) {
  const std::size_t r = t.counts.size();
  const std::size_t c = t.counts.front().size();
  std::vector<double> row_sum(r, 0), col_sum(c, 0);
  double n = 0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double o = static_cast<double>(t.counts[i][j]);
      row_sum[i] += o;
      col_sum[j] += o;
      n += o;
    }
  }
  double chi2 = 0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double e = row_sum[i] * col_sum[j] / n;
      double diff = std::fabs(static_cast<double>(t.counts[i][j]) - e);
      if (yates) diff = std::max(0.0, diff - 0.5);
      chi2 += diff * diff / e;
    }
  }
  return chi2;
}

}  // namespace

double PearsonStatistic(const ContingencyTable& table) {
  table.Validate();
  return Statistic(table, false);
}

ChiSquareResult ChiSquare(const ContingencyTable& table) {
  table.Validate();
  ChiSquareResult res;
  const std::size_t r = table.counts.size();
  const std::size_t c = table.counts.front().size();
  res.yates_applied = r == 2 && c == 2;
  res.chi2 = Statistic(table, res.yates_applied);
  res.df = static_cast<int>((r - 1) * (c - 1));
  res.p = ChiSquareSf(res.chi2, res.df);
  return res;
}

double RegularizedGammaQ(double a, double x) {
  if (!(a > 0) || !(x >= 0)) Fail(ErrorCode::kInvalidArgument, "gamma Q needs a > 0 and x >= 0");
  if (x == 0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1) return std::clamp(1.0 - GammaPSeries(a, x), 0.0, 1.0);
  return std::clamp(GammaQContinuedFraction(a, x), 0.0, 1.0);
}

double ChiSquareSf(double x, int df) {
  if (df < 1) Fail(ErrorCode::kInvalidArgument, "degrees of freedom must be at least 1");
  if (!(x >= 0)) Fail(ErrorCode::kInvalidArgument, "chi-square statistic must be non-negative");
  if (df == 2) return std::exp(-x / 2);
  return RegularizedGammaQ(df / 2.0, x / 2);
}

std::vector<BordaScore> BordaCount(const std::vector<std::vector<std::string>>& rankings,
                                   const std::vector<std::string>& candidates) {
  std::map<std::string, int> scores;
  for (const auto& c : candidates) scores.emplace(c, 0);
  for (const auto& ranking : rankings) {
    if (ranking.empty() || ranking.size() > 3) {
      Fail(ErrorCode::kInvalidArgument, "a ranking lists 1 to 3 candidates");
    }
    std::set<std::string> seen;
    for (std::size_t pos = 0; pos < ranking.size(); ++pos) {
      if (!seen.insert(ranking[pos]).second) {
        Fail(ErrorCode::kInvalidArgument, "candidate repeated within a ranking: " + ranking[pos]);
      }
      scores[ranking[pos]] += 3 - static_cast<int>(pos);
    }
  }
  std::vector<BordaScore> out;
  for (const auto& [name, score] : scores) out.push_back({name, score});
  // map order is alphabetical, so a stable sort keeps ties alphabetical
  std::stable_sort(out.begin(), out.end(),
                   [](const BordaScore& a, const BordaScore& b) { return a.score > b.score; });
  return out;
}

std::vector<FeatureTest> AnalyzeFeatures(const Dataset& ds) {
  std::vector<FeatureTest> tests;
  for (auto name : kFeatureNames) {
    FeatureTest t;
    t.feature = std::string(name);
    try {
      t.table = Contingency(ds, name);
    } catch (const Error& e) {
      // a feature with one observed value has no test; skip it
      if (e.code() == ErrorCode::kInvalidArgument) continue;
      throw;
    }
    t.result = ChiSquare(t.table);
    tests.push_back(std::move(t));
  }
  return tests;
}

std::string FormatReportCsv(const std::vector<FeatureTest>& tests, double alpha) {
  std::ostringstream out;
  out << "feature,chi2,df,p,significant\n";
  for (const auto& t : tests) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%.4f,%d,%.6g,%s", t.result.chi2, t.result.df, t.result.p,
                  t.result.p < alpha ? "true" : "false");
    out << t.feature << ',' << buf << '\n';
  }
  return out.str();
}

std::string FormatReportJson(const std::vector<FeatureTest>& tests, double alpha) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& t : tests) {
    rows.push_back({{"feature", t.feature},
                    {"chi2", t.result.chi2},
                    {"df", t.result.df},
                    {"p", t.result.p},
                    {"yates", t.result.yates_applied},
                    {"significant", t.result.p < alpha},
                    {"rows", t.table.row_labels},
                    {"columns", t.table.col_labels},
                    {"counts", t.table.counts}});
  }
  return nlohmann::json{{"alpha", alpha}, {"tests", rows}}.dump();
}

}  // namespace repro::stats
