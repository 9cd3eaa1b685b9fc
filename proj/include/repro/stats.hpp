#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "repro/dataset.hpp"

namespace repro::stats {

struct ContingencyTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;  // reproducible, irreproducible
  std::vector<std::vector<std::int64_t>> counts;

  std::int64_t Total() const;
  // Throws kInvalidArgument: ragged or negative counts, fewer than 2 rows or
  // columns, zero total, an all-zero row or column.
  void Validate() const;
};

// Tallies real rows only. LOC is binned into short/medium/long first.
// Booleans give rows [true, false]; tri-states [+1, 0, -1]; categories that
// never occur are dropped. Throws kInvalidArgument on an unknown feature,
// kEmptySnippetSet on no real rows, kSingleClass when a label is missing.
ContingencyTable Contingency(const Dataset& ds, std::string_view feature);

struct ChiSquareResult {
  double chi2 = 0;
  int df = 0;
  double p = 1;
  bool yates_applied = false;
};

// Pearson statistic; 2x2 tables get Yates' continuity correction, with
// |O-E|-0.5 clamped at zero.
ChiSquareResult ChiSquare(const ContingencyTable& table);
// Uncorrected Pearson statistic, regardless of shape.
double PearsonStatistic(const ContingencyTable& table);

// Q(df/2, x/2). x >= 0 and df >= 1, else kInvalidArgument.
double ChiSquareSf(double x, int df);
// Regularized upper incomplete gamma Q(a, x).
double RegularizedGammaQ(double a, double x);

struct BordaScore {
  std::string candidate;
  int score = 0;
};

// Points 3/2/1 by position. Result sorted by score descending, ties
// alphabetically. Candidates listed in `candidates` but never ranked score 0.
// Throws kInvalidArgument on a ranking that is empty, longer than 3 or
// repeats a candidate.
std::vector<BordaScore> BordaCount(const std::vector<std::vector<std::string>>& rankings,
                                   const std::vector<std::string>& candidates = {});

struct FeatureTest {
  std::string feature;
  ContingencyTable table;
  ChiSquareResult result;
};

// One test per feature in feature order.
std::vector<FeatureTest> AnalyzeFeatures(const Dataset& ds);

// Header: feature,chi2,df,p,significant
std::string FormatReportCsv(const std::vector<FeatureTest>& tests, double alpha = 0.05);
std::string FormatReportJson(const std::vector<FeatureTest>& tests, double alpha = 0.05);

}  // namespace repro::stats
