#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "repro/features.hpp"

namespace repro {

// Reproducible is the positive class.
enum class Label { kReproducible, kIrreproducible };
enum class Origin { kReal, kSynthetic };

std::string_view ToString(Label label);
std::string_view ToString(Origin origin);
Label ParseLabel(std::string_view text);
Origin ParseOrigin(std::string_view text);

struct LabeledExample {
  Row features{};
  Label label = Label::kReproducible;
  Origin origin = Origin::kReal;
  std::optional<std::int64_t> source_id;  // never set on synthetic rows

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

inline constexpr std::string_view kSchemaVersion = "repro-dataset/1";

struct Dataset {
  std::vector<LabeledExample> examples;
  std::string schema_version{kSchemaVersion};

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  std::size_t Count(Label label) const;
  std::size_t CountOrigin(Origin origin) const;
  Dataset Subset(const std::vector<std::size_t>& indices) const;
  // FNV-1a over the CSV form.
  std::string Fingerprint() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

namespace dataset {

// ---- SMOTE ----
struct SmoteOptions {
  int k = 5;
  std::uint64_t seed = 0;
  bool round = false;  // snap synthetic coordinates to legal feature values
};

// One generated point: features = x[base] + delta * (x[neighbor] - x[base]),
// indices into the input dataset.
struct SmoteSample {
  std::size_t base = 0;
  std::size_t neighbor = 0;
  double delta = 0.0;
};

struct SmoteResult {
  Dataset data;  // input examples verbatim, then the synthetic ones
  std::vector<SmoteSample> samples;
  int k_used = 0;
};

// Oversamples the minority class up to the majority count. Neighbours are
// searched with LOC min-max scaled over the minority rows; interpolation is in
// the original coordinates. Throws kSingleClass / kTooFewMinority.
SmoteResult SmoteWithTrace(const Dataset& ds, const SmoteOptions& options);
Dataset Smote(const Dataset& ds, const SmoteOptions& options);

// Indices of the k nearest minority neighbours used by SMOTE for each
// minority row (ascending distance, ties to the lower index).
std::vector<std::vector<std::size_t>> SmoteNeighbours(const Dataset& ds, Label minority, int k);

// ---- folds ----
struct Fold {
  std::vector<std::size_t> train;  // sorted; includes every synthetic row
  std::vector<std::size_t> test;   // sorted; real rows only
};

// Test sets partition the real rows. Throws kInvalidArgument when k < 2 or a
// class has fewer than k real rows.
std::vector<Fold> StratifiedKFold(const Dataset& ds, int k, std::uint64_t seed);

// ---- LOC bins ----
enum class LocBin { kShort, kMedium, kLong };
std::string_view ToString(LocBin bin);

struct LocBinning {
  double p25 = 0.0;
  double p75 = 0.0;
  std::vector<LocBin> bins;  // one per example
};

// Nearest-rank percentile: the value at 1-based rank ceil(p/100 * n) of the
// sorted values.
double NearestRankPercentile(std::vector<double> values, double p);
LocBinning LocBins(const Dataset& ds);

// ---- synthetic corpus ----
// Labeled encoded vectors whose per-class marginals follow published
// reproducible/irreproducible frequencies. Rows carry origin kReal: they
// stand in for mined data, not for oversampling output.
Dataset SynthCorpus(std::size_t n_repro, std::size_t n_irrepro, std::uint64_t seed);

// ---- persistence ----
// CSV header: the nine feature names, label, origin, and source_id when any
// row has one.
void WriteCsv(const Dataset& ds, std::ostream& out);
Dataset ReadCsv(std::istream& in);
// One object per line: {"features":[...],"label":...,"origin":...,"source_id":...}
void WriteJsonl(const Dataset& ds, std::ostream& out);
Dataset ReadJsonl(std::istream& in);

// Format chosen by extension: .csv, .jsonl/.json.
void Save(const Dataset& ds, const std::filesystem::path& path);
Dataset Load(const std::filesystem::path& path);

std::string FormatNumber(double value);

}  // namespace dataset
}  // namespace repro
