#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "repro/dataset.hpp"
#include "repro/features.hpp"

namespace repro::models {

enum class Family { kRandomForest, kGradientBoostedTrees, kMlp, kNaiveBayes, kKnn };

inline constexpr std::array<Family, 5> kAllFamilies = {
    Family::kRandomForest, Family::kGradientBoostedTrees, Family::kMlp, Family::kNaiveBayes,
    Family::kKnn};

// Short names: rf, gbt, mlp, nb, knn.
std::string_view ToString(Family family);
std::string_view DisplayName(Family family);
Family ParseFamily(std::string_view name);

struct RandomForestParams {
  int trees = 100;
  int max_features = 3;
  int max_depth = 0;  // 0: unlimited
  int min_samples_split = 2;
  bool bootstrap = true;
};

struct GradientBoostingParams {
  int rounds = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_samples_leaf = 1;
};

struct MlpParams {
  int hidden = 16;
  int epochs = 200;
  double learning_rate = 0.01;
  double momentum = 0.9;
  double l2 = 1e-4;
  int batch_size = 32;
};

struct NaiveBayesParams {
  double alpha = 1.0;  // Laplace smoothing for the categorical features
};

struct KnnParams {
  int k = 5;
};

struct ModelSpec {
  Family family = Family::kRandomForest;
  RandomForestParams rf;
  GradientBoostingParams gbt;
  MlpParams mlp;
  NaiveBayesParams nb;
  KnnParams knn;
  std::uint64_t seed = 0;

  // Throws Error(kInvalidArgument) on out-of-range hyperparameters.
  void Validate() const;
  // JSON object holding the family, seed and the family's own parameters.
  std::string ToJson() const;
  static ModelSpec FromJson(std::string_view json);
};

class TrainedModel {
 public:
  virtual ~TrainedModel() = default;

  // Probability of Reproducible, in [0, 1].
  virtual double PredictProba(const Row& x) const = 0;
  // Throws Error(kInvalidArgument) unless x has exactly nine values.
  double PredictProba(std::span<const double> x) const;
  Label Predict(const Row& x) const {
    return PredictProba(x) >= 0.5 ? Label::kReproducible : Label::kIrreproducible;
  }

  const ModelSpec& spec() const { return spec_; }
  const std::string& training_fingerprint() const { return fingerprint_; }
  std::size_t feature_count() const { return kFeatureCount; }

  // Versioned JSON document; Deserialize(Serialize()) predicts identically.
  std::string Serialize() const;

 protected:
  // Family-specific learned state as a JSON object.
  virtual std::string ParamsJson() const = 0;

  ModelSpec spec_;
  std::string fingerprint_;

  friend struct ModelAccess;
};

// Deterministic given (spec.seed, ds). Throws kSingleClass when ds holds a
// single label, kInvalidArgument on bad hyperparameters or empty data.
std::shared_ptr<const TrainedModel> Train(const ModelSpec& spec, const Dataset& ds);
std::shared_ptr<const TrainedModel> Deserialize(std::string_view json);

// ---- metrics ----
// Rows: actual (reproducible, irreproducible); columns: predicted.
using Confusion = std::array<std::array<std::int64_t, 2>, 2>;

struct ClassMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct MetricsReport {
  ClassMetrics reproducible;
  ClassMetrics irreproducible;
  double accuracy = 0;
  Confusion confusion{};
};

// Zero denominators yield 0. Throws kInvalidArgument on negative counts or
// an all-zero matrix.
MetricsReport ComputeMetrics(const Confusion& confusion);

// ---- cross-validation ----
enum class SmoteMode { kInFold, kGlobal };
std::string_view ToString(SmoteMode mode);
SmoteMode ParseSmoteMode(std::string_view text);

struct CvOptions {
  int k = 10;
  std::uint64_t seed = 0;
  SmoteMode smote_mode = SmoteMode::kInFold;
  int smote_k = 5;
  bool smote_round = false;
  int jobs = 1;
};

// Fits on `train` and returns P(Reproducible) for every row of `test`.
using FitPredict = std::function<std::vector<double>(const Dataset& train, const Dataset& test)>;

struct CvResult {
  MetricsReport metrics;  // pooled over all test folds
  std::vector<double> probabilities;  // per row of the input dataset
  std::vector<int> fold_of;           // test fold of each row
  // Rows handed to the fitter per fold; kept for leakage audits.
  std::vector<std::size_t> train_sizes;
  std::vector<std::size_t> train_synthetic;
  std::vector<std::size_t> test_synthetic;
};

// The input must hold real rows only; synthetic rows are created per
// options.smote_mode and never scored.
CvResult CrossValidate(const Dataset& ds, const CvOptions& options, const FitPredict& fit);
CvResult EvaluateCv(const ModelSpec& spec, const Dataset& ds, const CvOptions& options);

// Table with one block per model: class, precision, recall, F1, accuracy.
std::string FormatMetricsTable(const std::vector<std::pair<std::string, MetricsReport>>& rows);
std::string FormatMetricsCsv(const std::vector<std::pair<std::string, MetricsReport>>& rows);
std::string MetricsToJson(const MetricsReport& report);

}  // namespace repro::models
