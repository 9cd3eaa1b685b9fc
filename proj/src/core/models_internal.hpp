#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "repro/models.hpp"
#include "repro/rng.hpp"

namespace repro::models::detail {

using nlohmann::json;

struct TrainingData {
  std::vector<Row> x;
  std::vector<double> y;  // 1 = reproducible
};

TrainingData ToTraining(const Dataset& ds);

// Per-feature centring and scaling fitted on training rows. Features that
// are constant in training get scale 0 and so carry no information.
struct Standardizer {
  Row mean{};
  Row scale{};  // 1/stddev, or 0

  void Fit(const std::vector<Row>& x);
  Row Apply(const Row& r) const;
  json ToJson() const;
  static Standardizer FromJson(const json& j);
};

struct TreeNode {
  int feature = -1;  // -1: leaf
  double threshold = 0;
  int left = -1;
  int right = -1;
  double value = 0;
};

// CART on Gini impurity. Split choice among evaluated features is by lowest
// weighted child impurity, then lower feature index, then lower threshold.
class ClassificationTree {
 public:
  struct Options {
    int max_features = static_cast<int>(kFeatureCount);
    int max_depth = 0;
    int min_samples_split = 2;
  };

  // `sample` holds row indices, repeats allowed. With a null rng features
  // are visited in index order.
  void Fit(const TrainingData& data, std::vector<std::size_t> sample, const Options& options,
           Rng* rng);
  // Fraction of reproducible training rows in the leaf reached by x.
  double Predict(const Row& x) const;
  std::size_t node_count() const { return nodes_.size(); }

  json ToJson() const;
  static ClassificationTree FromJson(const json& j);

 private:
  int Build(const TrainingData& data, std::vector<std::size_t>& sample, std::size_t begin,
            std::size_t end, int depth, const Options& options, Rng* rng);

  std::vector<TreeNode> nodes_;
};

// Least-squares regression tree whose leaves hold Newton steps
// sum(residual) / sum(hessian).
class RegressionTree {
 public:
  void Fit(const std::vector<Row>& x, const std::vector<double>& residual,
           const std::vector<double>& hessian, int max_depth, int min_samples_leaf);
  double Predict(const Row& x) const;

  json ToJson() const;
  static RegressionTree FromJson(const json& j);

 private:
  int Build(const std::vector<Row>& x, const std::vector<double>& residual,
            const std::vector<double>& hessian, std::vector<std::size_t>& idx, std::size_t begin,
            std::size_t end, int depth, int max_depth, int min_samples_leaf);

  std::vector<TreeNode> nodes_;
};

// One hidden tanh layer, sigmoid output.
struct MlpNet {
  int hidden = 0;
  std::vector<double> w1;  // hidden x 9, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0;

  std::size_t ParamCount() const { return w1.size() + b1.size() + w2.size() + 1; }
  double& Param(std::size_t i);
  double Forward(const Row& z) const;  // output logit
  static MlpNet GlorotInit(int hidden, Rng& rng);
};

// Mean cross-entropy over rows plus (l2/2)·Σw² over the weight matrices.
double MlpLoss(const MlpNet& net, const std::vector<Row>& z, const std::vector<double>& y,
               double l2);
// Analytic gradient of MlpLoss, indexed like MlpNet::Param.
std::vector<double> MlpGradient(const MlpNet& net, const std::vector<Row>& z,
                                const std::vector<double>& y, double l2);

double Sigmoid(double t);
double LogLoss(double logit, double y);

}  // namespace repro::models::detail
