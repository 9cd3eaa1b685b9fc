#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "models_internal.hpp"
#include "repro/error.hpp"

namespace repro::models {

using detail::json;

// Grants the family implementations below access to the protected base.
struct ModelAccess {
  static void Init(TrainedModel& m, const ModelSpec& spec, std::string fingerprint) {
    m.spec_ = spec;
    m.fingerprint_ = std::move(fingerprint);
  }
};

std::string_view ToString(Family family) {
  switch (family) {
    case Family::kRandomForest:
      return "rf";
    case Family::kGradientBoostedTrees:
      return "gbt";
    case Family::kMlp:
      return "mlp";
    case Family::kNaiveBayes:
      return "nb";
    case Family::kKnn:
      return "knn";
  }
  return "rf";
}

std::string_view DisplayName(Family family) {
  switch (family) {
    case Family::kRandomForest:
      return "Random Forest";
    case Family::kGradientBoostedTrees:
      return "Gradient Boosted Trees";
    case Family::kMlp:
      return "MLP";
    case Family::kNaiveBayes:
      return "Naive Bayes";
    case Family::kKnn:
      return "KNN";
  }
  return "";
}

Family ParseFamily(std::string_view name) {
  for (auto f : kAllFamilies) {
    if (ToString(f) == name) return f;
  }
  if (name == "random_forest" || name == "randomforest") return Family::kRandomForest;
  if (name == "xgboost" || name == "gradient_boosting") return Family::kGradientBoostedTrees;
  if (name == "ann") return Family::kMlp;
  if (name == "naive_bayes") return Family::kNaiveBayes;
  Fail(ErrorCode::kInvalidArgument, "unknown model family: " + std::string(name));
}

void ModelSpec::Validate() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) Fail(ErrorCode::kInvalidArgument, std::string("invalid hyperparameter: ") + what);
  };
  switch (family) {
    case Family::kRandomForest:
      check(rf.trees >= 1, "trees >= 1");
      check(rf.max_features >= 1 && rf.max_features <= static_cast<int>(kFeatureCount),
            "1 <= max_features <= 9");
      check(rf.max_depth >= 0, "max_depth >= 0");
      check(rf.min_samples_split >= 2, "min_samples_split >= 2");
      break;
    case Family::kGradientBoostedTrees:
      check(gbt.rounds >= 1, "rounds >= 1");
      check(gbt.max_depth >= 1, "max_depth >= 1");
      check(gbt.learning_rate > 0 && std::isfinite(gbt.learning_rate), "learning_rate > 0");
      check(gbt.min_samples_leaf >= 1, "min_samples_leaf >= 1");
      break;
    case Family::kMlp:
      check(mlp.hidden >= 1, "hidden >= 1");
      check(mlp.epochs >= 1, "epochs >= 1");
      check(mlp.learning_rate > 0 && std::isfinite(mlp.learning_rate), "learning_rate > 0");
      check(mlp.momentum >= 0 && mlp.momentum < 1, "0 <= momentum < 1");
      check(mlp.l2 >= 0, "l2 >= 0");
      check(mlp.batch_size >= 1, "batch_size >= 1");
      break;
    case Family::kNaiveBayes:
      check(nb.alpha > 0, "alpha > 0");
      break;
    case Family::kKnn:
      check(knn.k >= 1 && knn.k % 2 == 1, "k odd and >= 1");
      break;
  }
}

namespace {

json SpecParams(const ModelSpec& s) {
  switch (s.family) {
    case Family::kRandomForest:
      return {{"trees", s.rf.trees},
              {"max_features", s.rf.max_features},
              {"max_depth", s.rf.max_depth},
              {"min_samples_split", s.rf.min_samples_split},
              {"bootstrap", s.rf.bootstrap}};
    case Family::kGradientBoostedTrees:
      return {{"rounds", s.gbt.rounds},
              {"max_depth", s.gbt.max_depth},
              {"learning_rate", s.gbt.learning_rate},
              {"min_samples_leaf", s.gbt.min_samples_leaf}};
    case Family::kMlp:
      return {{"hidden", s.mlp.hidden},         {"epochs", s.mlp.epochs},
              {"learning_rate", s.mlp.learning_rate}, {"momentum", s.mlp.momentum},
              {"l2", s.mlp.l2},                 {"batch_size", s.mlp.batch_size}};
    case Family::kNaiveBayes:
      return {{"alpha", s.nb.alpha}};
    case Family::kKnn:
      return {{"k", s.knn.k}};
  }
  return json::object();
}

template <typename T>
void Read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

ModelSpec SpecFromJson(const json& j) {
  ModelSpec s;
  s.family = ParseFamily(j.at("family").get<std::string>());
  Read(j, "seed", s.seed);
  const json p = j.value("params", json::object());
  switch (s.family) {
    case Family::kRandomForest:
      Read(p, "trees", s.rf.trees);
      Read(p, "max_features", s.rf.max_features);
      Read(p, "max_depth", s.rf.max_depth);
      Read(p, "min_samples_split", s.rf.min_samples_split);
      Read(p, "bootstrap", s.rf.bootstrap);
      break;
    case Family::kGradientBoostedTrees:
      Read(p, "rounds", s.gbt.rounds);
      Read(p, "max_depth", s.gbt.max_depth);
      Read(p, "learning_rate", s.gbt.learning_rate);
      Read(p, "min_samples_leaf", s.gbt.min_samples_leaf);
      break;
    case Family::kMlp:
      Read(p, "hidden", s.mlp.hidden);
      Read(p, "epochs", s.mlp.epochs);
      Read(p, "learning_rate", s.mlp.learning_rate);
      Read(p, "momentum", s.mlp.momentum);
      Read(p, "l2", s.mlp.l2);
      Read(p, "batch_size", s.mlp.batch_size);
      break;
    case Family::kNaiveBayes:
      Read(p, "alpha", s.nb.alpha);
      break;
    case Family::kKnn:
      Read(p, "k", s.knn.k);
      break;
  }
  s.Validate();
  return s;
}

json SpecJson(const ModelSpec& s) {
  return {{"family", ToString(s.family)}, {"seed", s.seed}, {"params", SpecParams(s)}};
}

}  // namespace

std::string ModelSpec::ToJson() const { return SpecJson(*this).dump(); }

ModelSpec ModelSpec::FromJson(std::string_view text) {
  try {
    return SpecFromJson(json::parse(text));
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("model spec: ") + e.what());
  }
}

double TrainedModel::PredictProba(std::span<const double> x) const {
  if (x.size() != kFeatureCount) {
    Fail(ErrorCode::kInvalidArgument,
         "expected 9 feature values, got " + std::to_string(x.size()));
  }
  Row r;
  std::copy(x.begin(), x.end(), r.begin());
  return PredictProba(r);
}

namespace detail {

double Sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

namespace {

double Softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

// Order-independent sum: adds sorted copies so permuted inputs give
// bit-identical results.
double SortedSum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0;
  for (double d : v) s += d;
  return s;
}

}  // namespace

double LogLoss(double logit, double y) { return y * Softplus(-logit) + (1 - y) * Softplus(logit); }

TrainingData ToTraining(const Dataset& ds) {
  TrainingData d;
  d.x.reserve(ds.size());
  d.y.reserve(ds.size());
  for (const auto& e : ds.examples) {
    d.x.push_back(e.features);
    d.y.push_back(e.label == Label::kReproducible ? 1.0 : 0.0);
  }
  return d;
}

void Standardizer::Fit(const std::vector<Row>& x) {
  const double n = static_cast<double>(x.size());
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    std::vector<double> col;
    col.reserve(x.size());
    for (const auto& r : x) col.push_back(r[f]);
    const double m = SortedSum(col) / n;
    std::vector<double> sq;
    sq.reserve(col.size());
    for (double v : col) sq.push_back((v - m) * (v - m));
    const double var = SortedSum(sq) / n;
    mean[f] = m;
    scale[f] = var > 1e-24 ? 1.0 / std::sqrt(var) : 0.0;
  }
}

Row Standardizer::Apply(const Row& r) const {
  Row z;
  for (std::size_t f = 0; f < kFeatureCount; ++f) z[f] = (r[f] - mean[f]) * scale[f];
  return z;
}

json Standardizer::ToJson() const { return {{"mean", mean}, {"scale", scale}}; }

Standardizer Standardizer::FromJson(const json& j) {
  Standardizer s;
  s.mean = j.at("mean").get<Row>();
  s.scale = j.at("scale").get<Row>();
  return s;
}

// ---- trees ----
namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0;
  double score = 0;  // lower is better
};

bool Better(const SplitChoice& a, const SplitChoice& b) {
  if (b.feature < 0) return true;
  if (a.score != b.score) return a.score < b.score;
  if (a.feature != b.feature) return a.feature < b.feature;
  return a.threshold < b.threshold;
}

double Midpoint(double a, double b) {
  const double m = a + (b - a) / 2;
  return m >= b ? a : m;
}

json NodeToJson(const std::vector<TreeNode>& nodes, int i) {
  const TreeNode& n = nodes[static_cast<std::size_t>(i)];
  if (n.feature < 0) return {{"leaf", n.value}};
  return {{"feature", n.feature},
          {"threshold", n.threshold},
          {"left", NodeToJson(nodes, n.left)},
          {"right", NodeToJson(nodes, n.right)}};
}

int NodeFromJson(const json& j, std::vector<TreeNode>& nodes) {
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  if (j.contains("leaf")) {
    nodes[static_cast<std::size_t>(id)].value = j.at("leaf").get<double>();
    return id;
  }
  TreeNode n;
  n.feature = j.at("feature").get<int>();
  if (n.feature < 0 || n.feature >= static_cast<int>(kFeatureCount)) {
    Fail(ErrorCode::kParse, "tree node feature out of range");
  }
  n.threshold = j.at("threshold").get<double>();
  n.left = NodeFromJson(j.at("left"), nodes);
  n.right = NodeFromJson(j.at("right"), nodes);
  nodes[static_cast<std::size_t>(id)] = n;
  return id;
}

double Walk(const std::vector<TreeNode>& nodes, const Row& x) {
  if (nodes.empty()) return 0;
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                        : n.right);
  }
  return nodes[i].value;
}

}  // namespace

void ClassificationTree::Fit(const TrainingData& data, std::vector<std::size_t> sample,
                             const Options& options, Rng* rng) {
  nodes_.clear();
  if (sample.empty()) Fail(ErrorCode::kInvalidArgument, "empty tree sample");
  Build(data, sample, 0, sample.size(), 0, options, rng);
}

int ClassificationTree::Build(const TrainingData& data, std::vector<std::size_t>& sample,
                              std::size_t begin, std::size_t end, int depth,
                              const Options& options, Rng* rng) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  const std::size_t n = end - begin;
  double pos = 0;
  for (std::size_t i = begin; i < end; ++i) pos += data.y[sample[i]];
  nodes_[static_cast<std::size_t>(id)].value = pos / static_cast<double>(n);

  const bool pure = pos == 0 || pos == static_cast<double>(n);
  if (pure || static_cast<int>(n) < options.min_samples_split ||
      (options.max_depth > 0 && depth >= options.max_depth)) {
    return id;
  }

  std::array<std::size_t, kFeatureCount> order;
  std::iota(order.begin(), order.end(), 0);
  if (rng) rng->Shuffle(order.begin(), order.end());

  SplitChoice best;
  int evaluated = 0;
  std::vector<std::pair<double, double>> vals(n);
  for (std::size_t f : order) {
    if (evaluated >= options.max_features && best.feature >= 0) break;
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = sample[begin + i];
      vals[i] = {data.x[s][f], data.y[s]};
    }
    std::sort(vals.begin(), vals.end());
    if (vals.front().first == vals.back().first) continue;  // constant here
    ++evaluated;
    double left_n = 0;
    double left_pos = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_n += 1;
      left_pos += vals[i].second;
      if (vals[i].first == vals[i + 1].first) continue;
      const double right_n = static_cast<double>(n) - left_n;
      const double right_pos = pos - left_pos;
      const double pl = left_pos / left_n;
      const double pr = right_pos / right_n;
      // n·weighted Gini of the children
      const double score = left_n * 2 * pl * (1 - pl) + right_n * 2 * pr * (1 - pr);
      SplitChoice c{static_cast<int>(f), Midpoint(vals[i].first, vals[i + 1].first), score};
      if (Better(c, best)) best = c;
    }
  }
  if (best.feature < 0) return id;

  const auto mid = std::stable_partition(
      sample.begin() + static_cast<long>(begin), sample.begin() + static_cast<long>(end),
      [&](std::size_t s) { return data.x[s][static_cast<std::size_t>(best.feature)] <= best.threshold; });
  const auto split = static_cast<std::size_t>(mid - sample.begin());
  const int left = Build(data, sample, begin, split, depth + 1, options, rng);
  const int right = Build(data, sample, split, end, depth + 1, options, rng);
  auto& node = nodes_[static_cast<std::size_t>(id)];
  node.feature = best.feature;
  node.threshold = best.threshold;
  node.left = left;
  node.right = right;
  return id;
}

double ClassificationTree::Predict(const Row& x) const { return Walk(nodes_, x); }

json ClassificationTree::ToJson() const { return NodeToJson(nodes_, 0); }

ClassificationTree ClassificationTree::FromJson(const json& j) {
  ClassificationTree t;
  NodeFromJson(j, t.nodes_);
  return t;
}

void RegressionTree::Fit(const std::vector<Row>& x, const std::vector<double>& residual,
                         const std::vector<double>& hessian, int max_depth, int min_samples_leaf) {
  nodes_.clear();
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  Build(x, residual, hessian, idx, 0, idx.size(), 0, max_depth, min_samples_leaf);
}

int RegressionTree::Build(const std::vector<Row>& x, const std::vector<double>& residual,
                          const std::vector<double>& hessian, std::vector<std::size_t>& idx,
                          std::size_t begin, std::size_t end, int depth, int max_depth,
                          int min_samples_leaf) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  const std::size_t n = end - begin;
  double g = 0;
  double h = 0;
  for (std::size_t i = begin; i < end; ++i) {
    g += residual[idx[i]];
    h += hessian[idx[i]];
  }
  nodes_[static_cast<std::size_t>(id)].value = h > 1e-12 ? g / h : 0.0;
  const auto min_leaf = static_cast<std::size_t>(min_samples_leaf);
  if (depth >= max_depth || n < 2 * min_leaf) return id;

  SplitChoice best;
  std::vector<std::pair<double, double>> vals(n);
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    for (std::size_t i = 0; i < n; ++i) vals[i] = {x[idx[begin + i]][f], residual[idx[begin + i]]};
    std::sort(vals.begin(), vals.end());
    if (vals.front().first == vals.back().first) continue;
    double left_sum = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_sum += vals[i].second;
      if (vals[i].first == vals[i + 1].first) continue;
      const std::size_t ln = i + 1;
      const std::size_t rn = n - ln;
      if (ln < min_leaf || rn < min_leaf) continue;
      const double right_sum = g - left_sum;
      // Minimizing SSE equals maximizing sum²/n over the children.
      const double score = -(left_sum * left_sum / static_cast<double>(ln) +
                             right_sum * right_sum / static_cast<double>(rn));
      SplitChoice c{static_cast<int>(f), Midpoint(vals[i].first, vals[i + 1].first), score};
      if (Better(c, best)) best = c;
    }
  }
  if (best.feature < 0) return id;
  const auto mid = std::stable_partition(
      idx.begin() + static_cast<long>(begin), idx.begin() + static_cast<long>(end),
      [&](std::size_t s) { return x[s][static_cast<std::size_t>(best.feature)] <= best.threshold; });
  const auto split = static_cast<std::size_t>(mid - idx.begin());
  const int left = Build(x, residual, hessian, idx, begin, split, depth + 1, max_depth, min_samples_leaf);
  const int right = Build(x, residual, hessian, idx, split, end, depth + 1, max_depth, min_samples_leaf);
  auto& node = nodes_[static_cast<std::size_t>(id)];
  node.feature = best.feature;
  node.threshold = best.threshold;
  node.left = left;
  node.right = right;
  return id;
}

double RegressionTree::Predict(const Row& x) const { return Walk(nodes_, x); }

json RegressionTree::ToJson() const { return NodeToJson(nodes_, 0); }

RegressionTree RegressionTree::FromJson(const json& j) {
  RegressionTree t;
  NodeFromJson(j, t.nodes_);
  return t;
}

// ---- MLP math ----
double& MlpNet::Param(std::size_t i) {
  if (i < w1.size()) return w1[i];
  i -= w1.size();
  if (i < b1.size()) return b1[i];
  i -= b1.size();
  if (i < w2.size()) return w2[i];
  return b2;
}

double MlpNet::Forward(const Row& z) const {
  double o = b2;
  for (int j = 0; j < hidden; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    double a = b1[ju];
    for (std::size_t k = 0; k < kFeatureCount; ++k) a += w1[ju * kFeatureCount + k] * z[k];
    o += w2[ju] * std::tanh(a);
  }
  return o;
}

MlpNet MlpNet::GlorotInit(int hidden, Rng& rng) {
  MlpNet net;
  net.hidden = hidden;
  const auto h = static_cast<std::size_t>(hidden);
  const double l1 = std::sqrt(6.0 / static_cast<double>(kFeatureCount + h));
  const double l2 = std::sqrt(6.0 / static_cast<double>(h + 1));
  net.w1.resize(h * kFeatureCount);
  for (auto& w : net.w1) w = (2 * rng.Uniform() - 1) * l1;
  net.b1.assign(h, 0.0);
  net.w2.resize(h);
  for (auto& w : net.w2) w = (2 * rng.Uniform() - 1) * l2;
  net.b2 = 0;
  return net;
}

double MlpLoss(const MlpNet& net, const std::vector<Row>& z, const std::vector<double>& y,
               double l2) {
  double loss = 0;
  for (std::size_t i = 0; i < z.size(); ++i) loss += LogLoss(net.Forward(z[i]), y[i]);
  loss /= static_cast<double>(z.size());
  double sq = 0;
  for (double w : net.w1) sq += w * w;
  for (double w : net.w2) sq += w * w;
  return loss + 0.5 * l2 * sq;
}

std::vector<double> MlpGradient(const MlpNet& net, const std::vector<Row>& z,
                                const std::vector<double>& y, double l2) {
  const auto h = static_cast<std::size_t>(net.hidden);
  std::vector<double> grad(net.ParamCount(), 0.0);
  double* gw1 = grad.data();
  double* gb1 = gw1 + net.w1.size();
  double* gw2 = gb1 + h;
  double& gb2 = grad.back();
  std::vector<double> act(h);
  const double inv_n = 1.0 / static_cast<double>(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    double o = net.b2;
    for (std::size_t j = 0; j < h; ++j) {
      double a = net.b1[j];
      for (std::size_t k = 0; k < kFeatureCount; ++k) a += net.w1[j * kFeatureCount + k] * z[i][k];
      act[j] = std::tanh(a);
      o += net.w2[j] * act[j];
    }
    const double delta = (Sigmoid(o) - y[i]) * inv_n;
    gb2 += delta;
    for (std::size_t j = 0; j < h; ++j) {
      gw2[j] += delta * act[j];
      const double dh = delta * net.w2[j] * (1 - act[j] * act[j]);
      gb1[j] += dh;
      for (std::size_t k = 0; k < kFeatureCount; ++k) gw1[j * kFeatureCount + k] += dh * z[i][k];
    }
  }
  for (std::size_t j = 0; j < net.w1.size(); ++j) gw1[j] += l2 * net.w1[j];
  for (std::size_t j = 0; j < h; ++j) gw2[j] += l2 * net.w2[j];
  return grad;
}

}  // namespace detail

// ---- families ----
namespace {

using detail::ClassificationTree;
using detail::RegressionTree;
using detail::Standardizer;
using detail::TrainingData;

class RandomForestModel final : public TrainedModel {
 public:
  void Fit(const TrainingData& data) {
    const auto& p = spec_.rf;
    const std::size_t n = data.x.size();
    ClassificationTree::Options opt{p.max_features, p.max_depth, p.min_samples_split};
    trees_.resize(static_cast<std::size_t>(p.trees));
    for (std::size_t t = 0; t < trees_.size(); ++t) {
      Rng rng(MixSeed(spec_.seed, t));
      std::vector<std::size_t> sample(n);
      if (p.bootstrap) {
        for (auto& s : sample) s = rng.Below(n);
      } else {
        std::iota(sample.begin(), sample.end(), 0);
      }
      trees_[t].Fit(data, std::move(sample), opt, &rng);
    }
  }

  double PredictProba(const Row& x) const override {
    std::size_t votes = 0;
    for (const auto& t : trees_) votes += t.Predict(x) >= 0.5 ? 1 : 0;
    return static_cast<double>(votes) / static_cast<double>(trees_.size());
  }
  using TrainedModel::PredictProba;

  std::string ParamsJson() const override {
    json trees = json::array();
    for (const auto& t : trees_) trees.push_back(t.ToJson());
    return json{{"trees", trees}}.dump();
  }

  void Load(const json& p) {
    for (const auto& t : p.at("trees")) trees_.push_back(ClassificationTree::FromJson(t));
    if (trees_.empty()) Fail(ErrorCode::kParse, "forest without trees");
  }

 private:
  std::vector<ClassificationTree> trees_;
};

class GbtModel final : public TrainedModel {
 public:
  void Fit(const TrainingData& data) {
    const auto& p = spec_.gbt;
    const std::size_t n = data.x.size();
    const double pos = std::accumulate(data.y.begin(), data.y.end(), 0.0);
    const double rate = pos / static_cast<double>(n);
    base_ = std::log(rate / (1 - rate));
    std::vector<double> f(n, base_);
    std::vector<double> residual(n);
    std::vector<double> hessian(n);
    std::vector<double> step_out(n);
    double loss = Loss(f, data.y);
    for (int r = 0; r < p.rounds; ++r) {
      for (std::size_t i = 0; i < n; ++i) {
        const double pi = detail::Sigmoid(f[i]);
        residual[i] = data.y[i] - pi;
        hessian[i] = pi * (1 - pi);
      }
      RegressionTree tree;
      tree.Fit(data.x, residual, hessian, p.max_depth, p.min_samples_leaf);
      for (std::size_t i = 0; i < n; ++i) step_out[i] = tree.Predict(data.x[i]);
      // Shrink the step until the training loss does not go up.
      double step = p.learning_rate;
      std::vector<double> trial(n);
      double trial_loss = 0;
      for (int halving = 0; halving <= 30; ++halving) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = f[i] + step * step_out[i];
        trial_loss = Loss(trial, data.y);
        if (trial_loss <= loss) break;
        step /= 2;
      }
      if (trial_loss > loss) {
        step = 0;
      } else {
        f.swap(trial);
        loss = trial_loss;
      }
      trees_.push_back(std::move(tree));
      steps_.push_back(step);
      losses_.push_back(loss);
    }
  }

  double PredictProba(const Row& x) const override { return detail::Sigmoid(Score(x)); }
  using TrainedModel::PredictProba;

  double Score(const Row& x) const {
    double s = base_;
    for (std::size_t t = 0; t < trees_.size(); ++t) s += steps_[t] * trees_[t].Predict(x);
    return s;
  }

  const std::vector<double>& losses() const { return losses_; }

  std::string ParamsJson() const override {
    json trees = json::array();
    for (const auto& t : trees_) trees.push_back(t.ToJson());
    return json{{"base_score", base_}, {"steps", steps_}, {"trees", trees}}.dump();
  }

  void Load(const json& p) {
    base_ = p.at("base_score").get<double>();
    steps_ = p.at("steps").get<std::vector<double>>();
    for (const auto& t : p.at("trees")) trees_.push_back(RegressionTree::FromJson(t));
    if (steps_.size() != trees_.size()) Fail(ErrorCode::kParse, "steps/trees size mismatch");
  }

 private:
  static double Loss(const std::vector<double>& f, const std::vector<double>& y) {
    double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) s += detail::LogLoss(f[i], y[i]);
    return s / static_cast<double>(f.size());
  }

  double base_ = 0;
  std::vector<RegressionTree> trees_;
  std::vector<double> steps_;
  std::vector<double> losses_;
};

class MlpModel final : public TrainedModel {
 public:
  void Fit(const TrainingData& data) {
    const auto& p = spec_.mlp;
    scaler_.Fit(data.x);
    std::vector<Row> z;
    z.reserve(data.x.size());
    for (const auto& r : data.x) z.push_back(scaler_.Apply(r));
    Rng rng(spec_.seed);
    net_ = detail::MlpNet::GlorotInit(p.hidden, rng);
    std::vector<double> velocity(net_.ParamCount(), 0.0);
    std::vector<std::size_t> order(z.size());
    std::iota(order.begin(), order.end(), 0);
    const auto batch = static_cast<std::size_t>(p.batch_size);
    std::vector<Row> bz;
    std::vector<double> by;
    for (int epoch = 0; epoch < p.epochs; ++epoch) {
      rng.Shuffle(order.begin(), order.end());
      for (std::size_t start = 0; start < order.size(); start += batch) {
        const std::size_t stop = std::min(order.size(), start + batch);
        bz.clear();
        by.clear();
        for (std::size_t i = start; i < stop; ++i) {
          bz.push_back(z[order[i]]);
          by.push_back(data.y[order[i]]);
        }
        const auto grad = detail::MlpGradient(net_, bz, by, p.l2);
        for (std::size_t k = 0; k < grad.size(); ++k) {
          velocity[k] = p.momentum * velocity[k] - p.learning_rate * grad[k];
          net_.Param(k) += velocity[k];
        }
      }
    }
  }

  double PredictProba(const Row& x) const override {
    return detail::Sigmoid(net_.Forward(scaler_.Apply(x)));
  }
  using TrainedModel::PredictProba;

  std::string ParamsJson() const override {
    return json{{"scaler", scaler_.ToJson()}, {"hidden", net_.hidden}, {"w1", net_.w1},
                {"b1", net_.b1},              {"w2", net_.w2},          {"b2", net_.b2}}
        .dump();
  }

  void Load(const json& p) {
    scaler_ = Standardizer::FromJson(p.at("scaler"));
    net_.hidden = p.at("hidden").get<int>();
    net_.w1 = p.at("w1").get<std::vector<double>>();
    net_.b1 = p.at("b1").get<std::vector<double>>();
    net_.w2 = p.at("w2").get<std::vector<double>>();
    net_.b2 = p.at("b2").get<double>();
    const auto h = static_cast<std::size_t>(net_.hidden);
    if (net_.hidden < 1 || net_.w1.size() != h * kFeatureCount || net_.b1.size() != h ||
        net_.w2.size() != h) {
      Fail(ErrorCode::kParse, "mlp weight shapes do not match");
    }
  }

 private:
  Standardizer scaler_;
  detail::MlpNet net_;
};

// Categories of a feature column and soft membership of a (possibly
// interpolated) value: weight split between the two nearest legal values.
struct SoftValue {
  int lo = 0;
  double w_hi = 0;  // weight on lo + 1
};

SoftValue Soften(std::size_t f, double v) {
  const double min = KindOf(f) == FeatureKind::kBoolean ? 0.0 : -1.0;
  v = std::clamp(v, min, 1.0);
  double lo = std::floor(v);
  if (lo >= 1.0) lo = 0.0;  // v == 1 → all weight on the upper category
  return {static_cast<int>(lo - min), v - lo};
}

class NaiveBayesModel final : public TrainedModel {
 public:
  void Fit(const TrainingData& data) {
    const double alpha = spec_.nb.alpha;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const double first = data.x[0][f];
      used_[f] = std::any_of(data.x.begin(), data.x.end(), [&](const Row& r) { return r[f] != first; });
    }
    std::vector<double> all_loc;
    for (const auto& r : data.x) all_loc.push_back(r[0]);
    const double all_mean = SumSorted(all_loc) / static_cast<double>(all_loc.size());
    std::vector<double> dev;
    for (double v : all_loc) dev.push_back((v - all_mean) * (v - all_mean));
    const double var_floor = 1e-9 * std::max(SumSorted(dev) / static_cast<double>(dev.size()), 1.0);

    for (int c = 0; c < 2; ++c) {
      const double target = c == 0 ? 1.0 : 0.0;  // class 0: reproducible
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < data.y.size(); ++i) {
        if (data.y[i] == target) rows.push_back(i);
      }
      const double n = static_cast<double>(rows.size());
      log_prior_[c] = std::log(n / static_cast<double>(data.y.size()));
      std::vector<double> locs;
      for (auto i : rows) locs.push_back(data.x[i][0]);
      mean_[c] = SumSorted(locs) / n;
      std::vector<double> sq;
      for (double v : locs) sq.push_back((v - mean_[c]) * (v - mean_[c]));
      var_[c] = SumSorted(sq) / n + var_floor;

      for (std::size_t f = 1; f < kFeatureCount; ++f) {
        const int cats = KindOf(f) == FeatureKind::kBoolean ? 2 : 3;
        std::vector<std::vector<double>> parts(static_cast<std::size_t>(cats));
        for (auto i : rows) {
          const SoftValue s = Soften(f, data.x[i][f]);
          parts[static_cast<std::size_t>(s.lo)].push_back(1 - s.w_hi);
          if (s.w_hi > 0) parts[static_cast<std::size_t>(s.lo + 1)].push_back(s.w_hi);
        }
        auto& lp = log_prob_[c][f];
        lp.assign(static_cast<std::size_t>(cats), 0.0);
        for (int k = 0; k < cats; ++k) {
          const double count = SumSorted(parts[static_cast<std::size_t>(k)]);
          lp[static_cast<std::size_t>(k)] = std::log((count + alpha) / (n + alpha * cats));
        }
      }
    }
  }

  double PredictProba(const Row& x) const override {
    double lj[2];
    for (int c = 0; c < 2; ++c) {
      double s = log_prior_[c];
      if (used_[0]) {
        const double d = x[0] - mean_[c];
        s += -0.5 * std::log(2 * std::numbers::pi * var_[c]) - d * d / (2 * var_[c]);
      }
      for (std::size_t f = 1; f < kFeatureCount; ++f) {
        if (!used_[f]) continue;
        const SoftValue sv = Soften(f, x[f]);
        const auto& lp = log_prob_[c][f];
        const auto lo = static_cast<std::size_t>(sv.lo);
        if (sv.w_hi == 0) {
          s += lp[lo];
        } else if (sv.w_hi == 1) {
          s += lp[lo + 1];
        } else {
          s += std::log((1 - sv.w_hi) * std::exp(lp[lo]) + sv.w_hi * std::exp(lp[lo + 1]));
        }
      }
      lj[c] = s;
    }
    return detail::Sigmoid(lj[0] - lj[1]);
  }
  using TrainedModel::PredictProba;

  std::string ParamsJson() const override {
    json classes = json::array();
    for (int c = 0; c < 2; ++c) {
      json cats = json::array();
      for (std::size_t f = 0; f < kFeatureCount; ++f) cats.push_back(log_prob_[c][f]);
      classes.push_back({{"log_prior", log_prior_[c]},
                         {"loc_mean", mean_[c]},
                         {"loc_var", var_[c]},
                         {"log_prob", cats}});
    }
    return json{{"used", used_}, {"classes", classes}}.dump();
  }

  void Load(const json& p) {
    used_ = p.at("used").get<std::array<bool, kFeatureCount>>();
    const auto& classes = p.at("classes");
    if (classes.size() != 2) Fail(ErrorCode::kParse, "naive bayes needs two classes");
    for (int c = 0; c < 2; ++c) {
      const auto& j = classes[static_cast<std::size_t>(c)];
      log_prior_[c] = j.at("log_prior").get<double>();
      mean_[c] = j.at("loc_mean").get<double>();
      var_[c] = j.at("loc_var").get<double>();
      const auto& cats = j.at("log_prob");
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        log_prob_[c][f] = cats.at(f).get<std::vector<double>>();
        const std::size_t want = f == 0 ? 0 : (KindOf(f) == FeatureKind::kBoolean ? 2 : 3);
        if (log_prob_[c][f].size() != want) Fail(ErrorCode::kParse, "naive bayes table shape");
      }
    }
  }

 private:
  static double SumSorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double s = 0;
    for (double d : v) s += d;
    return s;
  }

  std::array<bool, kFeatureCount> used_{};
  double log_prior_[2] = {0, 0};
  double mean_[2] = {0, 0};
  double var_[2] = {1, 1};
  std::array<std::vector<double>, kFeatureCount> log_prob_[2];
};

class KnnModel final : public TrainedModel {
 public:
  void Fit(const TrainingData& data) {
    scaler_.Fit(data.x);
    std::vector<std::pair<Row, double>> rows;
    rows.reserve(data.x.size());
    for (std::size_t i = 0; i < data.x.size(); ++i) rows.emplace_back(scaler_.Apply(data.x[i]), data.y[i]);
    // Canonical order makes index tie-breaks independent of input order.
    std::sort(rows.begin(), rows.end());
    for (auto& [z, y] : rows) {
      z_.push_back(z);
      y_.push_back(y);
    }
  }

  double PredictProba(const Row& x) const override {
    const Row q = scaler_.Apply(x);
    std::vector<std::pair<double, std::size_t>> d(z_.size());
    for (std::size_t i = 0; i < z_.size(); ++i) {
      double s = 0;
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const double diff = z_[i][f] - q[f];
        s += diff * diff;
      }
      d[i] = {s, i};
    }
    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(spec_.knn.k), d.size());
    if (k % 2 == 0) --k;  // keep the vote odd
    std::partial_sort(d.begin(), d.begin() + static_cast<long>(k), d.end());
    double pos = 0;
    for (std::size_t i = 0; i < k; ++i) pos += y_[d[i].second];
    return pos / static_cast<double>(k);
  }
  using TrainedModel::PredictProba;

  std::string ParamsJson() const override {
    return json{{"scaler", scaler_.ToJson()}, {"rows", z_}, {"labels", y_}}.dump();
  }

  void Load(const json& p) {
    scaler_ = Standardizer::FromJson(p.at("scaler"));
    z_ = p.at("rows").get<std::vector<Row>>();
    y_ = p.at("labels").get<std::vector<double>>();
    if (z_.empty() || z_.size() != y_.size()) Fail(ErrorCode::kParse, "knn table shape");
  }

 private:
  Standardizer scaler_;
  std::vector<Row> z_;
  std::vector<double> y_;
};

template <typename M>
std::shared_ptr<const TrainedModel> Make(const ModelSpec& spec, const std::string& fingerprint,
                                         const TrainingData* data, const json* params) {
  auto m = std::make_shared<M>();
  ModelAccess::Init(*m, spec, fingerprint);
  if (data) m->Fit(*data);
  if (params) m->Load(*params);
  return m;
}

std::shared_ptr<const TrainedModel> Build(const ModelSpec& spec, const std::string& fingerprint,
                                          const TrainingData* data, const json* params) {
  switch (spec.family) {
    case Family::kRandomForest:
      return Make<RandomForestModel>(spec, fingerprint, data, params);
    case Family::kGradientBoostedTrees:
      return Make<GbtModel>(spec, fingerprint, data, params);
    case Family::kMlp:
      return Make<MlpModel>(spec, fingerprint, data, params);
    case Family::kNaiveBayes:
      return Make<NaiveBayesModel>(spec, fingerprint, data, params);
    case Family::kKnn:
      return Make<KnnModel>(spec, fingerprint, data, params);
  }
  Fail(ErrorCode::kInternal, "unhandled family");
}

constexpr std::string_view kModelFormat = "repro-model/1";

}  // namespace

std::shared_ptr<const TrainedModel> Train(const ModelSpec& spec, const Dataset& ds) {
  spec.Validate();
  if (ds.empty()) Fail(ErrorCode::kInvalidArgument, "cannot train on an empty dataset");
  if (ds.Count(Label::kReproducible) == 0 || ds.Count(Label::kIrreproducible) == 0) {
    Fail(ErrorCode::kSingleClass, "training data holds a single class");
  }
  for (const auto& e : ds.examples) {
    for (double v : e.features) {
      if (!std::isfinite(v)) Fail(ErrorCode::kInvalidArgument, "non-finite feature value");
    }
  }
  const auto data = detail::ToTraining(ds);
  return Build(spec, ds.Fingerprint(), &data, nullptr);
}

std::string TrainedModel::Serialize() const {
  json doc{{"format", kModelFormat},
           {"spec", SpecJson(spec_)},
           {"training_fingerprint", fingerprint_},
           {"params", json::parse(ParamsJson())}};
  return doc.dump();
}

std::shared_ptr<const TrainedModel> Deserialize(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.value("format", "") != kModelFormat) {
      Fail(ErrorCode::kParse, "unsupported model format");
    }
    const ModelSpec spec = SpecFromJson(doc.at("spec"));
    const json& params = doc.at("params");
    return Build(spec, doc.value("training_fingerprint", ""), nullptr, &params);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("model document: ") + e.what());
  }
}

}  // namespace repro::models
