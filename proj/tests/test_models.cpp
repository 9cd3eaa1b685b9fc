#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include <json.hpp>

#include "models_internal.hpp"
#include "repro/dataset.hpp"
#include "repro/error.hpp"
#include "repro/models.hpp"
#include "test_util.hpp"

using namespace repro;
using namespace repro::models;
using nlohmann::json;

namespace {

ModelSpec SpecFor(Family f, std::uint64_t seed = 0) {
  ModelSpec s;
  s.family = f;
  s.seed = seed;
  if (f == Family::kRandomForest) s.rf.trees = 25;
  if (f == Family::kGradientBoostedTrees) s.gbt.rounds = 30;
  if (f == Family::kMlp) s.mlp.epochs = 40;
  return s;
}

std::vector<Row> Probes(Rng& rng, int n) {
  std::vector<Row> out;
  for (int i = 0; i < n; ++i) out.push_back(testutil::RandomRow(rng, rng.Bernoulli(0.5)));
  return out;
}

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

}  // namespace

TEST_CASE("family names") {
  for (auto f : kAllFamilies) CHECK(ParseFamily(ToString(f)) == f);
  CHECK(ToString(Family::kRandomForest) == "rf");
  CHECK(CodeOf([] { ParseFamily("svm"); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("every family: probabilities, thresholds, determinism, round trip") {
  const auto ds = dataset::SynthCorpus(80, 40, 3);
  Rng rng(5);
  const auto probes = Probes(rng, 60);
  for (auto f : kAllFamilies) {
    CAPTURE(ToString(f));
    const auto m = Train(SpecFor(f, 7), ds);
    const auto again = Train(SpecFor(f, 7), ds);
    const auto copy = Deserialize(m->Serialize());
    CHECK(m->feature_count() == 9);
    CHECK(m->training_fingerprint() == ds.Fingerprint());
    CHECK(copy->Serialize() == m->Serialize());
    for (const auto& x : probes) {
      const double p = m->PredictProba(x);
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      CHECK((m->Predict(x) == Label::kReproducible) == (p >= 0.5));
      CHECK(again->PredictProba(x) == p);
      CHECK(copy->PredictProba(x) == p);
    }
    const std::vector<double> eight(8, 0.0);
    CHECK(CodeOf([&] { m->PredictProba(std::span<const double>(eight)); }) ==
          ErrorCode::kInvalidArgument);
    const std::vector<double> nine(probes[0].begin(), probes[0].end());
    CHECK(m->PredictProba(std::span<const double>(nine)) == m->PredictProba(probes[0]));
  }
}

TEST_CASE("training rejects one class and bad hyperparameters") {
  Rng rng(1);
  const auto one = testutil::RandomDataset(rng, 10, 0);
  for (auto f : kAllFamilies) {
    CHECK(CodeOf([&] { Train(SpecFor(f), one); }) == ErrorCode::kSingleClass);
  }
  const auto ds = testutil::RandomDataset(rng, 10, 10);
  ModelSpec s = SpecFor(Family::kRandomForest);
  s.rf.trees = 0;
  CHECK(CodeOf([&] { Train(s, ds); }) == ErrorCode::kInvalidArgument);
  s = SpecFor(Family::kKnn);
  s.knn.k = 4;
  CHECK(CodeOf([&] { s.Validate(); }) == ErrorCode::kInvalidArgument);
  s = SpecFor(Family::kGradientBoostedTrees);
  s.gbt.learning_rate = 0;
  CHECK(CodeOf([&] { s.Validate(); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([&] { Train(SpecFor(Family::kNaiveBayes), Dataset{}); }) != ErrorCode::kInternal);
  CHECK(CodeOf([] { Deserialize("{\"format\":\"other\"}"); }) == ErrorCode::kParse);
  CHECK(CodeOf([] { Deserialize("not json"); }) == ErrorCode::kParse);
}

TEST_CASE("spec JSON round trip") {
  ModelSpec s;
  s.family = Family::kMlp;
  s.seed = 42;
  s.mlp.hidden = 8;
  const auto back = ModelSpec::FromJson(s.ToJson());
  CHECK(back.family == Family::kMlp);
  CHECK(back.seed == 42);
  CHECK(back.mlp.hidden == 8);
  const auto partial = ModelSpec::FromJson(R"({"family":"knn","params":{"k":3}})");
  CHECK(partial.knn.k == 3);
  CHECK(CodeOf([] { ModelSpec::FromJson("{bad"); }) == ErrorCode::kParse);
}

TEST_CASE("RF separates perfectly separable data") {
  Dataset ds;
  for (int i = 0; i < 40; ++i) {
    LabeledExample e;
    e.features[0] = i < 20 ? 1 + i : 100 + i;
    e.label = i < 20 ? Label::kReproducible : Label::kIrreproducible;
    ds.examples.push_back(e);
  }
  const auto m = Train(SpecFor(Family::kRandomForest), ds);
  for (const auto& e : ds.examples) CHECK(m->Predict(e.features) == e.label);
}

TEST_CASE("RF output is the vote fraction") {
  json trees = json::array({json{{"leaf", 1.0}}, json{{"leaf", 0.9}}, json{{"leaf", 0.6}},
                            json{{"leaf", 0.2}}});
  ModelSpec s;
  s.rf.trees = 4;
  json doc{{"format", "repro-model/1"},
           {"spec", json::parse(s.ToJson())},
           {"training_fingerprint", ""},
           {"params", {{"trees", trees}}}};
  const auto m = Deserialize(doc.dump());
  CHECK(m->PredictProba(Row{}) == doctest::Approx(0.75));
}

TEST_CASE("RF with one tree and all features equals a single CART tree") {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const auto ds = testutil::RandomDataset(rng, 30 + rng.Below(30), 20 + rng.Below(30));
    ModelSpec s;
    s.rf.trees = 1;
    s.rf.max_features = 9;
    s.rf.bootstrap = false;
    s.seed = rng.NextU64();
    const auto m = Train(s, ds);
    const auto data = detail::ToTraining(ds);
    detail::ClassificationTree tree;
    std::vector<std::size_t> sample(data.x.size());
    for (std::size_t i = 0; i < sample.size(); ++i) sample[i] = i;
    tree.Fit(data, sample, {}, nullptr);
    for (const auto& x : Probes(rng, 50)) {
      CHECK(m->PredictProba(x) == (tree.Predict(x) >= 0.5 ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("GBT training loss never increases with more rounds") {
  const auto ds = dataset::SynthCorpus(90, 60, 8);
  const auto data = detail::ToTraining(ds);
  double previous = 1e300;
  for (int rounds = 1; rounds <= 25; ++rounds) {
    ModelSpec s;
    s.family = Family::kGradientBoostedTrees;
    s.gbt.rounds = rounds;
    s.gbt.learning_rate = 0.5;
    const auto m = Train(s, ds);
    double loss = 0;
    for (std::size_t i = 0; i < data.x.size(); ++i) {
      const double p = std::clamp(m->PredictProba(data.x[i]), 1e-15, 1 - 1e-15);
      loss -= data.y[i] * std::log(p) + (1 - data.y[i]) * std::log(1 - p);
    }
    loss /= static_cast<double>(data.x.size());
    CHECK(loss <= previous + 1e-12);
    previous = loss;
  }
}

TEST_CASE("MLP analytic gradient matches central differences") {
  Rng rng(31);
  for (int net_i = 0; net_i < 10; ++net_i) {
    auto net = detail::MlpNet::GlorotInit(6 + static_cast<int>(rng.Below(10)), rng);
    std::vector<Row> z;
    std::vector<double> y;
    for (int i = 0; i < 10; ++i) {
      Row r;
      for (auto& v : r) v = rng.Normal();
      z.push_back(r);
      y.push_back(rng.Bernoulli(0.5) ? 1.0 : 0.0);
    }
    const double l2 = 1e-3;
    const auto grad = detail::MlpGradient(net, z, y, l2);
    REQUIRE(grad.size() == net.ParamCount());
    for (int c = 0; c < 20; ++c) {
      const auto i = rng.Below(net.ParamCount());
      const double keep = net.Param(i);
      const double h = 1e-5;
      net.Param(i) = keep + h;
      const double up = detail::MlpLoss(net, z, y, l2);
      net.Param(i) = keep - h;
      const double down = detail::MlpLoss(net, z, y, l2);
      net.Param(i) = keep;
      const double numeric = (up - down) / (2 * h);
      const double denom = std::max({std::abs(numeric), std::abs(grad[i]), 1e-8});
      CHECK(std::abs(numeric - grad[i]) / denom < 1e-4);
    }
  }
}

TEST_CASE("NB posterior is normalized and symmetric data gives one half") {
  Dataset sym;
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const auto r = testutil::RandomRow(rng, true);
    for (auto l : {Label::kReproducible, Label::kIrreproducible}) {
      LabeledExample e;
      e.features = r;
      e.label = l;
      sym.examples.push_back(e);
    }
  }
  const auto m = Train(SpecFor(Family::kNaiveBayes), sym);
  for (const auto& x : Probes(rng, 30)) CHECK(m->PredictProba(x) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("KNN k=1 returns the training label") {
  Rng rng(4);
  Dataset ds;
  for (int i = 0; i < 30; ++i) {
    LabeledExample e;
    e.features = testutil::RandomRow(rng, i % 2 == 0);
    e.features[0] = 1 + i;  // distinct points
    e.label = i % 2 == 0 ? Label::kReproducible : Label::kIrreproducible;
    ds.examples.push_back(e);
  }
  ModelSpec s = SpecFor(Family::kKnn);
  s.knn.k = 1;
  const auto m = Train(s, ds);
  for (const auto& e : ds.examples) {
    CHECK(m->PredictProba(e.features) == (e.label == Label::kReproducible ? 1.0 : 0.0));
  }
}

TEST_CASE("training order does not change KNN or NB") {
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ds = testutil::RandomDataset(rng, 30, 20);
    auto shuffled = ds;
    rng.Shuffle(shuffled.examples.begin(), shuffled.examples.end());
    for (auto f : {Family::kKnn, Family::kNaiveBayes}) {
      const auto a = Train(SpecFor(f, 1), ds);
      const auto b = Train(SpecFor(f, 1), shuffled);
      for (const auto& x : Probes(rng, 40)) {
        CHECK(a->PredictProba(x) == doctest::Approx(b->PredictProba(x)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("metrics examples") {
  const auto perfect = ComputeMetrics({{{10, 0}, {0, 10}}});
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.reproducible.f1 == 1.0);
  CHECK(perfect.irreproducible.f1 == 1.0);
  const auto m = ComputeMetrics({{{8, 2}, {4, 6}}});
  CHECK(m.reproducible.precision == doctest::Approx(8.0 / 12));
  CHECK(m.reproducible.recall == doctest::Approx(0.8));
  CHECK(m.accuracy == doctest::Approx(0.7));
  const auto zero = ComputeMetrics({{{0, 5}, {0, 5}}});
  CHECK(zero.reproducible.precision == 0.0);
  CHECK(zero.reproducible.f1 == 0.0);
  CHECK(CodeOf([] { ComputeMetrics({{{0, 0}, {0, 0}}}); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { ComputeMetrics({{{-1, 0}, {0, 3}}}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("metric invariants on random confusions") {
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    Confusion c{};
    for (auto& row : c)
      for (auto& v : row) v = static_cast<std::int64_t>(rng.Below(50));
    if (c[0][0] + c[0][1] + c[1][0] + c[1][1] == 0) continue;
    const auto m = ComputeMetrics(c);
    for (const auto* cm : {&m.reproducible, &m.irreproducible}) {
      const double hm = cm->precision + cm->recall > 0
                            ? 2 * cm->precision * cm->recall / (cm->precision + cm->recall)
                            : 0.0;
      CHECK(std::abs(cm->f1 - hm) < 1e-12);
      CHECK(cm->precision >= 0);
      CHECK(cm->precision <= 1);
    }
    const double total = static_cast<double>(c[0][0] + c[0][1] + c[1][0] + c[1][1]);
    CHECK(m.accuracy == doctest::Approx(static_cast<double>(c[0][0] + c[1][1]) / total));
  }
}

TEST_CASE("cross-validation with an oracle and a majority dummy") {
  const auto ds = dataset::SynthCorpus(270, 87, 2);
  CvOptions o;
  o.k = 10;
  o.seed = 1;
  // The oracle cheats by reading the label off the row index.
  const auto oracle = [&](const Dataset&, const Dataset& test) {
    std::vector<double> p;
    for (const auto& e : test.examples) p.push_back(e.label == Label::kReproducible ? 1.0 : 0.0);
    return p;
  };
  const auto r = CrossValidate(ds, o, oracle);
  CHECK(r.metrics.accuracy == 1.0);
  CHECK(r.metrics.irreproducible.f1 == 1.0);

  const auto dummy = [](const Dataset&, const Dataset& test) {
    return std::vector<double>(test.size(), 1.0);
  };
  const auto d = CrossValidate(ds, o, dummy);
  CHECK(d.metrics.accuracy == doctest::Approx(270.0 / 357.0));
  CHECK(d.metrics.irreproducible.recall == 0.0);
}

TEST_CASE("cross-validation never scores synthetic rows") {
  Rng rng(17);
  for (auto mode : {SmoteMode::kInFold, SmoteMode::kGlobal}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto ds = testutil::RandomDataset(rng, 20 + rng.Below(40), 10 + rng.Below(10));
      CvOptions o;
      o.k = 5;
      o.seed = rng.NextU64();
      o.smote_mode = mode;
      std::size_t scored = 0;
      const auto fit = [&](const Dataset& train, const Dataset& test) {
        for (const auto& e : test.examples) CHECK(e.origin == Origin::kReal);
        if (mode == SmoteMode::kInFold)
          CHECK(train.Count(Label::kReproducible) == train.Count(Label::kIrreproducible));
        scored += test.size();
        return std::vector<double>(test.size(), 0.5);
      };
      const auto r = CrossValidate(ds, o, fit);
      CHECK(scored == ds.size());
      CHECK(r.probabilities.size() == ds.size());
      for (auto t : r.test_synthetic) CHECK(t == 0);
    }
  }
}

TEST_CASE("cross-validation is deterministic and job-count independent") {
  const auto ds = dataset::SynthCorpus(120, 40, 6);
  for (auto f : kAllFamilies) {
    CvOptions o;
    o.k = 5;
    o.seed = 3;
    const auto a = EvaluateCv(SpecFor(f, 2), ds, o);
    o.jobs = 4;
    const auto b = EvaluateCv(SpecFor(f, 2), ds, o);
    CHECK(a.probabilities == b.probabilities);
    CHECK(MetricsToJson(a.metrics) == MetricsToJson(b.metrics));
  }
}

TEST_CASE("metrics formatting") {
  const auto m = ComputeMetrics({{{8, 2}, {4, 6}}});
  const auto table = FormatMetricsTable({{"Random Forest", m}});
  CHECK(table.find("Random Forest") != std::string::npos);
  CHECK(table.find("Reproducible") != std::string::npos);
  const auto csv = FormatMetricsCsv({{"rf", m}});
  CHECK(csv.rfind("model,", 0) == 0);
  const auto j = json::parse(MetricsToJson(m));
  CHECK(j.at("accuracy").get<double>() == doctest::Approx(0.7));
}
