#include <algorithm>
#include <atomic>
#include <cstdio>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "repro/error.hpp"
#include "repro/models.hpp"
#include "repro/rng.hpp"

namespace repro::models {

namespace {

double Ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

ClassMetrics ForClass(const Confusion& c, int k) {
  const auto other = 1 - k;
  const double tp = static_cast<double>(c[k][k]);
  const double fp = static_cast<double>(c[other][k]);
  const double fn = static_cast<double>(c[k][other]);
  ClassMetrics m;
  m.precision = Ratio(tp, tp + fp);
  m.recall = Ratio(tp, tp + fn);
  m.f1 = Ratio(2 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

std::string Fixed(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

MetricsReport ComputeMetrics(const Confusion& confusion) {
  std::int64_t total = 0;
  for (const auto& row : confusion) {
    for (auto v : row) {
      if (v < 0) Fail(ErrorCode::kInvalidArgument, "negative confusion count");
      total += v;
    }
  }
  if (total == 0) Fail(ErrorCode::kInvalidArgument, "empty confusion matrix");
  MetricsReport r;
  r.confusion = confusion;
  r.reproducible = ForClass(confusion, 0);
  r.irreproducible = ForClass(confusion, 1);
  r.accuracy = static_cast<double>(confusion[0][0] + confusion[1][1]) / static_cast<double>(total);
  return r;
}

std::string_view ToString(SmoteMode mode) {
  return mode == SmoteMode::kInFold ? "in_fold" : "global";
}

SmoteMode ParseSmoteMode(std::string_view text) {
  if (text == "in_fold") return SmoteMode::kInFold;
  if (text == "global") return SmoteMode::kGlobal;
  Fail(ErrorCode::kInvalidArgument, "unknown smote mode: " + std::string(text));
}

CvResult CrossValidate(const Dataset& ds, const CvOptions& options, const FitPredict& fit) {
  if (ds.CountOrigin(Origin::kSynthetic) != 0) {
    Fail(ErrorCode::kInvalidArgument, "cross-validation input must hold real examples only");
  }
  if (options.jobs < 1) Fail(ErrorCode::kInvalidArgument, "jobs must be >= 1");

  // Global mode oversamples once up front; synthetic rows then sit in every
  // training fold.
  Dataset pool = ds;
  if (options.smote_mode == SmoteMode::kGlobal) {
    pool = dataset::Smote(ds, {options.smote_k, MixSeed(options.seed, 0x5eed), options.smote_round});
  }
  const auto folds = dataset::StratifiedKFold(pool, options.k, options.seed);

  CvResult result;
  result.probabilities.assign(ds.size(), 0.0);
  result.fold_of.assign(ds.size(), -1);
  result.train_sizes.assign(folds.size(), 0);
  result.train_synthetic.assign(folds.size(), 0);
  result.test_synthetic.assign(folds.size(), 0);
  std::vector<std::vector<double>> fold_proba(folds.size());

  auto run_fold = [&](std::size_t f) {
    Dataset train = pool.Subset(folds[f].train);
    if (options.smote_mode == SmoteMode::kInFold) {
      train = dataset::Smote(train, {options.smote_k, MixSeed(options.seed, f), options.smote_round});
    }
    const Dataset test = pool.Subset(folds[f].test);
    result.train_sizes[f] = train.size();
    result.train_synthetic[f] = train.CountOrigin(Origin::kSynthetic);
    result.test_synthetic[f] = test.CountOrigin(Origin::kSynthetic);
    fold_proba[f] = fit(train, test);
    if (fold_proba[f].size() != test.size()) {
      Fail(ErrorCode::kInternal, "fitter returned the wrong number of probabilities");
    }
  };

  const std::size_t jobs = std::min<std::size_t>(static_cast<std::size_t>(options.jobs), folds.size());
  if (jobs <= 1) {
    for (std::size_t f = 0; f < folds.size(); ++f) run_fold(f);
  } else {
    std::vector<std::exception_ptr> errors(folds.size());
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t f = next++; f < folds.size(); f = next++) {
          try {
            run_fold(f);
          } catch (...) {
            errors[f] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  Confusion confusion{};
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (std::size_t j = 0; j < folds[f].test.size(); ++j) {
      const std::size_t row = folds[f].test[j];  // real rows keep their index in pool
      const double p = fold_proba[f][j];
      result.probabilities[row] = p;
      result.fold_of[row] = static_cast<int>(f);
      const int actual = ds.examples[row].label == Label::kReproducible ? 0 : 1;
      const int predicted = p >= 0.5 ? 0 : 1;
      ++confusion[static_cast<std::size_t>(actual)][static_cast<std::size_t>(predicted)];
    }
  }
  result.metrics = ComputeMetrics(confusion);
  return result;
}

CvResult EvaluateCv(const ModelSpec& spec, const Dataset& ds, const CvOptions& options) {
  spec.Validate();
  return CrossValidate(ds, options, [&](const Dataset& train, const Dataset& test) {
    const auto model = Train(spec, train);
    std::vector<double> out;
    out.reserve(test.size());
    for (const auto& e : test.examples) out.push_back(model->PredictProba(e.features));
    return out;
  });
}

std::string FormatMetricsTable(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-24s %-15s %9s %9s %9s %9s\n", "Model", "Class",
                "Precision", "Recall", "F1", "Accuracy");
  out << line;
  for (const auto& [name, r] : rows) {
    std::snprintf(line, sizeof(line), "%-24s %-15s %9s %9s %9s %9s\n", name.c_str(),
                  "Reproducible", Fixed(r.reproducible.precision).c_str(),
                  Fixed(r.reproducible.recall).c_str(), Fixed(r.reproducible.f1).c_str(),
                  Fixed(r.accuracy).c_str());
    out << line;
    std::snprintf(line, sizeof(line), "%-24s %-15s %9s %9s %9s %9s\n", "", "Irreproducible",
                  Fixed(r.irreproducible.precision).c_str(), Fixed(r.irreproducible.recall).c_str(),
                  Fixed(r.irreproducible.f1).c_str(), "");
    out << line;
  }
  return out.str();
}

std::string FormatMetricsCsv(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::ostringstream out;
  out << "model,class,precision,recall,f1,accuracy\n";
  for (const auto& [name, r] : rows) {
    out << name << ",reproducible," << Fixed(r.reproducible.precision, 6) << ','
        << Fixed(r.reproducible.recall, 6) << ',' << Fixed(r.reproducible.f1, 6) << ','
        << Fixed(r.accuracy, 6) << '\n';
    out << name << ",irreproducible," << Fixed(r.irreproducible.precision, 6) << ','
        << Fixed(r.irreproducible.recall, 6) << ',' << Fixed(r.irreproducible.f1, 6) << ','
        << Fixed(r.accuracy, 6) << '\n';
  }
  return out.str();
}

std::string MetricsToJson(const MetricsReport& r) {
  auto cls = [](const ClassMetrics& m) {
    return nlohmann::json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
  };
  nlohmann::json j{{"reproducible", cls(r.reproducible)},
                   {"irreproducible", cls(r.irreproducible)},
                   {"accuracy", r.accuracy},
                   {"confusion", r.confusion}};
  return j.dump();
}

}  // namespace repro::models
