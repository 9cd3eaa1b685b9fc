#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>

#include "repro/dataset.hpp"
#include "repro/error.hpp"
#include "test_util.hpp"

using namespace repro;
using namespace repro::dataset;

namespace {

LabeledExample Ex(Row r, Label l) {
  LabeledExample e;
  e.features = r;
  e.label = l;
  return e;
}

Dataset WithLoc(const std::vector<double>& locs) {
  Dataset ds;
  for (double v : locs) {
    Row r{};
    r[0] = v;
    ds.examples.push_back(Ex(r, Label::kReproducible));
  }
  return ds;
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

TEST_CASE("encode examples") {
  FeatureVector v;
  CHECK(Encode(v) == Row{1, 0, 0, 0, 0, 0, 0, 0, 0});
  v.native_import = v.external_import = v.exception_handling = TriState::kAbsent;
  const auto r = Encode(v);
  CHECK(r[6] == -1);
  CHECK(r[7] == -1);
  CHECK(r[8] == -1);
  FeatureVector hello{1, true, true, true, true, true};
  CHECK(Encode(hello) == Row{1, 1, 1, 1, 1, 1, 0, 0, 0});
}

TEST_CASE("encode is injective and decode inverts it") {
  std::set<Row> seen;
  for (int loc : {1, 2, 7}) {
    for (int bits = 0; bits < 32; ++bits) {
      for (int t = 0; t < 27; ++t) {
        FeatureVector v;
        v.loc = loc;
        v.has_method = bits & 1;
        v.has_main = bits & 2;
        v.has_class = bits & 4;
        v.parsable = bits & 8;
        v.compilable = bits & 16;
        v.native_import = static_cast<TriState>(t % 3 - 1);
        v.external_import = static_cast<TriState>(t / 3 % 3 - 1);
        v.exception_handling = static_cast<TriState>(t / 9 - 1);
        const auto r = Encode(v);
        CHECK(seen.insert(r).second);
        CHECK(Decode(r) == v);
      }
    }
  }
  CHECK_THROWS_AS(Decode(Row{1, 0.5, 0, 0, 0, 0, 0, 0, 0}), Error);
  CHECK(SnapToLegal(Row{0.2, 0.6, 0.4, 0, 0, 0, -0.7, 0.2, 0.5}) ==
        Row{1, 1, 0, 0, 0, 0, -1, 0, 1});
}

TEST_CASE("SMOTE equalizes 270 vs 87") {
  const auto ds = SynthCorpus(270, 87, 4);
  const auto out = Smote(ds, {.k = 5, .seed = 9});
  CHECK(out.Count(Label::kReproducible) == 270);
  CHECK(out.Count(Label::kIrreproducible) == 270);
  CHECK(out.CountOrigin(Origin::kSynthetic) == 183);
}

TEST_CASE("SMOTE preserves originals and reconstructs geometrically") {
  Rng rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    const auto n_min = 2 + rng.Below(20);
    const auto n_maj = n_min + rng.Below(40);
    const bool flip = rng.Bernoulli(0.5);
    const auto ds = flip ? testutil::RandomDataset(rng, n_min, n_maj)
                         : testutil::RandomDataset(rng, n_maj, n_min);
    const Label minority = flip ? Label::kReproducible : Label::kIrreproducible;
    const int k = 1 + static_cast<int>(rng.Below(7));
    const auto res = SmoteWithTrace(ds, {.k = k, .seed = rng.NextU64()});
    REQUIRE(res.data.size() >= ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(res.data.examples[i] == ds.examples[i]);
    CHECK(res.data.Count(minority) == n_maj);
    CHECK(res.k_used == std::min<int>(k, static_cast<int>(n_min) - 1));
    const auto nbrs = SmoteNeighbours(ds, minority, res.k_used);
    std::vector<std::size_t> ordinal(ds.size(), 0);
    for (std::size_t i = 0, m = 0; i < ds.size(); ++i) {
      if (ds.examples[i].label == minority) ordinal[i] = m++;
    }
    REQUIRE(res.samples.size() == res.data.size() - ds.size());
    for (std::size_t s = 0; s < res.samples.size(); ++s) {
      const auto& smp = res.samples[s];
      const auto& syn = res.data.examples[ds.size() + s];
      CHECK(syn.origin == Origin::kSynthetic);
      CHECK(syn.label == minority);
      CHECK_FALSE(syn.source_id.has_value());
      CHECK(ds.examples[smp.base].label == minority);
      CHECK(smp.delta >= 0.0);
      CHECK(smp.delta <= 1.0);
      const auto& nb = nbrs[ordinal[smp.base]];
      CHECK(std::find(nb.begin(), nb.end(), smp.neighbor) != nb.end());
      const auto& x = ds.examples[smp.base].features;
      const auto& y = ds.examples[smp.neighbor].features;
      for (std::size_t j = 0; j < kFeatureCount; ++j) {
        CHECK(std::abs(x[j] + smp.delta * (y[j] - x[j]) - syn.features[j]) < 1e-9);
      }
    }
  }
}

TEST_CASE("SMOTE edge cases") {
  Rng rng(1);
  const auto balanced = testutil::RandomDataset(rng, 10, 10);
  CHECK(Smote(balanced, {.k = 5, .seed = 1}) == balanced);

  Dataset same;
  Row p{3, 1, 0, 1, 1, 0, -1, 0, 1};
  for (int i = 0; i < 4; ++i) same.examples.push_back(Ex(p, Label::kIrreproducible));
  for (int i = 0; i < 9; ++i) same.examples.push_back(Ex(testutil::RandomRow(rng, true), Label::kReproducible));
  const auto out = Smote(same, {.k = 5, .seed = 2});
  for (const auto& e : out.examples) {
    if (e.origin == Origin::kSynthetic) CHECK(e.features == p);
  }

  Dataset one = testutil::RandomDataset(rng, 5, 0);
  CHECK(CodeOf([&] { Smote(one, {}); }) == ErrorCode::kSingleClass);
  Dataset lone = testutil::RandomDataset(rng, 5, 1);
  CHECK(CodeOf([&] { Smote(lone, {}); }) == ErrorCode::kTooFewMinority);
}

TEST_CASE("SMOTE is deterministic and rounding yields legal rows") {
  const auto ds = SynthCorpus(60, 20, 5);
  CHECK(Smote(ds, {.k = 5, .seed = 3}) == Smote(ds, {.k = 5, .seed = 3}));
  CHECK_FALSE(Smote(ds, {.k = 5, .seed = 3}) == Smote(ds, {.k = 5, .seed = 4}));
  const auto rounded = Smote(ds, {.k = 5, .seed = 3, .round = true});
  for (const auto& e : rounded.examples) CHECK(SnapToLegal(e.features) == e.features);
}

TEST_CASE("folds partition real rows over many random datasets") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(rng.Below(9));
    const auto a = k + rng.Below(40);
    const auto b = k + rng.Below(40);
    auto ds = testutil::RandomDataset(rng, a, b);
    if (trial % 2 == 0) ds = Smote(ds, {.k = 3, .seed = rng.NextU64()});
    const auto folds = StratifiedKFold(ds, k, rng.NextU64());
    REQUIRE(folds.size() == static_cast<std::size_t>(k));
    std::vector<int> hits(ds.size(), 0);
    for (const auto& f : folds) {
      for (auto i : f.test) {
        ++hits[i];
        CHECK(ds.examples[i].origin == Origin::kReal);
      }
      std::vector<std::size_t> all = f.train;
      all.insert(all.end(), f.test.begin(), f.test.end());
      std::sort(all.begin(), all.end());
      CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
      CHECK(all.size() == ds.size());
      CHECK(std::is_sorted(f.train.begin(), f.train.end()));
      CHECK(std::is_sorted(f.test.begin(), f.test.end()));
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
      CHECK(hits[i] == (ds.examples[i].origin == Origin::kReal ? 1 : 0));
    }
  }
}

TEST_CASE("fold stratification") {
  const auto ds = SynthCorpus(270, 87, 1);
  const auto folds = StratifiedKFold(ds, 10, 7);
  std::size_t total = 0;
  for (const auto& f : folds) {
    CHECK(f.test.size() >= 35);
    CHECK(f.test.size() <= 36);
    std::size_t pos = 0;
    for (auto i : f.test) pos += ds.examples[i].label == Label::kReproducible;
    const double expected = 270.0 / 357.0 * static_cast<double>(f.test.size());
    CHECK(std::abs(static_cast<double>(pos) - expected) <= 1.0 + 1e-9);
    total += f.test.size();
  }
  CHECK(total == 357);

  Rng rng(3);
  const auto even = testutil::RandomDataset(rng, 10, 10);
  for (const auto& f : StratifiedKFold(even, 10, 0)) {
    REQUIRE(f.test.size() == 2);
    CHECK(even.examples[f.test[0]].label != even.examples[f.test[1]].label);
  }
  CHECK(CodeOf([&] { StratifiedKFold(even, 1, 0); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([&] { StratifiedKFold(even, 11, 0); }) == ErrorCode::kInvalidArgument);
  CHECK(StratifiedKFold(ds, 10, 7).front().test == folds.front().test);
}

TEST_CASE("nearest-rank LOC bins") {
  CHECK(NearestRankPercentile({1, 2, 3, 4}, 25) == 1);
  CHECK(NearestRankPercentile({1, 2, 3, 4}, 75) == 3);
  const auto a = LocBins(WithLoc({1, 2, 3, 4}));
  CHECK(a.bins == std::vector<LocBin>{LocBin::kMedium, LocBin::kMedium, LocBin::kMedium, LocBin::kLong});
  const auto b = LocBins(WithLoc({10, 20, 30, 40, 50, 60, 70, 80}));
  CHECK(b.p25 == 20);
  CHECK(b.p75 == 60);
  CHECK(std::count(b.bins.begin(), b.bins.end(), LocBin::kShort) == 1);
  CHECK(std::count(b.bins.begin(), b.bins.end(), LocBin::kLong) == 2);
  const auto c = LocBins(WithLoc({5, 5, 5}));
  CHECK(std::all_of(c.bins.begin(), c.bins.end(), [](LocBin x) { return x == LocBin::kMedium; }));
}

TEST_CASE("synthetic corpus") {
  const auto a = SynthCorpus(270, 87, 11);
  CHECK(a.size() == 357);
  CHECK(a.Count(Label::kReproducible) == 270);
  CHECK(a.Count(Label::kIrreproducible) == 87);
  std::ostringstream x, y;
  WriteCsv(a, x);
  WriteCsv(SynthCorpus(270, 87, 11), y);
  CHECK(x.str() == y.str());
  for (const auto& e : a.examples) {
    CHECK(e.origin == Origin::kReal);
    if (e.features[5] == 1) CHECK(e.features[4] == 1);
    CHECK(SnapToLegal(e.features) == e.features);
  }
  const auto big = SynthCorpus(10000, 10000, 2);
  double main_repro = 0, comp_irrepro = 0;
  for (const auto& e : big.examples) {
    if (e.label == Label::kReproducible) main_repro += e.features[2];
    else comp_irrepro += e.features[5];
  }
  CHECK(std::abs(main_repro / 10000 - 0.55) <= 0.02);
  CHECK(std::abs(comp_irrepro / 10000 - 0.011) <= 0.01);
}

TEST_CASE("CSV and JSONL round trips are lossless") {
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    auto ds = testutil::RandomDataset(rng, 3 + rng.Below(20), 3 + rng.Below(20));
    if (trial % 3 == 0) ds = Smote(ds, {.k = 3, .seed = rng.NextU64()});
    if (trial % 4 == 1) {
      for (auto& e : ds.examples) e.source_id.reset();
    }
    std::stringstream csv, jsonl;
    WriteCsv(ds, csv);
    CHECK(ReadCsv(csv) == ds);
    WriteJsonl(ds, jsonl);
    CHECK(ReadJsonl(jsonl) == ds);
  }
  const auto dir = std::filesystem::temp_directory_path();
  const auto ds = SynthCorpus(20, 10, 1);
  Save(ds, dir / "repro-test-ds.csv");
  Save(ds, dir / "repro-test-ds.jsonl");
  CHECK(Load(dir / "repro-test-ds.csv") == ds);
  CHECK(Load(dir / "repro-test-ds.jsonl") == ds);
  CHECK(ds.Fingerprint() == Load(dir / "repro-test-ds.csv").Fingerprint());
  std::filesystem::remove(dir / "repro-test-ds.csv");
  std::filesystem::remove(dir / "repro-test-ds.jsonl");
}

TEST_CASE("CSV header and parse errors") {
  Dataset ds;
  ds.examples.push_back(Ex(Row{2, 1, 0, 0, 1, 0, -1, 0, 1}, Label::kIrreproducible));
  std::ostringstream out;
  WriteCsv(ds, out);
  CHECK(out.str().rfind(
            "loc,has_method,has_main,has_class,parsable,compilable,native_import,external_import,"
            "exception_handling,label,origin\n",
            0) == 0);
  std::istringstream bad("loc,has_method\n1,2\n");
  CHECK(CodeOf([&] { ReadCsv(bad); }) == ErrorCode::kParse);
  std::istringstream bad_label(
      "loc,has_method,has_main,has_class,parsable,compilable,native_import,external_import,"
      "exception_handling,label,origin\n1,0,0,0,0,0,0,0,0,maybe,real\n");
  CHECK(CodeOf([&] { ReadCsv(bad_label); }) == ErrorCode::kParse);
  CHECK(CodeOf([&] { Load("/nonexistent/ds.csv"); }) == ErrorCode::kIo);
}
