#include "repro/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "repro/error.hpp"
#include "repro/hash.hpp"
#include "repro/rng.hpp"

namespace repro {

std::string_view ToString(Label label) {
  return label == Label::kReproducible ? "reproducible" : "irreproducible";
}

std::string_view ToString(Origin origin) {
  return origin == Origin::kReal ? "real" : "synthetic";
}

Label ParseLabel(std::string_view text) {
  if (text == "reproducible") return Label::kReproducible;
  if (text == "irreproducible") return Label::kIrreproducible;
  Fail(ErrorCode::kParse, "unknown label: " + std::string(text));
}

Origin ParseOrigin(std::string_view text) {
  if (text == "real") return Origin::kReal;
  if (text == "synthetic") return Origin::kSynthetic;
  Fail(ErrorCode::kParse, "unknown origin: " + std::string(text));
}

std::size_t Dataset::Count(Label label) const {
  return static_cast<std::size_t>(std::count_if(
      examples.begin(), examples.end(), [&](const auto& e) { return e.label == label; }));
}

std::size_t Dataset::CountOrigin(Origin origin) const {
  return static_cast<std::size_t>(std::count_if(
      examples.begin(), examples.end(), [&](const auto& e) { return e.origin == origin; }));
}

Dataset Dataset::Subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.schema_version = schema_version;
  out.examples.reserve(indices.size());
  for (auto i : indices) out.examples.push_back(examples.at(i));
  return out;
}

std::string Dataset::Fingerprint() const {
  std::ostringstream out;
  dataset::WriteCsv(*this, out);
  return Fnv1aHex(out.str());
}

namespace dataset {

namespace {

void Validate(const LabeledExample& e, std::size_t line) {
  for (double v : e.features) {
    if (!std::isfinite(v)) {
      Fail(ErrorCode::kParse, "line " + std::to_string(line) + ": non-finite feature value");
    }
  }
  if (e.origin == Origin::kSynthetic && e.source_id) {
    Fail(ErrorCode::kParse, "line " + std::to_string(line) + ": synthetic row with source_id");
  }
}

double ParseDouble(std::string_view s, std::size_t line) {
  double v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) {
    Fail(ErrorCode::kParse, "line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> SplitComma(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

bool HasSuffix(const std::filesystem::path& p, std::string_view ext) {
  return p.extension().string() == ext;
}

}  // namespace

std::string FormatNumber(double value) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, p);
}

std::vector<std::vector<std::size_t>> SmoteNeighbours(const Dataset& ds, Label minority, int k) {
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.examples[i].label == minority) members.push_back(i);
  }
  double lo = 0;
  double hi = 0;
  if (!members.empty()) {
    lo = hi = ds.examples[members[0]].features[0];
    for (auto i : members) {
      lo = std::min(lo, ds.examples[i].features[0]);
      hi = std::max(hi, ds.examples[i].features[0]);
    }
  }
  const double span = hi - lo;
  auto scaled = [&](std::size_t i) {
    Row r = ds.examples[i].features;
    r[0] = span > 0 ? (r[0] - lo) / span : 0.0;
    return r;
  };
  std::vector<Row> pts;
  pts.reserve(members.size());
  for (auto i : members) pts.push_back(scaled(i));

  std::vector<std::vector<std::size_t>> out(members.size());
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t a = 0; a < members.size(); ++a) {
    dist.clear();
    for (std::size_t b = 0; b < members.size(); ++b) {
      if (a == b) continue;
      double d = 0;
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const double diff = pts[a][f] - pts[b][f];
        d += diff * diff;
      }
      dist.emplace_back(d, members[b]);
    }
    std::sort(dist.begin(), dist.end());
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), dist.size());
    for (std::size_t j = 0; j < take; ++j) out[a].push_back(dist[j].second);
  }
  return out;
}

SmoteResult SmoteWithTrace(const Dataset& ds, const SmoteOptions& options) {
  if (options.k < 1) Fail(ErrorCode::kInvalidArgument, "smote k must be >= 1");
  const std::size_t n_repro = ds.Count(Label::kReproducible);
  const std::size_t n_irrepro = ds.Count(Label::kIrreproducible);
  if (n_repro == 0 || n_irrepro == 0) {
    Fail(ErrorCode::kSingleClass, "smote needs both classes");
  }
  SmoteResult result;
  result.data = ds;
  if (n_repro == n_irrepro) return result;
  const Label minority = n_repro < n_irrepro ? Label::kReproducible : Label::kIrreproducible;
  const std::size_t n_min = std::min(n_repro, n_irrepro);
  const std::size_t n_maj = std::max(n_repro, n_irrepro);
  if (n_min < 2) Fail(ErrorCode::kTooFewMinority, "minority class has a single example");

  const int k = std::min<int>(options.k, static_cast<int>(n_min) - 1);
  result.k_used = k;
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.examples[i].label == minority) members.push_back(i);
  }
  const auto neighbours = SmoteNeighbours(ds, minority, k);

  Rng rng(options.seed);
  const std::size_t need = n_maj - n_min;
  result.data.examples.reserve(ds.size() + need);
  result.samples.reserve(need);
  for (std::size_t s = 0; s < need; ++s) {
    const std::size_t a = rng.Below(members.size());
    const std::size_t nb = neighbours[a][rng.Below(neighbours[a].size())];
    const double delta = rng.UniformClosed();
    const Row& x = ds.examples[members[a]].features;
    const Row& y = ds.examples[nb].features;
    LabeledExample e;
    for (std::size_t f = 0; f < kFeatureCount; ++f) e.features[f] = x[f] + delta * (y[f] - x[f]);
    if (options.round) e.features = SnapToLegal(e.features);
    e.label = minority;
    e.origin = Origin::kSynthetic;
    result.data.examples.push_back(e);
    result.samples.push_back({members[a], nb, delta});
  }
  return result;
}

Dataset Smote(const Dataset& ds, const SmoteOptions& options) {
  return SmoteWithTrace(ds, options).data;
}

std::vector<Fold> StratifiedKFold(const Dataset& ds, int k, std::uint64_t seed) {
  if (k < 2) Fail(ErrorCode::kInvalidArgument, "fold count must be >= 2");
  const auto folds_n = static_cast<std::size_t>(k);
  std::vector<std::size_t> by_class[2];
  std::vector<std::size_t> synthetic;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& e = ds.examples[i];
    if (e.origin == Origin::kSynthetic) {
      synthetic.push_back(i);
    } else {
      by_class[e.label == Label::kReproducible ? 0 : 1].push_back(i);
    }
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < folds_n) {
      Fail(ErrorCode::kInvalidArgument,
           std::string(ToString(static_cast<Label>(c))) + " class has " +
               std::to_string(by_class[c].size()) + " real examples, fewer than k=" +
               std::to_string(k));
    }
  }
  Rng rng(seed);
  std::vector<std::size_t> fold_of(ds.size(), folds_n);
  std::size_t offset = 0;
  for (auto& members : by_class) {
    rng.Shuffle(members.begin(), members.end());
    for (std::size_t j = 0; j < members.size(); ++j) {
      fold_of[members[j]] = (offset + j) % folds_n;
    }
    offset = (offset + members.size()) % folds_n;
  }
  std::vector<Fold> folds(folds_n);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t f = 0; f < folds_n; ++f) {
      (fold_of[i] == f ? folds[f].test : folds[f].train).push_back(i);
    }
  }
  return folds;
}

std::string_view ToString(LocBin bin) {
  switch (bin) {
    case LocBin::kShort:
      return "short";
    case LocBin::kMedium:
      return "medium";
    case LocBin::kLong:
      return "long";
  }
  return "medium";
}

double NearestRankPercentile(std::vector<double> values, double p) {
  if (values.empty()) Fail(ErrorCode::kInvalidArgument, "percentile of empty set");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

LocBinning LocBins(const Dataset& ds) {
  if (ds.empty()) Fail(ErrorCode::kInvalidArgument, "loc bins of empty dataset");
  std::vector<double> locs;
  locs.reserve(ds.size());
  for (const auto& e : ds.examples) locs.push_back(e.features[0]);
  LocBinning out;
  out.p25 = NearestRankPercentile(locs, 25);
  out.p75 = NearestRankPercentile(locs, 75);
  for (double v : locs) {
    out.bins.push_back(v < out.p25 ? LocBin::kShort : v > out.p75 ? LocBin::kLong : LocBin::kMedium);
  }
  return out;
}

namespace {

// One structural archetype inside a class. Probabilities are marginal within
// the profile; main implies method, compilable implies parsable.
struct Profile {
  double weight;
  double method;
  double main;
  double cls;
  double parsable;
  double compilable;
  double short_share;  // share of rows in the 1-2 LOC band
  double loc_median;
  double loc_mean;
};

struct ClassModel {
  Profile profiles[3];
  double native[2];     // P(+1), P(-1)
  double external[2];
  double exception[2];
};

// Complete programs, parsable fragments, unparsable fragments.
constexpr ClassModel kRepro = {
    {{0.311, 1, 1, 1, 1, 1, 0, 19, 26},
     {0.196, 1, 1, 1, 1, 0, 0, 19, 26},
     {0.493, 0.33, 0.087, 0.067, 0, 0, 0.059 / 0.493, 19, 40}},
    {82.0 / 270, 80.0 / 270},
    {0.15, 0.20},
    {0.25, 0.10}};

constexpr ClassModel kIrrepro = {
    {{0.011, 1, 1, 1, 1, 1, 0, 19, 26},
     {0.368, 1, 0, 1, 1, 0, 0, 19, 26},
     {0.621, 0.33, 0.32, 0.018, 0, 0, 0.138 / 0.621, 19, 73}},
    {16.0 / 87, 30.0 / 87},
    {0.10, 0.45},
    {0.25, 0.10}};

double DrawTri(Rng& rng, const double (&p)[2]) {
  const double u = rng.Uniform();
  if (u < p[0]) return 1;
  if (u < p[0] + p[1]) return -1;
  return 0;
}

double DrawLoc(Rng& rng, const Profile& pr) {
  if (rng.Uniform() < pr.short_share) return 1.0 + static_cast<double>(rng.Below(2));
  // Lognormal body, its mean matched to the profile mean net of the short band.
  const double body_mean = (pr.loc_mean - pr.short_share * 1.5) / (1 - pr.short_share);
  const double sigma = std::sqrt(2 * std::log(body_mean / pr.loc_median));
  const double v = std::exp(std::log(pr.loc_median) + sigma * rng.Normal());
  return std::max(3.0, std::round(v));
}

LabeledExample Draw(Rng& rng, const ClassModel& model, Label label) {
  const double u = rng.Uniform();
  const Profile* pr = &model.profiles[2];
  double acc = 0;
  for (const auto& p : model.profiles) {
    acc += p.weight;
    if (u < acc) {
      pr = &p;
      break;
    }
  }
  LabeledExample e;
  e.label = label;
  Row& r = e.features;
  const bool main = rng.Bernoulli(pr->main);
  const double method_given_no_main = pr->main < 1 ? (pr->method - pr->main) / (1 - pr->main) : 1;
  const bool method = main || rng.Bernoulli(method_given_no_main);
  const bool cls = rng.Bernoulli(pr->cls);
  const bool parsable = rng.Bernoulli(pr->parsable);
  const bool compilable = parsable && rng.Bernoulli(pr->parsable > 0 ? pr->compilable / pr->parsable : 0);
  r[0] = DrawLoc(rng, *pr);
  r[1] = method;
  r[2] = main;
  r[3] = cls;
  r[4] = parsable;
  r[5] = compilable;
  r[6] = DrawTri(rng, model.native);
  r[7] = DrawTri(rng, model.external);
  r[8] = DrawTri(rng, model.exception);
  return e;
}

}  // namespace

Dataset SynthCorpus(std::size_t n_repro, std::size_t n_irrepro, std::uint64_t seed) {
  if (n_repro < 1 || n_irrepro < 1) {
    Fail(ErrorCode::kInvalidArgument, "synth corpus needs at least one example per class");
  }
  Rng rng(seed);
  Dataset ds;
  ds.examples.reserve(n_repro + n_irrepro);
  for (std::size_t i = 0; i < n_repro; ++i) {
    ds.examples.push_back(Draw(rng, kRepro, Label::kReproducible));
  }
  for (std::size_t i = 0; i < n_irrepro; ++i) {
    ds.examples.push_back(Draw(rng, kIrrepro, Label::kIrreproducible));
  }
  return ds;
}

void WriteCsv(const Dataset& ds, std::ostream& out) {
  const bool with_ids = std::any_of(ds.examples.begin(), ds.examples.end(),
                                    [](const auto& e) { return e.source_id.has_value(); });
  for (auto name : kFeatureNames) out << name << ',';
  out << "label,origin";
  if (with_ids) out << ",source_id";
  out << '\n';
  for (const auto& e : ds.examples) {
    for (double v : e.features) out << FormatNumber(v) << ',';
    out << ToString(e.label) << ',' << ToString(e.origin);
    if (with_ids) {
      out << ',';
      if (e.source_id) out << *e.source_id;
    }
    out << '\n';
  }
}

Dataset ReadCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorCode::kParse, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = SplitComma(line);
  std::string expected;
  for (auto name : kFeatureNames) expected += std::string(name) + ",";
  expected += "label,origin";
  const bool with_ids = line == expected + ",source_id";
  if (line != expected && !with_ids) {
    Fail(ErrorCode::kParse, "unexpected CSV header: " + line);
  }
  const std::size_t columns = header.size();
  Dataset ds;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = SplitComma(line);
    if (cells.size() != columns) {
      Fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(columns) + " columns");
    }
    LabeledExample e;
    for (std::size_t f = 0; f < kFeatureCount; ++f) e.features[f] = ParseDouble(cells[f], line_no);
    e.label = ParseLabel(cells[kFeatureCount]);
    e.origin = ParseOrigin(cells[kFeatureCount + 1]);
    if (with_ids && !cells[kFeatureCount + 2].empty()) {
      std::int64_t id = 0;
      const auto cell = cells[kFeatureCount + 2];
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), id);
      if (ec != std::errc() || p != cell.data() + cell.size()) {
        Fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": bad source_id");
      }
      e.source_id = id;
    }
    Validate(e, line_no);
    ds.examples.push_back(e);
  }
  if (in.bad()) Fail(ErrorCode::kIo, "read error");
  return ds;
}

void WriteJsonl(const Dataset& ds, std::ostream& out) {
  for (const auto& e : ds.examples) {
    nlohmann::json j;
    j["features"] = e.features;
    j["label"] = ToString(e.label);
    j["origin"] = ToString(e.origin);
    if (e.source_id) j["source_id"] = *e.source_id;
    out << j.dump() << '\n';
  }
}

Dataset ReadJsonl(std::istream& in) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      LabeledExample e;
      const auto& f = j.at("features");
      if (!f.is_array() || f.size() != kFeatureCount) {
        Fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": features must have 9 values");
      }
      for (std::size_t i = 0; i < kFeatureCount; ++i) e.features[i] = f[i].get<double>();
      e.label = ParseLabel(j.at("label").get<std::string>());
      e.origin = ParseOrigin(j.value("origin", std::string("real")));
      if (j.contains("source_id") && !j["source_id"].is_null()) {
        e.source_id = j["source_id"].get<std::int64_t>();
      }
      Validate(e, line_no);
      ds.examples.push_back(e);
    } catch (const nlohmann::json::exception& ex) {
      Fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  if (in.bad()) Fail(ErrorCode::kIo, "read error");
  return ds;
}

void Save(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  if (HasSuffix(path, ".jsonl") || HasSuffix(path, ".json")) {
    WriteJsonl(ds, out);
  } else {
    WriteCsv(ds, out);
  }
  if (!out) Fail(ErrorCode::kIo, "write failed: " + path.string());
}

Dataset Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  if (HasSuffix(path, ".jsonl") || HasSuffix(path, ".json")) return ReadJsonl(in);
  return ReadCsv(in);
}

}  // namespace dataset
}  // namespace repro
