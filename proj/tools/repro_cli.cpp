#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli_support.hpp"
#include "repro/repro.h"

using nlohmann::json;
using cli::Check;
using cli::DomainError;
using cli::Take;

namespace {

struct DatasetPtr {
  repro_dataset* p = nullptr;
  ~DatasetPtr() { repro_dataset_free(p); }
};
struct BundlePtr {
  repro_bundle* p = nullptr;
  ~BundlePtr() { repro_bundle_free(p); }
};
struct ServicePtr {
  repro_service* p = nullptr;
  ~ServicePtr() { repro_service_free(p); }
};

struct Globals {
  bool json = false;
  std::string provenance;
};

struct AnalyzerOpts {
  std::optional<std::string> javac;
  std::optional<long long> timeout_ms;
  std::optional<std::string> jdk_index;
  std::optional<std::string> scratch_dir;

  void Register(CLI::App* cmd) {
    cmd->add_option("--javac", javac,
                    "Compiler command; 'none' disables compilation (default: $REPRO_JAVAC or javac)");
    cmd->add_option("--timeout-ms", timeout_ms, "Compiler timeout in milliseconds");
    cmd->add_option("--jdk-index", jdk_index, "JDK class index JSON (default: built-in)");
    cmd->add_option("--scratch-dir", scratch_dir, "Directory for compiler scratch files");
  }

  json ToJson() const {
    json j = json::object();
    if (javac) j["compiler"] = *javac;
    if (timeout_ms) j["timeout_ms"] = *timeout_ms;
    if (jdk_index) j["jdk_index"] = *jdk_index;
    if (scratch_dir) j["scratch_dir"] = *scratch_dir;
    return j;
  }

  // What the run actually used, for provenance.
  json Resolved() const {
    json j = ToJson();
    if (!javac) {
      const char* env = std::getenv("REPRO_JAVAC");
      j["compiler"] = env && *env ? env : "javac";
    }
    return j;
  }
};

std::string Fnv1aHex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError{REPRO_E_IO, "cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError{REPRO_E_IO, "cannot write " + path};
  out << content;
  out.close();
  if (!out) throw DomainError{REPRO_E_IO, "write failed: " + path};
}

json ParseJson(const std::string& text) { return json::parse(text); }

json DatasetInfo(const repro_dataset* ds) {
  char* s = nullptr;
  Check(repro_dataset_info(ds, &s));
  return ParseJson(Take(s));
}

json BundleInfo(const repro_bundle* b) {
  char* s = nullptr;
  Check(repro_bundle_info(b, &s));
  return ParseJson(Take(s));
}

json FileInput(const std::string& path) {
  return {{"path", path}, {"fnv1a", Fnv1aHex(ReadFile(path))}};
}

class Provenance {
 public:
  Provenance(const Globals& g, std::string command) : globals_(g), command_(std::move(command)) {}

  json config = json::object();
  json inputs = json::array();
  json outputs = json::array();
  json result = json::object();

  // Next to the primary output when there is one.
  void Write(const std::string& primary_output) const {
    std::string path = globals_.provenance;
    if (path.empty()) {
      path = primary_output.empty() ? "repro-" + command_ + ".provenance.json"
                                    : primary_output + ".provenance.json";
    }
    const json doc{{"tool", "repro"},
                   {"version", repro_version()},
                   {"command", command_},
                   {"config", config},
                   {"inputs", inputs},
                   {"outputs", outputs},
                   {"result", result}};
    WriteFile(path, doc.dump(2) + "\n");
  }

 private:
  const Globals& globals_;
  std::string command_;
};

void Emit(const Globals& g, const json& j, const std::string& text) {
  if (g.json) {
    std::cout << j.dump() << "\n";
  } else {
    std::cout << text;
  }
}

std::string Str(const json& j, const char* key) {
  const auto& v = j.at(key);
  return v.is_string() ? v.get<std::string>() : v.dump();
}

// ---- subcommands ----

struct IngestCmd {
  std::string dump;
  std::string tag = "java";
  std::string out = "questions.jsonl";
  std::vector<std::string> keywords;
  bool no_filter = false;
  std::size_t buffer_size = 64 * 1024;

  int Run(const Globals& g) const {
    json opts{{"tag", tag}, {"filter", !no_filter}, {"buffer_size", buffer_size}};
    if (!keywords.empty()) opts["keywords"] = keywords;
    char* report = nullptr;
    Check(repro_ingest_dump(dump.c_str(), out.c_str(), opts.dump().c_str(), &report));
    const json r = ParseJson(Take(report));
    Provenance p(g, "ingest");
    p.config = opts;
    p.config["keywords"] = r.at("keywords");
    p.inputs.push_back(FileInput(dump));
    p.outputs.push_back(FileInput(out));
    p.result = r;
    p.Write(out);
    Emit(g, r,
         "retained " + Str(r, "retained") + " of " + Str(r, "tagged_questions") +
             " questions tagged '" + tag + "' (" + Str(r, "rows_seen") + " rows, " +
             Str(r, "warnings") + " warnings) -> " + out + "\n");
    return 0;
  }
};

struct FeaturesCmd {
  std::string questions;
  std::string out = "features.csv";
  bool combine = false;
  int jobs = 1;
  AnalyzerOpts analyzer;

  int Run(const Globals& g) const {
    json opts = analyzer.ToJson();
    opts["combine"] = combine;
    opts["jobs"] = jobs;
    DatasetPtr ds;
    char* report = nullptr;
    Check(repro_features_from_questions(questions.c_str(), opts.dump().c_str(), &ds.p, &report));
    const json r = ParseJson(Take(report));
    Check(repro_dataset_save(ds.p, out.c_str()));
    Provenance p(g, "features");
    p.config = analyzer.Resolved();
    p.config["combine"] = combine;
    p.config["jobs"] = jobs;
    p.inputs.push_back(FileInput(questions));
    p.outputs.push_back({{"path", out}, {"dataset", DatasetInfo(ds.p)}});
    p.result = r;
    p.Write(out);
    Emit(g, r,
         "analysed " + Str(r, "analysed") + " snippets from " + Str(r, "questions") +
             " questions; wrote " + Str(r, "rows") + " labeled rows to " + out + " (" +
             Str(r, "skipped_unlabeled") + " unlabeled, compiler unavailable for " +
             Str(r, "compile_unavailable") + ")\n");
    return 0;
  }
};

struct SynthCmd {
  std::size_t repro = 270;
  std::size_t irrepro = 87;
  std::uint64_t seed = 0;
  std::string out = "synth.csv";

  int Run(const Globals& g) const {
    DatasetPtr ds;
    Check(repro_dataset_synth(repro, irrepro, seed, &ds.p));
    Check(repro_dataset_save(ds.p, out.c_str()));
    const json info = DatasetInfo(ds.p);
    Provenance p(g, "synth");
    p.config = {{"reproducible", repro}, {"irreproducible", irrepro}, {"seed", seed}};
    p.outputs.push_back({{"path", out}, {"dataset", info}});
    p.result = info;
    p.Write(out);
    Emit(g, info,
         "wrote " + Str(info, "rows") + " rows (" + Str(info, "reproducible") + " reproducible, " +
             Str(info, "irreproducible") + " irreproducible) to " + out + "\n");
    return 0;
  }
};

json SpecFor(const std::string& family, std::uint64_t seed, const std::string& params) {
  json spec{{"family", family}, {"seed", seed}};
  if (!params.empty()) {
    json p;
    try {
      p = json::parse(params);
    } catch (const json::exception& e) {
      throw DomainError{REPRO_E_INVALID_ARGUMENT, std::string("--params: ") + e.what()};
    }
    spec["params"] = p;
  }
  return spec;
}

struct TrainCmd {
  std::string data;
  std::string family = "rf";
  std::uint64_t seed = 0;
  std::string params;
  std::string out = "model.bundle";
  std::size_t background = 100;
  std::uint64_t background_seed = 0;
  bool no_smote = false;
  int smote_k = 5;
  bool smote_round = false;

  int Run(const Globals& g) const {
    DatasetPtr ds;
    Check(repro_dataset_load(data.c_str(), &ds.p));
    const json spec = SpecFor(family, seed, params);
    const json opts{{"background_size", background},
                    {"background_seed", background_seed},
                    {"smote", !no_smote},
                    {"smote_k", smote_k},
                    {"smote_round", smote_round}};
    BundlePtr b;
    Check(repro_bundle_train(ds.p, spec.dump().c_str(), opts.dump().c_str(), &b.p));
    Check(repro_bundle_save(b.p, out.c_str()));
    const json info = BundleInfo(b.p);
    Provenance p(g, "train");
    p.config = {{"spec", info.at("spec")}, {"bundle", opts}};
    p.inputs.push_back({{"path", data}, {"dataset", DatasetInfo(ds.p)}});
    p.outputs.push_back({{"path", out}, {"model_fingerprint", info.at("model_fingerprint")}});
    p.result = info;
    p.Write(out);
    Emit(g, info,
         "trained " + Str(info, "display_name") + " on " + Str(info, "train_rows") + " rows (" +
             Str(info, "train_synthetic") + " synthetic); bundle " + out + " fingerprint " +
             Str(info, "model_fingerprint") + "\n");
    return 0;
  }
};

struct EvaluateCmd {
  std::string data;
  std::string family = "all";
  int k = 10;
  std::uint64_t seed = 0;
  bool global_smote = false;
  int smote_k = 5;
  bool smote_round = false;
  int jobs = 1;
  std::string params;
  std::size_t synth_repro = 270;
  std::size_t synth_irrepro = 87;
  std::string format = "table";
  std::string out;

  int Run(const Globals& g) const {
    DatasetPtr ds;
    json input;
    if (data.empty()) {
      Check(repro_dataset_synth(synth_repro, synth_irrepro, seed, &ds.p));
      input = {{"synth", {{"reproducible", synth_repro}, {"irreproducible", synth_irrepro},
                          {"seed", seed}}}};
    } else {
      Check(repro_dataset_load(data.c_str(), &ds.p));
      input = {{"path", data}};
    }
    input["dataset"] = DatasetInfo(ds.p);

    std::vector<std::string> families;
    if (family == "all") {
      families = {"rf", "gbt", "mlp", "nb", "knn"};
    } else {
      families = {family};
    }
    const json cv{{"k", k},
                  {"seed", seed},
                  {"smote_mode", global_smote ? "global" : "in_fold"},
                  {"smote_k", smote_k},
                  {"smote_round", smote_round},
                  {"jobs", jobs}};
    json results = json::array();
    json entries = json::array();
    for (const auto& f : families) {
      const json spec = SpecFor(f, seed, families.size() == 1 ? params : "");
      char* m = nullptr;
      Check(repro_evaluate(ds.p, spec.dump().c_str(), cv.dump().c_str(), &m));
      json r = ParseJson(Take(m));
      entries.push_back({{"name", f}, {"metrics", r.at("metrics")}});
      results.push_back(std::move(r));
    }
    std::string text;
    if (g.json) {
      text = results.dump() + "\n";
    } else {
      char* t = nullptr;
      Check(repro_format_metrics(entries.dump().c_str(), format.c_str(), &t));
      text = Take(t);
    }
    if (!out.empty()) {
      WriteFile(out, text);
    } else {
      std::cout << text;
    }
    Provenance p(g, "evaluate");
    json cv_record = cv;
    cv_record.erase("jobs");  // does not affect results
    p.config = {{"families", families}, {"cv", cv_record}, {"global_smote", global_smote}};
    if (!params.empty()) p.config["params"] = params;
    p.inputs.push_back(input);
    if (!out.empty()) p.outputs.push_back({{"path", out}, {"fnv1a", Fnv1aHex(text)}});
    p.result = results;
    p.Write(out);
    return 0;
  }
};

struct ExplainCmd {
  std::string bundle;
  std::string data;
  std::string instance;
  std::string kind = "beeswarm";
  std::string out;

  int Run(const Globals& g) const {
    BundlePtr b;
    Check(repro_bundle_load(bundle.c_str(), &b.p));
    DatasetPtr ds;
    if (!data.empty()) Check(repro_dataset_load(data.c_str(), &ds.p));
    long long index = -1;
    std::string inst = instance.empty() ? (kind == "beeswarm" ? "all" : "0") : instance;
    if (inst != "all") {
      try {
        std::size_t used = 0;
        index = std::stoll(inst, &used);
        if (used != inst.size() || index < 0) throw std::invalid_argument(inst);
      } catch (const std::exception&) {
        throw DomainError{REPRO_E_INVALID_ARGUMENT,
                          "--instance must be a non-negative integer or 'all'"};
      }
    }
    char* pj = nullptr;
    char* pc = nullptr;
    char* ps = nullptr;
    Check(repro_explain(b.p, ds.p, index, kind.c_str(), &pj, &pc, &ps));
    const std::string js = Take(pj), csv = Take(pc), svg = Take(ps);
    Provenance p(g, "explain");
    p.config = {{"kind", kind}, {"instance", inst},
                {"rows", data.empty() ? "bundle background" : "dataset"}};
    p.inputs.push_back({{"path", bundle}, {"model_fingerprint", BundleInfo(b.p).at("model_fingerprint")}});
    if (!data.empty()) p.inputs.push_back({{"path", data}, {"dataset", DatasetInfo(ds.p)}});
    if (out.empty()) {
      std::cout << js << "\n";
    } else {
      WriteFile(out + ".json", js);
      p.outputs.push_back({{"path", out + ".json"}, {"fnv1a", Fnv1aHex(js)}});
      if (!csv.empty()) {
        WriteFile(out + ".csv", csv);
        p.outputs.push_back({{"path", out + ".csv"}, {"fnv1a", Fnv1aHex(csv)}});
      }
      if (!svg.empty()) {
        WriteFile(out + ".svg", svg);
        p.outputs.push_back({{"path", out + ".svg"}, {"fnv1a", Fnv1aHex(svg)}});
      }
      if (!g.json) {
        std::cout << "wrote " << kind << " data to " << out << ".json"
                  << (csv.empty() ? "" : ", .csv") << (svg.empty() ? "" : ", .svg") << "\n";
      } else {
        std::cout << p.outputs.dump() << "\n";
      }
    }
    p.Write(out.empty() ? "" : out + ".json");
    return 0;
  }
};

struct StatsCmd {
  std::string data;
  std::string out;

  int Run(const Globals& g) const {
    DatasetPtr ds;
    Check(repro_dataset_load(data.c_str(), &ds.p));
    char* s = nullptr;
    Check(repro_stats_report(ds.p, g.json ? "json" : "csv", &s));
    std::string text = Take(s);
    if (g.json) text += "\n";
    if (out.empty()) {
      std::cout << text;
    } else {
      WriteFile(out, text);
    }
    Provenance p(g, "stats");
    p.config = {{"alpha", 0.05}, {"yates_on_2x2", true}, {"loc_bins", "nearest-rank p25/p75"}};
    p.inputs.push_back({{"path", data}, {"dataset", DatasetInfo(ds.p)}});
    if (!out.empty()) p.outputs.push_back({{"path", out}, {"fnv1a", Fnv1aHex(text)}});
    p.Write(out);
    return 0;
  }
};

struct PredictCmd {
  std::string bundle;
  std::string snippet;
  std::string question;
  std::string question_file;
  AnalyzerOpts analyzer;

  int Run(const Globals& g) const {
    BundlePtr b;
    Check(repro_bundle_load(bundle.c_str(), &b.p));
    std::string code;
    if (snippet == "-") {
      std::ostringstream ss;
      ss << std::cin.rdbuf();
      code = ss.str();
    } else {
      code = ReadFile(snippet);
    }
    std::string q = question;
    if (!question_file.empty()) q = ReadFile(question_file);
    const json request{{"code", code}, {"question_text", q}};
    char* resp = nullptr;
    Check(repro_bundle_analyze(b.p, request.dump().c_str(), analyzer.ToJson().dump().c_str(), &resp));
    const json r = ParseJson(Take(resp));

    std::ostringstream text;
    char prob[32];
    std::snprintf(prob, sizeof(prob), "%.4f", r.at("probability_reproducible").get<double>());
    text << "predicted: " << r.at("predicted").get<std::string>() << " (p_reproducible=" << prob
         << ")\n";
    const auto& f = r.at("features");
    for (const char* name : {"loc", "has_method", "has_main", "has_class", "parsable",
                             "compilable", "native_import", "external_import",
                             "exception_handling"}) {
      std::string value = f.at(name).dump();
      if (f.at(name).is_number_integer() && f.at(name).get<int>() > 0 &&
          std::string(name) != "loc") {
        value = "+" + value;
      }
      char line[64];
      std::snprintf(line, sizeof(line), "  %-20s %s\n", name, value.c_str());
      text << line;
    }
    if (r.at("degraded").get<bool>()) {
      text << "note: compiler unavailable; compilable reported as false\n";
    }
    if (!r.at("hints").empty()) {
      text << "hints:\n";
      for (const auto& h : r.at("hints")) {
        text << "  " << h.at("challenge_id").get<std::string>() << " "
             << h.at("title").get<std::string>()
             << (h.at("advisory").get<bool>() ? " (advisory)" : "") << ": "
             << h.at("message").get<std::string>() << "\n";
      }
    }
    Emit(g, r, text.str());

    Provenance p(g, "predict");
    p.config = analyzer.Resolved();
    p.inputs.push_back({{"path", bundle}, {"model_fingerprint", BundleInfo(b.p).at("model_fingerprint")}});
    p.inputs.push_back({{"path", snippet}, {"fnv1a", Fnv1aHex(code)}});
    p.result = {{"predicted", r.at("predicted")},
                {"probability_reproducible", r.at("probability_reproducible")},
                {"features", r.at("features")}};
    p.Write("");
    return 0;
  }
};

struct ServeCmd {
  std::string bundle;
  cli::ServeOptions server;
  std::string static_dir;
  AnalyzerOpts analyzer;

  int Run(const Globals& g) const {
    BundlePtr b;
    Check(repro_bundle_load(bundle.c_str(), &b.p));
    json config = analyzer.ToJson();
    if (!static_dir.empty()) config["static_dir"] = static_dir;
    ServicePtr svc;
    Check(repro_service_create(b.p, config.dump().c_str(), &svc.p));
    Provenance p(g, "serve");
    p.config = analyzer.Resolved();
    p.config["host"] = server.host;
    p.config["port"] = server.port;
    p.config["static_dir"] = static_dir;
    p.inputs.push_back({{"path", bundle}, {"model_fingerprint", BundleInfo(b.p).at("model_fingerprint")}});
    p.Write("");
    return cli::RunServer(svc.p, server);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predicts whether a Java Q&A snippet lets readers reproduce the reported issue."};
  app.set_version_flag("--version", std::string(repro_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_flag("--json", g.json, "Machine-readable JSON output");
  app.add_option("--provenance", g.provenance, "Where to write the provenance record");

  IngestCmd ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Filter a Posts.xml dump into questions JSONL");
  c_ingest->add_option("dump", ingest.dump, "Posts.xml-style dump")->required();
  c_ingest->add_option("--tag", ingest.tag, "Tag filter")->capture_default_str();
  c_ingest->add_option("-o,--out", ingest.out, "Questions JSONL")->capture_default_str();
  c_ingest->add_option("--keyword", ingest.keywords, "Issue keyword (repeatable; replaces defaults)");
  c_ingest->add_flag("--no-filter", ingest.no_filter, "Keep questions without issue keywords");
  c_ingest->add_option("--buffer-size", ingest.buffer_size, "Read buffer in bytes")
      ->check(CLI::PositiveNumber);

  FeaturesCmd features;
  auto* c_features = app.add_subcommand("features", "Extract the nine features from questions JSONL");
  c_features->add_option("questions", features.questions, "Questions JSONL with labels")->required();
  c_features->add_option("-o,--out", features.out, "Feature CSV")->capture_default_str();
  c_features->add_flag("--combine", features.combine, "One row per question instead of per snippet");
  c_features->add_option("--jobs", features.jobs, "Parallel compiler probes")->check(CLI::PositiveNumber);
  features.analyzer.Register(c_features);

  SynthCmd synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic labeled feature corpus");
  c_synth->add_option("--repro", synth.repro, "Reproducible rows")->capture_default_str();
  c_synth->add_option("--irrepro", synth.irrepro, "Irreproducible rows")->capture_default_str();
  c_synth->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  c_synth->add_option("-o,--out", synth.out, "Output CSV or JSONL")->capture_default_str();

  TrainCmd train;
  auto* c_train = app.add_subcommand("train", "Train a model bundle");
  c_train->add_option("data", train.data, "Feature CSV/JSONL")->required();
  c_train->add_option("--family", train.family, "rf, gbt, mlp, nb or knn")
      ->check(CLI::IsMember({"rf", "gbt", "mlp", "nb", "knn"}))
      ->capture_default_str();
  c_train->add_option("--seed", train.seed, "Random seed")->capture_default_str();
  c_train->add_option("--params", train.params, "Hyperparameters as a JSON object");
  c_train->add_option("-o,--out", train.out, "Bundle path")->capture_default_str();
  c_train->add_option("--background", train.background, "Shapley background rows")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_train->add_option("--background-seed", train.background_seed, "Background sampling seed");
  c_train->add_flag("--no-smote", train.no_smote, "Train on the data as is");
  c_train->add_option("--smote-k", train.smote_k, "SMOTE neighbours")->check(CLI::PositiveNumber);
  c_train->add_flag("--smote-round", train.smote_round, "Snap synthetic rows to legal values");

  EvaluateCmd evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "Stratified k-fold cross-validation");
  c_eval->add_option("data", evaluate.data, "Feature CSV/JSONL (default: synthetic corpus)");
  c_eval->add_option("--family", evaluate.family, "rf, gbt, mlp, nb, knn or all")
      ->check(CLI::IsMember({"rf", "gbt", "mlp", "nb", "knn", "all"}))
      ->capture_default_str();
  c_eval->add_option("--k", evaluate.k, "Folds")->check(CLI::Range(2, 1000))->capture_default_str();
  c_eval->add_option("--seed", evaluate.seed, "Random seed")->capture_default_str();
  c_eval->add_flag("--paper-mode", evaluate.global_smote,
                   "Oversample the whole dataset before splitting (leaks synthetic rows)");
  c_eval->add_option("--smote-k", evaluate.smote_k, "SMOTE neighbours")->check(CLI::PositiveNumber);
  c_eval->add_flag("--smote-round", evaluate.smote_round, "Snap synthetic rows to legal values");
  c_eval->add_option("--jobs", evaluate.jobs, "Folds run in parallel")->check(CLI::PositiveNumber);
  c_eval->add_option("--params", evaluate.params, "Hyperparameters (single family only)");
  c_eval->add_option("--synth-repro", evaluate.synth_repro, "Synthetic reproducible rows");
  c_eval->add_option("--synth-irrepro", evaluate.synth_irrepro, "Synthetic irreproducible rows");
  c_eval->add_option("--format", evaluate.format, "table or csv")
      ->check(CLI::IsMember({"table", "csv"}))
      ->capture_default_str();
  c_eval->add_option("-o,--out", evaluate.out, "Write the report here instead of stdout");

  ExplainCmd explain;
  auto* c_explain = app.add_subcommand("explain", "Exact Shapley explanations and plot data");
  c_explain->add_option("bundle", explain.bundle, "Model bundle")->required();
  c_explain->add_option("--data", explain.data, "Rows to explain (default: bundle background)");
  c_explain->add_option("--instance", explain.instance, "Row index or 'all'");
  c_explain->add_option("--export", explain.kind, "beeswarm, waterfall or force")
      ->check(CLI::IsMember({"beeswarm", "waterfall", "force"}))
      ->capture_default_str();
  c_explain->add_option("-o,--out", explain.out, "Output prefix for .json/.csv/.svg");

  StatsCmd stats;
  auto* c_stats = app.add_subcommand("stats", "Chi-square test per feature");
  c_stats->add_option("data", stats.data, "Feature CSV/JSONL")->required();
  c_stats->add_option("-o,--out", stats.out, "Report path (default: stdout)");

  PredictCmd predict;
  auto* c_predict = app.add_subcommand("predict", "Analyse one snippet");
  c_predict->add_option("bundle", predict.bundle, "Model bundle")->required();
  c_predict->add_option("snippet", predict.snippet, "Java snippet file, or - for stdin")->required();
  c_predict->add_option("--question", predict.question, "Question text");
  c_predict->add_option("--question-file", predict.question_file, "File holding the question text");
  predict.analyzer.Register(c_predict);

  ServeCmd serve;
  auto* c_serve = app.add_subcommand("serve", "HTTP analysis service");
  c_serve->add_option("bundle", serve.bundle, "Model bundle")->required();
  c_serve->add_option("--port", serve.server.port, "Port (0 picks a free one)")
      ->check(CLI::Range(0, 65535))
      ->capture_default_str();
  c_serve->add_option("--host", serve.server.host, "Bind address")->capture_default_str();
  c_serve->add_option("--threads", serve.server.threads, "Worker threads")->check(CLI::PositiveNumber);
  c_serve->add_option("--static", serve.static_dir, "Directory of static assets");
  serve.analyzer.Register(c_serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (c_ingest->parsed()) return ingest.Run(g);
    if (c_features->parsed()) return features.Run(g);
    if (c_synth->parsed()) return synth.Run(g);
    if (c_train->parsed()) return train.Run(g);
    if (c_eval->parsed()) return evaluate.Run(g);
    if (c_explain->parsed()) return explain.Run(g);
    if (c_stats->parsed()) return stats.Run(g);
    if (c_predict->parsed()) return predict.Run(g);
    if (c_serve->parsed()) return serve.Run(g);
  } catch (const DomainError& e) {
    std::cerr << "error: " << repro_status_name(e.status) << ": " << e.message << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  std::cerr << app.help();
  return 2;
}
