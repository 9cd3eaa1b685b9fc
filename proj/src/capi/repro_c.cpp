#include "repro/repro.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include <json.hpp>

#include "repro/analyzer.hpp"
#include "repro/dataset.hpp"
#include "repro/error.hpp"
#include "repro/explain.hpp"
#include "repro/models.hpp"
#include "repro/pipeline.hpp"
#include "repro/service.hpp"
#include "repro/stats.hpp"

struct repro_dataset {
  repro::Dataset data;
};

struct repro_bundle {
  repro::service::ModelBundle bundle;
};

struct repro_service {
  std::unique_ptr<repro::service::Service> service;
};

namespace {

using nlohmann::json;
using repro::ErrorCode;
using repro::Fail;

thread_local std::string g_last_error;

char* Dup(std::string_view s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size());
  p[s.size()] = '\0';
  return p;
}

template <typename F>
repro_status Guard(F&& body) {
  g_last_error.clear();
  try {
    body();
    return REPRO_OK;
  } catch (const repro::Error& e) {
    g_last_error = e.what();
    return static_cast<repro_status>(e.code());
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return REPRO_E_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return REPRO_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return REPRO_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return REPRO_E_INTERNAL;
  }
}

template <typename T>
void Need(const T* p, const char* what) {
  if (!p) Fail(ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

json ParseOptions(const char* text) {
  if (!text || !*text) return json::object();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("options are not valid JSON: ") + e.what());
  }
  if (!j.is_object()) Fail(ErrorCode::kInvalidArgument, "options must be a JSON object");
  return j;
}

repro::analyzer::AnalyzerConfig AnalyzerConfigFrom(const json& j) {
  repro::analyzer::AnalyzerConfig c;
  c.compiler = repro::analyzer::CompilerConfig::FromEnvironment();
  if (auto it = j.find("compiler"); it != j.end()) c.compiler.command = it->get<std::string>();
  if (auto it = j.find("timeout_ms"); it != j.end()) {
    const auto ms = it->get<long long>();
    if (ms <= 0) Fail(ErrorCode::kInvalidArgument, "timeout_ms must be positive");
    c.compiler.timeout = std::chrono::milliseconds(ms);
  }
  if (auto it = j.find("scratch_dir"); it != j.end()) {
    c.compiler.scratch_dir = it->get<std::string>();
  }
  if (auto it = j.find("jdk_index"); it != j.end()) {
    c.index = std::make_shared<const repro::analyzer::JdkIndex>(
        repro::analyzer::JdkIndex::Load(it->get<std::string>()));
  }
  return c;
}

repro::models::CvOptions CvFrom(const json& j) {
  repro::models::CvOptions o;
  o.k = j.value("k", o.k);
  o.seed = j.value("seed", o.seed);
  if (auto it = j.find("smote_mode"); it != j.end()) {
    o.smote_mode = repro::models::ParseSmoteMode(it->get<std::string>());
  }
  o.smote_k = j.value("smote_k", o.smote_k);
  o.smote_round = j.value("smote_round", o.smote_round);
  o.jobs = j.value("jobs", o.jobs);
  if (o.jobs < 1) Fail(ErrorCode::kInvalidArgument, "jobs must be >= 1");
  return o;
}

json CvJson(const repro::models::CvOptions& o) {
  return {{"k", o.k},
          {"seed", o.seed},
          {"smote_mode", repro::models::ToString(o.smote_mode)},
          {"smote_k", o.smote_k},
          {"smote_round", o.smote_round}};
}

repro::models::MetricsReport MetricsFrom(const json& j) {
  auto cls = [](const json& c) {
    return repro::models::ClassMetrics{c.at("precision").get<double>(), c.at("recall").get<double>(),
                                       c.at("f1").get<double>()};
  };
  repro::models::MetricsReport r;
  r.reproducible = cls(j.at("reproducible"));
  r.irreproducible = cls(j.at("irreproducible"));
  r.accuracy = j.at("accuracy").get<double>();
  r.confusion = j.at("confusion").get<repro::models::Confusion>();
  return r;
}

}  // namespace

extern "C" {

const char* repro_version(void) { return "1.0.0"; }

const char* repro_last_error(void) { return g_last_error.c_str(); }

const char* repro_status_name(repro_status status) {
  if (status == REPRO_OK) return "ok";
  if (status < REPRO_E_INVALID_ARGUMENT || status > REPRO_E_INTERNAL) return "unknown";
  return repro::service::ErrorCodeName(static_cast<ErrorCode>(status)).data();
}

void repro_free_string(char* s) { std::free(s); }

repro_status repro_ingest_dump(const char* dump_path, const char* out_path,
                               const char* options_json, char** report_json) {
  return Guard([&] {
    Need(dump_path, "dump_path");
    Need(out_path, "out_path");
    const auto j = ParseOptions(options_json);
    repro::pipeline::IngestOptions o;
    o.tag = j.value("tag", o.tag);
    o.keywords = j.value("keywords", o.keywords);
    o.filter_issues = j.value("filter", o.filter_issues);
    o.buffer_size = j.value("buffer_size", o.buffer_size);
    if (o.buffer_size == 0) Fail(ErrorCode::kInvalidArgument, "buffer_size must be positive");
    std::ifstream in(dump_path, std::ios::binary);
    if (!in) Fail(ErrorCode::kIo, std::string("cannot read ") + dump_path);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) Fail(ErrorCode::kIo, std::string("cannot write ") + out_path);
    const auto r = repro::pipeline::IngestDump(in, out, o);
    out.close();
    if (!out) Fail(ErrorCode::kIo, std::string("write failed: ") + out_path);
    if (report_json) {
      *report_json = Dup(json{{"rows_seen", r.parse.rows_seen},
                              {"tagged_questions", r.parse.yielded},
                              {"warnings", r.parse.warnings},
                              {"retained", r.retained},
                              {"tag", r.tag},
                              {"filter", o.filter_issues},
                              {"keywords", r.keywords}}
                             .dump());
    }
  });
}

repro_status repro_extract_features(const char* code, const char* question_text,
                                    const char* config_json, char** result_json) {
  return Guard([&] {
    Need(code, "code");
    Need(result_json, "result_json");
    const auto config = AnalyzerConfigFrom(ParseOptions(config_json));
    const auto x =
        repro::analyzer::ExtractFeatures(code, question_text ? question_text : "", config);
    *result_json = Dup(repro::pipeline::ExtractionToJson(x));
  });
}

repro_status repro_features_from_questions(const char* questions_path, const char* options_json,
                                           repro_dataset** out, char** report_json) {
  return Guard([&] {
    Need(questions_path, "questions_path");
    Need(out, "out");
    const auto j = ParseOptions(options_json);
    repro::pipeline::FeatureOptions o;
    o.analyzer = AnalyzerConfigFrom(j);
    o.combine = j.value("combine", o.combine);
    o.jobs = j.value("jobs", o.jobs);
    if (o.jobs < 1) Fail(ErrorCode::kInvalidArgument, "jobs must be >= 1");
    std::ifstream in(questions_path, std::ios::binary);
    if (!in) Fail(ErrorCode::kIo, std::string("cannot read ") + questions_path);
    auto report = repro::pipeline::ExtractDataset(repro::pipeline::ReadQuestions(in), o);
    if (report_json) {
      *report_json = Dup(json{{"questions", report.questions},
                              {"analysed", report.items.size()},
                              {"rows", report.dataset.size()},
                              {"skipped_unlabeled", report.skipped_unlabeled},
                              {"skipped_blank", report.skipped_blank},
                              {"compile_unavailable", report.compile_unavailable},
                              {"combine", o.combine},
                              {"compiler", o.analyzer.compiler.command},
                              {"jdk_index_hash", o.analyzer.jdk().hash()}}
                             .dump());
    }
    *out = new repro_dataset{std::move(report.dataset)};
  });
}

repro_status repro_dataset_load(const char* path, repro_dataset** out) {
  return Guard([&] {
    Need(path, "path");
    Need(out, "out");
    *out = new repro_dataset{repro::dataset::Load(path)};
  });
}

repro_status repro_dataset_save(const repro_dataset* ds, const char* path) {
  return Guard([&] {
    Need(ds, "dataset");
    Need(path, "path");
    repro::dataset::Save(ds->data, path);
  });
}

repro_status repro_dataset_synth(size_t n_reproducible, size_t n_irreproducible, uint64_t seed,
                                 repro_dataset** out) {
  return Guard([&] {
    Need(out, "out");
    *out = new repro_dataset{repro::dataset::SynthCorpus(n_reproducible, n_irreproducible, seed)};
  });
}

repro_status repro_dataset_info(const repro_dataset* ds, char** info_json) {
  return Guard([&] {
    Need(ds, "dataset");
    Need(info_json, "info_json");
    const auto& d = ds->data;
    *info_json = Dup(json{{"rows", d.size()},
                          {"reproducible", d.Count(repro::Label::kReproducible)},
                          {"irreproducible", d.Count(repro::Label::kIrreproducible)},
                          {"synthetic", d.CountOrigin(repro::Origin::kSynthetic)},
                          {"schema_version", d.schema_version},
                          {"fingerprint", d.Fingerprint()}}
                         .dump());
  });
}

repro_status repro_dataset_row(const repro_dataset* ds, size_t index, double* row9, int* label) {
  return Guard([&] {
    Need(ds, "dataset");
    if (index >= ds->data.size()) Fail(ErrorCode::kNotFound, "row index out of range");
    const auto& e = ds->data.examples[index];
    if (row9) std::copy(e.features.begin(), e.features.end(), row9);
    if (label) *label = e.label == repro::Label::kReproducible ? 1 : 0;
  });
}

repro_status repro_dataset_smote(const repro_dataset* ds, int k, uint64_t seed, int round,
                                 repro_dataset** out) {
  return Guard([&] {
    Need(ds, "dataset");
    Need(out, "out");
    repro::dataset::SmoteOptions o;
    o.k = k;
    o.seed = seed;
    o.round = round != 0;
    *out = new repro_dataset{repro::dataset::Smote(ds->data, o)};
  });
}

void repro_dataset_free(repro_dataset* ds) { delete ds; }

repro_status repro_evaluate(const repro_dataset* ds, const char* spec_json, const char* cv_json,
                            char** metrics_json) {
  return Guard([&] {
    Need(ds, "dataset");
    Need(metrics_json, "metrics_json");
    const auto spec = repro::models::ModelSpec::FromJson(spec_json && *spec_json ? spec_json : "{}");
    const auto cv = CvFrom(ParseOptions(cv_json));
    const auto r = repro::models::EvaluateCv(spec, ds->data, cv);
    *metrics_json = Dup(json{{"spec", json::parse(spec.ToJson())},
                             {"cv", CvJson(cv)},
                             {"dataset_fingerprint", ds->data.Fingerprint()},
                             {"metrics", json::parse(repro::models::MetricsToJson(r.metrics))},
                             {"folds",
                              {{"train_rows", r.train_sizes},
                               {"train_synthetic", r.train_synthetic},
                               {"test_synthetic", r.test_synthetic}}}}
                            .dump());
  });
}

repro_status repro_format_metrics(const char* entries_json, const char* format, char** out) {
  return Guard([&] {
    Need(entries_json, "entries_json");
    Need(out, "out");
    const auto j = json::parse(entries_json);
    if (!j.is_array()) Fail(ErrorCode::kInvalidArgument, "entries must be a JSON array");
    std::vector<std::pair<std::string, repro::models::MetricsReport>> rows;
    for (const auto& e : j) {
      const auto& m = e.at("metrics");
      rows.emplace_back(e.at("name").get<std::string>(),
                        MetricsFrom(m.contains("metrics") ? m.at("metrics") : m));
    }
    const std::string f = format ? format : "table";
    if (f == "table") {
      *out = Dup(repro::models::FormatMetricsTable(rows));
    } else if (f == "csv") {
      *out = Dup(repro::models::FormatMetricsCsv(rows));
    } else {
      Fail(ErrorCode::kInvalidArgument, "format must be table or csv");
    }
  });
}

repro_status repro_bundle_train(const repro_dataset* ds, const char* spec_json,
                                const char* options_json, repro_bundle** out) {
  return Guard([&] {
    Need(ds, "dataset");
    Need(out, "out");
    const auto spec = repro::models::ModelSpec::FromJson(spec_json && *spec_json ? spec_json : "{}");
    const auto j = ParseOptions(options_json);
    repro::service::BundleOptions o;
    o.background_size = j.value("background_size", o.background_size);
    o.background_seed = j.value("background_seed", o.background_seed);
    o.smote = j.value("smote", o.smote);
    o.smote_k = j.value("smote_k", o.smote_k);
    o.smote_round = j.value("smote_round", o.smote_round);
    *out = new repro_bundle{repro::service::BuildBundle(spec, ds->data, o)};
  });
}

repro_status repro_bundle_load(const char* path, repro_bundle** out) {
  return Guard([&] {
    Need(path, "path");
    Need(out, "out");
    *out = new repro_bundle{repro::service::ModelBundle::Load(path)};
  });
}

repro_status repro_bundle_save(const repro_bundle* bundle, const char* path) {
  return Guard([&] {
    Need(bundle, "bundle");
    Need(path, "path");
    bundle->bundle.Save(path);
  });
}

repro_status repro_bundle_info(const repro_bundle* bundle, char** info_json) {
  return Guard([&] {
    Need(bundle, "bundle");
    Need(info_json, "info_json");
    const auto& b = bundle->bundle;
    const auto& spec = b.model->spec();
    *info_json = Dup(json{{"spec", json::parse(spec.ToJson())},
                          {"family", repro::models::ToString(spec.family)},
                          {"display_name", repro::models::DisplayName(spec.family)},
                          {"model_fingerprint", b.Fingerprint()},
                          {"training_fingerprint", b.model->training_fingerprint()},
                          {"dataset_fingerprint", b.dataset_fingerprint},
                          {"train_rows", b.train_rows},
                          {"train_synthetic", b.train_synthetic},
                          {"real_reproducible", b.real_reproducible},
                          {"real_irreproducible", b.real_irreproducible},
                          {"background_size", b.background.size()},
                          {"jdk_index_hash", b.jdk_index_hash}}
                         .dump());
  });
}

repro_status repro_bundle_predict(const repro_bundle* bundle, const double* row, size_t n,
                                  double* probability) {
  return Guard([&] {
    Need(bundle, "bundle");
    Need(row, "row");
    Need(probability, "probability");
    *probability = bundle->bundle.model->PredictProba(std::span<const double>(row, n));
  });
}

repro_status repro_bundle_analyze(const repro_bundle* bundle, const char* request_json,
                                  const char* config_json, char** response_json) {
  return Guard([&] {
    Need(bundle, "bundle");
    Need(request_json, "request_json");
    Need(response_json, "response_json");
    repro::service::ServiceConfig config;
    config.analyzer = AnalyzerConfigFrom(ParseOptions(config_json));
    const repro::service::Service service(bundle->bundle, config);
    const auto request = repro::service::AnalysisRequest::FromJson(request_json);
    *response_json = Dup(service.Analyze(request).ToJson());
  });
}

void repro_bundle_free(repro_bundle* bundle) { delete bundle; }

repro_status repro_explain(const repro_bundle* bundle, const repro_dataset* ds,
                           long long instance, const char* kind, char** plot_json,
                           char** plot_csv, char** plot_svg) {
  if (plot_json) *plot_json = nullptr;
  if (plot_csv) *plot_csv = nullptr;
  if (plot_svg) *plot_svg = nullptr;
  return Guard([&] {
    Need(bundle, "bundle");
    Need(kind, "kind");
    Need(plot_json, "plot_json");
    const auto plot = repro::explain::ParsePlotKind(kind);
    const auto& b = bundle->bundle;
    std::vector<repro::Row> rows;
    if (ds) {
      for (const auto& e : ds->data.examples) rows.push_back(e.features);
    } else {
      rows = b.background;
    }
    std::vector<repro::explain::ShapleyExplanation> out;
    if (instance < 0) {
      if (rows.empty()) Fail(ErrorCode::kInvalidArgument, "no rows to explain");
      for (const auto& r : rows) out.push_back(repro::explain::ExactShapley(*b.model, r, b.background));
    } else {
      if (static_cast<std::size_t>(instance) >= rows.size()) {
        Fail(ErrorCode::kNotFound, "instance " + std::to_string(instance) + " out of range");
      }
      out.push_back(repro::explain::ExactShapley(*b.model, rows[static_cast<std::size_t>(instance)],
                                                 b.background));
    }
    const auto exported = repro::explain::ExportPlotData(plot, out);
    *plot_json = Dup(exported.json);
    if (plot_csv && !exported.csv.empty()) *plot_csv = Dup(exported.csv);
    if (plot_svg && !exported.svg.empty()) *plot_svg = Dup(exported.svg);
  });
}

repro_status repro_stats_report(const repro_dataset* ds, const char* format, char** out) {
  return Guard([&] {
    Need(ds, "dataset");
    Need(out, "out");
    const auto tests = repro::stats::AnalyzeFeatures(ds->data);
    const std::string f = format ? format : "csv";
    if (f == "csv") {
      *out = Dup(repro::stats::FormatReportCsv(tests));
    } else if (f == "json") {
      *out = Dup(repro::stats::FormatReportJson(tests));
    } else {
      Fail(ErrorCode::kInvalidArgument, "format must be csv or json");
    }
  });
}

repro_status repro_chi_square(const int64_t* counts, size_t rows, size_t cols,
                              char** result_json) {
  return Guard([&] {
    Need(counts, "counts");
    Need(result_json, "result_json");
    repro::stats::ContingencyTable t;
    for (size_t r = 0; r < rows; ++r) {
      t.counts.emplace_back(counts + r * cols, counts + (r + 1) * cols);
    }
    const auto res = repro::stats::ChiSquare(t);
    *result_json = Dup(
        json{{"chi2", res.chi2}, {"df", res.df}, {"p", res.p}, {"yates", res.yates_applied}}.dump());
  });
}

repro_status repro_chi_square_sf(double x, int df, double* p) {
  return Guard([&] {
    Need(p, "p");
    *p = repro::stats::ChiSquareSf(x, df);
  });
}

repro_status repro_borda(const char* rankings_json, char** result_json) {
  return Guard([&] {
    Need(rankings_json, "rankings_json");
    Need(result_json, "result_json");
    const auto j = json::parse(rankings_json);
    std::vector<std::vector<std::string>> rankings;
    std::vector<std::string> candidates;
    if (j.is_array()) {
      rankings = j.get<std::vector<std::vector<std::string>>>();
    } else if (j.is_object()) {
      rankings = j.value("rankings", rankings);
      candidates = j.value("candidates", candidates);
    } else {
      Fail(ErrorCode::kInvalidArgument, "rankings must be an array or an object");
    }
    json out = json::array();
    for (const auto& s : repro::stats::BordaCount(rankings, candidates)) {
      out.push_back({{"candidate", s.candidate}, {"score", s.score}});
    }
    *result_json = Dup(out.dump());
  });
}

repro_status repro_service_create(const repro_bundle* bundle, const char* config_json,
                                  repro_service** out) {
  return Guard([&] {
    Need(bundle, "bundle");
    Need(out, "out");
    const auto j = ParseOptions(config_json);
    repro::service::ServiceConfig config;
    config.analyzer = AnalyzerConfigFrom(j);
    if (auto it = j.find("static_dir"); it != j.end()) config.static_dir = it->get<std::string>();
    auto svc = std::make_unique<repro::service::Service>(bundle->bundle, std::move(config));
    *out = new repro_service{std::move(svc)};
  });
}

repro_status repro_service_handle(const repro_service* service, const char* method,
                                  const char* path, const char* body, size_t body_len,
                                  int* http_status, char** content_type, char** response_body,
                                  size_t* response_len) {
  return Guard([&] {
    Need(service, "service");
    Need(method, "method");
    Need(path, "path");
    Need(http_status, "http_status");
    Need(response_body, "response_body");
    const auto r = service->service->Handle(
        method, path, body ? std::string_view(body, body_len) : std::string_view());
    *http_status = r.status;
    if (content_type) *content_type = Dup(r.content_type);
    *response_body = Dup(r.body);
    if (response_len) *response_len = r.body.size();
  });
}

void repro_service_free(repro_service* service) { delete service; }

}  // extern "C"
