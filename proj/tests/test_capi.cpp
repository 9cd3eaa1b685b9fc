#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "repro/repro.h"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string Take(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  repro_free_string(s);
  return out;
}

const char* kNoCompiler = R"({"compiler":"none"})";

fs::path Tmp(const std::string& name) {
  return fs::temp_directory_path() / ("repro-capi-" + std::to_string(::getpid()) + "-" + name);
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(repro_version()) == "1.0.0");
  CHECK(std::string(repro_status_name(REPRO_OK)) == "ok");
  CHECK(std::string(repro_status_name(REPRO_E_SINGLE_CLASS)) == "single_class");
  repro_free_string(nullptr);
  repro_dataset_free(nullptr);
  repro_bundle_free(nullptr);
  repro_service_free(nullptr);
}

TEST_CASE("null arguments are rejected with a message") {
  char* out = nullptr;
  CHECK(repro_extract_features(nullptr, "", nullptr, &out) == REPRO_E_INVALID_ARGUMENT);
  CHECK(out == nullptr);
  CHECK(std::strlen(repro_last_error()) > 0);
  CHECK(repro_dataset_load(nullptr, nullptr) == REPRO_E_INVALID_ARGUMENT);
}

TEST_CASE("feature extraction") {
  char* out = nullptr;
  REQUIRE(repro_extract_features("int x = 1;\nx++;", "", kNoCompiler, &out) == REPRO_OK);
  const auto j = json::parse(Take(out));
  CHECK(j.at("row").size() == 9);
  CHECK(j.at("features").at("loc") == 2);
  CHECK(j.at("compile").at("status") == "unavailable");
  CHECK(repro_extract_features("   \n", "", kNoCompiler, &out) == REPRO_E_INVALID_ARGUMENT);
  CHECK(repro_extract_features("x();", "", "{bad json", &out) == REPRO_E_INVALID_ARGUMENT);
}

TEST_CASE("dataset lifecycle") {
  repro_dataset* ds = nullptr;
  REQUIRE(repro_dataset_synth(40, 20, 3, &ds) == REPRO_OK);
  char* info = nullptr;
  REQUIRE(repro_dataset_info(ds, &info) == REPRO_OK);
  const auto j = json::parse(Take(info));
  CHECK(j.at("rows") == 60);
  CHECK(j.at("reproducible") == 40);
  double row[9];
  int label = -1;
  CHECK(repro_dataset_row(ds, 0, row, &label) == REPRO_OK);
  CHECK(row[0] >= 1);
  CHECK(repro_dataset_row(ds, 60, row, &label) == REPRO_E_NOT_FOUND);

  const auto path = Tmp("ds.csv");
  REQUIRE(repro_dataset_save(ds, path.c_str()) == REPRO_OK);
  repro_dataset* back = nullptr;
  REQUIRE(repro_dataset_load(path.c_str(), &back) == REPRO_OK);
  REQUIRE(repro_dataset_info(back, &info) == REPRO_OK);
  CHECK(json::parse(Take(info)).at("fingerprint") == j.at("fingerprint"));

  repro_dataset* bal = nullptr;
  REQUIRE(repro_dataset_smote(ds, 5, 1, 0, &bal) == REPRO_OK);
  REQUIRE(repro_dataset_info(bal, &info) == REPRO_OK);
  CHECK(json::parse(Take(info)).at("synthetic") == 20);

  repro_dataset* missing = nullptr;
  CHECK(repro_dataset_load("/nonexistent/x.csv", &missing) == REPRO_E_IO);
  CHECK(missing == nullptr);
  repro_dataset_free(bal);
  repro_dataset_free(back);
  repro_dataset_free(ds);
  fs::remove(path);
}

TEST_CASE("evaluate, bundle, explain, service") {
  repro_dataset* ds = nullptr;
  REQUIRE(repro_dataset_synth(90, 30, 5, &ds) == REPRO_OK);
  char* metrics = nullptr;
  REQUIRE(repro_evaluate(ds, R"({"family":"nb"})", R"({"k":5,"seed":1})", &metrics) == REPRO_OK);
  const auto m = json::parse(Take(metrics));
  const double acc = m.at("metrics").at("accuracy").get<double>();
  CHECK(acc > 0.5);
  CHECK(repro_evaluate(ds, R"({"family":"svm"})", "{}", &metrics) == REPRO_E_INVALID_ARGUMENT);

  char* table = nullptr;
  const json entries = json::array({{{"name", "nb"}, {"metrics", m}}});
  REQUIRE(repro_format_metrics(entries.dump().c_str(), "csv", &table) == REPRO_OK);
  CHECK(Take(table).find("nb") != std::string::npos);

  repro_bundle* b = nullptr;
  REQUIRE(repro_bundle_train(ds, R"({"family":"rf","params":{"trees":20}})",
                             R"({"background_size":8})", &b) == REPRO_OK);
  double row[9] = {5, 1, 1, 1, 1, 1, 0, 0, 0};
  double p = -1;
  REQUIRE(repro_bundle_predict(b, row, 9, &p) == REPRO_OK);
  CHECK(p >= 0);
  CHECK(p <= 1);
  CHECK(repro_bundle_predict(b, row, 8, &p) == REPRO_E_INVALID_ARGUMENT);

  const auto path = Tmp("m.bundle");
  REQUIRE(repro_bundle_save(b, path.c_str()) == REPRO_OK);
  repro_bundle* b2 = nullptr;
  REQUIRE(repro_bundle_load(path.c_str(), &b2) == REPRO_OK);
  char* i1 = nullptr;
  char* i2 = nullptr;
  REQUIRE(repro_bundle_info(b, &i1) == REPRO_OK);
  REQUIRE(repro_bundle_info(b2, &i2) == REPRO_OK);
  CHECK(Take(i1) == Take(i2));

  char* plot = nullptr;
  char* csv = nullptr;
  char* svg = nullptr;
  REQUIRE(repro_explain(b, ds, 3, "waterfall", &plot, &csv, &svg) == REPRO_OK);
  CHECK(csv == nullptr);
  CHECK(json::parse(Take(plot)).at("rows").size() == 11);
  CHECK(Take(svg).rfind("<svg", 0) == 0);
  REQUIRE(repro_explain(b, nullptr, -1, "beeswarm", &plot, &csv, &svg) == REPRO_OK);
  CHECK(svg == nullptr);
  CHECK(json::parse(Take(plot)).at("points").size() == 8 * 9);
  Take(csv);
  CHECK(repro_explain(b, ds, 100000, "force", &plot, &csv, &svg) == REPRO_E_NOT_FOUND);

  char* resp = nullptr;
  REQUIRE(repro_bundle_analyze(b, R"({"code":"Foo f = new Foo();"})", kNoCompiler, &resp) == REPRO_OK);
  CHECK(json::parse(Take(resp)).at("hints").size() >= 1);

  repro_service* svc = nullptr;
  REQUIRE(repro_service_create(b, kNoCompiler, &svc) == REPRO_OK);
  int status = 0;
  char* type = nullptr;
  char* body = nullptr;
  std::size_t len = 0;
  REQUIRE(repro_service_handle(svc, "GET", "/api/health", nullptr, 0, &status, &type, &body, &len) ==
          REPRO_OK);
  CHECK(status == 200);
  CHECK(Take(type) == "application/json");
  CHECK(json::parse(std::string(body, len)).at("status") == "ok");
  repro_free_string(body);
  const std::string req = R"({"code":"int x = 1;"})";
  REQUIRE(repro_service_handle(svc, "POST", "/api/analyze", req.data(), req.size(), &status, &type,
                               &body, &len) == REPRO_OK);
  CHECK(status == 200);
  repro_free_string(type);
  repro_free_string(body);

  repro_service_free(svc);
  repro_bundle_free(b2);
  repro_bundle_free(b);
  repro_dataset_free(ds);
  fs::remove(path);
}

TEST_CASE("single-class training surfaces its code") {
  repro_dataset* ds = nullptr;
  REQUIRE(repro_dataset_synth(20, 1, 1, &ds) == REPRO_OK);
  repro_bundle* b = nullptr;
  CHECK(repro_bundle_train(ds, R"({"family":"rf"})", "{}", &b) == REPRO_E_TOO_FEW_MINORITY);
  CHECK(b == nullptr);
  repro_dataset_free(ds);
}

TEST_CASE("statistics") {
  const int64_t counts[] = {84, 1, 186, 86};
  char* out = nullptr;
  REQUIRE(repro_chi_square(counts, 2, 2, &out) == REPRO_OK);
  const auto j = json::parse(Take(out));
  CHECK(j.at("chi2").get<double>() == doctest::Approx(30.9).epsilon(0.01));
  CHECK(j.at("yates") == true);
  double p = 0;
  REQUIRE(repro_chi_square_sf(6.4, 2, &p) == REPRO_OK);
  CHECK(p == doctest::Approx(std::exp(-3.2)));
  CHECK(repro_chi_square_sf(-1, 2, &p) == REPRO_E_INVALID_ARGUMENT);
  REQUIRE(repro_borda(R"([["A","B","C"],["B","A","C"]])", &out) == REPRO_OK);
  const auto b = json::parse(Take(out));
  CHECK(b[0].at("candidate") == "A");
  CHECK(b[0].at("score") == 5);
  REQUIRE(repro_borda(R"({"rankings":[],"candidates":["X"]})", &out) == REPRO_OK);
  CHECK(json::parse(Take(out))[0].at("score") == 0);
  CHECK(repro_borda(R"([["A","A"]])", &out) == REPRO_E_INVALID_ARGUMENT);

  repro_dataset* ds = nullptr;
  REQUIRE(repro_dataset_synth(100, 40, 1, &ds) == REPRO_OK);
  REQUIRE(repro_stats_report(ds, "csv", &out) == REPRO_OK);
  CHECK(Take(out).rfind("feature,chi2,df,p,significant", 0) == 0);
  CHECK(repro_stats_report(ds, "xml", &out) == REPRO_E_INVALID_ARGUMENT);
  repro_dataset_free(ds);
}

TEST_CASE("ingest and feature extraction from questions") {
  const auto dump = Tmp("Posts.xml");
  std::ofstream(dump)
      << "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<posts>\n"
         "  <row Id=\"1\" PostTypeId=\"1\" Score=\"1\" Title=\"Error here\" "
         "Body=\"&lt;p&gt;I get an error&lt;/p&gt;&lt;pre&gt;&lt;code&gt;int x = 1;&lt;/code&gt;&lt;/pre&gt;\" "
         "Tags=\"&lt;java&gt;\" AnswerCount=\"0\" />\n"
         "  <row Id=\"2\" PostTypeId=\"1\" Score=\"1\" Title=\"Style\" "
         "Body=\"&lt;p&gt;nice&lt;/p&gt;&lt;pre&gt;&lt;code&gt;int y;&lt;/code&gt;&lt;/pre&gt;\" "
         "Tags=\"&lt;java&gt;\" AnswerCount=\"0\" />\n"
         "</posts>\n";
  const auto out = Tmp("q.jsonl");
  char* report = nullptr;
  REQUIRE(repro_ingest_dump(dump.c_str(), out.c_str(), R"({"tag":"java"})", &report) == REPRO_OK);
  const auto r = json::parse(Take(report));
  CHECK(r.dump().find("error") != std::string::npos);
  std::ifstream in(out);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 1);

  const auto labeled = Tmp("labeled.jsonl");
  std::ofstream(labeled) << R"({"id":1,"snippets":["int x = 1;"],"label":"reproducible"})" "\n"
                         << R"({"id":2,"snippets":["Foo f;"],"label":"irreproducible"})" "\n"
                         << R"({"id":3,"snippets":["y();"]})" "\n";
  repro_dataset* ds = nullptr;
  REQUIRE(repro_features_from_questions(labeled.c_str(), kNoCompiler, &ds, &report) == REPRO_OK);
  const auto fr = json::parse(Take(report));
  CHECK(fr.at("skipped_unlabeled") == 1);
  char* info = nullptr;
  REQUIRE(repro_dataset_info(ds, &info) == REPRO_OK);
  CHECK(json::parse(Take(info)).at("rows") == 2);
  repro_dataset_free(ds);
  fs::remove(dump);
  fs::remove(out);
  fs::remove(labeled);
}
