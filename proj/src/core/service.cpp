#include "repro/service.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "repro/error.hpp"
#include "repro/hash.hpp"
#include "repro/ingest.hpp"
#include "repro/rng.hpp"

namespace repro::service {

namespace {

using nlohmann::json;

json RowJson(const Row& r) { return json(std::vector<double>(r.begin(), r.end())); }

Row RowFrom(const json& j) {
  if (!j.is_array() || j.size() != kFeatureCount) {
    Fail(ErrorCode::kParse, "bundle background row must hold nine numbers");
  }
  Row r;
  for (std::size_t i = 0; i < kFeatureCount; ++i) r[i] = j.at(i).get<double>();
  return r;
}

json FeaturesJson(const FeatureVector& v) {
  return json{{"loc", v.loc},
              {"has_method", v.has_method},
              {"has_main", v.has_main},
              {"has_class", v.has_class},
              {"parsable", v.parsable},
              {"compilable", v.compilable},
              {"native_import", static_cast<int>(v.native_import)},
              {"external_import", static_cast<int>(v.external_import)},
              {"exception_handling", static_cast<int>(v.exception_handling)}};
}

std::string Join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

bool Matches(std::string_view text, const std::regex& re) {
  return std::regex_search(text.begin(), text.end(), re);
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view ContentType(const std::filesystem::path& p) {
  const auto ext = Lower(p.extension().string());
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".txt") return "text/plain; charset=utf-8";
  return "application/octet-stream";
}

HttpResponse ErrorResponse(const Error& e) {
  return {HttpStatusOf(e.code()), "application/json",
          ErrorJson(ErrorCodeName(e.code()), e.what())};
}

}  // namespace

// ---- bundle ----

std::string ModelBundle::Serialize() const {
  if (!model) Fail(ErrorCode::kInvalidArgument, "bundle has no model");
  json bg = json::array();
  for (const auto& r : background) bg.push_back(RowJson(r));
  return json{{"format", kBundleFormat},
              {"model", json::parse(model->Serialize())},
              {"background", bg},
              {"jdk_index_hash", jdk_index_hash},
              {"dataset_fingerprint", dataset_fingerprint},
              {"train_rows", train_rows},
              {"train_synthetic", train_synthetic},
              {"real_reproducible", real_reproducible},
              {"real_irreproducible", real_irreproducible}}
      .dump();
}

ModelBundle ModelBundle::Deserialize(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("bundle is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", "") != kBundleFormat) {
      Fail(ErrorCode::kParse, "unsupported bundle format");
    }
    ModelBundle b;
    b.model = models::Deserialize(j.at("model").dump());
    for (const auto& r : j.at("background")) b.background.push_back(RowFrom(r));
    if (b.background.empty()) Fail(ErrorCode::kParse, "bundle background is empty");
    b.jdk_index_hash = j.at("jdk_index_hash").get<std::string>();
    b.dataset_fingerprint = j.value("dataset_fingerprint", "");
    b.train_rows = j.value("train_rows", std::size_t{0});
    b.train_synthetic = j.value("train_synthetic", std::size_t{0});
    b.real_reproducible = j.value("real_reproducible", std::size_t{0});
    b.real_irreproducible = j.value("real_irreproducible", std::size_t{0});
    return b;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("malformed bundle: ") + e.what());
  }
}

void ModelBundle::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << Serialize();
  if (!out) Fail(ErrorCode::kIo, "write failed: " + path.string());
}

ModelBundle ModelBundle::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return Deserialize(ss.str());
}

std::string ModelBundle::Fingerprint() const { return Fnv1aHex(Serialize()); }

ModelBundle BuildBundle(const models::ModelSpec& spec, const Dataset& ds,
                        const BundleOptions& options) {
  std::vector<std::size_t> real_idx;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.examples[i].origin == Origin::kReal) real_idx.push_back(i);
  }
  if (real_idx.empty()) Fail(ErrorCode::kEmptySnippetSet, "no real rows to train on");
  const Dataset real = ds.Subset(real_idx);

  Dataset train = real;
  if (options.smote) {
    dataset::SmoteOptions so;
    so.k = options.smote_k;
    so.seed = MixSeed(spec.seed, 0x5eed);
    so.round = options.smote_round;
    train = dataset::Smote(real, so);
  }

  ModelBundle b;
  b.model = models::Train(spec, train);
  b.background = explain::SampleBackground(real, std::max<std::size_t>(1, options.background_size),
                                           options.background_seed);
  b.jdk_index_hash = analyzer::JdkIndex::Builtin().hash();
  b.dataset_fingerprint = real.Fingerprint();
  b.train_rows = train.size();
  b.train_synthetic = train.CountOrigin(Origin::kSynthetic);
  b.real_reproducible = real.Count(Label::kReproducible);
  b.real_irreproducible = real.Count(Label::kIrreproducible);
  return b;
}

// ---- hints ----

const std::vector<Challenge>& ChallengeCatalog() {
  static const std::vector<Challenge> catalog = {
      {"C1", "Class/Interface/Method not found",
       "Include the definitions of the classes and methods the snippet uses, or at least their "
       "signatures."},
      {"C2", "Important part of code missing",
       "Add the statements around the failing code so readers need not guess them."},
      {"C3", "External library not found",
       "Add import statements for third-party classes and name the library and version."},
      {"C4", "Identifier/Object type not found",
       "Declare every variable with its type and import the classes it refers to."},
      {"C5", "Too short code snippet",
       "Post a minimal but complete example instead of a single line."},
      {"C6", "Database/File/UI dependency",
       "Provide the file contents, database schema or UI setup the code relies on, or replace "
       "them with inline data."},
      {"C7", "Outdated code",
       "Replace deprecated or removed APIs with current ones, or state the JDK version."},
      {"C8", "Error log/stack trace missing",
       "Paste the full compiler error or exception stack trace."},
      {"C9", "System dependency or environment setup is missing",
       "Describe the operating system, JDK version and environment variables involved."},
      {"C10", "Sample input-output missing",
       "Give an example input together with the expected and the actual output."},
  };
  return catalog;
}

const Challenge& FindChallenge(std::string_view id) {
  for (const auto& c : ChallengeCatalog()) {
    if (c.id == id) return c;
  }
  Fail(ErrorCode::kNotFound, "unknown challenge id: " + std::string(id));
}

std::vector<Hint> DeriveHints(const analyzer::FeatureExtraction& extraction,
                              std::string_view code, std::string_view question_text) {
  static const std::regex io_re(
      R"(\b(java\.sql|javax\.swing|java\.awt|javafx|DriverManager|ResultSet|Connection|FileReader|FileWriter|FileInputStream|FileOutputStream|Files|Paths|JFrame|JPanel|JButton|new\s+File)\b)");
  static const std::regex outdated_re(
      R"(\b(sun\.audio|AudioStream|AudioPlayer|Applet|JApplet|java\.applet)\b)");
  static const std::regex env_re(
      R"(\b(System\.getenv|System\.getProperty|ProcessBuilder|Runtime\.getRuntime)\b)");
  static const std::regex stdin_re(R"(System\.in\b)");
  static const std::regex input_word_re(R"(\b(input|output)\b)", std::regex::icase);

  const auto& f = extraction.features;
  const auto& imp = extraction.imports;
  std::vector<Hint> hints;
  auto add = [&](std::string id, std::string message, std::string feature, bool advisory) {
    hints.push_back({std::move(id), std::move(message), std::move(feature), advisory});
  };

  if (!f.has_class && !f.has_method) {
    add("C1", "The snippet defines no class and no method.", "has_class", true);
    add("C2", "Only statements were posted; the code around them may be needed.", "has_method",
        true);
  }
  if (f.exception_handling == TriState::kAbsent) {
    add("C2",
        "A call that throws a checked exception has no try/catch or throws clause; the handling "
        "code seems to be missing.",
        "exception_handling", true);
  }
  if (f.external_import == TriState::kAbsent) {
    std::string msg = "Types outside the JDK are used without an import";
    if (!imp.unresolved_types.empty()) msg += ": " + Join(imp.unresolved_types);
    add("C3", msg + ".", "external_import", false);
  }
  if (!imp.unresolved_types.empty() || !imp.missing_jdk_imports.empty()) {
    std::string msg;
    if (!imp.unresolved_types.empty()) msg = "Unresolved types: " + Join(imp.unresolved_types) + ".";
    if (!imp.missing_jdk_imports.empty()) {
      if (!msg.empty()) msg += " ";
      msg += "Missing JDK imports: " + Join(imp.missing_jdk_imports) + ".";
    }
    add("C4", msg,
        imp.unresolved_types.empty() ? "native_import" : "external_import", false);
  }
  if (f.loc <= 2) {
    add("C5", "The snippet has " + std::to_string(f.loc) + " line" + (f.loc == 1 ? "" : "s") +
                  " of code.",
        "loc", false);
  }
  if (Matches(code, io_re)) {
    add("C6", "The code touches files, a database or UI classes.", "code", true);
  }
  if (Matches(code, outdated_re)) {
    add("C7", "The code uses APIs removed from or deprecated in current JDKs.", "code", true);
  }
  if (!f.compilable && !analyzer::MentionsExceptionToken(question_text)) {
    add("C8", "The code does not compile and the question names no exception or error.",
        "compilable", true);
  }
  if (Matches(code, env_re)) {
    add("C9", "The code reads environment or system settings.", "code", true);
  }
  if (Matches(code, stdin_re) && !Matches(question_text, input_word_re)) {
    add("C10", "The code reads standard input but the question gives no sample input.", "code",
        true);
  }
  return hints;
}

// ---- request / response ----

AnalysisRequest AnalysisRequest::FromJson(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    Fail(ErrorCode::kInvalidArgument, "request body is not valid JSON");
  }
  if (!j.is_object()) Fail(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  AnalysisRequest r;
  const auto it = j.find("code");
  if (it == j.end()) Fail(ErrorCode::kInvalidArgument, "missing field: code");
  if (it->is_string()) {
    r.code.push_back(it->get<std::string>());
  } else if (it->is_array()) {
    for (const auto& c : *it) {
      if (!c.is_string()) Fail(ErrorCode::kInvalidArgument, "code array must hold strings");
      r.code.push_back(c.get<std::string>());
    }
  } else {
    Fail(ErrorCode::kInvalidArgument, "code must be a string or an array of strings");
  }
  if (auto q = j.find("question_text"); q != j.end() && !q->is_null()) {
    if (!q->is_string()) Fail(ErrorCode::kInvalidArgument, "question_text must be a string");
    r.question_text = q->get<std::string>();
  }
  if (auto c = j.find("combine"); c != j.end() && !c->is_null()) {
    if (!c->is_boolean()) Fail(ErrorCode::kInvalidArgument, "combine must be a boolean");
    r.combine = c->get<bool>();
  }
  return r;
}

std::string AnalysisResponse::ToJson() const {
  const auto& s = extraction.summary;
  double sum_phi = 0;
  json phi = json::object();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    phi[std::string(kFeatureNames[i])] = shapley.phi[i];
    sum_phi += shapley.phi[i];
  }
  json hints_json = json::array();
  for (const auto& h : hints) {
    hints_json.push_back({{"challenge_id", h.challenge_id},
                          {"title", FindChallenge(h.challenge_id).title},
                          {"message", h.message},
                          {"remediation", FindChallenge(h.challenge_id).remediation},
                          {"triggering_feature", h.triggering_feature},
                          {"advisory", h.advisory}});
  }
  json diagnostics = json::array();
  for (const auto& d : extraction.compile.diagnostics) {
    diagnostics.push_back({{"line", d.line}, {"message", d.message}});
  }
  json evidence{{"parse_ok", s.parse_ok},
                {"wrap_level", analyzer::ToString(s.wrap_level)},
                {"from_token_scan", s.from_token_scan},
                {"class_count", s.class_count},
                {"method_count", s.method_count},
                {"imports", s.imports},
                {"unresolved_types", extraction.imports.unresolved_types},
                {"missing_jdk_imports", extraction.imports.missing_jdk_imports},
                {"compile_status", analyzer::ToString(extraction.compile.status)},
                {"compile_note", extraction.compile.note},
                {"diagnostics", diagnostics}};
  return json{{"features", FeaturesJson(features)},
              {"feature_vector", RowJson(Encode(features))},
              {"probability_reproducible", probability_reproducible},
              {"predicted", ToString(predicted)},
              {"shapley",
               {{"phi", phi},
                {"base_value", shapley.base_value},
                {"prediction", shapley.prediction},
                {"sum_phi", sum_phi}}},
              {"hints", hints_json},
              {"evidence", evidence},
              {"degraded", degraded}}
      .dump();
}

// ---- service ----

int HttpStatusOf(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse:
    case ErrorCode::kEmptySnippetSet:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kSingleClass:
    case ErrorCode::kTooFewMinority:
      return 422;
    case ErrorCode::kIo:
    case ErrorCode::kConfiguration:
    case ErrorCode::kInternal:
      return 500;
  }
  return 500;
}

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid_argument";
    case ErrorCode::kIo:
      return "io";
    case ErrorCode::kParse:
      return "parse";
    case ErrorCode::kEmptySnippetSet:
      return "empty_snippet_set";
    case ErrorCode::kSingleClass:
      return "single_class";
    case ErrorCode::kTooFewMinority:
      return "too_few_minority";
    case ErrorCode::kConfiguration:
      return "configuration";
    case ErrorCode::kNotFound:
      return "not_found";
    case ErrorCode::kInternal:
      return "internal";
  }
  return "internal";
}

std::string ErrorJson(std::string_view code, std::string_view message) {
  return json{{"code", code}, {"message", message}}.dump();
}

Service::Service(ModelBundle bundle, ServiceConfig config)
    : bundle_(std::move(bundle)), config_(std::move(config)) {
  if (!bundle_.model) Fail(ErrorCode::kConfiguration, "service needs a trained model");
  if (bundle_.background.empty()) Fail(ErrorCode::kConfiguration, "bundle background is empty");
  const auto& hash = config_.analyzer.jdk().hash();
  if (bundle_.jdk_index_hash != hash) {
    Fail(ErrorCode::kConfiguration, "bundle was built against JDK index " +
                                        bundle_.jdk_index_hash + ", analyzer uses " + hash);
  }
  fingerprint_ = bundle_.Fingerprint();
}

AnalysisResponse Service::Analyze(const AnalysisRequest& request) const {
  if (request.code.empty()) Fail(ErrorCode::kInvalidArgument, "no code given");
  if (request.code.size() > 1 && !request.combine) {
    Fail(ErrorCode::kInvalidArgument, "several code blocks need combine=true");
  }
  const std::string code =
      request.code.size() == 1 ? request.code.front() : ingest::CombineSnippets(request.code);
  if (ingest::CountLoc(code) == 0) Fail(ErrorCode::kInvalidArgument, "code is empty");

  AnalysisResponse r;
  r.extraction = analyzer::ExtractFeatures(code, request.question_text, config_.analyzer);
  r.features = r.extraction.features;
  const Row x = Encode(r.features);
  r.probability_reproducible = bundle_.model->PredictProba(x);
  r.predicted = bundle_.model->Predict(x);
  r.shapley = explain::ExactShapley(*bundle_.model, x, bundle_.background);
  r.hints = DeriveHints(r.extraction, code, request.question_text);
  const auto status = r.extraction.compile.status;
  r.degraded = status == analyzer::CompileStatus::kUnavailable ||
               status == analyzer::CompileStatus::kTimeout;
  return r;
}

std::string Service::HealthJson() const {
  return json{{"status", "ok"}, {"model_fingerprint", fingerprint_}}.dump();
}

std::string Service::ModelJson() const {
  const auto& m = *bundle_.model;
  return json{{"spec", json::parse(m.spec().ToJson())},
              {"family", models::ToString(m.spec().family)},
              {"display_name", models::DisplayName(m.spec().family)},
              {"feature_names", kFeatureNames},
              {"model_fingerprint", fingerprint_},
              {"training_fingerprint", m.training_fingerprint()},
              {"dataset_fingerprint", bundle_.dataset_fingerprint},
              {"train_rows", bundle_.train_rows},
              {"train_synthetic", bundle_.train_synthetic},
              {"real_reproducible", bundle_.real_reproducible},
              {"real_irreproducible", bundle_.real_irreproducible},
              {"background_size", bundle_.background.size()},
              {"jdk_index_hash", bundle_.jdk_index_hash}}
      .dump();
}

HttpResponse Service::ServeStatic(std::string_view path) const {
  const auto not_found = HttpResponse{404, "application/json", ErrorJson("not_found", "no such resource")};
  if (config_.static_dir.empty()) return not_found;
  std::string rel(path.substr(0, path.find('?')));
  while (!rel.empty() && rel.front() == '/') rel.erase(0, 1);
  if (rel.empty()) rel = "index.html";
  const std::filesystem::path p(rel);
  for (const auto& part : p) {
    if (part == ".." || part == ".") return not_found;
  }
  const auto full = config_.static_dir / p;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(full, ec)) return not_found;
  std::ifstream in(full, std::ios::binary);
  if (!in) return not_found;
  std::ostringstream ss;
  ss << in.rdbuf();
  return {200, std::string(ContentType(full)), ss.str()};
}

HttpResponse Service::Handle(std::string_view method, std::string_view path_and_query,
                             std::string_view body) const {
  const std::string_view path = path_and_query.substr(0, path_and_query.find('?'));
  try {
    if (method == "OPTIONS") return {204, "text/plain", ""};
    if (path == "/api/analyze") {
      if (method != "POST") return {405, "application/json", ErrorJson("method_not_allowed", "use POST")};
      return {200, "application/json", Analyze(AnalysisRequest::FromJson(body)).ToJson()};
    }
    if (path == "/api/health" || path == "/api/model") {
      if (method != "GET") return {405, "application/json", ErrorJson("method_not_allowed", "use GET")};
      return {200, "application/json", path == "/api/health" ? HealthJson() : ModelJson()};
    }
    if (path.starts_with("/api/")) {
      return {404, "application/json", ErrorJson("not_found", "unknown endpoint")};
    }
    if (method != "GET" && method != "HEAD") {
      return {405, "application/json", ErrorJson("method_not_allowed", "use GET")};
    }
    return ServeStatic(path);
  } catch (const Error& e) {
    return ErrorResponse(e);
  } catch (const std::exception& e) {
    return {500, "application/json", ErrorJson("internal", e.what())};
  }
}

}  // namespace repro::service
