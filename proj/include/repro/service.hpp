#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "repro/analyzer.hpp"
#include "repro/dataset.hpp"
#include "repro/error.hpp"
#include "repro/explain.hpp"
#include "repro/models.hpp"

namespace repro::service {

inline constexpr std::string_view kBundleFormat = "repro-bundle/1";

struct BundleOptions {
  std::size_t background_size = 100;
  std::uint64_t background_seed = 0;
  bool smote = true;  // rebalance before training
  int smote_k = 5;
  bool smote_round = false;
};

// Trained model plus everything needed to explain its predictions.
struct ModelBundle {
  std::shared_ptr<const models::TrainedModel> model;
  std::vector<Row> background;  // drawn from real rows
  std::string jdk_index_hash;
  std::string dataset_fingerprint;
  std::size_t train_rows = 0;
  std::size_t train_synthetic = 0;
  std::size_t real_reproducible = 0;
  std::size_t real_irreproducible = 0;

  std::string Serialize() const;
  static ModelBundle Deserialize(std::string_view json);
  void Save(const std::filesystem::path& path) const;
  static ModelBundle Load(const std::filesystem::path& path);
  // FNV-1a of Serialize().
  std::string Fingerprint() const;
};

// Trains on the real rows of ds (SMOTE-rebalanced when options.smote).
ModelBundle BuildBundle(const models::ModelSpec& spec, const Dataset& ds,
                        const BundleOptions& options);

struct Challenge {
  std::string_view id;
  std::string_view title;
  std::string_view remediation;
};

// C1 through C10.
const std::vector<Challenge>& ChallengeCatalog();
const Challenge& FindChallenge(std::string_view id);

struct Hint {
  std::string challenge_id;
  std::string message;
  std::string triggering_feature;
  bool advisory = false;
};

// A pure function of the extraction, the code and the question text.
std::vector<Hint> DeriveHints(const analyzer::FeatureExtraction& extraction,
                              std::string_view code, std::string_view question_text);

struct AnalysisRequest {
  std::vector<std::string> code;  // one block, or several when combine is set
  std::string question_text;
  bool combine = false;

  // Accepts "code" as a string or an array of strings. Throws
  // kInvalidArgument on malformed JSON or missing code.
  static AnalysisRequest FromJson(std::string_view json);
};

struct AnalysisResponse {
  FeatureVector features;
  double probability_reproducible = 0;
  Label predicted = Label::kReproducible;
  explain::ShapleyExplanation shapley;
  std::vector<Hint> hints;
  analyzer::FeatureExtraction extraction;
  bool degraded = false;  // compiler unavailable or timed out

  std::string ToJson() const;
};

struct ServiceConfig {
  analyzer::AnalyzerConfig analyzer;
  std::filesystem::path static_dir;  // empty: no static assets
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// Immutable after construction; Analyze and Handle are safe to call from
// several threads.
class Service {
 public:
  Service(ModelBundle bundle, ServiceConfig config);

  // Throws kInvalidArgument when the code is empty after blank-line stripping.
  AnalysisResponse Analyze(const AnalysisRequest& request) const;

  // Routes POST /api/analyze, GET /api/health, GET /api/model and static
  // files. Errors come back as {"code","message"} with a 4xx/5xx status.
  HttpResponse Handle(std::string_view method, std::string_view path,
                      std::string_view body) const;

  std::string HealthJson() const;
  std::string ModelJson() const;
  const ModelBundle& bundle() const { return bundle_; }
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  HttpResponse ServeStatic(std::string_view path) const;

  ModelBundle bundle_;
  ServiceConfig config_;
  std::string fingerprint_;
};

// HTTP status for a library error code.
int HttpStatusOf(ErrorCode code);
std::string ErrorJson(std::string_view code, std::string_view message);
std::string_view ErrorCodeName(ErrorCode code);

}  // namespace repro::service
