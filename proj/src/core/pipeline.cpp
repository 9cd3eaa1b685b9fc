#include "repro/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <string>
#include <thread>

#include <json.hpp>

#include "repro/error.hpp"

namespace repro::pipeline {

using nlohmann::json;

std::string QuestionJson(const ingest::QuestionPost& post) {
  json snippets = json::array();
  json loc = json::array();
  for (const auto& block : ingest::ExtractCodeBlocks(post.body_html)) {
    snippets.push_back(block);
    loc.push_back(ingest::CountLoc(block));
  }
  return json{{"id", post.id},
              {"title", post.title},
              {"tags", post.tags},
              {"snippets", snippets},
              {"loc", loc},
              {"score", post.score},
              {"answer_count", post.answer_count},
              {"has_accepted_answer", post.has_accepted_answer},
              {"question_text", ingest::QuestionProse(post)}}
      .dump();
}

IngestReport IngestDump(std::istream& dump, std::ostream& jsonl, const IngestOptions& options) {
  IngestReport report;
  report.tag = options.tag;
  report.keywords = options.keywords.empty() ? ingest::DefaultIssueKeywords() : options.keywords;
  ingest::DumpOptions dopt;
  dopt.tag_filter = options.tag;
  dopt.buffer_size = options.buffer_size;
  report.parse = ingest::ParsePostsDump(dump, dopt, [&](ingest::QuestionPost&& post) {
    if (options.filter_issues && !ingest::FilterIssueQuestion(post, report.keywords)) return;
    jsonl << QuestionJson(post) << '\n';
    ++report.retained;
  });
  if (!jsonl) Fail(ErrorCode::kIo, "failed writing questions");
  return report;
}

std::vector<QuestionRecord> ReadQuestions(std::istream& in) {
  std::vector<QuestionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      QuestionRecord q;
      q.id = j.at("id").get<std::int64_t>();
      for (const auto& s : j.at("snippets")) q.snippets.push_back(s.get<std::string>());
      q.question_text = j.value("question_text", std::string());
      if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
        q.label = ParseLabel(it->get<std::string>());
      }
      out.push_back(std::move(q));
    } catch (const json::exception& e) {
      Fail(ErrorCode::kParse, "questions line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      Fail(ErrorCode::kParse, "questions line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (in.bad()) Fail(ErrorCode::kIo, "failed reading questions");
  return out;
}

std::string ExtractionToJson(const analyzer::FeatureExtraction& x) {
  const auto& f = x.features;
  const auto& s = x.summary;
  json diagnostics = json::array();
  for (const auto& d : x.compile.diagnostics) {
    diagnostics.push_back({{"line", d.line}, {"message", d.message}});
  }
  const Row row = Encode(f);
  return json{{"features",
               {{"loc", f.loc},
                {"has_method", f.has_method},
                {"has_main", f.has_main},
                {"has_class", f.has_class},
                {"parsable", f.parsable},
                {"compilable", f.compilable},
                {"native_import", static_cast<int>(f.native_import)},
                {"external_import", static_cast<int>(f.external_import)},
                {"exception_handling", static_cast<int>(f.exception_handling)}}},
              {"row", std::vector<double>(row.begin(), row.end())},
              {"summary",
               {{"parse_ok", s.parse_ok},
                {"wrap_level", analyzer::ToString(s.wrap_level)},
                {"from_token_scan", s.from_token_scan},
                {"class_count", s.class_count},
                {"method_count", s.method_count},
                {"has_main", s.has_main},
                {"imports", s.imports},
                {"try_catch_count", s.try_catch_count},
                {"throws_declared", s.throws_declared},
                {"referenced_types", s.referenced_types},
                {"defined_types", s.defined_types},
                {"invoked_callees", s.invoked_callees}}},
              {"imports",
               {{"missing_jdk_imports", x.imports.missing_jdk_imports},
                {"unresolved_types", x.imports.unresolved_types}}},
              {"compile",
               {{"status", analyzer::ToString(x.compile.status)},
                {"note", x.compile.note},
                {"diagnostics", diagnostics}}}}
      .dump();
}

FeatureReport ExtractDataset(const std::vector<QuestionRecord>& questions,
                             const FeatureOptions& options) {
  struct Job {
    std::int64_t question_id;
    std::size_t index;
    std::optional<Label> label;
    std::string text;
    std::string prose;
  };
  FeatureReport report;
  report.questions = questions.size();
  std::vector<Job> jobs;
  for (const auto& q : questions) {
    std::vector<std::string> blocks;
    for (const auto& s : q.snippets) {
      if (ingest::CountLoc(s) > 0) {
        blocks.push_back(s);
      } else {
        ++report.skipped_blank;
      }
    }
    if (blocks.empty()) continue;
    if (options.combine) {
      jobs.push_back({q.id, 0, q.label, ingest::CombineSnippets(blocks), q.question_text});
    } else {
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        jobs.push_back({q.id, i, q.label, blocks[i], q.question_text});
      }
    }
  }

  report.items.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size() || failed.load()) return;
      try {
        auto& item = report.items[i];
        item.question_id = jobs[i].question_id;
        item.snippet_index = jobs[i].index;
        item.label = jobs[i].label;
        item.extraction = analyzer::ExtractFeatures(jobs[i].text, jobs[i].prose, options.analyzer);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(options.jobs, static_cast<int>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (const auto& item : report.items) {
    if (item.extraction.compile.status == analyzer::CompileStatus::kUnavailable) {
      ++report.compile_unavailable;
    }
    if (!item.label) {
      ++report.skipped_unlabeled;
      continue;
    }
    LabeledExample e;
    e.features = Encode(item.extraction.features);
    e.label = *item.label;
    e.source_id = item.question_id;
    report.dataset.examples.push_back(e);
  }
  return report;
}

}  // namespace repro::pipeline
