#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "repro/analyzer.hpp"
#include "repro/dataset.hpp"
#include "repro/ingest.hpp"

// Glue between the stages: dump -> questions JSONL -> labeled feature rows.
namespace repro::pipeline {

struct IngestOptions {
  std::string tag = "java";
  std::vector<std::string> keywords;  // empty: ingest::DefaultIssueKeywords()
  bool filter_issues = true;
  std::size_t buffer_size = 64 * 1024;
};

struct IngestReport {
  ingest::ParseStats parse;
  std::size_t retained = 0;
  std::string tag;
  std::vector<std::string> keywords;
};

// One JSON object per retained question:
// {id, title, tags, snippets, loc, score, answer_count, has_accepted_answer,
//  question_text}
IngestReport IngestDump(std::istream& dump, std::ostream& jsonl, const IngestOptions& options);
std::string QuestionJson(const ingest::QuestionPost& post);

struct QuestionRecord {
  std::int64_t id = 0;
  std::vector<std::string> snippets;
  std::string question_text;
  std::optional<Label> label;
};

// Reads the JSONL written by IngestDump. An optional "label" field
// ("reproducible"/"irreproducible") carries the manual annotation. Throws
// kParse with the line number on malformed input.
std::vector<QuestionRecord> ReadQuestions(std::istream& in);

struct FeatureOptions {
  analyzer::AnalyzerConfig analyzer;
  bool combine = false;  // one row per question instead of one per snippet
  int jobs = 1;
};

struct FeatureItem {
  std::int64_t question_id = 0;
  std::size_t snippet_index = 0;  // 0 when combined
  std::optional<Label> label;
  analyzer::FeatureExtraction extraction;
};

struct FeatureReport {
  std::vector<FeatureItem> items;  // every analysed snippet, labeled or not
  Dataset dataset;                 // labeled items only, source_id = question id
  std::size_t questions = 0;
  std::size_t skipped_unlabeled = 0;
  std::size_t skipped_blank = 0;
  std::size_t compile_unavailable = 0;
};

// {"features":{name:value}, "row":[9], "summary":{...}, "imports":{...},
//  "compile":{"status","note","diagnostics"}}
std::string ExtractionToJson(const analyzer::FeatureExtraction& extraction);

FeatureReport ExtractDataset(const std::vector<QuestionRecord>& questions,
                             const FeatureOptions& options);

}  // namespace repro::pipeline
