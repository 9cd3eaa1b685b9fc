#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace repro::ingest {

struct QuestionPost {
  std::int64_t id = 0;
  std::string title;
  std::string body_html;  // HTML; code inside still entity-encoded
  std::vector<std::string> tags;
  std::int64_t score = 0;
  std::int64_t answer_count = 0;
  bool has_accepted_answer = false;
  std::string created_at;
};

struct CodeSnippet {
  std::int64_t question_id = 0;
  std::size_t index = 0;
  std::string text;
  int loc = 0;
};

// error, issue, exception, fix, then a few extra defaults.
const std::vector<std::string>& DefaultIssueKeywords();

struct ParseStats {
  std::size_t rows_seen = 0;
  std::size_t yielded = 0;
  std::size_t warnings = 0;
};

struct DumpOptions {
  std::string tag_filter;
  std::size_t buffer_size = 64 * 1024;
};

// Streams `row` elements out of a Posts.xml-style dump. Only questions
// (PostTypeId=1) carrying `tag_filter` reach `sink`. Malformed rows are
// skipped and counted in ParseStats::warnings; a stream that fails mid-read
// raises Error(kIo).
ParseStats ParsePostsDump(std::istream& source, const DumpOptions& options,
                          const std::function<void(QuestionPost&&)>& sink);

std::vector<QuestionPost> ParsePostsDump(std::istream& source,
                                         const DumpOptions& options,
                                         ParseStats* stats = nullptr);

// Decodes &lt; &gt; &amp; &quot; &apos; and numeric references; any other
// entity passes through verbatim.
std::string DecodeEntities(std::string_view text);
std::string EncodeEntities(std::string_view text);

// Texts of <code> blocks nested in <pre>, in document order, entities decoded.
std::vector<std::string> ExtractCodeBlocks(std::string_view body_html);

// Body with tags stripped and entities decoded.
std::string BodyText(std::string_view body_html);

// Title plus body text, code blocks excluded; the question prose used for
// exception-token detection downstream.
std::string QuestionProse(const QuestionPost& post);

int CountLoc(std::string_view text);

// Case-insensitive whole-word keyword match over title + body text, and at
// least one extracted code block.
bool FilterIssueQuestion(const QuestionPost& post,
                         const std::vector<std::string>& keywords);

// Joins with one blank line; throws Error(kEmptySnippetSet) on empty input.
std::string CombineSnippets(const std::vector<std::string>& snippets);

std::vector<CodeSnippet> SnippetsOf(const QuestionPost& post);

}  // namespace repro::ingest
