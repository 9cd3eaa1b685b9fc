#include <doctest.h>

#include <random>
#include <sstream>

#include "repro/error.hpp"
#include "repro/ingest.hpp"
#include "repro/rng.hpp"

using namespace repro;
using namespace repro::ingest;

namespace {

std::string Row(int id, int type, const std::string& tags, const std::string& title,
                const std::string& body_encoded, const std::string& extra = "") {
  return "  <row Id=\"" + std::to_string(id) + "\" PostTypeId=\"" + std::to_string(type) +
         "\" CreationDate=\"2020-01-0" + std::to_string(id % 9 + 1) +
         "T10:00:00.000\" Score=\"3\" Body=\"" + body_encoded + "\" Title=\"" + title +
         "\" Tags=\"" + tags + "\" AnswerCount=\"2\"" + extra + " />\n";
}

std::string Dump(const std::vector<std::string>& rows) {
  std::string s = "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<posts>\n";
  for (const auto& r : rows) s += r;
  return s + "</posts>\n";
}

const std::string kCodeBody =
    "&lt;p&gt;I get an error&lt;/p&gt;&lt;pre&gt;&lt;code&gt;int x = 1;&#xA;x++;&lt;/code&gt;&lt;/pre&gt;";

std::vector<QuestionPost> ParseAll(const std::string& xml, const std::string& tag,
                                   ParseStats* stats = nullptr, std::size_t buffer = 64 * 1024) {
  std::istringstream in(xml);
  DumpOptions o;
  o.tag_filter = tag;
  o.buffer_size = buffer;
  return ParsePostsDump(in, o, stats);
}

}  // namespace

TEST_CASE("single tagged question is yielded with its fields") {
  const auto xml =
      Dump({Row(7, 1, "&lt;java&gt;&lt;io&gt;", "Why does this fail", kCodeBody,
                " AcceptedAnswerId=\"9\"")});
  ParseStats stats;
  const auto posts = ParseAll(xml, "java", &stats);
  REQUIRE(posts.size() == 1);
  const auto& p = posts[0];
  CHECK(p.id == 7);
  CHECK(p.title == "Why does this fail");
  CHECK(p.tags == std::vector<std::string>{"java", "io"});
  CHECK(p.score == 3);
  CHECK(p.answer_count == 2);
  CHECK(p.has_accepted_answer);
  CHECK(stats.warnings == 0);
}

TEST_CASE("answers are not yielded") {
  const auto xml = Dump({Row(2, 2, "&lt;java&gt;", "", kCodeBody)});
  ParseStats stats;
  CHECK(ParseAll(xml, "java", &stats).empty());
  CHECK(stats.yielded == 0);
}

TEST_CASE("three questions, one carrying the filter tag") {
  const auto xml = Dump({Row(1, 1, "&lt;python&gt;", "a", kCodeBody),
                         Row(2, 1, "&lt;java&gt;&lt;swing&gt;", "b", kCodeBody),
                         Row(3, 1, "&lt;c#&gt;", "c", kCodeBody)});
  ParseStats stats;
  const auto posts = ParseAll(xml, "java", &stats);
  REQUIRE(posts.size() == 1);
  CHECK(posts[0].id == 2);
  CHECK(stats.warnings == 0);
  CHECK(stats.rows_seen == 3);
}

TEST_CASE("malformed rows are skipped and counted") {
  std::string xml = Dump({Row(1, 1, "&lt;java&gt;", "ok", kCodeBody),
                          "  <row Id=\"2\" PostTypeId=\"1\" Body=\"unterminated />\n",
                          Row(3, 1, "&lt;java&gt;", "ok too", kCodeBody)});
  ParseStats stats;
  const auto posts = ParseAll(xml, "java", &stats);
  CHECK(stats.warnings >= 1);
  CHECK(!posts.empty());
  CHECK(posts.front().id == 1);
}

TEST_CASE("streaming result does not depend on the buffer size") {
  std::vector<std::string> rows;
  for (int i = 1; i <= 40; ++i) {
    rows.push_back(Row(i, i % 3 == 0 ? 2 : 1, i % 2 ? "&lt;java&gt;" : "&lt;kotlin&gt;",
                       "title " + std::to_string(i), kCodeBody));
  }
  const auto xml = Dump(rows);
  const auto reference = ParseAll(xml, "java", nullptr, 1 << 16);
  CHECK(!reference.empty());
  for (std::size_t buffer : {1, 2, 3, 7, 64, 333, 4096}) {
    const auto got = ParseAll(xml, "java", nullptr, buffer);
    REQUIRE(got.size() == reference.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].id == reference[i].id);
      CHECK(got[i].body_html == reference[i].body_html);
      CHECK(got[i].title == reference[i].title);
    }
  }
}

TEST_CASE("an unreadable stream is fatal") {
  std::istringstream in("<posts>");
  in.setstate(std::ios::badbit);
  DumpOptions o;
  o.tag_filter = "java";
  CHECK_THROWS_AS(ParsePostsDump(in, o), Error);
}

TEST_CASE("code blocks come from pre>code only, in order") {
  CHECK(ExtractCodeBlocks("<pre><code>int x;</code></pre>") == std::vector<std::string>{"int x;"});
  CHECK(ExtractCodeBlocks("use <code>foo()</code> here").empty());
  const auto two = ExtractCodeBlocks(
      "<p>a</p><pre class=\"lang-java\"><code>first();</code></pre><p>b</p><pre><code>second();</code></pre>");
  CHECK(two == std::vector<std::string>{"first();", "second();"});
  CHECK(ExtractCodeBlocks("<pre><code>if (a &lt; b &amp;&amp; c &gt; d) {}</code></pre>") ==
        std::vector<std::string>{"if (a < b && c > d) {}"});
  CHECK(ExtractCodeBlocks("<pre><code>unterminated").empty());
}

TEST_CASE("entity decoding") {
  CHECK(DecodeEntities("&lt;&gt;&amp;&quot;&apos;") == "<>&\"'");
  CHECK(DecodeEntities("a&#xA;b&#10;c") == "a\nb\nc");
  CHECK(DecodeEntities("&nbsp;&unknown;") == "&nbsp;&unknown;");
}

TEST_CASE("extract after encode is idempotent on extracted text") {
  Rng rng(5);
  const std::string alphabet = "ab<>&\"' \n;{}()x=1";
  for (int trial = 0; trial < 200; ++trial) {
    std::string code;
    const auto n = 1 + rng.Below(40);
    for (std::uint64_t i = 0; i < n; ++i) code.push_back(alphabet[rng.Below(alphabet.size())]);
    const auto once = ExtractCodeBlocks("<pre><code>" + EncodeEntities(code) + "</code></pre>");
    REQUIRE(once.size() == 1);
    const auto twice = ExtractCodeBlocks("<pre><code>" + EncodeEntities(once[0]) + "</code></pre>");
    REQUIRE(twice.size() == 1);
    CHECK(twice[0] == once[0]);
    CHECK(once[0] == code);
  }
}

TEST_CASE("LOC counts non-blank lines") {
  CHECK(CountLoc("a;\n\n  \nb;\n") == 2);
  CHECK(CountLoc("") == 0);
  CHECK(CountLoc("\t\n \r\n") == 0);
  CHECK(CountLoc("// comment\nx();") == 2);
}

namespace {
QuestionPost Post(const std::string& title, const std::string& body) {
  QuestionPost p;
  p.id = 1;
  p.title = title;
  p.body_html = body;
  p.tags = {"java"};
  return p;
}
}  // namespace

TEST_CASE("issue filter") {
  const auto& kw = DefaultIssueKeywords();
  CHECK(kw.size() >= 4);
  CHECK(kw[0] == "error");
  CHECK(kw[1] == "issue");
  CHECK(kw[2] == "exception");
  CHECK(kw[3] == "fix");
  const std::string code = "<pre><code>x();</code></pre>";
  CHECK(FilterIssueQuestion(Post("Help", "<p>I get a NullPointerException error</p>" + code), kw));
  CHECK_FALSE(FilterIssueQuestion(Post("Style", "<p>How to write idiomatic code?</p>" + code), kw));
  CHECK_FALSE(FilterIssueQuestion(Post("Error", "<p>an error, no code</p>"), kw));
  // whole words only
  CHECK_FALSE(FilterIssueQuestion(Post("prefix", "<p>a prefix question</p>" + code), {"fix"}));
  CHECK(FilterIssueQuestion(Post("How to FIX this", "<p>x</p>" + code), {"fix"}));
  // title counts
  CHECK(FilterIssueQuestion(Post("Crash on start", "<p>see below</p>" + code), kw));
}

TEST_CASE("issue filter is monotone in the keyword list") {
  Rng rng(11);
  const std::vector<std::string> words = {"error", "fix", "null", "crash", "thread", "list",
                                          "wrong", "loop",  "io",   "swing"};
  const std::string code = "<pre><code>x();</code></pre>";
  for (int trial = 0; trial < 300; ++trial) {
    std::string body = "<p>";
    for (int i = 0; i < 6; ++i) body += words[rng.Below(words.size())] + " ";
    body += "</p>" + code;
    const auto post = Post("question", body);
    std::vector<std::string> kw = {words[rng.Below(words.size())]};
    bool before = FilterIssueQuestion(post, kw);
    for (int add = 0; add < 4; ++add) {
      kw.push_back(words[rng.Below(words.size())]);
      const bool after = FilterIssueQuestion(post, kw);
      CHECK((!before || after));
      before = after;
    }
  }
}

TEST_CASE("combine snippets") {
  CHECK(CombineSnippets({"a;"}) == "a;");
  CHECK(CombineSnippets({"a;", "b;"}) == "a;\n\nb;");
  CHECK(CountLoc(CombineSnippets({"a;", "b;"})) == 2);
  CHECK(CountLoc(CombineSnippets({"1\n2", "1\n2\n3", "1\n2\n3\n4"})) == 9);
  try {
    CombineSnippets({});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptySnippetSet);
  }
}

TEST_CASE("combine keeps LOC additive on random lists") {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> blocks;
    int expected = 0;
    const auto n = 1 + rng.Below(5);
    for (std::uint64_t b = 0; b < n; ++b) {
      std::string s;
      const auto lines = 1 + rng.Below(6);
      for (std::uint64_t l = 0; l < lines; ++l) {
        if (rng.Bernoulli(0.3)) {
          s += rng.Bernoulli(0.5) ? "   " : "";
        } else {
          s += "stmt();";
          ++expected;
        }
        if (l + 1 < lines) s += "\n";
      }
      blocks.push_back(s);
    }
    CHECK(CountLoc(CombineSnippets(blocks)) == expected);
  }
}

TEST_CASE("question prose excludes code") {
  QuestionPost p = Post("Title here", "<p>I see an IOException</p><pre><code>int secret = 1;</code></pre>");
  const auto prose = QuestionProse(p);
  CHECK(prose.find("Title here") != std::string::npos);
  CHECK(prose.find("IOException") != std::string::npos);
  CHECK(prose.find("secret") == std::string::npos);
}
