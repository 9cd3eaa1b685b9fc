#include "repro/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <set>
#include <utility>

#include "repro/error.hpp"

namespace repro::ingest {

namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsWordChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string ToLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void AppendUtf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Case-insensitive find of an ASCII needle.
std::size_t FindNoCase(std::string_view hay, std::string_view needle,
                       std::size_t from) {
  if (needle.empty() || hay.size() < needle.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (std::tolower(static_cast<unsigned char>(hay[i + j])) !=
          std::tolower(static_cast<unsigned char>(needle[j]))) {
        match = false;
        break;
      }
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

// Finds an opening tag `<name` followed by '>' , '/' or whitespace.
std::size_t FindOpenTag(std::string_view html, std::string_view name,
                        std::size_t from) {
  const std::string open = "<" + std::string(name);
  std::size_t pos = from;
  while ((pos = FindNoCase(html, open, pos)) != std::string_view::npos) {
    const std::size_t after = pos + open.size();
    if (after < html.size() &&
        (html[after] == '>' || html[after] == '/' || IsSpace(html[after]))) {
      return pos;
    }
    pos = after;
  }
  return std::string_view::npos;
}

std::string StripTags(std::string_view html) {
  std::string out;
  out.reserve(html.size());
  bool in_tag = false;
  for (char c : html) {
    if (in_tag) {
      if (c == '>') in_tag = false;
    } else if (c == '<') {
      in_tag = true;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

template <typename T>
std::optional<T> ParseInt(std::string_view s) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::vector<std::string> ParseTags(std::string_view raw) {
  std::vector<std::string> tags;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tags.push_back(ToLower(current));
    current.clear();
  };
  for (char c : raw) {
    if (c == '<' || c == '>' || c == '|') {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  return tags;
}

struct Attribute {
  std::string name;
  std::string value;
};

// Parses `<row a="1" b='2'/>` (also `<row ...>`). Returns nullopt when the
// attribute syntax is malformed.
std::optional<std::vector<Attribute>> ParseRowAttributes(std::string_view tag) {
  std::size_t i = 4;  // past "<row"
  std::vector<Attribute> attrs;
  const std::size_t end = tag.size() - 1;  // index of '>'
  while (i < end) {
    while (i < end && IsSpace(tag[i])) ++i;
    if (i >= end) break;
    if (tag[i] == '/') {
      if (i + 1 != end) return std::nullopt;
      break;
    }
    const std::size_t name_start = i;
    while (i < end && (std::isalnum(static_cast<unsigned char>(tag[i])) ||
                       tag[i] == '_' || tag[i] == ':' || tag[i] == '-' ||
                       tag[i] == '.')) {
      ++i;
    }
    if (i == name_start) return std::nullopt;
    std::string name(tag.substr(name_start, i - name_start));
    while (i < end && IsSpace(tag[i])) ++i;
    if (i >= end || tag[i] != '=') return std::nullopt;
    ++i;
    while (i < end && IsSpace(tag[i])) ++i;
    if (i >= end || (tag[i] != '"' && tag[i] != '\'')) return std::nullopt;
    const char quote = tag[i++];
    const std::size_t value_start = i;
    while (i < end && tag[i] != quote) ++i;
    if (i >= end) return std::nullopt;
    attrs.push_back({std::move(name),
                     DecodeEntities(tag.substr(value_start, i - value_start))});
    ++i;
    if (i < end && !IsSpace(tag[i]) && tag[i] != '/') return std::nullopt;
  }
  return attrs;
}

enum class RowOutcome { kYield, kFiltered, kMalformed };

RowOutcome ConvertRow(std::string_view tag, const std::string& tag_filter,
                      QuestionPost& post) {
  auto attrs = ParseRowAttributes(tag);
  if (!attrs) return RowOutcome::kMalformed;
  auto get = [&](std::string_view name) -> const std::string* {
    for (const auto& a : *attrs) {
      if (a.name == name) return &a.value;
    }
    return nullptr;
  };
  const std::string* type = get("PostTypeId");
  const std::string* id = get("Id");
  if (type == nullptr || id == nullptr) return RowOutcome::kMalformed;
  auto type_value = ParseInt<int>(*type);
  auto id_value = ParseInt<std::int64_t>(*id);
  if (!type_value || !id_value || *id_value <= 0) return RowOutcome::kMalformed;
  if (*type_value != 1) return RowOutcome::kFiltered;

  const std::string* tags = get("Tags");
  if (tags == nullptr) return RowOutcome::kMalformed;
  post.tags = ParseTags(*tags);
  if (post.tags.empty()) return RowOutcome::kMalformed;
  if (std::find(post.tags.begin(), post.tags.end(), ToLower(tag_filter)) ==
      post.tags.end()) {
    return RowOutcome::kFiltered;
  }

  post.id = *id_value;
  if (const auto* v = get("Title")) post.title = *v;
  if (const auto* v = get("Body")) post.body_html = *v;
  if (const auto* v = get("CreationDate")) post.created_at = *v;
  if (const auto* v = get("Score")) {
    auto s = ParseInt<std::int64_t>(*v);
    if (!s) return RowOutcome::kMalformed;
    post.score = *s;
  }
  if (const auto* v = get("AnswerCount")) {
    auto s = ParseInt<std::int64_t>(*v);
    if (!s || *s < 0) return RowOutcome::kMalformed;
    post.answer_count = *s;
  }
  post.has_accepted_answer = get("AcceptedAnswerId") != nullptr;
  return RowOutcome::kYield;
}

bool IsRowTag(std::string_view tag) {
  return tag.size() >= 5 && tag.substr(0, 4) == "<row" &&
         (IsSpace(tag[4]) || tag[4] == '/' || tag[4] == '>');
}

// A truncated or interrupted row element (no closing '>').
bool LooksLikeRow(std::string_view text) {
  return text.size() >= 5 && text.substr(0, 4) == "<row" && IsSpace(text[4]);
}

}  // namespace

const std::vector<std::string>& DefaultIssueKeywords() {
  static const std::vector<std::string> kKeywords = {
      "error", "issue", "exception", "fix",
      "fail",  "crash", "bug",       "wrong", "unexpected"};
  return kKeywords;
}

ParseStats ParsePostsDump(std::istream& source, const DumpOptions& options,
                          const std::function<void(QuestionPost&&)>& sink) {
  ParseStats stats;
  const std::size_t chunk = std::max<std::size_t>(options.buffer_size, 1);
  std::vector<char> buffer(chunk);
  std::string pending;

  auto handle_tag = [&](std::string_view tag) {
    if (!IsRowTag(tag)) return;
    ++stats.rows_seen;
    QuestionPost post;
    switch (ConvertRow(tag, options.tag_filter, post)) {
      case RowOutcome::kYield:
        ++stats.yielded;
        sink(std::move(post));
        break;
      case RowOutcome::kFiltered:
        break;
      case RowOutcome::kMalformed:
        ++stats.warnings;
        break;
    }
  };

  // Consumes every complete `<...>` tag in `pending`; returns when the
  // remainder holds only a partial tag.
  auto drain = [&](bool at_eof) {
    std::size_t pos = 0;
    while (true) {
      const std::size_t open = pending.find('<', pos);
      if (open == std::string::npos) {
        pos = pending.size();
        break;
      }
      char quote = 0;
      std::size_t close = std::string::npos;
      for (std::size_t i = open + 1; i < pending.size(); ++i) {
        const char c = pending[i];
        if (quote != 0) {
          if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
          quote = c;
        } else if (c == '<') {
          // A new tag started before this one closed.
          close = i;
          break;
        } else if (c == '>') {
          close = i + 1;
          break;
        }
      }
      if (close == std::string::npos) {
        if (at_eof) {
          if (LooksLikeRow(std::string_view(pending).substr(open))) {
            ++stats.rows_seen;
            ++stats.warnings;
          }
          pos = pending.size();
        } else {
          pos = open;
        }
        break;
      }
      std::string_view tag(pending.data() + open, close - open);
      if (tag.back() == '>') {
        handle_tag(tag);
      } else if (LooksLikeRow(tag)) {
        ++stats.rows_seen;
        ++stats.warnings;
      }
      pos = close;
    }
    pending.erase(0, pos);
  };

  while (true) {
    source.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    const auto got = source.gcount();
    if (source.bad()) Fail(ErrorCode::kIo, "read error while streaming posts dump");
    if (got > 0) {
      pending.append(buffer.data(), static_cast<std::size_t>(got));
      drain(false);
    }
    if (!source) break;
  }
  drain(true);
  return stats;
}

std::vector<QuestionPost> ParsePostsDump(std::istream& source,
                                         const DumpOptions& options,
                                         ParseStats* stats) {
  std::vector<QuestionPost> posts;
  auto s = ParsePostsDump(source, options,
                          [&](QuestionPost&& p) { posts.push_back(std::move(p)); });
  if (stats != nullptr) *stats = s;
  return posts;
}

std::string DecodeEntities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out.push_back(text[i++]);
      continue;
    }
    const std::size_t semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(text[i++]);
      continue;
    }
    const std::string_view name = text.substr(i + 1, semi - i - 1);
    std::optional<std::uint32_t> cp;
    if (name == "lt") cp = '<';
    else if (name == "gt") cp = '>';
    else if (name == "amp") cp = '&';
    else if (name == "quot") cp = '"';
    else if (name == "apos") cp = '\'';
    else if (name.size() > 1 && name[0] == '#') {
      const bool hex = name[1] == 'x' || name[1] == 'X';
      const std::string_view digits = name.substr(hex ? 2 : 1);
      std::uint32_t value = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(),
                                       value, hex ? 16 : 10);
      if (ec == std::errc() && ptr == digits.data() + digits.size() &&
          !digits.empty() && value <= 0x10FFFF) {
        cp = value;
      }
    }
    if (!cp) {
      out.push_back(text[i++]);
      continue;
    }
    AppendUtf8(out, *cp);
    i = semi + 1;
  }
  return out;
}

std::string EncodeEntities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::vector<std::string> ExtractCodeBlocks(std::string_view body_html) {
  std::vector<std::string> blocks;
  std::size_t pos = 0;
  while ((pos = FindOpenTag(body_html, "pre", pos)) != std::string_view::npos) {
    const std::size_t pre_open_end = body_html.find('>', pos);
    if (pre_open_end == std::string_view::npos) break;
    const std::size_t pre_close = FindNoCase(body_html, "</pre>", pre_open_end);
    if (pre_close == std::string_view::npos) break;
    const std::string_view inner =
        body_html.substr(pre_open_end + 1, pre_close - pre_open_end - 1);

    std::string code;
    bool found = false;
    std::size_t c = 0;
    while ((c = FindOpenTag(inner, "code", c)) != std::string_view::npos) {
      const std::size_t code_open_end = inner.find('>', c);
      if (code_open_end == std::string_view::npos) break;
      const std::size_t code_close = FindNoCase(inner, "</code>", code_open_end);
      if (code_close == std::string_view::npos) break;
      code += StripTags(inner.substr(code_open_end + 1, code_close - code_open_end - 1));
      found = true;
      c = code_close + 7;
    }
    if (found) blocks.push_back(DecodeEntities(code));
    pos = pre_close + 6;
  }
  return blocks;
}

std::string BodyText(std::string_view body_html) {
  // Block-level tags become line breaks so words on either side stay apart.
  static const std::set<std::string> kBlock = {"p",  "pre", "div", "br", "li", "ul", "ol",
                                               "h1", "h2",  "h3",  "h4", "h5", "h6", "blockquote",
                                               "hr", "table", "tr", "td", "th"};
  std::string spaced;
  spaced.reserve(body_html.size());
  std::size_t i = 0;
  while (i < body_html.size()) {
    const char c = body_html[i];
    if (c != '<') {
      spaced.push_back(c);
      ++i;
      continue;
    }
    const std::size_t end = body_html.find('>', i);
    if (end == std::string_view::npos) break;
    std::size_t n = i + 1;
    if (n < end && body_html[n] == '/') ++n;
    std::string name;
    while (n < end && std::isalnum(static_cast<unsigned char>(body_html[n]))) {
      name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(body_html[n]))));
      ++n;
    }
    if (kBlock.count(name)) spaced.push_back('\n');
    i = end + 1;
  }
  return DecodeEntities(spaced);
}

std::string QuestionProse(const QuestionPost& post) {
  std::string without_code;
  std::string_view html = post.body_html;
  std::size_t pos = 0;
  std::size_t copied = 0;
  while ((pos = FindOpenTag(html, "pre", pos)) != std::string_view::npos) {
    const std::size_t close = FindNoCase(html, "</pre>", pos);
    if (close == std::string_view::npos) break;
    without_code.append(html.substr(copied, pos - copied));
    without_code.push_back('\n');
    copied = close + 6;
    pos = copied;
  }
  without_code.append(html.substr(copied));
  std::string prose = post.title;
  prose.push_back('\n');
  prose += BodyText(without_code);
  return prose;
}

int CountLoc(std::string_view text) {
  int loc = 0;
  bool non_blank = false;
  for (char c : text) {
    if (c == '\n') {
      if (non_blank) ++loc;
      non_blank = false;
    } else if (!IsSpace(c)) {
      non_blank = true;
    }
  }
  if (non_blank) ++loc;
  return loc;
}

bool FilterIssueQuestion(const QuestionPost& post,
                         const std::vector<std::string>& keywords) {
  if (ExtractCodeBlocks(post.body_html).empty()) return false;
  const std::string text = ToLower(post.title + "\n" + BodyText(post.body_html));
  for (const auto& raw : keywords) {
    const std::string kw = ToLower(raw);
    if (kw.empty()) continue;
    std::size_t pos = 0;
    while ((pos = text.find(kw, pos)) != std::string::npos) {
      const bool left_ok = pos == 0 || !IsWordChar(text[pos - 1]);
      const std::size_t end = pos + kw.size();
      const bool right_ok = end >= text.size() || !IsWordChar(text[end]);
      if (left_ok && right_ok) return true;
      ++pos;
    }
  }
  return false;
}

std::string CombineSnippets(const std::vector<std::string>& snippets) {
  if (snippets.empty()) {
    Fail(ErrorCode::kEmptySnippetSet, "cannot combine an empty snippet list");
  }
  std::string out = snippets.front();
  for (std::size_t i = 1; i < snippets.size(); ++i) {
    out += "\n\n";
    out += snippets[i];
  }
  return out;
}

std::vector<CodeSnippet> SnippetsOf(const QuestionPost& post) {
  std::vector<CodeSnippet> out;
  auto blocks = ExtractCodeBlocks(post.body_html);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const int loc = CountLoc(blocks[i]);
    if (loc == 0) continue;
    out.push_back({post.id, i, std::move(blocks[i]), loc});
  }
  return out;
}

}  // namespace repro::ingest
