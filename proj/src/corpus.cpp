#include "absorb/corpus.hpp"

#include <regex>
#include <unordered_map>

#include "absorb/error.hpp"
#include "absorb/hash.hpp"
#include "absorb/text.hpp"

namespace absorb::corpus {

namespace {

constexpr std::string_view kMarker = "- Wikipedia";

bool iso8601(const std::string& s) {
  static const std::regex re(
      R"(^\d{4}-\d{2}-\d{2}(T\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:\d{2})?)?$)");
  return std::regex_match(s, re);
}

std::optional<std::string> optional_string(const Json& rec, const char* key, const std::string& where) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw_data(where + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

std::string RawDocument::rendered_header() const {
  if (header) return *header;
  return "<" + title + " - Wikipedia>";
}

std::string RawDocument::rendered() const { return rendered_header() + " " + body; }

std::string parse_header(std::string_view header) {
  if (header.find('\n') != std::string_view::npos) throw_data("header must be a single line");
  std::string_view s = text::trim(header);
  bool stripped = false;
  while (s.size() >= 2 && s.front() == '<' && s.back() == '>') {
    stripped = true;
    s = text::trim(s.substr(1, s.size() - 2));
    if (s.size() >= kMarker.size() && s.substr(s.size() - kMarker.size()) == kMarker) {
      std::size_t cut = s.size() - kMarker.size();
      if (cut == 0 || s[cut - 1] == ' ' || s[cut - 1] == '\t') s = text::trim(s.substr(0, cut));
    }
  }
  if (s.empty()) throw_data(stripped ? "empty title after stripping header" : "empty header");
  return std::string(s);
}

std::string content_id(std::string_view title, std::string_view body) {
  std::string bytes;
  bytes.reserve(title.size() + body.size() + 1);
  bytes.append(title).append("\n").append(body);
  return sha256_hex(bytes).substr(0, 16);
}

RawDocument document_from_json(const Json& rec, const std::string& where) {
  if (!rec.is_object()) throw_data(where + ": record must be a JSON object");
  if (auto s = optional_string(rec, "body", where); !s) throw_data(where + ": missing 'body'");
  for (const char* key : {"title", "header", "id", "source", "collected_at"}) (void)optional_string(rec, key, where);

  RawDocument doc;
  auto raw_title = optional_string(rec, "title", where);
  auto raw_header = optional_string(rec, "header", where);
  if (raw_header) {
    std::string h(text::trim(*raw_header));
    if (h.find('\n') != std::string::npos) throw_data(where + ": header must be a single line");
    if (!text::valid_utf8(h)) throw_data(where + ": header is not valid UTF-8");
    doc.header = h;
  }
  if (raw_title) {
    if (raw_title->find('\n') != std::string::npos) throw_data(where + ": title must not contain a newline");
    if (!text::valid_utf8(*raw_title)) throw_data(where + ": title is not valid UTF-8");
    doc.title = text::normalize_whitespace(*raw_title);
    static constexpr std::string_view kSuffix = " - Wikipedia";
    if (doc.title.size() > kSuffix.size() && doc.title.ends_with(kSuffix)) {
      doc.title = std::string(text::trim(std::string_view(doc.title).substr(0, doc.title.size() - kSuffix.size())));
    }
  } else if (doc.header) {
    try {
      doc.title = text::normalize_whitespace(parse_header(*doc.header));
    } catch (const Error& e) {
      throw_data(where + ": " + e.what());
    }
  } else {
    throw_data(where + ": missing 'title'");
  }
  if (doc.title.empty()) throw_data(where + ": empty title");

  std::string body = rec.at("body").get<std::string>();
  if (!text::valid_utf8(body)) throw_data(where + ": body is not valid UTF-8");
  doc.body = text::first_paragraph(text::normalize_whitespace(body));
  if (doc.body.empty()) throw_data(where + ": empty body");

  if (auto id = optional_string(rec, "id", where)) {
    if (text::trim(*id).empty()) throw_data(where + ": empty id");
    doc.id = *id;
  } else {
    doc.id = content_id(doc.title, doc.body);
  }
  doc.source = optional_string(rec, "source", where).value_or("");
  doc.collected_at = optional_string(rec, "collected_at", where);
  if (doc.collected_at && !iso8601(*doc.collected_at)) {
    throw_data(where + ": collected_at is not an ISO-8601 date: " + *doc.collected_at);
  }
  return doc;
}

Json to_json(const RawDocument& doc) {
  Json j = {{"id", doc.id}, {"title", doc.title}, {"body", doc.body}, {"source", doc.source}};
  if (doc.collected_at) j["collected_at"] = *doc.collected_at;
  if (doc.header) j["header"] = *doc.header;
  return j;
}

Corpus ingest_jsonl(const std::vector<std::filesystem::path>& paths, std::string name, std::uint64_t seed) {
  Corpus corpus;
  corpus.name = std::move(name);
  corpus.seed = seed;
  std::unordered_map<std::string, std::string> seen;  // id -> "file:line"
  for (const auto& path : paths) {
    for (const auto& line : read_jsonl(path)) {
      std::string where = path.string() + ":" + std::to_string(line.line_no);
      RawDocument doc = document_from_json(line.value, where);
      auto [it, inserted] = seen.emplace(doc.id, where);
      if (!inserted) {
        throw_data("duplicate document id '" + doc.id + "' at " + it->second + " and " + where);
      }
      corpus.documents.push_back(std::move(doc));
    }
  }
  return corpus;
}

Corpus ingest_jsonl(const std::filesystem::path& path, std::string name, std::uint64_t seed) {
  if (name.empty()) name = path.stem().string();
  return ingest_jsonl(std::vector<std::filesystem::path>{path}, std::move(name), seed);
}

std::string serialize(const Corpus& corpus) {
  std::string out;
  for (const auto& doc : corpus.documents) {
    out += canonical(to_json(doc));
    out += '\n';
  }
  return out;
}

}  // namespace absorb::corpus
