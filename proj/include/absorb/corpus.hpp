#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absorb/jsonio.hpp"

namespace absorb::corpus {

struct RawDocument {
  std::string id;
  std::string title;
  std::string body;  // first paragraph, whitespace-normalized
  std::string source;
  std::optional<std::string> collected_at;
  // Verbatim "<Title - Wikipedia>" line when the record supplied one.
  std::optional<std::string> header;

  /// The header line used when a document is rendered as training text.
  std::string rendered_header() const;
  /// Header, one space, body.
  std::string rendered() const;
};

struct Corpus {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<RawDocument> documents;

  std::size_t size() const noexcept { return documents.size(); }
};

/// Strips surrounding angle brackets and a trailing " - Wikipedia" marker.
/// Input without brackets comes back trimmed but otherwise unchanged.
std::string parse_header(std::string_view header);

/// Lowercase hex id derived from title and body.
std::string content_id(std::string_view title, std::string_view body);

/// Validates and normalizes one JSONL record. `where` prefixes error
/// messages (e.g. "corpus.jsonl:3").
RawDocument document_from_json(const Json& record, const std::string& where);
Json to_json(const RawDocument& doc);

Corpus ingest_jsonl(const std::filesystem::path& path, std::string name = {}, std::uint64_t seed = 0);

/// Concatenates several files in argument order; ids must be unique across
/// all of them.
Corpus ingest_jsonl(const std::vector<std::filesystem::path>& paths, std::string name, std::uint64_t seed);

/// One canonical JSON record per line, LF-terminated, in document order.
std::string serialize(const Corpus& corpus);

}  // namespace absorb::corpus
