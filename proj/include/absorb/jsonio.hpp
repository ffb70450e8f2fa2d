#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace absorb {

using Json = nlohmann::json;

/// Canonical single-line JSON: sorted keys, no insignificant whitespace,
/// raw UTF-8, shortest round-trip float formatting.
std::string canonical(const Json& j);

struct JsonLine {
  std::size_t line_no;  // 1-based
  Json value;
};

/// Parses a JSONL file, skipping blank lines. Parse failures throw
/// Error(data) naming the path and line number; unreadable files Error(io).
std::vector<JsonLine> read_jsonl(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename so readers never observe a
/// partially written output.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Fails with Error(io) unless `dir` exists (creating it if needed) and a
/// probe file can be created inside it.
void ensure_writable_dir(const std::filesystem::path& dir);

/// Rounds to two decimals for percent-style reporting.
double round2(double x);

}  // namespace absorb
