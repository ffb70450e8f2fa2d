#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absorb/corpus.hpp"
#include "absorb/jsonio.hpp"
#include "absorb/qagen.hpp"
#include "absorb/taskgen.hpp"

namespace absorb::dataset {

using taskgen::LossPolicy;

enum class RecordKind { doc, task, qa };

std::string_view to_string(RecordKind k) noexcept;
RecordKind record_kind_from_string(std::string_view s);

struct Record {
  RecordKind kind = RecordKind::doc;
  LossPolicy loss_policy = LossPolicy::full_sequence;
  Json payload = Json::object();

  std::string doc_id() const;
  Json to_json() const;
  static Record from_json(const Json& j);
  bool operator==(const Record&) const = default;
};

/// doc and memorization tasks train on every token; other tasks and QA
/// pairs only on the answer. Idempotent.
Record attach_loss_policy(Record r);
/// Same, from the raw JSON form; unknown kinds throw Error(data).
Json attach_loss_policy(const Json& record);

Record doc_record(const corpus::RawDocument& doc);
/// A document rendered in the reading-comprehension format.
Record reading_record(const std::string& doc_id, const std::string& text);
Record task_record(const taskgen::TaskExample& ex);
Record qa_record(const qagen::QAPair& pair);

/// "Question: q\nAnswer: a" plus the answer's scalar span within it. An
/// empty question yields just the answer.
std::pair<std::string, std::pair<std::size_t, std::size_t>> qa_text(const std::string& question,
                                                                    const std::string& answer);

struct Manifest {
  std::string name;
  std::string split;  // train, test or all
  std::uint64_t seed = 0;
  std::vector<Record> records;
  std::string checksum;

  std::size_t size() const noexcept { return records.size(); }
};

/// Lowercase hex SHA-256 over the canonical record lines.
std::string manifest_checksum(const std::vector<Record>& records);
Manifest make_manifest(std::vector<Record> records, std::string name, std::string split, std::uint64_t seed);
/// Canonical JSONL: one line per record, then a footer line.
std::string serialize(const Manifest& m);
/// Writes atomically. An empty record list is rejected with Error(data).
Manifest write_manifest(std::vector<Record> records, const std::string& name, const std::string& split,
                        std::uint64_t seed, const std::filesystem::path& path);
/// Reads records and footer without checking the checksum.
Manifest read_manifest(const std::filesystem::path& path);

struct VerifyResult {
  bool ok = false;
  std::size_t count = 0;                       // records present in the file
  std::optional<std::size_t> first_mismatch;   // 0-based record index
  std::string message;
};

VerifyResult verify_manifest(const std::filesystem::path& path);

struct SplitSpec {
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
  std::size_t ngram = 8;  // advisory overlap check
};

struct SplitResult {
  corpus::Corpus train;
  corpus::Corpus test;
};

/// Number of test documents for a corpus of n.
std::size_t test_count(std::size_t n, double fraction);

/// Seeded partition; each side keeps the corpus order. Duplicate titles and
/// degenerate splits throw Error(data).
SplitResult split_corpus(const corpus::Corpus& corpus, const SplitSpec& spec);

/// Word n-grams that occur on both sides. Advisory only.
Json overlap_report(const corpus::Corpus& train, const corpus::Corpus& test, std::size_t n);

/// Percentages with two decimals that sum to exactly 100 (largest remainder).
std::vector<double> percentages(const std::vector<std::size_t>& counts);

}  // namespace absorb::dataset
