#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absorb/analysis.hpp"
#include "absorb/jsonio.hpp"

namespace absorb::taskgen {

enum class TaskKind { memorization, summarization, gist, nli, teaching, flashcards, cloze, multichoice, completion };

// Generation order, which is also the reading-comprehension block order.
inline constexpr std::array<TaskKind, 9> kAllKinds = {
    TaskKind::memorization, TaskKind::summarization, TaskKind::gist,
    TaskKind::nli,          TaskKind::teaching,      TaskKind::flashcards,
    TaskKind::cloze,        TaskKind::multichoice,   TaskKind::completion};

std::string_view to_string(TaskKind kind) noexcept;
TaskKind task_kind_from_string(std::string_view s);

enum class LossPolicy { full_sequence, answer_only };

std::string_view to_string(LossPolicy p) noexcept;
LossPolicy loss_policy_from_string(std::string_view s);
LossPolicy loss_policy_for(TaskKind kind) noexcept;

inline const std::vector<std::string> kNliOptions = {"Yes", "It's impossible to say", "No"};

struct TaskExample {
  TaskKind kind = TaskKind::memorization;
  std::string question;
  std::string answer;
  std::optional<std::vector<std::string>> options;
  LossPolicy loss_policy = LossPolicy::answer_only;
  std::string doc_id;
  Json provenance = Json::object();

  Json to_json() const;
  static TaskExample from_json(const Json& j);
};

struct TaskSuite {
  std::string doc_id;
  std::vector<TaskExample> examples;
  std::map<TaskKind, std::size_t> counts;
};

struct TaskConfig {
  std::set<TaskKind> enabled{kAllKinds.begin(), kAllKinds.end()};
  // Per-kind ceilings; absent kinds use 1 (2 for nli). Larger values are rejected.
  std::map<TaskKind, std::size_t> caps;
  std::size_t option_count = 4;
  // Question templates. Placeholders: {title} {document} {keywords}
  // {statement} {options} {cloze} {prefix}.
  std::map<TaskKind, std::string> templates;

  std::size_t cap(TaskKind kind) const;
  const std::string& question_template(TaskKind kind) const;

  static TaskConfig from_json(const Json& j);
  static TaskConfig load(const std::filesystem::path& path);
  Json to_json() const;
};

/// Built-in question template for a kind.
const std::string& default_template(TaskKind kind);

/// Replaces "{name}" placeholders in one left-to-right pass. Substituted
/// values are never rescanned; unknown placeholders are left as written.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

std::string render_options(const std::vector<std::string>& options);

// Substream ids of the per-document random stream.
inline constexpr std::uint64_t kNliStream = 0;
inline constexpr std::uint64_t kClozeStream = 1;
inline constexpr std::uint64_t kMultichoiceStream = 2;
inline constexpr std::uint64_t kCompletionStream = 3;

// Individual generators. Those returning optional skip when their guard fails.
TaskExample gen_memorization(const analysis::AnalyzedDocument& adoc, const TaskConfig& cfg = {});
TaskExample gen_summarization(const analysis::AnalyzedDocument& adoc, const TaskConfig& cfg = {});
std::optional<TaskExample> gen_gist(const analysis::AnalyzedDocument& adoc, const TaskConfig& cfg = {});
std::vector<TaskExample> gen_nli_pair(const analysis::AnalyzedDocument& adoc, std::uint64_t seed,
                                      const TaskConfig& cfg = {});
TaskExample gen_teaching(const analysis::AnalyzedDocument& adoc, const TaskConfig& cfg = {});
std::optional<TaskExample> gen_flashcards(const analysis::AnalyzedDocument& adoc, const TaskConfig& cfg = {});
std::optional<TaskExample> gen_cloze(const analysis::AnalyzedDocument& adoc, std::uint64_t seed,
                                     const TaskConfig& cfg = {});
std::optional<TaskExample> gen_multichoice(const analysis::AnalyzedDocument& adoc, std::uint64_t seed,
                                           const TaskConfig& cfg = {});
std::optional<TaskExample> gen_completion(const analysis::AnalyzedDocument& adoc, std::uint64_t seed,
                                          const TaskConfig& cfg = {});

/// Gist keywords: entity surfaces, deduplicated, in first-occurrence order.
std::vector<std::string> keywords(const analysis::AnalyzedDocument& adoc);

/// False NLI statements reachable by one same-kind substitution from another
/// sentence, in (entity, replacement) order. Each entry: statement, entity
/// replaced, replacement entity.
struct Corruption {
  std::string statement;
  const analysis::EntitySpan* replaced;
  const analysis::EntitySpan* replacement;
};
std::vector<Corruption> nli_corruptions(const analysis::AnalyzedDocument& adoc, std::size_t sentence);

TaskSuite build_suite(const analysis::AnalyzedDocument& adoc, const TaskConfig& cfg, std::uint64_t seed);

/// Document followed by every non-memorization example as a question/answer
/// block, in generation order.
std::string format_reading_comprehension(const TaskSuite& suite);

/// Inverse of format_reading_comprehension: the document text and the
/// (question, answer) blocks.
std::pair<std::string, std::vector<std::pair<std::string, std::string>>> parse_reading_comprehension(
    std::string_view text);

}  // namespace absorb::taskgen
