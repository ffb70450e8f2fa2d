#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absorb/corpus.hpp"
#include "absorb/jsonio.hpp"

namespace absorb::qagen {

enum class QATask { generation, nli };

std::string_view to_string(QATask t) noexcept;
QATask qa_task_from_string(std::string_view s);

enum class NliLabel { yes, no, impossible };

/// "Yes", "No" or "Impossible".
std::string_view to_string(NliLabel l) noexcept;
NliLabel nli_label_from_string(std::string_view s);
/// Option text shown to models: "Yes", "No" or "It's impossible to say".
std::string_view option_text(NliLabel l) noexcept;
/// Maps an answer or option string to its label; tolerant of case, a
/// trailing period and a curly apostrophe.
std::optional<NliLabel> canonical_label(std::string_view answer);

struct QAPair {
  std::string doc_id;
  QATask task = QATask::generation;
  std::string question;
  std::string answer;
  std::optional<std::vector<std::string>> options;  // nli only
  std::optional<NliLabel> answer_label;             // nli only

  Json to_json() const;
  static QAPair from_json(const Json& j);
  bool operator==(const QAPair&) const = default;
};

struct Prompts {
  std::string generation;
  std::string nli;
  std::string type;

  static Prompts defaults();
};

std::string build_generation_prompt(const corpus::RawDocument& doc, const Prompts& prompts = Prompts::defaults());
std::string build_nli_prompt(const corpus::RawDocument& doc, const Prompts& prompts = Prompts::defaults());
/// QA-type annotation prompt. Requires at least one pair.
std::string build_type_prompt(const corpus::RawDocument& doc, const std::vector<QAPair>& pairs,
                              const Prompts& prompts = Prompts::defaults());

struct ParseResult {
  std::vector<QAPair> pairs;
  std::size_t warnings = 0;  // blocks dropped as incomplete or unlabeled
};

/// Reads "Question:"/"Answer:" blocks (with "Options:" for nli, inline or
/// one option per line). Throws Error(data) when no pair can be recovered.
ParseResult parse_qa_response(std::string_view raw, QATask task, const std::string& doc_id = {});

/// Canonical block format accepted by parse_qa_response.
std::string render_qa_response(const std::vector<QAPair>& pairs);

}  // namespace absorb::qagen
