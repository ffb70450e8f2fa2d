#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absorb/error.hpp"
#include "absorb/jsonio.hpp"
#include "absorb/qagen.hpp"

namespace absorb::evalkit {

/// Lowercase, drop punctuation, drop the articles a/an/the, collapse spaces.
std::string normalize_answer(std::string_view s);
std::vector<std::string> answer_tokens(std::string_view s);

// Scores against several golds take the best gold. Empty golds throw Error(usage).
int exact_match(std::string_view pred, const std::vector<std::string>& golds);
double token_f1(std::string_view pred, const std::vector<std::string>& golds);
double token_recall(std::string_view pred, const std::vector<std::string>& golds);
/// LCS F-measure (beta 1) over lowercase word tokens; articles are kept.
double rouge_l(std::string_view pred, std::string_view gold);
double rouge_l(std::string_view pred, const std::vector<std::string>& golds);

/// Label named by a free-form NLI answer: exact normalized match first,
/// otherwise the option whose words appear earliest.
std::optional<qagen::NliLabel> parse_nli_prediction(std::string_view pred);

struct NliScore {
  int correct = 0;
  bool parsed = false;
};
NliScore nli_accuracy(std::string_view pred, qagen::NliLabel gold);

struct LogProbRecord {
  std::string doc_id;
  std::vector<double> logprobs;  // natural log, each <= 0
};

/// exp of the pooled mean negative log-likelihood.
double aggregate_ppl(const std::vector<LogProbRecord>& records);

class JudgeUnavailable : public Error {
 public:
  explicit JudgeUnavailable(const std::string& what) : Error(ErrorCode::data, what) {}
};

// Entailment oracle; may throw JudgeUnavailable for pairs it cannot decide.
class Judge {
 public:
  virtual ~Judge() = default;
  virtual bool entails(const std::string& premise, const std::string& hypothesis) const = 0;
};

/// Entailment as normalized string equality.
class ExactJudge final : public Judge {
 public:
  bool entails(const std::string& premise, const std::string& hypothesis) const override;
};

/// Precomputed verdicts: JSONL lines {"premise","hypothesis","entails"}.
class VerdictJudge final : public Judge {
 public:
  explicit VerdictJudge(const std::filesystem::path& path);
  bool entails(const std::string& premise, const std::string& hypothesis) const override;

 private:
  std::map<std::pair<std::string, std::string>, bool> verdicts_;
};

/// 1 iff the prediction and some gold entail each other.
int judge_accuracy(const Judge& judge, const std::string& pred, const std::vector<std::string>& golds);

struct Reference {
  std::string item_id;
  std::vector<std::string> golds;
  std::optional<qagen::NliLabel> gold_label;
};

struct Prediction {
  std::string item_id;
  std::string prediction;
};

struct Judgment {
  std::string item_id;
  std::optional<int> em;
  std::optional<double> f1;
  std::optional<double> recall;
  std::optional<double> rouge_l;
  std::optional<int> acc;      // entailment judge
  std::optional<int> nli_acc;  // option match
  std::optional<std::string> nli_predicted;
};

struct Diagnostics {
  std::size_t unparseable_nli = 0;
  std::size_t judge_skipped = 0;
};

/// Scores every reference; missing or unknown prediction ids throw
/// Error(data) listing all of them.
std::vector<Judgment> score(const std::vector<Reference>& refs, const std::vector<Prediction>& preds,
                            const Judge* judge, Diagnostics& diag);

/// Means x100 rounded to two decimals plus the per-item table in item-id
/// order. Metrics no item produced are absent.
Json report(std::vector<Judgment> judgments, const Diagnostics& diag, std::optional<double> ppl = std::nullopt,
            std::size_t ppl_tokens = 0);

std::vector<Reference> read_references(const std::filesystem::path& path);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);
std::vector<LogProbRecord> read_logprobs(const std::filesystem::path& path);

}  // namespace absorb::evalkit
