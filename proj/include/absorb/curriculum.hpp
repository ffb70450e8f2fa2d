#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absorb/dataset.hpp"
#include "absorb/jsonio.hpp"

namespace absorb::curriculum {

enum class Mix { concat, interleave, prefix_pair };

std::string_view to_string(Mix m) noexcept;
Mix mix_from_string(std::string_view s);

struct Replay {
  std::string source;
  std::size_t size = 0;
  std::uint64_t seed = 0;
};

struct Stage {
  std::size_t index = 1;  // 1-based
  int epochs = 1;
  Mix mix = Mix::concat;
  std::vector<std::string> refs;
  std::optional<Replay> replay;
};

struct StagePlan {
  std::string method;
  std::string label;
  std::string schedule = "default";
  std::uint64_t seed = 0;
  std::string test_doc_ref = "test_doc";
  int test_doc_epochs = 3;
  std::map<std::string, std::string> inputs;  // ref -> manifest path
  std::vector<Stage> stages;

  Json to_json() const;
  static StagePlan from_json(const Json& j);
};

// Method recipes loaded from a presets file (built in by default).
class Presets {
 public:
  static Presets defaults();
  static Presets load(const std::filesystem::path& path);
  static Presets parse(std::string_view json_text);

  std::vector<std::string> ids() const;
  bool has(const std::string& id) const;
  const Json& preset(const std::string& id) const;
  const std::string& test_doc_ref() const noexcept { return test_doc_ref_; }
  Json summary() const;

 private:
  Json presets_;
  std::string test_doc_ref_ = "test_doc";
};

/// Builds the plan for a preset. Every referenced manifest must exist as
/// <manifest_dir>/<ref>.jsonl unless check_inputs is false. An unknown
/// preset is a usage error listing the valid ids.
StagePlan plan(const Presets& presets, const std::string& preset, const std::filesystem::path& manifest_dir,
               bool cross_domain, std::uint64_t seed, bool check_inputs = true);

/// Epochs summed over the stages that train on the test documents.
int test_doc_epochs(const StagePlan& plan);

/// Throws Error(data) unless the test-document epoch total is 3 (5 for
/// continued pre-training).
void check_fairness(const StagePlan& plan);

/// Seeded sample without replacement, kept in original order.
std::vector<dataset::Record> sample_replay(const std::vector<dataset::Record>& records, std::size_t size,
                                           std::uint64_t seed);

/// Merges lists so each list's records are spread evenly through the output;
/// within a list order is kept.
std::vector<dataset::Record> interleave(const std::vector<std::vector<dataset::Record>>& lists);

/// Each document record preceded by the QA records that carry its doc_id.
std::vector<dataset::Record> prefix_pair(const std::vector<dataset::Record>& qa,
                                         const std::vector<dataset::Record>& docs);

/// Materializes one stage (1-based index) from the plan's input manifests.
dataset::Manifest render_stage_inputs(const StagePlan& plan, std::size_t stage_index);

}  // namespace absorb::curriculum
