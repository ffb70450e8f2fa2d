#include "absorb/curriculum.hpp"

#include <algorithm>
#include <unordered_map>

#include "absorb/error.hpp"
#include "absorb/hash.hpp"
#include "absorb/rng.hpp"
#include "absorb/text.hpp"

namespace absorb::embedded {
extern const std::string_view presets_json;
}

namespace absorb::curriculum {

namespace {

constexpr std::uint64_t kReplayStream = 0x7265706c6179ULL;

int required_test_epochs(const std::string& method) { return method == "continued_pretraining" ? 5 : 3; }

std::vector<dataset::Record> load_ref(const StagePlan& plan, const std::string& ref) {
  auto it = plan.inputs.find(ref);
  if (it == plan.inputs.end()) throw_data("plan has no input for '" + ref + "'");
  std::filesystem::path path(it->second);
  if (!std::filesystem::exists(path)) throw_data("missing manifest for '" + ref + "': " + path.string());
  auto v = dataset::verify_manifest(path);
  if (!v.ok) throw_data(path.string() + ": " + v.message);
  return dataset::read_manifest(path).records;
}

}  // namespace

std::string_view to_string(Mix m) noexcept {
  switch (m) {
    case Mix::concat: return "concat";
    case Mix::interleave: return "interleave";
    case Mix::prefix_pair: return "prefix_pair";
  }
  return "concat";
}

Mix mix_from_string(std::string_view s) {
  if (s == "concat") return Mix::concat;
  if (s == "interleave") return Mix::interleave;
  if (s == "prefix_pair") return Mix::prefix_pair;
  throw_data("unknown mixing mode: " + std::string(s));
}

Json StagePlan::to_json() const {
  Json stages_j = Json::array();
  for (const auto& s : stages) {
    Json weights = Json::object();
    for (const auto& r : s.refs) weights[r] = 1;
    Json sj = {{"index", s.index}, {"epochs", s.epochs}, {"mix", to_string(s.mix)}, {"refs", s.refs}, {"weights", weights}};
    if (s.replay) sj["replay"] = {{"source", s.replay->source}, {"size", s.replay->size}, {"seed", s.replay->seed}};
    stages_j.push_back(std::move(sj));
  }
  return {{"method", method},       {"label", label},       {"schedule", schedule},
          {"seed", seed},           {"test_doc_ref", test_doc_ref}, {"test_doc_epochs", test_doc_epochs},
          {"inputs", inputs},       {"stages", stages_j}};
}

StagePlan StagePlan::from_json(const Json& j) {
  try {
    StagePlan p;
    p.method = j.at("method").get<std::string>();
    p.label = j.value("label", "");
    p.schedule = j.value("schedule", "default");
    p.seed = j.value("seed", std::uint64_t{0});
    p.test_doc_ref = j.value("test_doc_ref", "test_doc");
    p.test_doc_epochs = j.value("test_doc_epochs", 3);
    p.inputs = j.value("inputs", std::map<std::string, std::string>{});
    for (const auto& sj : j.at("stages")) {
      Stage s;
      s.index = sj.at("index").get<std::size_t>();
      s.epochs = sj.at("epochs").get<int>();
      s.mix = mix_from_string(sj.at("mix").get<std::string>());
      s.refs = sj.at("refs").get<std::vector<std::string>>();
      if (sj.contains("replay")) {
        s.replay = Replay{sj["replay"].at("source").get<std::string>(), sj["replay"].at("size").get<std::size_t>(),
                          sj["replay"].value("seed", std::uint64_t{0})};
      }
      p.stages.push_back(std::move(s));
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw_data(std::string("malformed stage plan: ") + e.what());
  }
}

Presets Presets::defaults() { return parse(embedded::presets_json); }

Presets Presets::load(const std::filesystem::path& path) {
  try {
    return parse(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::io) throw;
    throw_data(path.string() + ": " + e.what());
  }
}

Presets Presets::parse(std::string_view json_text) {
  Presets p;
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw_data(std::string("malformed presets file: ") + e.what());
  }
  if (!j.contains("presets") || !j["presets"].is_object() || j["presets"].empty()) {
    throw_data("presets file has no presets");
  }
  p.presets_ = j["presets"];
  p.test_doc_ref_ = j.value("test_doc_ref", "test_doc");
  for (auto it = p.presets_.begin(); it != p.presets_.end(); ++it) {
    const Json& pr = it.value();
    if (!pr.contains("stages") || !pr["stages"].is_array() || pr["stages"].empty()) {
      throw_data("preset " + it.key() + " has no stages");
    }
    for (const auto& s : pr["stages"]) {
      if (!s.contains("refs") || !s["refs"].is_array() || s["refs"].empty()) {
        throw_data("preset " + it.key() + " has a stage without refs");
      }
      if (s.value("epochs", 0) < 1) throw_data("preset " + it.key() + " has a stage with epochs < 1");
      mix_from_string(s.value("mix", ""));
    }
  }
  return p;
}

std::vector<std::string> Presets::ids() const {
  std::vector<std::string> out;
  for (auto it = presets_.begin(); it != presets_.end(); ++it) out.push_back(it.key());
  return out;
}

bool Presets::has(const std::string& id) const { return presets_.contains(id); }

const Json& Presets::preset(const std::string& id) const {
  if (!has(id)) throw_usage("unknown preset '" + id + "'; valid presets: " + text::join(ids(), ", "));
  return presets_.at(id);
}

Json Presets::summary() const {
  Json out = Json::array();
  for (const auto& id : ids()) out.push_back({{"id", id}, {"label", presets_.at(id).value("label", "")}});
  return out;
}

StagePlan plan(const Presets& presets, const std::string& preset, const std::filesystem::path& manifest_dir,
               bool cross_domain, std::uint64_t seed, bool check_inputs) {
  const Json& pr = presets.preset(preset);
  StagePlan p;
  p.method = preset;
  p.label = pr.value("label", preset);
  p.seed = seed;
  p.test_doc_ref = presets.test_doc_ref();
  p.test_doc_epochs = pr.value("test_doc_epochs", required_test_epochs(preset));

  std::optional<std::vector<int>> schedule;
  if (cross_domain && pr.contains("schedules") && pr["schedules"].contains("cross_domain")) {
    schedule = pr["schedules"]["cross_domain"].get<std::vector<int>>();
    if (schedule->size() != pr["stages"].size()) throw_data("preset " + preset + ": cross_domain schedule length mismatch");
    p.schedule = "cross_domain";
  }

  std::size_t index = 1;
  for (const auto& sj : pr["stages"]) {
    Stage s;
    s.index = index;
    s.epochs = schedule ? (*schedule)[index - 1] : sj.at("epochs").get<int>();
    s.mix = mix_from_string(sj.at("mix").get<std::string>());
    s.refs = sj.at("refs").get<std::vector<std::string>>();
    if (s.mix == Mix::prefix_pair && s.refs.size() != 2) {
      throw_data("preset " + preset + ": prefix_pair needs exactly two refs (QA, documents)");
    }
    if (sj.contains("replay")) {
      s.replay = Replay{sj["replay"].at("source").get<std::string>(), sj["replay"].at("size").get<std::size_t>(),
                        mix64(seed ^ (kReplayStream + index))};
    }
    std::vector<std::string> needed = s.refs;
    if (s.replay) needed.push_back(s.replay->source);
    for (const auto& ref : needed) {
      std::filesystem::path path = manifest_dir / (ref + ".jsonl");
      if (check_inputs && !std::filesystem::exists(path)) {
        throw_data("preset " + preset + " needs manifest '" + ref + "' but " + path.string() + " does not exist");
      }
      p.inputs[ref] = path.generic_string();
    }
    p.stages.push_back(std::move(s));
    ++index;
  }
  check_fairness(p);
  return p;
}

int test_doc_epochs(const StagePlan& plan) {
  int total = 0;
  for (const auto& s : plan.stages) {
    if (std::find(s.refs.begin(), s.refs.end(), plan.test_doc_ref) != s.refs.end()) total += s.epochs;
  }
  return total;
}

void check_fairness(const StagePlan& plan) {
  int want = required_test_epochs(plan.method);
  int got = test_doc_epochs(plan);
  if (got != want || plan.test_doc_epochs != want) {
    throw_data("plan " + plan.method + " trains on test documents for " + std::to_string(got) + " epochs; expected " +
               std::to_string(want));
  }
}

std::vector<dataset::Record> sample_replay(const std::vector<dataset::Record>& records, std::size_t size,
                                           std::uint64_t seed) {
  if (size > records.size()) {
    throw_data("replay size " + std::to_string(size) + " exceeds the " + std::to_string(records.size()) +
               " available records");
  }
  Stream rng(seed, 0);
  auto idx = rng.sample_indices(records.size(), size);
  std::sort(idx.begin(), idx.end());
  std::vector<dataset::Record> out;
  out.reserve(size);
  for (std::size_t i : idx) out.push_back(records[i]);
  return out;
}

std::vector<dataset::Record> interleave(const std::vector<std::vector<dataset::Record>>& lists) {
  std::vector<std::size_t> next(lists.size(), 0);
  std::vector<dataset::Record> out;
  std::size_t total = 0;
  for (const auto& l : lists) total += l.size();
  out.reserve(total);
  // Record j of list i sits at relative position (2j+1)/(2n_i); take the
  // smallest, earlier lists first on ties.
  while (out.size() < total) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < lists.size(); ++i) {
      if (next[i] >= lists[i].size()) continue;
      if (!best) {
        best = i;
        continue;
      }
      unsigned __int128 lhs = static_cast<unsigned __int128>(2 * next[i] + 1) * (2 * lists[*best].size());
      unsigned __int128 rhs = static_cast<unsigned __int128>(2 * next[*best] + 1) * (2 * lists[i].size());
      if (lhs < rhs) best = i;
    }
    out.push_back(lists[*best][next[*best]++]);
  }
  return out;
}

std::vector<dataset::Record> prefix_pair(const std::vector<dataset::Record>& qa,
                                         const std::vector<dataset::Record>& docs) {
  std::unordered_map<std::string, std::size_t> doc_index;
  for (std::size_t i = 0; i < docs.size(); ++i) doc_index.emplace(docs[i].doc_id(), i);
  std::vector<std::vector<std::size_t>> groups(docs.size());
  std::vector<std::string> dangling;
  for (std::size_t i = 0; i < qa.size(); ++i) {
    auto it = doc_index.find(qa[i].doc_id());
    if (it == doc_index.end()) {
      if (std::find(dangling.begin(), dangling.end(), qa[i].doc_id()) == dangling.end()) dangling.push_back(qa[i].doc_id());
      continue;
    }
    groups[it->second].push_back(i);
  }
  if (!dangling.empty()) {
    throw_data("QA records reference documents absent from the paired manifest: " + text::join(dangling, ", "));
  }
  std::vector<dataset::Record> out;
  out.reserve(qa.size() + docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (std::size_t i : groups[d]) out.push_back(qa[i]);
    out.push_back(docs[d]);
  }
  return out;
}

dataset::Manifest render_stage_inputs(const StagePlan& plan, std::size_t stage_index) {
  if (stage_index < 1 || stage_index > plan.stages.size()) {
    throw_usage("plan " + plan.method + " has no stage " + std::to_string(stage_index) + " (it has " +
                std::to_string(plan.stages.size()) + ")");
  }
  const Stage& s = plan.stages[stage_index - 1];
  std::vector<std::vector<dataset::Record>> parts;
  for (const auto& ref : s.refs) parts.push_back(load_ref(plan, ref));

  std::vector<dataset::Record> records;
  switch (s.mix) {
    case Mix::concat:
      for (auto& p : parts) records.insert(records.end(), p.begin(), p.end());
      break;
    case Mix::interleave: records = interleave(parts); break;
    case Mix::prefix_pair: records = prefix_pair(parts.at(0), parts.at(1)); break;
  }
  if (s.replay) {
    auto replay = sample_replay(load_ref(plan, s.replay->source), s.replay->size, s.replay->seed);
    records = interleave({records, replay});
  }
  return dataset::make_manifest(std::move(records), plan.method + "_stage" + std::to_string(stage_index), "train",
                                plan.seed);
}

}  // namespace absorb::curriculum
