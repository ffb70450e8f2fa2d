#include "absorb/taskgen.hpp"

#include <algorithm>

#include "absorb/error.hpp"
#include "absorb/rng.hpp"
#include "absorb/text.hpp"

namespace absorb::taskgen {

namespace {

using analysis::AnalyzedDocument;
using analysis::EntitySpan;

constexpr std::string_view kReadingHeading = "\n\nAnswer the questions based on the article:\n\n";
constexpr std::string_view kBlockSep = "\n\nQuestion: ";

std::map<std::string, std::string> base_values(const AnalyzedDocument& adoc) {
  return {{"title", adoc.doc.title}, {"document", adoc.doc.rendered()}};
}

TaskExample make(TaskKind kind, const AnalyzedDocument& adoc, std::string question, std::string answer) {
  TaskExample ex;
  ex.kind = kind;
  ex.question = std::move(question);
  ex.answer = std::move(answer);
  ex.loss_policy = loss_policy_for(kind);
  ex.doc_id = adoc.doc.id;
  return ex;
}

Json span_json(const EntitySpan& e) {
  return {{"start", e.start}, {"end", e.end}, {"surface", e.surface}, {"kind", analysis::to_string(e.kind)}};
}

// Fills a template and reports where the first substitution of `key` landed,
// in scalars from the start of the result.
std::string fill_locating(std::string_view tmpl, const std::map<std::string, std::string>& values,
                          const std::string& key, std::optional<std::size_t>& at) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        std::string name(tmpl.substr(i + 1, close - i - 1));
        auto it = values.find(name);
        if (it != values.end()) {
          if (name == key && !at) at = text::scalar_length(out);
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i]);
    ++i;
  }
  return out;
}

struct Blanked {
  std::string text;
  std::size_t blank_at;  // scalar offset of "--" in text
};

Blanked blank_entity(const AnalyzedDocument& adoc, const EntitySpan& e) {
  std::u32string_view body(adoc.body);
  std::string before = text::encode(body.substr(0, e.start));
  std::string after = text::encode(body.substr(e.end));
  return {before + "--" + after, e.start};
}

std::uint64_t stream_key(const AnalyzedDocument& adoc, std::uint64_t seed) {
  return document_key(seed, adoc.doc.id);
}

}  // namespace

std::string_view to_string(TaskKind kind) noexcept {
  switch (kind) {
    case TaskKind::memorization: return "memorization";
    case TaskKind::summarization: return "summarization";
    case TaskKind::gist: return "gist";
    case TaskKind::nli: return "nli";
    case TaskKind::teaching: return "teaching";
    case TaskKind::flashcards: return "flashcards";
    case TaskKind::cloze: return "cloze";
    case TaskKind::multichoice: return "multichoice";
    case TaskKind::completion: return "completion";
  }
  return "memorization";
}

TaskKind task_kind_from_string(std::string_view s) {
  for (TaskKind k : kAllKinds) {
    if (to_string(k) == s) return k;
  }
  throw_data("unknown task kind: " + std::string(s));
}

std::string_view to_string(LossPolicy p) noexcept {
  return p == LossPolicy::full_sequence ? "full_sequence" : "answer_only";
}

LossPolicy loss_policy_from_string(std::string_view s) {
  if (s == "full_sequence") return LossPolicy::full_sequence;
  if (s == "answer_only") return LossPolicy::answer_only;
  throw_data("unknown loss policy: " + std::string(s));
}

LossPolicy loss_policy_for(TaskKind kind) noexcept {
  return kind == TaskKind::memorization ? LossPolicy::full_sequence : LossPolicy::answer_only;
}

Json TaskExample::to_json() const {
  Json j = {{"doc_id", doc_id},
            {"task", to_string(kind)},
            {"question", question},
            {"answer", answer},
            {"loss_policy", to_string(loss_policy)},
            {"provenance", provenance}};
  if (options) j["options"] = *options;
  return j;
}

TaskExample TaskExample::from_json(const Json& j) {
  try {
    TaskExample ex;
    ex.kind = task_kind_from_string(j.at("task").get<std::string>());
    ex.doc_id = j.at("doc_id").get<std::string>();
    ex.question = j.at("question").get<std::string>();
    ex.answer = j.at("answer").get<std::string>();
    ex.loss_policy = j.contains("loss_policy") ? loss_policy_from_string(j["loss_policy"].get<std::string>())
                                               : loss_policy_for(ex.kind);
    if (j.contains("options")) ex.options = j["options"].get<std::vector<std::string>>();
    if (j.contains("provenance")) ex.provenance = j["provenance"];
    return ex;
  } catch (const nlohmann::json::exception& e) {
    throw_data(std::string("malformed task record: ") + e.what());
  }
}

const std::string& default_template(TaskKind kind) {
  static const std::map<TaskKind, std::string> t = {
      {TaskKind::memorization, "{document}"},
      {TaskKind::summarization, "Write a title: {document}"},
      {TaskKind::gist, "Highlight the key information within the article: {document}"},
      {TaskKind::nli,
       "{document} Based on the article above can we conclude that\n<{title}> {statement}\nOptions:\n{options}"},
      {TaskKind::teaching, "Tell me about {title}."},
      {TaskKind::flashcards, "Generate a concrete description about {title} based on the following keywords:\n{keywords}"},
      {TaskKind::cloze, "<{title}> {cloze}"},
      {TaskKind::multichoice, "<{title}> {cloze}\nOptions:\n{options}"},
      {TaskKind::completion, "<{title}> {prefix}:"},
  };
  return t.at(kind);
}

std::size_t TaskConfig::cap(TaskKind kind) const {
  auto it = caps.find(kind);
  if (it != caps.end()) return it->second;
  return kind == TaskKind::nli ? 2 : 1;
}

const std::string& TaskConfig::question_template(TaskKind kind) const {
  auto it = templates.find(kind);
  return it != templates.end() ? it->second : default_template(kind);
}

TaskConfig TaskConfig::from_json(const Json& j) {
  if (!j.is_object()) throw_usage("task config must be a JSON object");
  TaskConfig cfg;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      if (key == "enabled") {
        cfg.enabled.clear();
        for (const auto& k : it.value()) cfg.enabled.insert(task_kind_from_string(k.get<std::string>()));
      } else if (key == "caps") {
        for (auto c = it.value().begin(); c != it.value().end(); ++c) {
          TaskKind kind = task_kind_from_string(c.key());
          auto n = c.value().get<std::size_t>();
          if (n > (kind == TaskKind::nli ? 2u : 1u)) {
            throw_usage("cap for " + c.key() + " exceeds the per-document maximum");
          }
          cfg.caps[kind] = n;
        }
      } else if (key == "option_count") {
        cfg.option_count = it.value().get<std::size_t>();
        if (cfg.option_count < 2) throw_usage("option_count must be at least 2");
      } else if (key == "templates") {
        for (auto t = it.value().begin(); t != it.value().end(); ++t) {
          cfg.templates[task_kind_from_string(t.key())] = t.value().get<std::string>();
        }
      } else if (key != "version") {
        throw_usage("unknown task config key: " + key);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw_usage(std::string("malformed task config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::data) throw_usage(e.what());
    throw;
  }
  return cfg;
}

TaskConfig TaskConfig::load(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw_usage(path.string() + ": malformed task config: " + e.what());
  }
  return from_json(j);
}

Json TaskConfig::to_json() const {
  Json j;
  j["enabled"] = Json::array();
  for (TaskKind k : kAllKinds) {
    if (enabled.count(k)) j["enabled"].push_back(to_string(k));
  }
  j["caps"] = Json::object();
  for (TaskKind k : kAllKinds) j["caps"][std::string(to_string(k))] = cap(k);
  j["option_count"] = option_count;
  j["templates"] = Json::object();
  for (const auto& [k, t] : templates) j["templates"][std::string(to_string(k))] = t;
  return j;
}

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::optional<std::size_t> unused;
  return fill_locating(tmpl, values, "", unused);
}

std::string render_options(const std::vector<std::string>& options) {
  std::string out;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i) out += "\n";
    out += "- " + options[i];
  }
  return out;
}

std::vector<std::string> keywords(const AnalyzedDocument& adoc) {
  std::vector<std::string> out;
  for (const auto& e : adoc.entities) {
    if (std::find(out.begin(), out.end(), e.surface) == out.end()) out.push_back(e.surface);
  }
  return out;
}

TaskExample gen_memorization(const AnalyzedDocument& adoc, const TaskConfig& cfg) {
  TaskExample ex = make(TaskKind::memorization, adoc, "",
                        fill_template(cfg.question_template(TaskKind::memorization), base_values(adoc)));
  return ex;
}

TaskExample gen_summarization(const AnalyzedDocument& adoc, const TaskConfig& cfg) {
  return make(TaskKind::summarization, adoc,
              fill_template(cfg.question_template(TaskKind::summarization), base_values(adoc)), adoc.doc.title);
}

std::optional<TaskExample> gen_gist(const AnalyzedDocument& adoc, const TaskConfig& cfg) {
  auto kw = keywords(adoc);
  if (kw.empty()) return std::nullopt;
  TaskExample ex = make(TaskKind::gist, adoc, fill_template(cfg.question_template(TaskKind::gist), base_values(adoc)),
                        text::join(kw, "; "));
  ex.provenance["entities"] = kw;
  return ex;
}

std::vector<Corruption> nli_corruptions(const AnalyzedDocument& adoc, std::size_t sentence) {
  std::vector<Corruption> out;
  if (adoc.sentences.size() < 2) return out;
  const auto& s = adoc.sentences.at(sentence);
  std::u32string_view body(adoc.body);
  for (const EntitySpan* e : adoc.entities_in(sentence)) {
    for (const auto& f : adoc.entities) {
      bool elsewhere = f.start >= s.end || f.end <= s.start;
      if (!elsewhere || f.kind != e->kind || f.surface == e->surface) continue;
      std::string statement = text::encode(body.substr(s.start, e->start - s.start)) + f.surface +
                              text::encode(body.substr(e->end, s.end - e->end));
      out.push_back({std::move(statement), e, &f});
    }
  }
  return out;
}

std::vector<TaskExample> gen_nli_pair(const AnalyzedDocument& adoc, std::uint64_t seed, const TaskConfig& cfg) {
  std::vector<TaskExample> out;
  if (adoc.sentences.empty()) return out;
  Stream rng(stream_key(adoc, seed), kNliStream);
  std::size_t si = static_cast<std::size_t>(rng.below(adoc.sentences.size()));
  std::string sentence = adoc.sentence_text(si);

  auto build = [&](const std::string& statement, const char* answer) {
    auto values = base_values(adoc);
    values["statement"] = statement;
    values["options"] = render_options(kNliOptions);
    TaskExample ex = make(TaskKind::nli, adoc, fill_template(cfg.question_template(TaskKind::nli), values), answer);
    ex.options = kNliOptions;
    ex.provenance = {{"sentence", si}, {"statement", statement}, {"seed", seed}};
    return ex;
  };

  out.push_back(build(sentence, "Yes"));
  auto corruptions = nli_corruptions(adoc, si);
  if (!corruptions.empty()) {
    const Corruption& c = corruptions[static_cast<std::size_t>(rng.below(corruptions.size()))];
    TaskExample ex = build(c.statement, "No");
    ex.provenance["true_statement"] = sentence;
    ex.provenance["replaced"] = span_json(*c.replaced);
    ex.provenance["replacement"] = span_json(*c.replacement);
    out.push_back(std::move(ex));
  }
  return out;
}

TaskExample gen_teaching(const AnalyzedDocument& adoc, const TaskConfig& cfg) {
  return make(TaskKind::teaching, adoc, fill_template(cfg.question_template(TaskKind::teaching), base_values(adoc)),
              adoc.doc.body);
}

std::optional<TaskExample> gen_flashcards(const AnalyzedDocument& adoc, const TaskConfig& cfg) {
  auto kw = keywords(adoc);
  if (kw.empty()) return std::nullopt;
  auto values = base_values(adoc);
  values["keywords"] = text::join(kw, "; ");
  TaskExample ex = make(TaskKind::flashcards, adoc, fill_template(cfg.question_template(TaskKind::flashcards), values),
                        adoc.doc.body);
  ex.provenance["entities"] = kw;
  return ex;
}

std::optional<TaskExample> gen_cloze(const AnalyzedDocument& adoc, std::uint64_t seed, const TaskConfig& cfg) {
  if (adoc.entities.empty()) return std::nullopt;
  Stream rng(stream_key(adoc, seed), kClozeStream);
  const EntitySpan& e = adoc.entities[static_cast<std::size_t>(rng.below(adoc.entities.size()))];
  Blanked b = blank_entity(adoc, e);
  auto values = base_values(adoc);
  values["cloze"] = b.text;
  std::optional<std::size_t> at;
  std::string q = fill_locating(cfg.question_template(TaskKind::cloze), values, "cloze", at);
  TaskExample ex = make(TaskKind::cloze, adoc, std::move(q), e.surface);
  ex.provenance = {{"entity", span_json(e)}, {"seed", seed}};
  if (at) ex.provenance["blank_at"] = *at + b.blank_at;
  return ex;
}

std::optional<TaskExample> gen_multichoice(const AnalyzedDocument& adoc, std::uint64_t seed, const TaskConfig& cfg) {
  auto surfaces = keywords(adoc);
  if (cfg.option_count < 2 || surfaces.size() < cfg.option_count) return std::nullopt;
  Stream rng(stream_key(adoc, seed), kMultichoiceStream);
  const EntitySpan& e = adoc.entities[static_cast<std::size_t>(rng.below(adoc.entities.size()))];
  surfaces.erase(std::find(surfaces.begin(), surfaces.end(), e.surface));
  std::vector<std::string> options{e.surface};
  for (std::size_t i : rng.sample_indices(surfaces.size(), cfg.option_count - 1)) options.push_back(surfaces[i]);
  rng.shuffle(options);

  Blanked b = blank_entity(adoc, e);
  auto values = base_values(adoc);
  values["cloze"] = b.text;
  values["options"] = render_options(options);
  std::optional<std::size_t> at;
  std::string q = fill_locating(cfg.question_template(TaskKind::multichoice), values, "cloze", at);
  TaskExample ex = make(TaskKind::multichoice, adoc, std::move(q), e.surface);
  ex.options = options;
  ex.provenance = {{"entity", span_json(e)}, {"seed", seed}};
  if (at) ex.provenance["blank_at"] = *at + b.blank_at;
  return ex;
}

std::optional<TaskExample> gen_completion(const AnalyzedDocument& adoc, std::uint64_t seed, const TaskConfig& cfg) {
  struct Split {
    std::size_t sentence;
    std::size_t token;
    std::string prefix;
    std::string answer;
    bool period;
  };
  std::vector<Split> candidates;
  for (std::size_t si = 0; si < adoc.sentences.size(); ++si) {
    const auto& s = adoc.sentences[si];
    std::u32string_view sent = std::u32string_view(adoc.body).substr(s.start, s.end - s.start);
    auto tokens = adoc.sentence_tokens(si);
    const auto& preps = adoc.prepositions[si];
    // Only the sentence's last preposition counts; if nothing follows it the
    // sentence does not qualify.
    if (preps.empty()) continue;
    std::size_t p = preps.back();
    std::size_t cut = tokens[p].end;
    bool one_space = cut + 1 < sent.size() && sent[cut] == U' ' && !text::is_space(sent[cut + 1]);
    if (!one_space || p + 1 >= tokens.size()) continue;
    std::u32string_view rest = sent.substr(cut + 1);
    bool period = !rest.empty() && rest.back() == U'.';
    if (period) rest.remove_suffix(1);
    if (rest.empty()) continue;
    candidates.push_back({si, p, text::encode(sent.substr(0, cut)), text::encode(rest), period});
  }
  if (candidates.empty()) return std::nullopt;
  Stream rng(stream_key(adoc, seed), kCompletionStream);
  const Split& c = candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
  auto values = base_values(adoc);
  values["prefix"] = c.prefix;
  TaskExample ex = make(TaskKind::completion, adoc, fill_template(cfg.question_template(TaskKind::completion), values),
                        c.answer);
  ex.provenance = {{"sentence", c.sentence},   {"token", c.token},   {"prefix", c.prefix},
                   {"trailing_period", c.period}, {"seed", seed}};
  return ex;
}

TaskSuite build_suite(const AnalyzedDocument& adoc, const TaskConfig& cfg, std::uint64_t seed) {
  TaskSuite suite;
  suite.doc_id = adoc.doc.id;
  auto add = [&](TaskExample ex) {
    if (ex.answer.empty()) return;
    if (suite.counts[ex.kind] >= cfg.cap(ex.kind)) return;
    ++suite.counts[ex.kind];
    suite.examples.push_back(std::move(ex));
  };
  auto add_opt = [&](std::optional<TaskExample> ex) {
    if (ex) add(std::move(*ex));
  };
  for (TaskKind kind : kAllKinds) {
    if (!cfg.enabled.count(kind) || cfg.cap(kind) == 0) continue;
    switch (kind) {
      case TaskKind::memorization: add(gen_memorization(adoc, cfg)); break;
      case TaskKind::summarization: add(gen_summarization(adoc, cfg)); break;
      case TaskKind::gist: add_opt(gen_gist(adoc, cfg)); break;
      case TaskKind::nli:
        for (auto& ex : gen_nli_pair(adoc, seed, cfg)) add(std::move(ex));
        break;
      case TaskKind::teaching: add(gen_teaching(adoc, cfg)); break;
      case TaskKind::flashcards: add_opt(gen_flashcards(adoc, cfg)); break;
      case TaskKind::cloze: add_opt(gen_cloze(adoc, seed, cfg)); break;
      case TaskKind::multichoice: add_opt(gen_multichoice(adoc, seed, cfg)); break;
      case TaskKind::completion: add_opt(gen_completion(adoc, seed, cfg)); break;
    }
  }
  for (auto it = suite.counts.begin(); it != suite.counts.end();) {
    it = it->second == 0 ? suite.counts.erase(it) : std::next(it);
  }
  return suite;
}

std::string format_reading_comprehension(const TaskSuite& suite) {
  auto mem = std::find_if(suite.examples.begin(), suite.examples.end(),
                          [](const TaskExample& ex) { return ex.kind == TaskKind::memorization; });
  if (mem == suite.examples.end()) {
    throw_data("document " + suite.doc_id + ": reading-comprehension format needs a memorization example");
  }
  const std::string& document = mem->answer;
  std::string out = document;
  out += kReadingHeading;
  bool first = true;
  for (const auto& ex : suite.examples) {
    if (ex.kind == TaskKind::memorization) continue;
    std::string q = ex.question;
    std::size_t pos = document.empty() ? std::string::npos : q.find(document);
    if (pos != std::string::npos) q.erase(pos, document.size());
    if (!first) out += "\n\n";
    first = false;
    out += "Question: ";
    out += text::trim(q);
    out += "\nAnswer:";
    out += ex.answer;
  }
  return out;
}

std::pair<std::string, std::vector<std::pair<std::string, std::string>>> parse_reading_comprehension(
    std::string_view t) {
  std::size_t head = t.find(kReadingHeading);
  if (head == std::string_view::npos) throw_data("not a reading-comprehension document");
  std::pair<std::string, std::vector<std::pair<std::string, std::string>>> out;
  out.first = std::string(t.substr(0, head));
  std::string_view rest = t.substr(head + kReadingHeading.size());
  constexpr std::string_view first_tag = "Question: ";
  if (rest.empty()) return out;
  if (rest.substr(0, first_tag.size()) != first_tag) throw_data("reading-comprehension block must start with Question:");
  rest.remove_prefix(first_tag.size());
  while (true) {
    std::size_t next = rest.find(kBlockSep);
    std::string_view block = rest.substr(0, next);
    std::size_t ans = block.rfind("\nAnswer:");
    if (ans == std::string_view::npos) throw_data("reading-comprehension block without Answer:");
    out.second.emplace_back(std::string(block.substr(0, ans)), std::string(block.substr(ans + 8)));
    if (next == std::string_view::npos) break;
    rest.remove_prefix(next + kBlockSep.size());
  }
  return out;
}

}  // namespace absorb::taskgen
