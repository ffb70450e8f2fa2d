#include "absorb/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "absorb/analysis.hpp"
#include "absorb/chat_client.hpp"
#include "absorb/corpus.hpp"
#include "absorb/curriculum.hpp"
#include "absorb/dataset.hpp"
#include "absorb/error.hpp"
#include "absorb/evalkit.hpp"
#include "absorb/hash.hpp"
#include "absorb/qagen.hpp"
#include "absorb/taskgen.hpp"
#include "absorb/text.hpp"

namespace fs = std::filesystem;

namespace absorb::pipeline {

namespace {

std::string req_str(const Json& o, const char* key) {
  if (!o.contains(key) || !o[key].is_string() || o[key].get<std::string>().empty()) {
    throw_usage(std::string("missing required option '") + key + "'");
  }
  return o[key].get<std::string>();
}

std::optional<std::string> opt_str(const Json& o, const char* key) {
  if (!o.contains(key) || o[key].is_null()) return std::nullopt;
  if (!o[key].is_string()) throw_usage(std::string("option '") + key + "' must be a string");
  std::string s = o[key].get<std::string>();
  if (s.empty()) return std::nullopt;
  return s;
}

std::optional<fs::path> opt_path(const Json& o, const char* key) {
  auto s = opt_str(o, key);
  if (!s) return std::nullopt;
  return fs::path(*s);
}

std::uint64_t seed_of(const Json& o) {
  if (!o.contains("seed") || o["seed"].is_null()) return 0;
  const Json& s = o["seed"];
  if (s.is_number_unsigned()) return s.get<std::uint64_t>();
  if (s.is_number_integer() && s.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(s.get<std::int64_t>());
  if (s.is_string()) {
    try {
      std::size_t used = 0;
      std::uint64_t v = std::stoull(s.get<std::string>(), &used, 10);
      if (used == s.get<std::string>().size()) return v;
    } catch (const std::exception&) {
    }
  }
  throw_usage("seed must be a non-negative 64-bit integer");
}

unsigned jobs_of(const Json& o) {
  long j = o.value("jobs", 1L);
  if (j < 0) throw_usage("jobs must be non-negative");
  if (j == 0) return std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(j);
}

bool flag(const Json& o, const char* key) { return o.contains(key) && o[key].is_boolean() && o[key].get<bool>(); }

double number(const Json& o, const char* key, double def) {
  if (!o.contains(key) || o[key].is_null()) return def;
  if (!o[key].is_number()) throw_usage(std::string("option '") + key + "' must be a number");
  return o[key].get<double>();
}

void write_json(const fs::path& path, const Json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

// Runs f(0..n-1) on up to `jobs` threads. The exception of the lowest
// failing index is rethrown, so error reporting does not depend on timing.
template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::atomic<std::size_t>& next) {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::atomic<std::size_t> next{0};
  unsigned threads = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  if (threads <= 1) {
    work(next);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back([&] { work(next); });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

[[noreturn]] void rethrow_with_doc(const std::string& doc_id) {
  try {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), "document " + doc_id + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error("document " + doc_id + ": " + e.what());
  }
}

analysis::RuleAnalyzer make_analyzer(const Json& o) {
  return analysis::RuleAnalyzer(analysis::Lexicons::load(opt_path(o, "prepositions"), opt_path(o, "abbreviations")));
}

std::vector<qagen::QAPair> read_qa(const fs::path& path) {
  std::vector<qagen::QAPair> out;
  for (const auto& [line_no, j] : read_jsonl(path)) {
    try {
      out.push_back(qagen::QAPair::from_json(j));
    } catch (const Error& e) {
      throw_data(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

dataset::Manifest read_verified(const fs::path& path) {
  auto v = dataset::verify_manifest(path);
  if (!v.ok) throw_data(path.string() + ": " + v.message);
  return dataset::read_manifest(path);
}

std::string cache_stem(const std::string& doc_id) {
  std::string s;
  bool changed = false;
  for (char c : doc_id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    s.push_back(ok ? c : '_');
    changed |= !ok;
  }
  if (changed || s.empty() || s.size() > 100) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(doc_id)));
    s = s.substr(0, 80) + "_" + buf;
  }
  return s;
}

}  // namespace

Json run_ingest(const Json& o) {
  std::vector<fs::path> inputs;
  if (o.contains("inputs") && o["inputs"].is_array()) {
    for (const auto& p : o["inputs"]) inputs.emplace_back(p.get<std::string>());
  }
  if (inputs.empty()) throw_usage("ingest needs at least one input file");
  fs::path out = req_str(o, "out");
  ensure_writable_dir(out);
  std::string name = opt_str(o, "name").value_or(inputs.size() == 1 ? inputs[0].stem().string() : "corpus");
  corpus::Corpus c = corpus::ingest_jsonl(inputs, name, seed_of(o));
  fs::path path = out / opt_str(o, "output_name").value_or("corpus.jsonl");
  write_file_atomic(path, corpus::serialize(c));
  return {{"docs", c.size()}, {"name", c.name}, {"path", path.generic_string()}};
}

Json run_gen_tasks(const Json& o) {
  fs::path corpus_path = req_str(o, "corpus");
  fs::path out = req_str(o, "out");
  std::string split = opt_str(o, "split").value_or("all");
  if (split != "train" && split != "test" && split != "all") throw_usage("split must be train, test or all");
  ensure_writable_dir(out);

  std::uint64_t seed = seed_of(o);
  taskgen::TaskConfig cfg;
  if (auto p = opt_path(o, "task_config")) cfg = taskgen::TaskConfig::load(*p);
  analysis::RuleAnalyzer analyzer = make_analyzer(o);
  corpus::Corpus c = corpus::ingest_jsonl(corpus_path, {}, seed);

  std::vector<taskgen::TaskSuite> suites(c.size());
  parallel_for(c.size(), jobs_of(o), [&](std::size_t i) {
    try {
      suites[i] = taskgen::build_suite(analyzer.analyze(c.documents[i]), cfg, seed);
    } catch (...) {
      rethrow_with_doc(c.documents[i].id);
    }
  });

  std::vector<dataset::Record> tasks;
  std::vector<dataset::Record> reading;
  std::vector<std::size_t> counts(taskgen::kAllKinds.size(), 0);
  std::vector<std::size_t> docs_without(taskgen::kAllKinds.size(), 0);
  bool has_memorization = cfg.enabled.count(taskgen::TaskKind::memorization) && cfg.cap(taskgen::TaskKind::memorization);
  for (std::size_t i = 0; i < suites.size(); ++i) {
    for (const auto& ex : suites[i].examples) tasks.push_back(dataset::task_record(ex));
    if (has_memorization) reading.push_back(dataset::reading_record(suites[i].doc_id, taskgen::format_reading_comprehension(suites[i])));
    for (std::size_t k = 0; k < taskgen::kAllKinds.size(); ++k) {
      auto it = suites[i].counts.find(taskgen::kAllKinds[k]);
      std::size_t n = it == suites[i].counts.end() ? 0 : it->second;
      counts[k] += n;
      if (n == 0) ++docs_without[k];
    }
  }
  if (c.size() == 0) throw_data(corpus_path.string() + ": corpus is empty; nothing to generate");

  Json written = Json::array();
  fs::path tasks_path = out / (split + "_self_teaching.jsonl");
  dataset::write_manifest(tasks, split + "_self_teaching", split, seed, tasks_path);
  written.push_back(tasks_path.generic_string());
  if (!reading.empty()) {
    fs::path reading_path = out / (split + "_reading_doc.jsonl");
    dataset::write_manifest(reading, split + "_reading_doc", split, seed, reading_path);
    written.push_back(reading_path.generic_string());
  }

  auto pct = dataset::percentages(counts);
  Json kinds = Json::object();
  Json without = Json::object();
  std::size_t total = 0;
  std::uint64_t pct_units = 0;
  for (std::size_t k = 0; k < taskgen::kAllKinds.size(); ++k) {
    std::string name(taskgen::to_string(taskgen::kAllKinds[k]));
    kinds[name] = {{"count", counts[k]}, {"percent", pct[k]}};
    without[name] = docs_without[k];
    total += counts[k];
    pct_units += static_cast<std::uint64_t>(std::llround(pct[k] * 100));
  }
  const auto& lex = analyzer.lexicons();
  Json stats = {{"split", split},
                {"docs", c.size()},
                {"examples", total},
                {"kinds", kinds},
                {"percent_total", static_cast<double>(pct_units) / 100.0},
                {"docs_without_kind", without},
                {"seed", seed},
                {"lexicons", {{"prepositions", lex.prepositions_version}, {"abbreviations", lex.abbreviations_version}}},
                {"task_config", cfg.to_json()}};
  fs::path stats_path = out / (split + "_self_teaching.stats.json");
  write_json(stats_path, stats);
  written.push_back(stats_path.generic_string());
  return {{"docs", c.size()}, {"examples", total}, {"written", written}, {"stats", stats}};
}

Json run_gen_qa(const Json& o) {
  fs::path corpus_path = req_str(o, "corpus");
  fs::path out = req_str(o, "out");
  ensure_writable_dir(out);
  fs::path cache = opt_path(o, "cache").value_or(out / "qa_cache");
  ensure_writable_dir(cache);
  bool cache_only = flag(o, "cache_only");

  std::vector<qagen::QATask> tasks;
  if (o.contains("tasks") && o["tasks"].is_array()) {
    for (const auto& t : o["tasks"]) tasks.push_back(qagen::qa_task_from_string(t.get<std::string>()));
  } else {
    tasks = {qagen::QATask::generation, qagen::QATask::nli};
  }

  qagen::ChatOptions copts;
  copts.url = opt_str(o, "url").value_or("");
  copts.api_key = opt_str(o, "api_key").value_or("");
  copts.model = opt_str(o, "model").value_or(copts.model);
  copts.temperature = number(o, "temperature", copts.temperature);
  copts.max_tokens = static_cast<int>(number(o, "max_tokens", copts.max_tokens));
  copts.max_in_flight = static_cast<int>(number(o, "max_in_flight", copts.max_in_flight));
  copts.max_retries = static_cast<int>(number(o, "max_retries", copts.max_retries));
  copts.backoff = std::chrono::milliseconds(static_cast<long>(number(o, "backoff_ms", 500)));
  std::unique_ptr<qagen::ChatClient> client;
  if (!cache_only) client = std::make_unique<qagen::ChatClient>(copts);

  qagen::Prompts prompts = qagen::Prompts::defaults();
  corpus::Corpus c = corpus::ingest_jsonl(corpus_path, {}, seed_of(o));

  struct Slot {
    std::vector<qagen::QAPair> pairs;
    std::size_t warnings = 0;
    bool cache_hit = false;
  };
  std::vector<Slot> slots(c.size() * tasks.size());
  parallel_for(slots.size(), jobs_of(o), [&](std::size_t k) {
    const corpus::RawDocument& doc = c.documents[k / tasks.size()];
    qagen::QATask task = tasks[k % tasks.size()];
    try {
      std::string prompt = task == qagen::QATask::generation ? qagen::build_generation_prompt(doc, prompts)
                                                             : qagen::build_nli_prompt(doc, prompts);
      fs::path entry = cache / (cache_stem(doc.id) + "." + std::string(qagen::to_string(task)) + ".json");
      Slot& slot = slots[k];
      if (fs::exists(entry)) {
        Json j;
        try {
          j = Json::parse(read_file(entry));
        } catch (const nlohmann::json::parse_error&) {
          throw_data("corrupt cache entry " + entry.string());
        }
        if (j.contains("request") && j["request"].value("prompt", "") == prompt) {
          slot.cache_hit = true;
          if (j.contains("error")) throw_data(j["error"].get<std::string>());
          for (const auto& p : j.at("pairs")) slot.pairs.push_back(qagen::QAPair::from_json(p));
          slot.warnings = j.value("warnings", std::size_t{0});
          return;
        }
      }
      if (!client) throw_io("no cached response for " + doc.id + " (" + std::string(qagen::to_string(task)) + ")");
      qagen::ChatRequest req = client->make_request(prompt);
      qagen::ChatResponse resp = client->complete(req);
      std::string text = resp.text;
      // The prompt ends in "Question:", so replies usually continue mid-block.
      if (text::trim(text).substr(0, 9) != "Question:") text = "Question:" + text;
      Json entry_json = {{"doc_id", doc.id},
                         {"task", qagen::to_string(task)},
                         {"request", {{"model", req.model}, {"prompt", req.prompt}, {"temperature", req.temperature},
                                      {"max_tokens", req.max_tokens}}},
                         {"response", resp.to_json()}};
      try {
        auto parsed = qagen::parse_qa_response(text, task, doc.id);
        slot.pairs = std::move(parsed.pairs);
        slot.warnings = parsed.warnings;
        Json pairs = Json::array();
        for (const auto& p : slot.pairs) pairs.push_back(p.to_json());
        entry_json["pairs"] = pairs;
        entry_json["warnings"] = slot.warnings;
        write_file_atomic(entry, entry_json.dump(2) + "\n");
      } catch (const Error& e) {
        entry_json["pairs"] = Json::array();
        entry_json["error"] = e.what();
        write_file_atomic(entry, entry_json.dump(2) + "\n");
        throw;
      }
    } catch (...) {
      rethrow_with_doc(doc.id);
    }
  });

  std::string lines;
  std::size_t n_gen = 0, n_nli = 0, warnings = 0, hits = 0;
  for (const auto& s : slots) {
    for (const auto& p : s.pairs) {
      lines += canonical(p.to_json()) + "\n";
      (p.task == qagen::QATask::generation ? n_gen : n_nli)++;
    }
    warnings += s.warnings;
    hits += s.cache_hit ? 1 : 0;
  }
  fs::path qa_path = out / "qa.jsonl";
  write_file_atomic(qa_path, lines);
  Json summary = {{"docs", c.size()},
                  {"pairs", {{"generation", n_gen}, {"nli", n_nli}}},
                  {"parse_warnings", warnings},
                  {"cache_hits", hits},
                  {"requests", client ? client->attempts() : 0},
                  {"path", qa_path.generic_string()}};
  write_json(out / "qa.report.json", summary);
  return summary;
}

Json run_split(const Json& o) {
  fs::path corpus_path = req_str(o, "corpus");
  fs::path out = req_str(o, "out");
  ensure_writable_dir(out);
  dataset::SplitSpec spec;
  spec.seed = seed_of(o);
  spec.test_fraction = number(o, "test_fraction", 0.1);
  spec.ngram = static_cast<std::size_t>(number(o, "ngram", 8));
  corpus::Corpus c = corpus::ingest_jsonl(corpus_path, {}, spec.seed);
  dataset::SplitResult parts = dataset::split_corpus(c, spec);

  std::unordered_map<std::string, bool> side;  // doc id -> is test
  for (const auto& d : parts.train.documents) side[d.id] = false;
  for (const auto& d : parts.test.documents) side[d.id] = true;
  auto is_test = [&](const std::string& id, const std::string& what) {
    auto it = side.find(id);
    if (it == side.end()) throw_data(what + " refers to unknown document " + id);
    return it->second;
  };

  Json written = Json::array();
  Json skipped = Json::array();
  Json counts = Json::object();
  auto emit = [&](const std::string& name, const std::string& split, std::vector<dataset::Record> records) {
    counts[name] = records.size();
    if (records.empty()) {
      skipped.push_back(name);
      return;
    }
    fs::path p = out / (name + ".jsonl");
    dataset::write_manifest(std::move(records), name, split, spec.seed, p);
    written.push_back(p.generic_string());
  };

  write_file_atomic(out / "train_corpus.jsonl", corpus::serialize(parts.train));
  write_file_atomic(out / "test_corpus.jsonl", corpus::serialize(parts.test));
  written.push_back((out / "train_corpus.jsonl").generic_string());
  written.push_back((out / "test_corpus.jsonl").generic_string());

  std::vector<dataset::Record> train_doc, test_doc;
  for (const auto& d : parts.train.documents) train_doc.push_back(dataset::doc_record(d));
  for (const auto& d : parts.test.documents) test_doc.push_back(dataset::doc_record(d));
  emit("train_doc", "train", std::move(train_doc));
  emit("test_doc", "test", std::move(test_doc));

  if (auto qa = opt_path(o, "qa")) {
    std::vector<dataset::Record> train_qa, train_nli, test_qa;
    for (const auto& p : read_qa(*qa)) {
      auto r = dataset::qa_record(p);
      if (is_test(p.doc_id, "QA pair")) test_qa.push_back(std::move(r));
      else (p.task == qagen::QATask::generation ? train_qa : train_nli).push_back(std::move(r));
    }
    emit("train_qa", "train", std::move(train_qa));
    emit("train_qa_nli", "train", std::move(train_nli));
    emit("test_qa", "test", std::move(test_qa));
  }
  auto route = [&](const std::optional<fs::path>& path, const std::string& stem) {
    if (!path) return;
    std::vector<dataset::Record> train, test;
    for (auto& r : read_verified(*path).records) {
      (is_test(r.doc_id(), stem + " record") ? test : train).push_back(std::move(r));
    }
    emit("train_" + stem, "train", std::move(train));
    emit("test_" + stem, "test", std::move(test));
  };
  route(opt_path(o, "tasks"), "self_teaching");
  route(opt_path(o, "reading"), "reading_doc");

  Json report = {{"seed", spec.seed},
                 {"test_fraction", spec.test_fraction},
                 {"docs", {{"total", c.size()}, {"train", parts.train.size()}, {"test", parts.test.size()}}},
                 {"records", counts},
                 {"skipped_empty", skipped},
                 {"overlap", dataset::overlap_report(parts.train, parts.test, spec.ngram)}};
  write_json(out / "split_report.json", report);
  written.push_back((out / "split_report.json").generic_string());
  return {{"train", parts.train.size()}, {"test", parts.test.size()}, {"written", written}, {"report", report}};
}

Json run_plan(const Json& o) {
  std::string preset = req_str(o, "preset");
  fs::path out = req_str(o, "out");
  curriculum::Presets presets =
      opt_path(o, "presets") ? curriculum::Presets::load(*opt_path(o, "presets")) : curriculum::Presets::defaults();
  fs::path manifests = opt_path(o, "manifests").value_or(out);
  bool check = !o.contains("check_inputs") || flag(o, "check_inputs");
  curriculum::StagePlan plan =
      curriculum::plan(presets, preset, manifests, flag(o, "cross_domain"), seed_of(o), check);
  ensure_writable_dir(out);
  // Render every stage before touching the output dir so a bad stage leaves nothing behind.
  std::vector<dataset::Manifest> rendered;
  if (flag(o, "render")) {
    for (std::size_t k = 1; k <= plan.stages.size(); ++k) rendered.push_back(curriculum::render_stage_inputs(plan, k));
  }
  fs::path plan_path = out / ("plan_" + preset + ".json");
  write_json(plan_path, plan.to_json());
  Json written = Json::array({plan_path.generic_string()});
  for (const auto& m : rendered) {
    fs::path p = out / (m.name + ".jsonl");
    write_file_atomic(p, dataset::serialize(m));
    written.push_back(p.generic_string());
  }
  return {{"plan", plan.to_json()}, {"written", written}};
}

Json run_list_presets(const Json& o) {
  curriculum::Presets presets =
      opt_path(o, "presets") ? curriculum::Presets::load(*opt_path(o, "presets")) : curriculum::Presets::defaults();
  return {{"presets", presets.summary()}};
}

Json run_eval(const Json& o) {
  auto refs_path = opt_path(o, "references");
  auto preds_path = opt_path(o, "predictions");
  auto logprobs_path = opt_path(o, "logprobs");
  if (static_cast<bool>(refs_path) != static_cast<bool>(preds_path)) {
    throw_usage("references and predictions must be given together");
  }
  if (!refs_path && !logprobs_path) throw_usage("eval needs references + predictions, or logprobs");
  fs::path report_path;
  if (auto r = opt_path(o, "report")) {
    report_path = *r;
    if (report_path.has_parent_path()) ensure_writable_dir(report_path.parent_path());
  } else {
    fs::path out = req_str(o, "out");
    ensure_writable_dir(out);
    report_path = out / "eval_report.json";
  }

  std::unique_ptr<evalkit::Judge> judge;
  std::string judge_mode = opt_str(o, "judge").value_or("none");
  if (auto v = opt_path(o, "judge_verdicts")) {
    judge = std::make_unique<evalkit::VerdictJudge>(*v);
    judge_mode = "verdicts";
  } else if (judge_mode == "exact") {
    judge = std::make_unique<evalkit::ExactJudge>();
  } else if (judge_mode != "none") {
    throw_usage("judge must be none or exact (or pass judge_verdicts)");
  }

  evalkit::Diagnostics diag;
  std::vector<evalkit::Judgment> judgments;
  if (refs_path) {
    judgments = evalkit::score(evalkit::read_references(*refs_path), evalkit::read_predictions(*preds_path),
                               judge.get(), diag);
  }
  std::optional<double> ppl;
  std::size_t tokens = 0;
  if (logprobs_path) {
    auto records = evalkit::read_logprobs(*logprobs_path);
    ppl = evalkit::aggregate_ppl(records);
    for (const auto& r : records) tokens += r.logprobs.size();
  }
  Json report = evalkit::report(std::move(judgments), diag, ppl, tokens);
  report["judge"] = judge_mode;
  write_json(report_path, report);
  return {{"metrics", report["metrics"]}, {"path", report_path.generic_string()}};
}

Json run_stats(const Json& o) {
  auto corpus_path = opt_path(o, "corpus");
  auto qa_path = opt_path(o, "qa");
  if (!corpus_path && !qa_path) throw_usage("stats needs a corpus and/or a QA file");
  auto words = [](const std::string& s) { return text::split_whitespace(s).size(); };
  auto avg = [](std::size_t sum, std::size_t n) { return n ? round2(static_cast<double>(sum) / static_cast<double>(n)) : 0.0; };

  Json stats = Json::object();
  if (corpus_path) {
    corpus::Corpus c = corpus::ingest_jsonl(*corpus_path);
    std::size_t body_words = 0;
    for (const auto& d : c.documents) body_words += words(d.body);
    stats["docs"] = c.size();
    stats["avg_doc_words"] = avg(body_words, c.size());
  }
  if (qa_path) {
    auto pairs = read_qa(*qa_path);
    std::size_t gen = 0, nli = 0, gq = 0, ga = 0, nq = 0;
    std::vector<std::size_t> labels(3, 0);
    for (const auto& p : pairs) {
      if (p.task == qagen::QATask::generation) {
        ++gen;
        gq += words(p.question);
        ga += words(p.answer);
      } else {
        ++nli;
        nq += words(p.question);
        ++labels[static_cast<std::size_t>(*p.answer_label)];
      }
    }
    auto pct = dataset::percentages(labels);
    stats["qa"] = {{"generation", gen}, {"nli", nli}, {"total", pairs.size()}};
    stats["avg_question_words"] = avg(gq, gen);
    stats["avg_answer_words"] = avg(ga, gen);
    stats["avg_nli_question_words"] = avg(nq, nli);
    stats["nli_labels"] = {{"Yes", pct[0]}, {"No", pct[1]}, {"Impossible", pct[2]}};
  }
  stats["word_counts"] = "whitespace-separated words";
  if (auto out = opt_path(o, "out")) {
    ensure_writable_dir(*out);
    write_json(*out / "stats.json", stats);
  }
  return stats;
}

Json run_verify(const Json& o) {
  fs::path path = req_str(o, "manifest");
  if (!fs::exists(path)) throw_io("no such manifest: " + path.string());
  auto v = dataset::verify_manifest(path);
  Json res = {{"ok", v.ok}, {"count", v.count}, {"message", v.message}, {"path", path.generic_string()}};
  if (v.first_mismatch) res["first_mismatch"] = *v.first_mismatch;
  if (!v.ok) {
    throw_data(path.string() + ": " + v.message +
               (v.first_mismatch ? " (first mismatch at record " + std::to_string(*v.first_mismatch) + ")" : ""));
  }
  return res;
}

std::vector<std::string> commands() {
  return {"ingest", "gen-tasks", "gen-qa", "split", "plan", "presets", "eval", "stats", "verify"};
}

Json run(std::string_view command, const Json& opts) {
  if (!opts.is_object()) throw_usage("options must be a JSON object");
  if (command == "ingest") return run_ingest(opts);
  if (command == "gen-tasks") return run_gen_tasks(opts);
  if (command == "gen-qa") return run_gen_qa(opts);
  if (command == "split") return run_split(opts);
  if (command == "plan") return run_plan(opts);
  if (command == "presets") return run_list_presets(opts);
  if (command == "eval") return run_eval(opts);
  if (command == "stats") return run_stats(opts);
  if (command == "verify") return run_verify(opts);
  throw_usage("unknown command '" + std::string(command) + "'; valid: " + text::join(commands(), ", "));
}

}  // namespace absorb::pipeline
