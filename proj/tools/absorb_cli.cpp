// absorb: command-line front end. Every subcommand is forwarded to the
// shared library through absorb_run().
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "absorb/absorb.h"

using Json = nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out = "out";
};

void put(Json& j, const char* key, const std::string& v) {
  if (!v.empty()) j[key] = v;
}

int invoke(const std::string& command, const Json& opts) {
  char* result = nullptr;
  absorb_status st = absorb_run(command.c_str(), opts.dump().c_str(), &result);
  if (st != ABSORB_OK) {
    std::cerr << "absorb " << command << ": error: " << absorb_last_error() << "\n";
    return static_cast<int>(st);
  }
  std::cout << Json::parse(result).dump(2) << "\n";
  absorb_string_free(result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corpus-to-curriculum compiler: self-teaching tasks, QA prompts, stage plans, metrics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(absorb_version()));
  app.set_config("--config", "", "Read options from a TOML/INI file (flags still win)");

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->envname("ABSORB_SEED")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads for per-document work (0 = all cores)")
      ->envname("ABSORB_JOBS")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->envname("ABSORB_OUT")->capture_default_str();

  auto base = [&] {
    return Json{{"seed", g.seed}, {"jobs", g.jobs}, {"out", g.out}};
  };

  // ingest
  std::vector<std::string> ingest_inputs;
  std::string ingest_name;
  auto* ingest = app.add_subcommand("ingest", "Validate and normalize JSONL corpora into <out>/corpus.jsonl");
  ingest->add_option("inputs", ingest_inputs, "Input JSONL files")->required()->check(CLI::ExistingFile);
  ingest->add_option("--name", ingest_name, "Corpus name (default: input file stem)");

  // gen-tasks
  std::string gt_corpus, gt_split = "all", gt_config, gt_prep, gt_abbrev;
  auto* gen_tasks = app.add_subcommand("gen-tasks", "Build self-teaching task manifests and statistics");
  gen_tasks->add_option("--corpus", gt_corpus, "Corpus JSONL")->required();
  gen_tasks->add_option("--split", gt_split, "Label for the outputs")
      ->check(CLI::IsMember({"train", "test", "all"}))
      ->capture_default_str();
  gen_tasks->add_option("--task-config", gt_config, "Task config JSON");
  gen_tasks->add_option("--prepositions", gt_prep, "Preposition lexicon override");
  gen_tasks->add_option("--abbreviations", gt_abbrev, "Abbreviation list override");

  // gen-qa
  std::string qa_corpus, qa_cache, qa_url, qa_key, qa_model = "gpt-4";
  double qa_temperature = 0.0;
  int qa_max_tokens = 1024, qa_in_flight = 4, qa_retries = 4, qa_backoff = 500;
  std::vector<std::string> qa_tasks;
  bool qa_cache_only = false;
  auto* gen_qa = app.add_subcommand("gen-qa", "Generate QA pairs through a chat-completion endpoint");
  gen_qa->add_option("--corpus", qa_corpus, "Corpus JSONL")->required();
  gen_qa->add_option("--cache", qa_cache, "Response cache directory (default: <out>/qa_cache)");
  gen_qa->add_option("--chat-url", qa_url, "Chat-completion endpoint")->envname("ABSORB_CHAT_URL");
  gen_qa->add_option("--api-key", qa_key, "Bearer token")->envname("ABSORB_API_KEY");
  gen_qa->add_option("--model", qa_model, "Model name")->capture_default_str();
  gen_qa->add_option("--temperature", qa_temperature, "Sampling temperature")->capture_default_str();
  gen_qa->add_option("--max-tokens", qa_max_tokens, "Maximum response length")->capture_default_str();
  gen_qa->add_option("--max-in-flight", qa_in_flight, "Concurrent requests")->capture_default_str();
  gen_qa->add_option("--retries", qa_retries, "Retries on transient failures")->capture_default_str();
  gen_qa->add_option("--backoff-ms", qa_backoff, "Initial retry delay")->capture_default_str();
  gen_qa->add_option("--task", qa_tasks, "generation and/or nli (default: both)")
      ->check(CLI::IsMember({"generation", "nli"}));
  gen_qa->add_flag("--cache-only", qa_cache_only, "Replay cached responses; never call the endpoint");

  // split
  std::string sp_corpus, sp_qa, sp_tasks, sp_reading;
  double sp_fraction = 0.1;
  int sp_ngram = 8;
  auto* split = app.add_subcommand("split", "Seeded train/test split; QA and task records follow their document");
  split->add_option("--corpus", sp_corpus, "Corpus JSONL")->required();
  split->add_option("--qa", sp_qa, "QA pairs JSONL");
  split->add_option("--tasks", sp_tasks, "Self-teaching task manifest");
  split->add_option("--reading", sp_reading, "Reading-comprehension manifest");
  split->add_option("--test-fraction", sp_fraction, "Share of documents held out")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  split->add_option("--ngram", sp_ngram, "n for the shared n-gram report")->check(CLI::PositiveNumber)->capture_default_str();

  // plan
  std::string pl_preset, pl_manifests, pl_presets;
  bool pl_cross = false, pl_render = false, pl_list = false;
  auto* plan = app.add_subcommand("plan", "Write the stage plan of a training method preset");
  plan->add_option("--preset", pl_preset, "Method preset id");
  plan->add_option("--manifests", pl_manifests, "Directory holding <ref>.jsonl manifests (default: --out)");
  plan->add_option("--presets", pl_presets, "Presets file override");
  plan->add_flag("--cross-domain", pl_cross, "Use the cross-domain epoch schedule where defined");
  plan->add_flag("--render", pl_render, "Also materialize every stage as a manifest");
  plan->add_flag("--list", pl_list, "List preset ids and exit");

  // eval
  std::string ev_refs, ev_preds, ev_logprobs, ev_judge = "none", ev_verdicts, ev_report;
  auto* eval = app.add_subcommand("eval", "Score predictions (EM, F1, recall, Rouge-L, NLI accuracy, judge, PPL)");
  eval->add_option("--references", ev_refs, "References JSONL");
  eval->add_option("--predictions", ev_preds, "Predictions JSONL");
  eval->add_option("--logprobs", ev_logprobs, "Per-token log-probabilities JSONL");
  eval->add_option("--judge", ev_judge, "Entailment judge")->check(CLI::IsMember({"none", "exact"}))->capture_default_str();
  eval->add_option("--judge-verdicts", ev_verdicts, "Precomputed entailment verdicts JSONL");
  eval->add_option("--report", ev_report, "Report path (default: <out>/eval_report.json)");

  // stats
  std::string st_corpus, st_qa;
  auto* stats = app.add_subcommand("stats", "Corpus and QA statistics");
  stats->add_option("--corpus", st_corpus, "Corpus JSONL");
  stats->add_option("--qa", st_qa, "QA pairs JSONL");

  // verify
  std::string vf_manifest;
  auto* verify = app.add_subcommand("verify", "Check a manifest against its checksum footer");
  verify->add_option("manifest", vf_manifest, "Manifest JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ABSORB_E_USAGE;
  }

  Json o = base();
  if (*ingest) {
    o["inputs"] = ingest_inputs;
    put(o, "name", ingest_name);
    return invoke("ingest", o);
  }
  if (*gen_tasks) {
    o["corpus"] = gt_corpus;
    o["split"] = gt_split;
    put(o, "task_config", gt_config);
    put(o, "prepositions", gt_prep);
    put(o, "abbreviations", gt_abbrev);
    return invoke("gen-tasks", o);
  }
  if (*gen_qa) {
    o["corpus"] = qa_corpus;
    put(o, "cache", qa_cache);
    put(o, "url", qa_url);
    put(o, "api_key", qa_key);
    o["model"] = qa_model;
    o["temperature"] = qa_temperature;
    o["max_tokens"] = qa_max_tokens;
    o["max_in_flight"] = qa_in_flight;
    o["max_retries"] = qa_retries;
    o["backoff_ms"] = qa_backoff;
    if (!qa_tasks.empty()) o["tasks"] = qa_tasks;
    o["cache_only"] = qa_cache_only;
    return invoke("gen-qa", o);
  }
  if (*split) {
    o["corpus"] = sp_corpus;
    put(o, "qa", sp_qa);
    put(o, "tasks", sp_tasks);
    put(o, "reading", sp_reading);
    o["test_fraction"] = sp_fraction;
    o["ngram"] = sp_ngram;
    return invoke("split", o);
  }
  if (*plan) {
    put(o, "presets", pl_presets);
    if (pl_list) return invoke("presets", o);
    if (pl_preset.empty()) {
      std::cerr << "absorb plan: error: --preset is required (see --list)\n";
      return ABSORB_E_USAGE;
    }
    o["preset"] = pl_preset;
    put(o, "manifests", pl_manifests);
    o["cross_domain"] = pl_cross;
    o["render"] = pl_render;
    return invoke("plan", o);
  }
  if (*eval) {
    put(o, "references", ev_refs);
    put(o, "predictions", ev_preds);
    put(o, "logprobs", ev_logprobs);
    o["judge"] = ev_judge;
    put(o, "judge_verdicts", ev_verdicts);
    put(o, "report", ev_report);
    return invoke("eval", o);
  }
  if (*stats) {
    put(o, "corpus", st_corpus);
    put(o, "qa", st_qa);
    return invoke("stats", o);
  }
  if (*verify) {
    o["manifest"] = vf_manifest;
    return invoke("verify", o);
  }
  return ABSORB_E_USAGE;
}
