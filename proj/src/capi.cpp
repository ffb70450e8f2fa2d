#include "absorb/absorb.h"

#include <cstring>
#include <string>

#include "absorb/analysis.hpp"
#include "absorb/corpus.hpp"
#include "absorb/error.hpp"
#include "absorb/evalkit.hpp"
#include "absorb/pipeline.hpp"
#include "absorb/qagen.hpp"
#include "absorb/taskgen.hpp"

struct absorb_corpus {
  absorb::corpus::Corpus value;
};

struct absorb_analyzer {
  absorb::analysis::RuleAnalyzer value;
};

struct absorb_task_config {
  absorb::taskgen::TaskConfig value;
};

namespace {

thread_local std::string g_last_error;

template <class F>
absorb_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return ABSORB_OK;
  } catch (const absorb::Error& e) {
    g_last_error = e.what();
    return static_cast<absorb_status>(static_cast<int>(e.code()));
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return ABSORB_E_DATA;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return ABSORB_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ABSORB_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return ABSORB_E_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

void need(const void* p, const char* what) {
  if (!p) absorb::throw_usage(std::string(what) + " must not be NULL");
}

std::vector<std::string> strings(const char* const* v, std::size_t n) {
  if (n) need(v, "golds");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    need(v[i], "gold answer");
    out.emplace_back(v[i]);
  }
  return out;
}

absorb::corpus::RawDocument parse_document(const char* document_json) {
  need(document_json, "document_json");
  absorb::Json j;
  try {
    j = absorb::Json::parse(document_json);
  } catch (const nlohmann::json::parse_error& e) {
    absorb::throw_data(std::string("malformed document JSON: ") + e.what());
  }
  return absorb::corpus::document_from_json(j, "document");
}

// A task named by the caller is an argument, not data.
absorb::qagen::QATask task_arg(const char* task) {
  std::string_view t(task);
  if (t != "generation" && t != "nli") absorb::throw_usage("task must be generation or nli, got '" + std::string(t) + "'");
  return absorb::qagen::qa_task_from_string(t);
}

}  // namespace

extern "C" {

const char* absorb_version(void) { return "0.1.0"; }

const char* absorb_last_error(void) { return g_last_error.c_str(); }

void absorb_string_free(char* s) { std::free(s); }

absorb_status absorb_run(const char* command, const char* options_json, char** result_json) {
  return guarded([&] {
    need(command, "command");
    need(result_json, "result_json");
    absorb::Json opts = options_json && *options_json ? absorb::Json::parse(options_json) : absorb::Json::object();
    *result_json = dup(absorb::pipeline::run(command, opts).dump());
  });
}

absorb_status absorb_corpus_load(const char* const* paths, size_t n_paths, const char* name, uint64_t seed,
                                 absorb_corpus** out) {
  return guarded([&] {
    need(out, "out");
    if (n_paths) need(paths, "paths");
    std::vector<std::filesystem::path> p;
    for (size_t i = 0; i < n_paths; ++i) {
      need(paths[i], "path");
      p.emplace_back(paths[i]);
    }
    auto c = std::make_unique<absorb_corpus>();
    c->value = absorb::corpus::ingest_jsonl(p, name ? name : "corpus", seed);
    *out = c.release();
  });
}

void absorb_corpus_free(absorb_corpus* corpus) { delete corpus; }

size_t absorb_corpus_size(const absorb_corpus* corpus) { return corpus ? corpus->value.size() : 0; }

absorb_status absorb_corpus_document(const absorb_corpus* corpus, size_t index, char** document_json) {
  return guarded([&] {
    need(corpus, "corpus");
    need(document_json, "document_json");
    if (index >= corpus->value.size()) absorb::throw_usage("document index out of range");
    *document_json = dup(absorb::canonical(absorb::corpus::to_json(corpus->value.documents[index])));
  });
}

absorb_status absorb_corpus_serialize(const absorb_corpus* corpus, char** jsonl) {
  return guarded([&] {
    need(corpus, "corpus");
    need(jsonl, "jsonl");
    *jsonl = dup(absorb::corpus::serialize(corpus->value));
  });
}

absorb_status absorb_parse_header(const char* header, char** title) {
  return guarded([&] {
    need(header, "header");
    need(title, "title");
    *title = dup(absorb::corpus::parse_header(header));
  });
}

absorb_status absorb_analyzer_new(const char* prepositions_path, const char* abbreviations_path,
                                  absorb_analyzer** out) {
  return guarded([&] {
    need(out, "out");
    std::optional<std::filesystem::path> p, a;
    if (prepositions_path) p = prepositions_path;
    if (abbreviations_path) a = abbreviations_path;
    *out = new absorb_analyzer{absorb::analysis::RuleAnalyzer(absorb::analysis::Lexicons::load(p, a))};
  });
}

void absorb_analyzer_free(absorb_analyzer* analyzer) { delete analyzer; }

absorb_status absorb_analyze(const absorb_analyzer* analyzer, const char* document_json, char** analysis_json) {
  return guarded([&] {
    need(analyzer, "analyzer");
    need(analysis_json, "analysis_json");
    auto adoc = analyzer->value.analyze(parse_document(document_json));
    absorb::Json sentences = absorb::Json::array();
    for (const auto& s : adoc.sentences) sentences.push_back({{"start", s.start}, {"end", s.end}, {"index", s.index}});
    absorb::Json entities = absorb::Json::array();
    for (const auto& e : adoc.entities) {
      entities.push_back({{"start", e.start}, {"end", e.end}, {"surface", e.surface},
                          {"kind", absorb::analysis::to_string(e.kind)}});
    }
    absorb::Json j = {{"doc_id", adoc.doc.id},
                      {"sentences", sentences},
                      {"entities", entities},
                      {"prepositions", adoc.prepositions}};
    *analysis_json = dup(j.dump());
  });
}

absorb_status absorb_task_config_load(const char* path, absorb_task_config** out) {
  return guarded([&] {
    need(out, "out");
    auto cfg = std::make_unique<absorb_task_config>();
    if (path) cfg->value = absorb::taskgen::TaskConfig::load(path);
    *out = cfg.release();
  });
}

void absorb_task_config_free(absorb_task_config* config) { delete config; }

absorb_status absorb_build_suite(const absorb_analyzer* analyzer, const absorb_task_config* config,
                                 const char* document_json, uint64_t seed, char** suite_json) {
  return guarded([&] {
    need(analyzer, "analyzer");
    need(suite_json, "suite_json");
    absorb::taskgen::TaskConfig defaults;
    const auto& cfg = config ? config->value : defaults;
    auto suite = absorb::taskgen::build_suite(analyzer->value.analyze(parse_document(document_json)), cfg, seed);
    absorb::Json examples = absorb::Json::array();
    for (const auto& ex : suite.examples) examples.push_back(ex.to_json());
    absorb::Json counts = absorb::Json::object();
    for (const auto& [k, n] : suite.counts) counts[std::string(absorb::taskgen::to_string(k))] = n;
    *suite_json = dup(absorb::Json{{"doc_id", suite.doc_id}, {"examples", examples}, {"counts", counts}}.dump());
  });
}

absorb_status absorb_format_reading(const char* suite_json, char** text) {
  return guarded([&] {
    need(suite_json, "suite_json");
    need(text, "text");
    absorb::Json j = absorb::Json::parse(suite_json);
    absorb::taskgen::TaskSuite suite;
    suite.doc_id = j.value("doc_id", "");
    for (const auto& ex : j.at("examples")) suite.examples.push_back(absorb::taskgen::TaskExample::from_json(ex));
    *text = dup(absorb::taskgen::format_reading_comprehension(suite));
  });
}

absorb_status absorb_build_prompt(const char* task, const char* document_json, char** prompt) {
  return guarded([&] {
    need(task, "task");
    need(prompt, "prompt");
    auto doc = parse_document(document_json);
    auto t = task_arg(task);
    *prompt = dup(t == absorb::qagen::QATask::generation ? absorb::qagen::build_generation_prompt(doc)
                                                          : absorb::qagen::build_nli_prompt(doc));
  });
}

absorb_status absorb_parse_qa_response(const char* raw, const char* task, const char* doc_id, char** pairs_json) {
  return guarded([&] {
    need(raw, "raw");
    need(task, "task");
    need(pairs_json, "pairs_json");
    auto res = absorb::qagen::parse_qa_response(raw, task_arg(task), doc_id ? doc_id : "");
    absorb::Json pairs = absorb::Json::array();
    for (const auto& p : res.pairs) pairs.push_back(p.to_json());
    *pairs_json = dup(absorb::Json{{"pairs", pairs}, {"warnings", res.warnings}}.dump());
  });
}

absorb_status absorb_normalize_answer(const char* text, char** normalized) {
  return guarded([&] {
    need(text, "text");
    need(normalized, "normalized");
    *normalized = dup(absorb::evalkit::normalize_answer(text));
  });
}

absorb_status absorb_exact_match(const char* pred, const char* const* golds, size_t n_golds, int* out) {
  return guarded([&] {
    need(pred, "pred");
    need(out, "out");
    *out = absorb::evalkit::exact_match(pred, strings(golds, n_golds));
  });
}

absorb_status absorb_token_f1(const char* pred, const char* const* golds, size_t n_golds, double* out) {
  return guarded([&] {
    need(pred, "pred");
    need(out, "out");
    *out = absorb::evalkit::token_f1(pred, strings(golds, n_golds));
  });
}

absorb_status absorb_token_recall(const char* pred, const char* const* golds, size_t n_golds, double* out) {
  return guarded([&] {
    need(pred, "pred");
    need(out, "out");
    *out = absorb::evalkit::token_recall(pred, strings(golds, n_golds));
  });
}

absorb_status absorb_rouge_l(const char* pred, const char* gold, double* out) {
  return guarded([&] {
    need(pred, "pred");
    need(gold, "gold");
    need(out, "out");
    *out = absorb::evalkit::rouge_l(std::string_view(pred), std::string_view(gold));
  });
}

absorb_status absorb_perplexity(const double* logprobs, size_t n, double* out) {
  return guarded([&] {
    need(out, "out");
    if (n) need(logprobs, "logprobs");
    absorb::evalkit::LogProbRecord r;
    r.logprobs.assign(logprobs, logprobs + n);
    *out = absorb::evalkit::aggregate_ppl({r});
  });
}

}  // extern "C"
