#ifndef ABSORB_ABSORB_H
#define ABSORB_ABSORB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(ABSORB_BUILDING_LIBRARY)
#define ABSORB_API __declspec(dllexport)
#else
#define ABSORB_API __declspec(dllimport)
#endif
#else
#define ABSORB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as CLI exit statuses. */
typedef enum absorb_status {
  ABSORB_OK = 0,
  ABSORB_E_USAGE = 1,
  ABSORB_E_DATA = 2,
  ABSORB_E_IO = 3,
  ABSORB_E_INTERNAL = 4
} absorb_status;

typedef struct absorb_corpus absorb_corpus;
typedef struct absorb_analyzer absorb_analyzer;
typedef struct absorb_task_config absorb_task_config;

ABSORB_API const char* absorb_version(void);

/* Message of the last failed call on this thread ("" if none). */
ABSORB_API const char* absorb_last_error(void);

/* Frees strings returned through char** out-parameters. */
ABSORB_API void absorb_string_free(char* s);

/* Runs a pipeline command ("ingest", "gen-tasks", "gen-qa", "split", "plan",
   "presets", "eval", "stats", "verify") with JSON options. On success
   *result_json receives a JSON summary. */
ABSORB_API absorb_status absorb_run(const char* command, const char* options_json, char** result_json);

/* Corpus */
ABSORB_API absorb_status absorb_corpus_load(const char* const* paths, size_t n_paths, const char* name,
                                            uint64_t seed, absorb_corpus** out);
ABSORB_API void absorb_corpus_free(absorb_corpus* corpus);
ABSORB_API size_t absorb_corpus_size(const absorb_corpus* corpus);
ABSORB_API absorb_status absorb_corpus_document(const absorb_corpus* corpus, size_t index, char** document_json);
ABSORB_API absorb_status absorb_corpus_serialize(const absorb_corpus* corpus, char** jsonl);
ABSORB_API absorb_status absorb_parse_header(const char* header, char** title);

/* Analysis and task generation. NULL paths select the built-in lexicons or
   default task config. */
ABSORB_API absorb_status absorb_analyzer_new(const char* prepositions_path, const char* abbreviations_path,
                                             absorb_analyzer** out);
ABSORB_API void absorb_analyzer_free(absorb_analyzer* analyzer);
ABSORB_API absorb_status absorb_analyze(const absorb_analyzer* analyzer, const char* document_json,
                                        char** analysis_json);
ABSORB_API absorb_status absorb_task_config_load(const char* path, absorb_task_config** out);
ABSORB_API void absorb_task_config_free(absorb_task_config* config);
ABSORB_API absorb_status absorb_build_suite(const absorb_analyzer* analyzer, const absorb_task_config* config,
                                            const char* document_json, uint64_t seed, char** suite_json);
ABSORB_API absorb_status absorb_format_reading(const char* suite_json, char** text);

/* QA prompts ("generation" or "nli") and response parsing. */
ABSORB_API absorb_status absorb_build_prompt(const char* task, const char* document_json, char** prompt);
ABSORB_API absorb_status absorb_parse_qa_response(const char* raw, const char* task, const char* doc_id,
                                                  char** pairs_json);

/* Metrics */
ABSORB_API absorb_status absorb_normalize_answer(const char* text, char** normalized);
ABSORB_API absorb_status absorb_exact_match(const char* pred, const char* const* golds, size_t n_golds, int* out);
ABSORB_API absorb_status absorb_token_f1(const char* pred, const char* const* golds, size_t n_golds, double* out);
ABSORB_API absorb_status absorb_token_recall(const char* pred, const char* const* golds, size_t n_golds,
                                             double* out);
ABSORB_API absorb_status absorb_rouge_l(const char* pred, const char* gold, double* out);
ABSORB_API absorb_status absorb_perplexity(const double* logprobs, size_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif
