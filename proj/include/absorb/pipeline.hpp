#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "absorb/jsonio.hpp"

// Batch commands behind the CLI. Each takes an options object (see
// README for the keys) and returns a JSON summary; failures throw
// absorb::Error with the category that becomes the exit status.
namespace absorb::pipeline {

Json run_ingest(const Json& opts);
Json run_gen_tasks(const Json& opts);
Json run_gen_qa(const Json& opts);
Json run_split(const Json& opts);
Json run_plan(const Json& opts);
Json run_list_presets(const Json& opts);
Json run_eval(const Json& opts);
Json run_stats(const Json& opts);
Json run_verify(const Json& opts);

/// Dispatches on the subcommand name ("gen-tasks", "plan", ...).
Json run(std::string_view command, const Json& opts);
std::vector<std::string> commands();

}  // namespace absorb::pipeline
