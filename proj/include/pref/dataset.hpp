#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pref/types.hpp"

namespace pref {

struct DatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Line-delimited JSON ingestion. Duplicate (user, response) vote rows are
// merged by summing counts, with a warning per merge.
Dataset load_dataset(const std::string& prompts_path,
                     const std::string& responses_path,
                     const std::string& votes_path,
                     std::vector<std::string>* warnings = nullptr);

void save_dataset(const Dataset& d,
                  const std::string& prompts_path,
                  const std::string& responses_path,
                  const std::string& votes_path);

// Two-step filter: (1) drop users with total votes < min_user_votes,
// (2) recompute totals, drop responses below min_response_votes together
// with their votes. Single pass, idempotent.
Dataset filter_dataset(const Dataset& d, const FilterParams& p);

StatsReport dataset_stats(const Dataset& d);

// Responses with fewer than min_responses_per_prompt siblings are dropped
// (used when exporting candidates for LLM preference collection).
Dataset restrict_to_eligible_prompts(const Dataset& d, std::int64_t min_responses_per_prompt);

} // namespace pref
