#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pref {

struct Prompt {
    std::string prompt_id;
    std::string text;
};

struct Response {
    std::string response_id;
    std::string prompt_id;
    std::string text;
};

struct VoteRecord {
    std::string user_id;
    std::string response_id;
    std::int64_t count = 0;
};

struct Dataset {
    std::vector<Prompt> prompts;
    std::vector<Response> responses;
    std::vector<VoteRecord> votes;
    std::map<std::string, std::string> provenance;

    // Derived lookups, rebuilt by validate().
    std::map<std::string, std::size_t> prompt_index;
    std::map<std::string, std::size_t> response_index;
    std::map<std::string, std::int64_t> response_totals;

    const Prompt& prompt(const std::string& id) const;
    const Response& response(const std::string& id) const;
    std::int64_t total_votes(const std::string& response_id) const;

    // Rebuilds indices, checks referential integrity and uniqueness.
    // Throws DatasetError on violation; platform-rule violations (>3 votes
    // by one user on one prompt) only produce warnings.
    void validate(std::vector<std::string>* warnings = nullptr);
};

struct FilterParams {
    std::int64_t min_user_votes = 100;
    std::int64_t min_response_votes = 3;
    std::int64_t min_responses_per_prompt = 5;  // LLM-evaluation export only
};

struct StatsReport {
    std::size_t prompts = 0;
    std::size_t responses = 0;
    std::size_t users = 0;
    std::int64_t total_votes = 0;
    double mean_voters_per_prompt = 0.0;
};

} // namespace pref
