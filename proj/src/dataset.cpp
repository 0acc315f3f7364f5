#include "pref/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "pref/jsonl.hpp"

namespace pref {

namespace {

void warn(std::vector<std::string>* sink, std::string msg) {
    if (sink) sink->push_back(std::move(msg));
}

std::string require_string(const nlohmann::json& obj, const char* key,
                           const std::string& path, std::size_t lineno) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        throw IoError(path + ":" + std::to_string(lineno) + ": missing string field \"" +
                      key + "\"");
    }
    return it->get<std::string>();
}

} // namespace

const Prompt& Dataset::prompt(const std::string& id) const {
    auto it = prompt_index.find(id);
    if (it == prompt_index.end()) throw DatasetError("unknown prompt_id: " + id);
    return prompts[it->second];
}

const Response& Dataset::response(const std::string& id) const {
    auto it = response_index.find(id);
    if (it == response_index.end()) throw DatasetError("unknown response_id: " + id);
    return responses[it->second];
}

std::int64_t Dataset::total_votes(const std::string& response_id) const {
    auto it = response_totals.find(response_id);
    return it == response_totals.end() ? 0 : it->second;
}

void Dataset::validate(std::vector<std::string>* warnings) {
    prompt_index.clear();
    response_index.clear();
    response_totals.clear();

    for (std::size_t i = 0; i < prompts.size(); ++i) {
        if (prompts[i].text.empty()) {
            throw DatasetError("prompt " + prompts[i].prompt_id + " has empty text");
        }
        if (!prompt_index.emplace(prompts[i].prompt_id, i).second) {
            throw DatasetError("duplicate prompt_id: " + prompts[i].prompt_id);
        }
    }
    for (std::size_t i = 0; i < responses.size(); ++i) {
        const auto& r = responses[i];
        if (r.text.empty()) throw DatasetError("response " + r.response_id + " has empty text");
        if (!prompt_index.count(r.prompt_id)) {
            throw DatasetError("response " + r.response_id + " references unknown prompt_id " +
                               r.prompt_id);
        }
        if (!response_index.emplace(r.response_id, i).second) {
            throw DatasetError("duplicate response_id: " + r.response_id);
        }
        response_totals.emplace(r.response_id, 0);
    }

    std::set<std::pair<std::string, std::string>> seen;
    std::map<std::pair<std::string, std::string>, std::int64_t> per_user_prompt;
    for (const auto& v : votes) {
        if (v.count < 1) {
            throw DatasetError("vote record (" + v.user_id + ", " + v.response_id +
                               ") has count < 1");
        }
        auto rit = response_index.find(v.response_id);
        if (rit == response_index.end()) {
            throw DatasetError("vote references unknown response_id " + v.response_id);
        }
        if (!seen.emplace(v.user_id, v.response_id).second) {
            throw DatasetError("duplicate vote row for (" + v.user_id + ", " + v.response_id + ")");
        }
        response_totals[v.response_id] += v.count;
        per_user_prompt[{v.user_id, responses[rit->second].prompt_id}] += v.count;
    }

    // Platform rule: at most three votes per user per prompt. Exported logs
    // may predate enforcement, so this is a warning only.
    for (const auto& [key, total] : per_user_prompt) {
        if (total > 3) {
            warn(warnings, "user " + key.first + " cast " + std::to_string(total) +
                               " votes on prompt " + key.second + " (platform limit is 3)");
        }
    }
}

Dataset load_dataset(const std::string& prompts_path,
                     const std::string& responses_path,
                     const std::string& votes_path,
                     std::vector<std::string>* warnings) {
    Dataset d;
    for_each_jsonl(prompts_path, [&](std::size_t lineno, const nlohmann::json& obj) {
        d.prompts.push_back({require_string(obj, "prompt_id", prompts_path, lineno),
                             require_string(obj, "text", prompts_path, lineno)});
    });
    for_each_jsonl(responses_path, [&](std::size_t lineno, const nlohmann::json& obj) {
        d.responses.push_back({require_string(obj, "response_id", responses_path, lineno),
                               require_string(obj, "prompt_id", responses_path, lineno),
                               require_string(obj, "text", responses_path, lineno)});
    });

    std::map<std::pair<std::string, std::string>, std::int64_t> merged;
    for_each_jsonl(votes_path, [&](std::size_t lineno, const nlohmann::json& obj) {
        VoteRecord v;
        v.user_id = require_string(obj, "user_id", votes_path, lineno);
        v.response_id = require_string(obj, "response_id", votes_path, lineno);
        auto it = obj.find("count");
        if (it == obj.end() || !it->is_number_integer()) {
            throw IoError(votes_path + ":" + std::to_string(lineno) +
                          ": missing integer field \"count\"");
        }
        v.count = it->get<std::int64_t>();
        auto key = std::make_pair(v.user_id, v.response_id);
        auto [mit, inserted] = merged.emplace(key, v.count);
        if (!inserted) {
            mit->second += v.count;
            warn(warnings, "merged duplicate vote rows for (" + v.user_id + ", " +
                               v.response_id + ")");
        }
    });
    for (const auto& [key, count] : merged) {
        d.votes.push_back({key.first, key.second, count});
    }

    d.provenance["source"] = prompts_path + ";" + responses_path + ";" + votes_path;
    d.validate(warnings);
    return d;
}

void save_dataset(const Dataset& d,
                  const std::string& prompts_path,
                  const std::string& responses_path,
                  const std::string& votes_path) {
    JsonlWriter pw(prompts_path);
    for (const auto& p : d.prompts) {
        pw.write({{"prompt_id", p.prompt_id}, {"text", p.text}});
    }
    JsonlWriter rw(responses_path);
    for (const auto& r : d.responses) {
        rw.write({{"response_id", r.response_id}, {"prompt_id", r.prompt_id}, {"text", r.text}});
    }
    JsonlWriter vw(votes_path);
    for (const auto& v : d.votes) {
        vw.write({{"user_id", v.user_id}, {"response_id", v.response_id}, {"count", v.count}});
    }
}

Dataset filter_dataset(const Dataset& d, const FilterParams& p) {
    // Step 1: keep only active users.
    std::map<std::string, std::int64_t> user_totals;
    for (const auto& v : d.votes) user_totals[v.user_id] += v.count;

    std::vector<VoteRecord> kept;
    for (const auto& v : d.votes) {
        if (user_totals[v.user_id] >= p.min_user_votes) kept.push_back(v);
    }

    // Step 2: recompute per-response totals from the surviving votes and drop
    // responses below the threshold.
    std::map<std::string, std::int64_t> response_totals;
    for (const auto& v : kept) response_totals[v.response_id] += v.count;

    Dataset out;
    out.prompts = d.prompts;
    std::set<std::string> kept_responses;
    for (const auto& r : d.responses) {
        auto it = response_totals.find(r.response_id);
        const std::int64_t total = it == response_totals.end() ? 0 : it->second;
        if (total >= p.min_response_votes) {
            out.responses.push_back(r);
            kept_responses.insert(r.response_id);
        }
    }
    for (const auto& v : kept) {
        if (kept_responses.count(v.response_id)) out.votes.push_back(v);
    }

    out.provenance = d.provenance;
    out.provenance["filter.min_user_votes"] = std::to_string(p.min_user_votes);
    out.provenance["filter.min_response_votes"] = std::to_string(p.min_response_votes);
    out.validate();
    return out;
}

StatsReport dataset_stats(const Dataset& d) {
    StatsReport s;
    s.prompts = d.prompts.size();
    s.responses = d.responses.size();

    std::set<std::string> users;
    std::map<std::string, std::set<std::string>> voters_per_prompt;
    std::map<std::string, std::string> response_to_prompt;
    for (const auto& r : d.responses) response_to_prompt[r.response_id] = r.prompt_id;
    for (const auto& v : d.votes) {
        users.insert(v.user_id);
        s.total_votes += v.count;
        voters_per_prompt[response_to_prompt[v.response_id]].insert(v.user_id);
    }
    s.users = users.size();
    if (!voters_per_prompt.empty()) {
        std::size_t total_voters = 0;
        for (const auto& [pid, voters] : voters_per_prompt) total_voters += voters.size();
        s.mean_voters_per_prompt =
            static_cast<double>(total_voters) / static_cast<double>(voters_per_prompt.size());
    }
    return s;
}

Dataset restrict_to_eligible_prompts(const Dataset& d, std::int64_t min_responses_per_prompt) {
    std::map<std::string, std::int64_t> responses_per_prompt;
    for (const auto& r : d.responses) ++responses_per_prompt[r.prompt_id];

    Dataset out;
    std::set<std::string> kept_prompts;
    for (const auto& p : d.prompts) {
        if (responses_per_prompt[p.prompt_id] >= min_responses_per_prompt) {
            out.prompts.push_back(p);
            kept_prompts.insert(p.prompt_id);
        }
    }
    std::set<std::string> kept_responses;
    for (const auto& r : d.responses) {
        if (kept_prompts.count(r.prompt_id)) {
            out.responses.push_back(r);
            kept_responses.insert(r.response_id);
        }
    }
    for (const auto& v : d.votes) {
        if (kept_responses.count(v.response_id)) out.votes.push_back(v);
    }
    out.provenance = d.provenance;
    out.provenance["filter.min_responses_per_prompt"] = std::to_string(min_responses_per_prompt);
    out.validate();
    return out;
}

} // namespace pref
