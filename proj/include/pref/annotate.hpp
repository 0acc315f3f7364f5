#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pref/factors.hpp"
#include "pref/types.hpp"

namespace pref {

struct AnnotateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StrategyLabelSpec {
    std::string label;
    std::string definition;
    std::string guidelines;
    std::string ambiguity_notes;
    std::vector<std::string> examples;
};

// The 11 built-in strategy label specifications.
const std::vector<StrategyLabelSpec>& strategy_label_specs();

struct Persona {
    std::string name;
    std::string description;
};

// The 7 built-in personas (no_persona + 3 age bands x 2).
const std::vector<Persona>& builtin_personas();
const Persona& persona_by_name(const std::string& name);

struct SelectionResult {
    std::string prompt_id;
    int trial = 0;
    std::optional<std::string> selected_response_id;
    std::string reasoning;
    std::vector<std::string> presentation_order;
};

struct LabelVote {
    std::string response_id;
    int trial = 0;
    std::set<std::string> labels;
    std::map<std::string, std::string> confidence;  // label -> high|medium|low
};

struct TransportConfig {
    enum class Mode { live, replay, record };
    Mode mode = Mode::replay;
    std::string endpoint;
    std::string api_key_env = "PREF_API_KEY";
    std::string model = "gpt-5.1";
    std::string cassette_path;
    double temperature = 1.0;
    int max_concurrency = 1;
    int max_attempts = 3;
    int backoff_ms = 250;
};

// A completion transport. Replay pops recorded responses per request hash in
// recorded order; record wraps the live transport and appends to the
// cassette.
class Transport {
public:
    virtual ~Transport() = default;
    virtual std::string complete(const std::string& request_text) = 0;
};

std::unique_ptr<Transport> make_transport(const TransportConfig& cfg);

std::string request_hash(const std::string& request_text);

// Deterministic stream seed for (base seed, key, trial); used for candidate
// presentation-order permutations.
std::uint64_t mix_seed(std::uint64_t seed, const std::string& key, int trial);
void append_cassette_entry(const std::string& cassette_path, const std::string& request_text,
                           const std::string& response_text, const std::string& timestamp = "");

// Batch prompt for strategy labeling; batch size 1..20 (one API call covers
// up to 20 samples). Byte-stable for identical inputs.
std::string render_label_prompt(const std::vector<std::pair<Prompt, Response>>& batch,
                                const std::vector<StrategyLabelSpec>& specs);

// Funniest-response selection prompt under the given persona, candidates in
// the given presentation order.
std::string render_selection_prompt(const Persona& persona, const Prompt& prompt,
                                    const std::vector<Response>& candidates);

// Self-consistency labeling: `trials` completions per batch, majority voting
// per response label. Unparseable completions retry up to the budget, then
// count as empty-label trials with a warning.
std::map<std::string, std::set<FactorId>> annotate_strategies(
    const Dataset& d, const TransportConfig& cfg, int trials = 3,
    std::vector<std::string>* warnings = nullptr);

// Majority rule over recorded per-trial label votes (kept iff present in
// more than trials/2 trials).
std::map<std::string, std::set<FactorId>> majority_labels(const std::vector<LabelVote>& votes,
                                                          int trials);

std::vector<SelectionResult> collect_preferences(const Dataset& d, const Persona& persona,
                                                 const TransportConfig& cfg, int trials = 3,
                                                 std::int64_t min_candidates = 5,
                                                 std::uint64_t seed = 0,
                                                 std::vector<std::string>* warnings = nullptr);

// One synthetic vote per trial selection, user_id = "<model>:<persona>:<trial>".
std::vector<VoteRecord> selections_to_votes(const std::vector<SelectionResult>& results,
                                            const std::string& model,
                                            const std::string& persona);

void save_labels(const std::map<std::string, std::set<FactorId>>& labels,
                 const std::string& path);
std::map<std::string, std::set<FactorId>> load_labels(const std::string& path);

void save_selections(const std::vector<SelectionResult>& results, const std::string& path);
std::vector<SelectionResult> load_selections(const std::string& path);

} // namespace pref
