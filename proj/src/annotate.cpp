#include "pref/annotate.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "pref/jsonl.hpp"

namespace pref {

const std::vector<StrategyLabelSpec>& strategy_label_specs() {
    static const std::vector<StrategyLabelSpec> specs = {
        {"wordplay",
         "Manipulates surface linguistic features (sound, characters, syntax) to create humor "
         "through puns, double meanings, or rhythm.",
         "Check for phonetic substitutions, puns, or rhythmic structure. Use this label when "
         "surface-level manipulation is primary.",
         "If the humor comes solely from meaning inversion, consider incongruity. Focus on "
         "\"surface-level linguistic manipulation.\"",
         {"Prompt: Name a new sport. / Response: Bad-minton, where every racket is broken. -> "
          "wordplay"}},
        {"shared_experience",
         "Draws on shared everyday experiences, eliciting laughter through empathy.",
         "Confirm empathy is primary; exaggeration is secondary.",
         "If the humor relies primarily on impact, use exaggeration.",
         {"Prompt: Build suspense in one line. / Response: You know why you were called in, "
          "right? -> shared_experience"}},
        {"exaggeration",
         "Exaggerates or downplays quantity, emotion, or scale to an extreme.",
         "Determine whether exaggeration is the primary goal.",
         "If empathy is core, use shared_experience.",
         {"Prompt: What is a wedding you would hate like? / Response: It is held every day. -> "
          "exaggeration"}},
        {"black_joke_satire",
         "Engages with social norms or taboos, creating humor through irony and taboo language.",
         "Record the source and target categories (i.e., what is being referenced vs. what is "
         "being targeted). Distinguish it from exaggeration and incongruity.",
         "If the humor primarily stems from the prompt's absurdity, consider surreal_nonsense. "
         "If it relies only on expectation reversal, consider incongruity.",
         {}},
        {"surreal_nonsense",
         "Severs contextual connections, making absurdity itself the source of humor.",
         "Confirm that the logical leap is intentional.",
         "Context destruction is required; eccentricity alone is insufficient.",
         {"Prompt: Slimy horse racing: what is it like? / Response: Every horse is newborn. -> "
          "surreal_nonsense"}},
        {"incongruity",
         "Uses a reversal of an expected development/premise as the punchline.",
         "Confirm that the response sets up an expectation and then reverses it. Check whether "
         "the reason for the reversal is explicit.",
         "If the target is the oogiri framework or the prompt itself, use meta. If ethical "
         "criticism is primary, consider black_joke_satire.",
         {"Prompt: We are recruiting heroes. What are the eligibility requirements? / Response: "
          "Someone whose hometown was destroyed. -> incongruity"}},
        {"meta",
         "Refers to contradictions in the oogiri framework, its rules, or the prompt itself, "
         "creating humor from an external perspective.",
         "Check whether framework elements (recording, host, format) are used. Use when "
         "pointing out flaws in the prompt.",
         "If the humor is purely meaning inversion or expectation violation, consider "
         "incongruity. If it includes an overview of the framework, prioritize meta.",
         {}},
        {"self_reference",
         "Uses the responder's own shortcomings as material, creating humor from a first-person "
         "perspective.",
         "Check for first-person pronouns and whether the responder's own "
         "characteristics/failures are central to the punchline.",
         "If the response primarily criticizes the framework or the prompt, prioritize meta.",
         {"Prompt: Tell me the most pointless trivia in the world. / Response: I am in a bad "
          "mood when I wake up. -> self_reference"}},
        {"personification",
         "Gives human-like emotions or a voice to inanimate objects, creating humor through "
         "characterization.",
         "Check whether the target is clearly personified. Judge whether the character's voice "
         "is the primary driver of the humor.",
         "If borrowing entire settings/stories, use parody as primary, personification as "
         "secondary.",
         {}},
        {"parody",
         "Borrows or transforms settings/stories from external content, creating humor through "
         "the gap between the response and the source material.",
         "Explicitly identify the source material. Confirm structural borrowing (not just "
         "proper nouns).",
         "Proper nouns alone do not constitute parody. Use structural, setting, or story "
         "borrowing as the criterion.",
         {}},
        {"mini_story",
         "Depicts a short story/scene, creating humor in the conclusion.",
         "Check whether a specific situation/scene is described and ends with a punchline. "
         "Confirm that the narrative structure is primary.",
         "If story elements are primary, use mini_story as the main label. If the response is a "
         "one-liner or primarily wordplay, prioritize other labels.",
         {}},
    };
    return specs;
}

const std::vector<Persona>& builtin_personas() {
    static const std::vector<Persona> personas = {
        {"no_persona", "Please evaluate the Ogiri responses."},
        {"female_20",
         "You are a 20-year-old female born in 2005. You are a university student who enjoys "
         "comedy variety shows. You are sensitive to cute and emotionally resonant things, and "
         "you like relatable content. Please evaluate the Ogiri responses with a young woman's "
         "sensibility."},
        {"male_20",
         "You are a 20-year-old male born in 2005. You are a university student who frequently "
         "uses SNS and watches YouTube. You are well-versed in trending topics, memes, and "
         "internet slang. Please evaluate the Ogiri responses with a youthful sensibility."},
        {"female_45",
         "You are a 45-year-old female born in 1980. You work as a company employee and have a "
         "family (husband and two children). You are knowledgeable about Showa and Heisei era "
         "comedy and current affairs. Please evaluate based on the common sense and experience "
         "you have cultivated as a working professional."},
        {"male_45",
         "You are a 45-year-old male born in 1980. You work as a company employee and have a "
         "family (wife and two children). You are knowledgeable about Showa and Heisei era "
         "comedy and current affairs. Please evaluate based on the common sense and experience "
         "you have cultivated as a working professional."},
        {"female_65",
         "You are a 65-year-old female born in 1959. After retirement, you enjoy pursuing "
         "hobbies. You enjoy traditional comedy such as rakugo and manzai. Please evaluate the "
         "Ogiri responses from a perspective enriched by life experience."},
        {"male_65",
         "You are a 65-year-old male born in 1959. After retirement, you enjoy pursuing "
         "hobbies. You enjoy traditional comedy such as rakugo and manzai. Please evaluate the "
         "Ogiri responses from a perspective enriched by life experience."},
    };
    return personas;
}

const Persona& persona_by_name(const std::string& name) {
    for (const auto& p : builtin_personas()) {
        if (p.name == name) return p;
    }
    throw AnnotateError("unknown persona: " + name);
}

std::string render_label_prompt(const std::vector<std::pair<Prompt, Response>>& batch,
                                const std::vector<StrategyLabelSpec>& specs) {
    if (batch.empty()) throw AnnotateError("render_label_prompt: empty batch");
    if (batch.size() > 20) {
        throw AnnotateError("render_label_prompt: batch size exceeds 20 samples per call");
    }

    std::ostringstream out;
    out << "You are an annotator for Ogiri responses. Read the given prompt and response, and "
           "assign predefined response strategy labels accurately and consistently. Think "
           "carefully so you can explain all decision rationale, and select a confidence level "
           "that represents the reliability of your judgment.\n\n"
           "## Task Overview\n"
           "Read the given Ogiri prompt and response pairs, and based on the strategy label "
           "definitions below, annotate each response with the most appropriate strategy "
           "label. Multiple label assignments are permitted. Labels must be assigned based on "
           "the label definitions.\n\n"
           "## Strategy Label Definitions\n";
    for (const auto& spec : specs) {
        out << "- Label: " << spec.label << "\n  Definition: " << spec.definition
            << "\n  Guidelines: " << spec.guidelines
            << "\n  Ambiguity Notes: " << spec.ambiguity_notes << "\n  Examples: ";
        if (spec.examples.empty()) {
            out << "(none)";
        } else {
            for (std::size_t i = 0; i < spec.examples.size(); ++i) {
                if (i) out << " | ";
                out << spec.examples[i];
            }
        }
        out << '\n';
    }
    out << "\n## Confidence Levels\n- Available confidence: high, medium, low\n\n"
           "## Output Format\n"
           "{\n  \"items\": [\n    {\n      \"prompt_id\": \"string\",\n      \"response_id\": "
           "\"string\",\n      \"selected_labels\": [\n        {\n          \"reason\": "
           "\"string\",\n          \"label\": \"string\",\n          \"confidence\": "
           "\"string\"\n        }\n      ]\n    }\n  ]\n}\n\n"
           "## Annotation Targets\n";
    for (const auto& [prompt, response] : batch) {
        out << "prompt_id: " << prompt.prompt_id << "\nresponse_id: " << response.response_id
            << "\nPrompt: " << prompt.text << "\nResponse: " << response.text << "\n\n";
    }
    return out.str();
}

std::string render_selection_prompt(const Persona& persona, const Prompt& prompt,
                                    const std::vector<Response>& candidates) {
    std::ostringstream out;
    out << persona.description << "\n\n"
        << "Your role is to look at multiple responses to a given Ogiri prompt, and select the "
           "response you truly find funny based on your own unique sensibility. Your task is to "
           "choose the response you find funny.\n\n"
           "## Evaluation Rules\n"
           "1. Select at most 1 response that you find funny\n"
           "2. If there are no responses you find funny, you must not select any. (0 selections "
           "is acceptable)\n"
           "3. For the response you select, provide a brief explanation of why you found it "
           "funny\n\n"
           "## Prompt\n"
        << prompt.text << "\n\n## Response_candidates\n";
    for (const auto& c : candidates) {
        out << "- response_id: " << c.response_id << "\n  text: " << c.text << '\n';
    }
    out << "\n## Output Format\n"
           "Please output in the following JSON format.\n"
           "Do not include any text other than JSON.\n\n"
           "{\n  \"selected_responses\": [\n    {\n      \"reasoning\": \"Reason for selecting "
           "that response (approximately 50 characters)\",\n      \"response_id\": \"Response "
           "ID\"\n    }\n  ]\n}\n\n"
           "Notes:\n"
           "- Include only the selected response(s) in selected_responses (maximum 1)\n"
           "- If there are no responses you find funny, set selected_responses to an empty "
           "array `[]`.\n"
           "- Use the exact IDs listed in the response candidates above for response_id\n";
    return out.str();
}

namespace {

void warn(std::vector<std::string>* sink, std::string msg) {
    if (sink) sink->push_back(std::move(msg));
}

// Completions may wrap the JSON in markdown fences.
std::optional<nlohmann::json> parse_completion_json(const std::string& text) {
    std::string body = text;
    const auto fence = body.find("```");
    if (fence != std::string::npos) {
        auto start = body.find('\n', fence);
        auto end = body.rfind("```");
        if (start != std::string::npos && end != std::string::npos && end > start) {
            body = body.substr(start + 1, end - start - 1);
        }
    }
    auto parsed = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) return std::nullopt;
    return parsed;
}

} // namespace

std::uint64_t mix_seed(std::uint64_t seed, const std::string& key, int trial) {
    std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ull;
    for (unsigned char c : key) {
        h ^= c;
        h *= 1099511628211ull;
    }
    h ^= static_cast<std::uint64_t>(trial) * 0xbf58476d1ce4e5b9ull;
    return h;
}

std::map<std::string, std::set<FactorId>> majority_labels(const std::vector<LabelVote>& votes,
                                                          int trials) {
    std::map<std::string, std::map<std::string, int>> tally;
    for (const auto& vote : votes) {
        for (const auto& label : vote.labels) ++tally[vote.response_id][label];
    }
    std::map<std::string, std::set<FactorId>> out;
    for (const auto& [response_id, counts] : tally) {
        auto& labels = out[response_id];
        for (const auto& [label, count] : counts) {
            if (2 * count > trials) labels.insert({label, FactorGroup::strategy});
        }
    }
    return out;
}

std::map<std::string, std::set<FactorId>> annotate_strategies(
    const Dataset& d, const TransportConfig& cfg, int trials,
    std::vector<std::string>* warnings) {
    if (trials < 1 || trials % 2 == 0) {
        throw AnnotateError("annotate_strategies: trials must be a positive odd number");
    }
    auto transport = make_transport(cfg);
    const auto& specs = strategy_label_specs();

    std::vector<LabelVote> votes;
    std::map<std::string, std::set<FactorId>> result;
    constexpr std::size_t batch_size = 20;
    for (std::size_t start = 0; start < d.responses.size(); start += batch_size) {
        std::vector<std::pair<Prompt, Response>> batch;
        for (std::size_t i = start; i < std::min(start + batch_size, d.responses.size()); ++i) {
            const auto& r = d.responses[i];
            batch.emplace_back(d.prompt(r.prompt_id), r);
        }
        const std::string request = render_label_prompt(batch, specs);

        for (int trial = 1; trial <= trials; ++trial) {
            std::optional<nlohmann::json> parsed;
            for (int attempt = 0; attempt < std::max(cfg.max_attempts, 1); ++attempt) {
                parsed = parse_completion_json(transport->complete(request));
                if (parsed && parsed->contains("items")) break;
                parsed.reset();
            }
            if (!parsed) {
                warn(warnings, "unparseable completion for batch at response " +
                                   batch.front().second.response_id + ", trial " +
                                   std::to_string(trial) + "; counted as empty-label trial");
                for (const auto& [p, r] : batch) votes.push_back({r.response_id, trial, {}, {}});
                continue;
            }
            std::map<std::string, LabelVote> by_response;
            for (const auto& [p, r] : batch) by_response[r.response_id] = {r.response_id, trial, {}, {}};
            for (const auto& item : (*parsed)["items"]) {
                const std::string rid = item.value("response_id", std::string{});
                auto it = by_response.find(rid);
                if (it == by_response.end()) continue;
                for (const auto& sel : item.value("selected_labels", nlohmann::json::array())) {
                    const std::string label = sel.value("label", std::string{});
                    if (!is_strategy_label(label)) {
                        warn(warnings, "ignoring unknown strategy label \"" + label + "\" for " + rid);
                        continue;
                    }
                    it->second.labels.insert(label);
                    it->second.confidence[label] = sel.value("confidence", std::string{});
                }
            }
            for (auto& [rid, vote] : by_response) votes.push_back(std::move(vote));
        }
    }
    auto voted = majority_labels(votes, trials);
    // responses with no surviving label still appear, with an empty set
    for (const auto& r : d.responses) result[r.response_id];
    for (auto& [rid, labels] : voted) result[rid] = std::move(labels);
    return result;
}

std::vector<SelectionResult> collect_preferences(const Dataset& d, const Persona& persona,
                                                 const TransportConfig& cfg, int trials,
                                                 std::int64_t min_candidates,
                                                 std::uint64_t seed,
                                                 std::vector<std::string>* warnings) {
    auto transport = make_transport(cfg);

    std::map<std::string, std::vector<Response>> by_prompt;
    for (const auto& r : d.responses) by_prompt[r.prompt_id].push_back(r);

    std::vector<SelectionResult> results;
    for (const auto& p : d.prompts) {
        auto it = by_prompt.find(p.prompt_id);
        if (it == by_prompt.end() ||
            static_cast<std::int64_t>(it->second.size()) < min_candidates) {
            continue;  // too few candidates for a reliable selection
        }
        for (int trial = 1; trial <= trials; ++trial) {
            std::vector<Response> candidates = it->second;
            std::mt19937_64 rng(mix_seed(seed, p.prompt_id + "/" + persona.name, trial));
            std::shuffle(candidates.begin(), candidates.end(), rng);

            SelectionResult sr;
            sr.prompt_id = p.prompt_id;
            sr.trial = trial;
            for (const auto& c : candidates) sr.presentation_order.push_back(c.response_id);

            const std::string request = render_selection_prompt(persona, p, candidates);
            bool accepted = false;
            for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
                const auto parsed = parse_completion_json(transport->complete(request));
                if (!parsed || !parsed->contains("selected_responses")) continue;
                const auto& selections = (*parsed)["selected_responses"];
                if (selections.empty()) {
                    accepted = true;  // zero selections is acceptable
                    break;
                }
                const auto& sel = selections.at(0);
                const std::string rid = sel.value("response_id", std::string{});
                const bool known = std::any_of(
                    candidates.begin(), candidates.end(),
                    [&](const Response& c) { return c.response_id == rid; });
                if (!known) {
                    warn(warnings, "selection \"" + rid + "\" is not a candidate of prompt " +
                                       p.prompt_id + " (trial " + std::to_string(trial) + ")");
                    continue;
                }
                sr.selected_response_id = rid;
                sr.reasoning = sel.value("reasoning", std::string{});
                accepted = true;
            }
            if (!accepted) {
                warn(warnings, "invalid selections for prompt " + p.prompt_id + " trial " +
                                   std::to_string(trial) + "; recorded as no-selection");
            }
            results.push_back(std::move(sr));
        }
    }
    return results;
}

std::vector<VoteRecord> selections_to_votes(const std::vector<SelectionResult>& results,
                                            const std::string& model,
                                            const std::string& persona) {
    std::vector<VoteRecord> votes;
    for (const auto& sr : results) {
        if (!sr.selected_response_id) continue;
        votes.push_back({model + ":" + persona + ":" + std::to_string(sr.trial),
                         *sr.selected_response_id, 1});
    }
    return votes;
}

void save_labels(const std::map<std::string, std::set<FactorId>>& labels,
                 const std::string& path) {
    JsonlWriter w(path);
    for (const auto& [response_id, set] : labels) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& f : set) arr.push_back(f.name);
        w.write({{"response_id", response_id}, {"labels", arr}});
    }
}

std::map<std::string, std::set<FactorId>> load_labels(const std::string& path) {
    std::map<std::string, std::set<FactorId>> out;
    for_each_jsonl(path, [&](std::size_t, const nlohmann::json& obj) {
        auto& set = out[obj.at("response_id").get<std::string>()];
        for (const auto& l : obj.value("labels", nlohmann::json::array())) {
            set.insert({l.get<std::string>(), FactorGroup::strategy});
        }
    });
    return out;
}

void save_selections(const std::vector<SelectionResult>& results, const std::string& path) {
    JsonlWriter w(path);
    for (const auto& sr : results) {
        nlohmann::json obj = {{"prompt_id", sr.prompt_id},
                              {"trial", sr.trial},
                              {"reasoning", sr.reasoning},
                              {"presentation_order", sr.presentation_order}};
        if (sr.selected_response_id) {
            obj["selected_response_id"] = *sr.selected_response_id;
        } else {
            obj["selected_response_id"] = nullptr;
        }
        w.write(obj);
    }
}

std::vector<SelectionResult> load_selections(const std::string& path) {
    std::vector<SelectionResult> out;
    for_each_jsonl(path, [&](std::size_t, const nlohmann::json& obj) {
        SelectionResult sr;
        sr.prompt_id = obj.at("prompt_id").get<std::string>();
        sr.trial = obj.at("trial").get<int>();
        sr.reasoning = obj.value("reasoning", std::string{});
        if (obj.contains("selected_response_id") && !obj["selected_response_id"].is_null()) {
            sr.selected_response_id = obj["selected_response_id"].get<std::string>();
        }
        for (const auto& id : obj.value("presentation_order", nlohmann::json::array())) {
            sr.presentation_order.push_back(id.get<std::string>());
        }
        out.push_back(std::move(sr));
    });
    return out;
}

} // namespace pref
