// Generates the synthetic end-to-end fixture: a small corpus with two
// planted user groups holding opposite style preferences, plus a replay
// cassette covering every completion the pipeline will request over it.
//
// Group A users vote only for short exclamatory responses (katakana, "！"
// ending); group B users vote only for longer declarative ones ("。"
// ending). Clustering must separate the groups and the per-cluster factor
// scores must invert between them.
//
// Usage: preffactor-make-fixture <output-dir> [seed]
// The selection cassette is rendered for seed 42 unless overridden; pipeline
// runs over this fixture must pass the same --seed to collect-llm.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pref/annotate.hpp"
#include "pref/dataset.hpp"
#include "pref/jsonl.hpp"
#include "pref/types.hpp"

namespace fs = std::filesystem;
using namespace pref;

namespace {

constexpr int kPrompts = 10;
constexpr int kUsersPerGroup = 8;
constexpr int kTrials = 3;

Dataset build_corpus() {
    Dataset d;
    const char* topics[kPrompts] = {
        "こんな遊園地は嫌だ、どんなの？",
        "世界一ゆるい校則とは？",
        "桃太郎が鬼退治をやめた理由とは？",
        "店長が今日だけ謝っている。なぜ？",
        "未来のコンビニに置いてあるものとは？",
        "宇宙人が地球で最初に買ったものとは？",
        "忍者が現代で就いた意外な仕事とは？",
        "図書館で禁止された意外な行為とは？",
        "残念な魔法使いの口ぐせとは？",
        "新種のペットの飼い方の注意点とは？",
    };
    const char* kata[3] = {"ヤバイ", "ムリゲー", "テンションバグった"};
    const char* calm[3] = {
        "きのうのゆめのつづきをまだみているようなきがします",
        "となりのせきのひとがしずかにおべんとうをたべていました",
        "えんがわでおちゃをのみながらくものかたちをながめるじかんです",
    };

    for (int p = 0; p < kPrompts; ++p) {
        char pid[8];
        std::snprintf(pid, sizeof(pid), "P%02d", p + 1);
        d.prompts.push_back({pid, topics[p]});
        for (int j = 0; j < 3; ++j) {
            // Exclamatory style: short, katakana-heavy, "！" ending. Vary the
            // elongation so continuous features take many distinct values.
            std::string text = kata[j];
            for (int k = 0; k < (p + j) % 4; ++k) text += "ー";
            text += "！";
            d.responses.push_back({std::string(pid) + "x" + std::to_string(j + 1), pid, text});
        }
        for (int j = 0; j < 3; ++j) {
            // Declarative style: long, hiragana, "。" ending.
            std::string text = calm[j];
            for (int k = 0; k < (p + j) % 3; ++k) text += "ね";
            text += "。";
            d.responses.push_back({std::string(pid) + "y" + std::to_string(j + 1), pid, text});
        }
    }

    for (int i = 0; i < kUsersPerGroup; ++i) {
        for (int p = 0; p < kPrompts; ++p) {
            char pid[8];
            std::snprintf(pid, sizeof(pid), "P%02d", p + 1);
            const auto rid = [&](char style, int j) {
                return std::string(pid) + style + std::to_string(j + 1);
            };
            // Three votes per user per prompt (the platform cap), rotated so
            // every response collects votes and totals rarely tie.
            d.votes.push_back({"A" + std::to_string(i + 1), rid('x', (i + p) % 3), 2});
            d.votes.push_back({"A" + std::to_string(i + 1), rid('x', (i + p + 1) % 3), 1});
            d.votes.push_back({"B" + std::to_string(i + 1), rid('y', (i + p) % 3), 2});
            d.votes.push_back({"B" + std::to_string(i + 1), rid('y', (i + p + 1) % 3), 1});
        }
    }
    d.validate();
    return d;
}

nlohmann::json label_item(const std::string& prompt_id, const std::string& response_id,
                          const std::vector<std::string>& labels) {
    nlohmann::json selected = nlohmann::json::array();
    for (const auto& label : labels) {
        selected.push_back({{"reason", "matches the " + label + " definition"},
                            {"label", label},
                            {"confidence", "high"}});
    }
    return {{"prompt_id", prompt_id}, {"response_id", response_id},
            {"selected_labels", selected}};
}

// Label plan: exclamatory responses are exaggeration; declarative ones are
// mini_story. x1 gains a spurious wordplay label in trial 2 only (majority
// must reject it); y1 gains shared_experience in trials 1 and 3 (majority
// must keep it).
std::vector<std::string> labels_for(const std::string& response_id, int trial) {
    const bool exclaim = response_id.find('x') != std::string::npos;
    std::vector<std::string> labels{exclaim ? "exaggeration" : "mini_story"};
    const bool first = response_id.back() == '1';
    if (exclaim && first && trial == 2) labels.push_back("wordplay");
    if (!exclaim && first && trial != 2) labels.push_back("shared_experience");
    return labels;
}

void write_label_entries(const Dataset& d, const std::string& cassette) {
    const auto& specs = strategy_label_specs();
    constexpr std::size_t batch_size = 20;
    for (std::size_t start = 0; start < d.responses.size(); start += batch_size) {
        std::vector<std::pair<Prompt, Response>> batch;
        for (std::size_t i = start; i < std::min(start + batch_size, d.responses.size()); ++i) {
            batch.emplace_back(d.prompt(d.responses[i].prompt_id), d.responses[i]);
        }
        const std::string request = render_label_prompt(batch, specs);
        for (int trial = 1; trial <= kTrials; ++trial) {
            nlohmann::json items = nlohmann::json::array();
            for (const auto& [p, r] : batch) {
                items.push_back(label_item(p.prompt_id, r.response_id,
                                           labels_for(r.response_id, trial)));
            }
            append_cassette_entry(cassette, request,
                                  nlohmann::json{{"items", items}}.dump(), "0");
        }
    }
}

// Selection plan: younger personas pick the first exclamatory candidate in
// presentation order; older ones the first declarative candidate. This makes
// the LLM conditions align with cluster A or cluster B respectively.
void write_selection_entries(const Dataset& d, const std::string& cassette,
                             std::uint64_t seed) {
    std::map<std::string, std::vector<Response>> by_prompt;
    for (const auto& r : d.responses) by_prompt[r.prompt_id].push_back(r);

    for (const auto& persona : builtin_personas()) {
        const bool prefers_exclaim = persona.name == "no_persona" ||
                                     persona.name == "female_20" || persona.name == "male_20";
        for (const auto& p : d.prompts) {
            for (int trial = 1; trial <= kTrials; ++trial) {
                std::vector<Response> candidates = by_prompt.at(p.prompt_id);
                std::mt19937_64 rng(mix_seed(seed, p.prompt_id + "/" + persona.name, trial));
                std::shuffle(candidates.begin(), candidates.end(), rng);

                std::string pick;
                for (const auto& c : candidates) {
                    const bool exclaim = c.response_id.find('x') != std::string::npos;
                    if (exclaim == prefers_exclaim) {
                        pick = c.response_id;
                        break;
                    }
                }
                nlohmann::json completion = {
                    {"selected_responses",
                     nlohmann::json::array(
                         {{{"reasoning", "この言い回しが一番笑えました"},
                           {"response_id", pick}}})}};
                append_cassette_entry(cassette,
                                      render_selection_prompt(persona, p, candidates),
                                      completion.dump(), "0");
            }
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <output-dir> [seed]\n", argv[0]);
        return 1;
    }
    const fs::path dir(argv[1]);
    const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 42;
    fs::create_directories(dir);

    Dataset d = build_corpus();
    save_dataset(d, (dir / "prompts.jsonl").string(), (dir / "responses.jsonl").string(),
                 (dir / "votes.jsonl").string());

    const std::string cassette = (dir / "cassette.jsonl").string();
    fs::remove(cassette);
    write_label_entries(d, cassette);
    write_selection_entries(d, cassette, seed);

    std::printf("fixture: %zu prompts, %zu responses, %zu votes, cassette at %s\n",
                d.prompts.size(), d.responses.size(), d.votes.size(), cassette.c_str());
    return 0;
}
