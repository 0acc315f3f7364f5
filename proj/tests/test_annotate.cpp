#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>

#include "pref/annotate.hpp"
#include "pref/jsonl.hpp"

using namespace pref;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("preffactor-annotate-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

Dataset mini_dataset() {
    Dataset d;
    d.prompts = {{"P1", "こんな遊園地は嫌だ"}};
    d.responses = {{"R1", "P1", "ジェットコースターが歩く！"},
                   {"R2", "P1", "入口がない。"},
                   {"R3", "P1", "帰れない。"},
                   {"R4", "P1", "全部出口。"},
                   {"R5", "P1", "観覧車が速い！"}};
    d.votes = {{"u1", "R1", 1}};
    d.validate();
    return d;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("request_hash is the stable FNV-1a of the request text") {
    CHECK(request_hash("") == "cbf29ce484222325");
    CHECK(request_hash("a") == "af63dc4c8601ec8c");
    CHECK(request_hash("abc") == request_hash("abc"));
    CHECK(request_hash("abc") != request_hash("abd"));
}

TEST_CASE("label prompt covers every label spec and batch sample") {
    const auto& specs = strategy_label_specs();
    REQUIRE(specs.size() == 11);
    Dataset d = mini_dataset();
    std::vector<std::pair<Prompt, Response>> batch;
    for (const auto& r : d.responses) batch.emplace_back(d.prompts[0], r);

    const std::string text = render_label_prompt(batch, specs);
    for (const auto& spec : specs) {
        CHECK(text.find("Label: " + spec.label) != std::string::npos);
        CHECK(text.find(spec.definition) != std::string::npos);
    }
    for (const auto& r : d.responses) {
        CHECK(text.find("response_id: " + r.response_id) != std::string::npos);
        CHECK(text.find(r.text) != std::string::npos);
    }
    CHECK(text.find("{{") == std::string::npos);  // no unsubstituted slots
    // Identical input renders byte-identically.
    CHECK(text == render_label_prompt(batch, specs));
}

TEST_CASE("label prompt enforces the 20-sample batch cap") {
    Dataset d = mini_dataset();
    std::vector<std::pair<Prompt, Response>> batch;
    CHECK_THROWS_AS(render_label_prompt(batch, strategy_label_specs()), AnnotateError);
    for (int i = 0; i < 21; ++i) batch.emplace_back(d.prompts[0], d.responses[0]);
    CHECK_THROWS_AS(render_label_prompt(batch, strategy_label_specs()), AnnotateError);
}

TEST_CASE("selection prompt embeds the persona and candidate order") {
    Dataset d = mini_dataset();
    const auto& personas = builtin_personas();
    REQUIRE(personas.size() == 7);
    CHECK(personas[0].name == "no_persona");

    const auto text =
        render_selection_prompt(persona_by_name("female_65"), d.prompts[0], d.responses);
    CHECK(text.find("65-year-old female") != std::string::npos);
    CHECK(text.find(d.prompts[0].text) != std::string::npos);
    CHECK(text.find("{{") == std::string::npos);
    // Candidate order changes the request (and therefore its hash).
    auto reversed = d.responses;
    std::reverse(reversed.begin(), reversed.end());
    CHECK(render_selection_prompt(persona_by_name("female_65"), d.prompts[0], reversed) != text);

    CHECK_THROWS_AS(persona_by_name("nonexistent"), AnnotateError);
}

TEST_CASE("majority labels keep strict majorities only") {
    std::vector<LabelVote> votes{
        {"R1", 1, {"wordplay", "meta"}, {}},
        {"R1", 2, {"wordplay"}, {}},
        {"R1", 3, {"exaggeration"}, {}},
    };
    auto out = majority_labels(votes, 3);
    // wordplay 2/3 kept; meta and exaggeration 1/3 dropped.
    REQUIRE(out.count("R1") == 1);
    CHECK(out["R1"] == std::set<FactorId>{{"wordplay", FactorGroup::strategy}});

    SUBCASE("even trial counts need more than half") {
        auto even = majority_labels({{"R1", 1, {"meta"}, {}}, {"R1", 2, {"meta"}, {}}}, 4);
        CHECK(even["R1"].empty());  // 2 of 4 is not a strict majority
    }
}

TEST_CASE("mix_seed separates prompts, personas and trials") {
    const auto base = mix_seed(1, "P1/no_persona", 1);
    CHECK(mix_seed(1, "P1/no_persona", 1) == base);
    CHECK(mix_seed(1, "P1/no_persona", 2) != base);
    CHECK(mix_seed(1, "P1/female_20", 1) != base);
    CHECK(mix_seed(2, "P1/no_persona", 1) != base);
}

TEST_CASE("replay transport consumes recorded responses in order") {
    TempDir t;
    const auto cassette = (t.path / "cassette.jsonl").string();
    append_cassette_entry(cassette, "req", "first", "0");
    append_cassette_entry(cassette, "req", "second", "0");

    TransportConfig cfg;
    cfg.mode = TransportConfig::Mode::replay;
    cfg.cassette_path = cassette;
    auto transport = make_transport(cfg);
    CHECK(transport->complete("req") == "first");
    CHECK(transport->complete("req") == "second");
    CHECK_THROWS_WITH_AS(transport->complete("req"), doctest::Contains("exhausted"),
                         AnnotateError);
    CHECK_THROWS_WITH_AS(transport->complete("other"), doctest::Contains("miss"), AnnotateError);
}

TEST_CASE("annotate_strategies replays deterministically with majority voting") {
    TempDir t;
    Dataset d = mini_dataset();
    const auto cassette = (t.path / "cassette.jsonl").string();

    const std::string request = [&] {
        std::vector<std::pair<Prompt, Response>> batch;
        for (const auto& r : d.responses) batch.emplace_back(d.prompts[0], r);
        return render_label_prompt(batch, strategy_label_specs());
    }();
    auto completion = [](const std::vector<std::string>& r1_labels) {
        nlohmann::json items = nlohmann::json::array();
        nlohmann::json selected = nlohmann::json::array();
        for (const auto& l : r1_labels) {
            selected.push_back({{"reason", "r"}, {"label", l}, {"confidence", "high"}});
        }
        items.push_back({{"prompt_id", "P1"}, {"response_id", "R1"},
                         {"selected_labels", selected}});
        return nlohmann::json{{"items", items}}.dump();
    };
    append_cassette_entry(cassette, request, completion({"wordplay", "meta"}), "0");
    append_cassette_entry(cassette, request, completion({"wordplay", "not_a_label"}), "0");
    append_cassette_entry(cassette, request, completion({"incongruity"}), "0");

    TransportConfig cfg;
    cfg.mode = TransportConfig::Mode::replay;
    cfg.cassette_path = cassette;

    std::vector<std::string> warnings;
    auto labels = annotate_strategies(d, cfg, 3, &warnings);
    // wordplay 2/3 survives; meta, incongruity 1/3 do not; unknown warned.
    CHECK(labels.at("R1") == std::set<FactorId>{{"wordplay", FactorGroup::strategy}});
    CHECK(labels.at("R2").empty());  // unlisted responses get empty label sets
    CHECK(labels.size() == d.responses.size());
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("not_a_label") != std::string::npos);

    SUBCASE("byte-identical exports on repeated replay runs") {
        auto again = annotate_strategies(d, cfg, 3);
        const auto p1 = (t.path / "labels1.jsonl").string();
        const auto p2 = (t.path / "labels2.jsonl").string();
        save_labels(labels, p1);
        save_labels(again, p2);
        CHECK(read_file(p1) == read_file(p2));
        auto loaded = load_labels(p1);
        CHECK(loaded.at("R1") == labels.at("R1"));
    }
    SUBCASE("even trial counts are rejected") {
        CHECK_THROWS_AS(annotate_strategies(d, cfg, 2), AnnotateError);
    }
}

TEST_CASE("unparseable completions count as empty-label trials after retries") {
    TempDir t;
    Dataset d = mini_dataset();
    const auto cassette = (t.path / "cassette.jsonl").string();
    const std::string request = [&] {
        std::vector<std::pair<Prompt, Response>> batch;
        for (const auto& r : d.responses) batch.emplace_back(d.prompts[0], r);
        return render_label_prompt(batch, strategy_label_specs());
    }();
    // One trial, retry budget 2: both completions are garbage.
    append_cassette_entry(cassette, request, "not json at all", "0");
    append_cassette_entry(cassette, request, "still not json", "0");

    TransportConfig cfg;
    cfg.mode = TransportConfig::Mode::replay;
    cfg.cassette_path = cassette;
    cfg.max_attempts = 2;

    std::vector<std::string> warnings;
    auto labels = annotate_strategies(d, cfg, 1, &warnings);
    CHECK(labels.at("R1").empty());
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("empty-label trial") != std::string::npos);
}

TEST_CASE("collect_preferences shuffles per trial and replays byte-identically") {
    TempDir t;
    Dataset d = mini_dataset();
    const Persona& persona = persona_by_name("male_20");
    const std::uint64_t seed = 99;
    const auto cassette = (t.path / "cassette.jsonl").string();

    // Reconstruct the presentation orders the collector will use and record
    // one completion per trial: trials 1-2 select the first candidate shown,
    // trial 3 selects nothing.
    for (int trial = 1; trial <= 3; ++trial) {
        std::vector<Response> candidates = d.responses;
        std::mt19937_64 rng(mix_seed(seed, "P1/" + persona.name, trial));
        std::shuffle(candidates.begin(), candidates.end(), rng);
        nlohmann::json completion;
        if (trial == 3) {
            completion = {{"selected_responses", nlohmann::json::array()}};
        } else {
            completion = {{"selected_responses",
                           nlohmann::json::array({{{"reasoning", "面白い"},
                                                   {"response_id",
                                                    candidates[0].response_id}}})}};
        }
        append_cassette_entry(cassette, render_selection_prompt(persona, d.prompts[0], candidates),
                              completion.dump(), "0");
    }

    TransportConfig cfg;
    cfg.mode = TransportConfig::Mode::replay;
    cfg.cassette_path = cassette;

    auto results = collect_preferences(d, persona, cfg, 3, 5, seed);
    REQUIRE(results.size() == 3);
    CHECK(results[0].selected_response_id == results[0].presentation_order[0]);
    CHECK(results[1].selected_response_id == results[1].presentation_order[0]);
    CHECK_FALSE(results[2].selected_response_id.has_value());
    // Different trials really do present different orders for this seed.
    CHECK(results[0].presentation_order != results[1].presentation_order);

    auto votes = selections_to_votes(results, "m", persona.name);
    REQUIRE(votes.size() == 2);
    CHECK(votes[0].user_id == "m:male_20:1");
    CHECK(votes[1].user_id == "m:male_20:2");
    CHECK(votes[0].count == 1);

    SUBCASE("repeat runs export byte-identical selections") {
        auto again = collect_preferences(d, persona, cfg, 3, 5, seed);
        const auto p1 = (t.path / "sel1.jsonl").string();
        const auto p2 = (t.path / "sel2.jsonl").string();
        save_selections(results, p1);
        save_selections(again, p2);
        CHECK(read_file(p1) == read_file(p2));
        auto loaded = load_selections(p1);
        REQUIRE(loaded.size() == 3);
        CHECK(loaded[0].presentation_order == results[0].presentation_order);
        CHECK(loaded[2].selected_response_id == std::nullopt);
    }
    SUBCASE("prompts below the candidate floor are skipped") {
        auto none = collect_preferences(d, persona, cfg, 3, 6, seed);
        CHECK(none.empty());
    }
}

TEST_CASE("invalid selections fall back to no-selection with a warning") {
    TempDir t;
    Dataset d = mini_dataset();
    const Persona& persona = persona_by_name("no_persona");
    const auto cassette = (t.path / "cassette.jsonl").string();
    for (int trial = 1; trial <= 1; ++trial) {
        std::vector<Response> candidates = d.responses;
        std::mt19937_64 rng(mix_seed(0, "P1/" + persona.name, trial));
        std::shuffle(candidates.begin(), candidates.end(), rng);
        const auto request = render_selection_prompt(persona, d.prompts[0], candidates);
        const std::string bad = nlohmann::json{
            {"selected_responses",
             nlohmann::json::array({{{"reasoning", "x"}, {"response_id", "R999"}}})}}.dump();
        // First attempt and the retry both name an unknown candidate.
        append_cassette_entry(cassette, request, bad, "0");
        append_cassette_entry(cassette, request, bad, "0");
    }
    TransportConfig cfg;
    cfg.mode = TransportConfig::Mode::replay;
    cfg.cassette_path = cassette;

    std::vector<std::string> warnings;
    auto results = collect_preferences(d, persona, cfg, 1, 5, 0, &warnings);
    REQUIRE(results.size() == 1);
    CHECK_FALSE(results[0].selected_response_id.has_value());
    CHECK(warnings.size() >= 1);
}

TEST_CASE("live transport refuses to start without credentials") {
    ::unsetenv("PREF_API_KEY");
    TransportConfig cfg;
    cfg.mode = TransportConfig::Mode::live;
    cfg.endpoint = "http://localhost:1";
    CHECK_THROWS_WITH_AS(make_transport(cfg), doctest::Contains("PREF_API_KEY"), AnnotateError);
}
