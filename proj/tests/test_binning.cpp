#include <doctest.h>

#include <filesystem>
#include <random>
#include <unistd.h>

#include "pref/binning.hpp"

using namespace pref;

namespace {

std::vector<RawFeatureVector> vectors_for(const std::string& feature,
                                          const std::vector<double>& values) {
    std::vector<RawFeatureVector> out;
    for (double v : values) {
        RawFeatureVector rv;
        rv.continuous[feature] = v;
        out.push_back(rv);
    }
    return out;
}

} // namespace

TEST_CASE("percentile uses linear interpolation") {
    std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8};
    // Oracle: h = q * (n - 1); x[floor(h)] + frac * (x[floor(h)+1] - x[floor(h)])
    CHECK(percentile(v, 0.25) == doctest::Approx(2.75));
    CHECK(percentile(v, 0.50) == doctest::Approx(4.5));
    CHECK(percentile(v, 0.75) == doctest::Approx(6.25));
    CHECK(percentile(v, 0.0) == doctest::Approx(1.0));
    CHECK(percentile(v, 1.0) == doctest::Approx(8.0));
    CHECK(percentile({42.0}, 0.5) == doctest::Approx(42.0));
    CHECK_THROWS_AS(percentile({}, 0.5), std::invalid_argument);
}

TEST_CASE("quartile binning against hand-computed boundaries") {
    auto model = fit_binning(vectors_for("len-char", {1, 2, 3, 4, 5, 6, 7, 8}));
    const auto& bins = model.features.at("len-char");
    REQUIRE(bins.boundaries.size() == 3);
    CHECK(bins.boundaries[0] == doctest::Approx(2.75));
    CHECK(bins.boundaries[1] == doctest::Approx(4.5));
    CHECK(bins.boundaries[2] == doctest::Approx(6.25));

    CHECK(model.level_for("len-char", 1.0) == "len-char-short");
    CHECK(model.level_for("len-char", 3.0) == "len-char-medium");
    CHECK(model.level_for("len-char", 5.0) == "len-char-long");
    CHECK(model.level_for("len-char", 7.0) == "len-char-xlong");
    // Exact boundary takes the lower level.
    CHECK(model.level_for("len-char", 2.75) == "len-char-short");
    CHECK(model.level_for("len-char", 4.5) == "len-char-medium");
}

TEST_CASE("median binning splits at the median with ties low") {
    auto model = fit_binning(vectors_for("katakana", {0.0, 0.0, 1.0, 1.0}));
    const auto& bins = model.features.at("katakana");
    REQUIRE(bins.boundaries.size() == 1);
    CHECK(bins.boundaries[0] == doctest::Approx(0.5));
    CHECK(model.level_for("katakana", 0.0) == "katakana-minimal");
    CHECK(model.level_for("katakana", 0.5) == "katakana-minimal");
    CHECK(model.level_for("katakana", 1.0) == "katakana-high");
}

TEST_CASE("quartile features degrade and drop as the sample collapses") {
    std::vector<std::string> warnings;

    SUBCASE("fewer than 4 distinct values degrades to median") {
        auto model = fit_binning(vectors_for("len-char", {1, 1, 5, 5, 9}), "", &warnings);
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].find("degraded to median") != std::string::npos);
        const auto& bins = model.features.at("len-char");
        CHECK(bins.boundaries.size() == 1);
        // Degraded quartile features keep the extreme level names.
        REQUIRE(bins.levels.size() == 2);
        CHECK(bins.levels[0] == "short");
        CHECK(bins.levels[1] == "xlong");
    }
    SUBCASE("constant features are dropped") {
        auto model = fit_binning(vectors_for("len-char", {3, 3, 3}), "", &warnings);
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].find("dropped") != std::string::npos);
        CHECK(model.features.find("len-char") == model.features.end());
    }
}

TEST_CASE("quartile bins are balanced on 1000 random draws") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> dist(0.0, 100.0);
    std::vector<double> values(1000);
    for (auto& v : values) v = dist(rng);

    auto model = fit_binning(vectors_for("len-char", values));
    std::map<std::string, int> counts;
    for (double v : values) ++counts[model.level_for("len-char", v)];
    for (const auto& [level, count] : counts) {
        // Each of the four bins should hold 25% +- 1 percentage point.
        CHECK(count >= 240);
        CHECK(count <= 260);
    }
    CHECK(counts.size() == 4);
}

TEST_CASE("apply_binning emits one level per family plus flags and labels") {
    auto model = fit_binning(vectors_for("len-char", {1, 2, 3, 4, 5, 6, 7, 8}));
    RawFeatureVector v;
    v.continuous["len-char"] = 6.0;
    v.boolean["slang"] = true;
    v.boolean["ending-period"] = false;

    auto fs = apply_binning(v, model, "R1", {{"wordplay", FactorGroup::strategy}});
    CHECK(fs.response_id == "R1");
    CHECK(fs.factors.count({"len-char-long", FactorGroup::basic}) == 1);
    CHECK(fs.factors.count({"slang", FactorGroup::symbol}) == 1);
    CHECK(fs.factors.count({"wordplay", FactorGroup::strategy}) == 1);
    // False booleans contribute nothing; exactly one len-char level appears.
    int len_levels = 0;
    for (const auto& f : fs.factors) {
        if (f.name.rfind("len-char-", 0) == 0) ++len_levels;
        CHECK(f.name != "ending-period");
    }
    CHECK(len_levels == 1);
}

TEST_CASE("binning model and factor sets round-trip through disk") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() /
                         ("preffactor-binning-" + std::to_string(::getpid()));
    fs::create_directories(dir);

    auto model = fit_binning(vectors_for("len-char", {1, 2, 3, 4, 5, 6, 7, 8}), "unit-test");
    const auto model_path = (dir / "model.json").string();
    save_binning_model(model, model_path);
    auto loaded = load_binning_model(model_path);
    CHECK(loaded.population == "unit-test");
    CHECK(loaded.features.at("len-char").boundaries == model.features.at("len-char").boundaries);
    CHECK(loaded.level_for("len-char", 5.0) == "len-char-long");

    RawFeatureVector v;
    v.continuous["len-char"] = 2.0;
    v.boolean["slang"] = true;
    std::vector<FactorSet> sets{
        apply_binning(v, model, "R1", {{"meta", FactorGroup::strategy}})};
    const auto sets_path = (dir / "factors.jsonl").string();
    save_factor_sets(sets, sets_path);
    auto loaded_sets = load_factor_sets(sets_path);
    REQUIRE(loaded_sets.count("R1") == 1);
    CHECK(loaded_sets.at("R1").factors == sets[0].factors);
    // Groups are recovered from the registry, not stored.
    for (const auto& f : loaded_sets.at("R1").factors) {
        if (f.name == "meta") CHECK(f.group == FactorGroup::strategy);
        if (f.name == "slang") CHECK(f.group == FactorGroup::symbol);
        if (f.name.rfind("len-char-", 0) == 0) CHECK(f.group == FactorGroup::basic);
    }
    fs::remove_all(dir);
}
