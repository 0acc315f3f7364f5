#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <unistd.h>

#include "pref/btl.hpp"

using namespace pref;

namespace {

FactorSet make_set(const std::string& id, std::initializer_list<std::string> names) {
    FactorSet fs;
    fs.response_id = id;
    for (const auto& n : names) fs.factors.insert({n, FactorGroup::basic});
    return fs;
}

FactorComparisons two_factor(std::int64_t wins_a, std::int64_t wins_b) {
    FactorComparisons c;
    c.factor_index = {"a", "b"};
    if (wins_a > 0) c.wins[{"a", "b"}] = wins_a;
    if (wins_b > 0) c.wins[{"b", "a"}] = wins_b;
    return c;
}

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
    double concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double s = (x[i] - x[j]) * (y[i] - y[j]);
            if (s > 0) ++concordant;
            if (s < 0) ++discordant;
        }
    }
    return (concordant - discordant) / (concordant + discordant);
}

std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<std::size_t> order(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) r[order[i]] = static_cast<double>(i);
    return r;
}

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
    const auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double num = 0, dx = 0, dy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    return num / std::sqrt(dx * dy);
}

} // namespace

TEST_CASE("condition votes restrict to the user subset") {
    Dataset d;
    d.prompts = {{"P1", "お題"}};
    d.responses = {{"R1", "P1", "あ"}, {"R2", "P1", "い"}};
    d.votes = {{"u1", "R1", 2}, {"u2", "R2", 5}};
    d.validate();

    auto all = condition_votes(d, "all_users");
    REQUIRE(all.totals.at("P1").size() == 2);
    CHECK(all.totals.at("P1")[0] == std::pair<std::string, std::int64_t>{"R1", 2});
    CHECK(all.totals.at("P1")[1] == std::pair<std::string, std::int64_t>{"R2", 5});

    auto only_u1 = condition_votes(d, "C0", {"u1"});
    CHECK(only_u1.totals.at("P1")[0].second == 2);
    CHECK(only_u1.totals.at("P1")[1].second == 0);  // zero-vote responses still listed
}

TEST_CASE("response pairs order winners first and discard ties") {
    ConditionVotes cv;
    cv.totals["P1"] = {{"R1", 5}, {"R2", 2}, {"R3", 5}};
    auto pairs = derive_response_pairs(cv);
    // R1 vs R2 -> R1; R1 vs R3 tie discarded; R2 vs R3 -> R3.
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].winner == "R1");
    CHECK(pairs[0].loser == "R2");
    CHECK(pairs[1].winner == "R3");
    CHECK(pairs[1].loser == "R2");
}

TEST_CASE("factor comparisons use set differences with full cross product") {
    std::map<std::string, FactorSet> sets;
    sets["W"] = make_set("W", {"a", "b", "shared"});
    sets["L"] = make_set("L", {"c", "shared"});
    auto c = derive_factor_comparisons({{"W", "L"}}, sets);
    // F+ = {a, b}, F- = {c}: outcomes (a,c) and (b,c); shared cancels.
    CHECK(c.wins.size() == 2);
    CHECK(c.wins.at({"a", "c"}) == 1);
    CHECK(c.wins.at({"b", "c"}) == 1);
    CHECK(c.factor_index == std::vector<std::string>{"a", "b", "c"});

    SUBCASE("identical factor sets contribute nothing") {
        sets["L"] = make_set("L", {"a", "b", "shared"});
        auto none = derive_factor_comparisons({{"W", "L"}}, sets);
        CHECK(none.wins.empty());
        CHECK(none.factor_index.empty());
    }
    SUBCASE("counts accumulate over repeated pairs") {
        auto twice = derive_factor_comparisons({{"W", "L"}, {"W", "L"}}, sets);
        CHECK(twice.wins.at({"a", "c"}) == 2);
    }
    SUBCASE("missing factor set is an error") {
        CHECK_THROWS_AS(derive_factor_comparisons({{"W", "missing"}}, sets), BtlError);
    }
}

TEST_CASE("hand-built 3-prompt 9-response derivation fixture") {
    // Prompt P1: A=4, B=2, C=2 (B-C tie). P2: D=3, E=3, F=1 (D-E tie).
    // P3: G=5, H=0, I=0 (H-I tie).
    ConditionVotes cv;
    cv.condition_id = "fixture";
    cv.totals["P1"] = {{"A", 4}, {"B", 2}, {"C", 2}};
    cv.totals["P2"] = {{"D", 3}, {"E", 3}, {"F", 1}};
    cv.totals["P3"] = {{"G", 5}, {"H", 0}, {"I", 0}};

    auto pairs = derive_response_pairs(cv);
    REQUIRE(pairs.size() == 6);  // 9 unordered pairs, 3 ties discarded

    std::map<std::string, FactorSet> sets;
    sets["A"] = make_set("A", {"x", "y"});
    sets["B"] = make_set("B", {"y", "z"});
    sets["C"] = make_set("C", {"z"});
    sets["D"] = make_set("D", {"x"});
    sets["E"] = make_set("E", {"z"});
    sets["F"] = make_set("F", {"y", "z"});
    sets["G"] = make_set("G", {"x", "w"});
    sets["H"] = make_set("H", {"z", "w"});
    sets["I"] = make_set("I", {"y"});

    auto c = derive_factor_comparisons(pairs, sets);
    // Hand enumeration:
    // A>B: F+={x}, F-={z}          -> (x,z)
    // A>C: F+={x,y}, F-={z}        -> (x,z), (y,z)
    // D>F: F+={x}, F-={y,z}        -> (x,y), (x,z)
    // E>F: F+={}, F-={y}           -> nothing (|F+| = 0)
    // G>H: F+={x}, F-={z}          -> (x,z)
    // G>I: F+={x,w}, F-={y}        -> (x,y), (w,y)
    std::map<std::pair<std::string, std::string>, std::int64_t> expected{
        {{"x", "z"}, 4}, {{"y", "z"}, 1}, {{"x", "y"}, 2}, {{"w", "y"}, 1}};
    CHECK(c.wins == expected);
    CHECK(c.factor_index == std::vector<std::string>{"w", "x", "y", "z"});
}

TEST_CASE("two-item closed form gives ln 3") {
    auto c = two_factor(3, 1);
    auto lsr = lsr_estimate(c, 0.0);
    auto mle = mle_oracle(c, 0.0);
    CHECK(lsr.theta.at("a") - lsr.theta.at("b") == doctest::Approx(std::log(3.0)).epsilon(1e-9));
    CHECK(mle.theta.at("a") - mle.theta.at("b") == doctest::Approx(std::log(3.0)).epsilon(1e-9));
    // Mean-zero normalization.
    CHECK(lsr.theta.at("a") + lsr.theta.at("b") == doctest::Approx(0.0));
    // At the exact closed-form difference the win probability is 3/4.
    CHECK(std::abs(btl_probability(std::log(3.0), 0.0) - 0.75) <= 1e-12);
}

TEST_CASE("btl_probability basics") {
    CHECK(btl_probability(0.0, 0.0) == doctest::Approx(0.5));
    CHECK(btl_probability(1.0, 0.0) + btl_probability(0.0, 1.0) == doctest::Approx(1.0));
    CHECK(btl_probability(800.0, 0.0) == doctest::Approx(1.0));  // no overflow
}

TEST_CASE("estimator invariances") {
    std::mt19937_64 rng(5);
    FactorComparisons c;
    c.factor_index = {"a", "b", "c", "d"};
    for (const auto& f : c.factor_index) {
        for (const auto& g : c.factor_index) {
            if (f < g) {
                c.wins[{f, g}] = std::uniform_int_distribution<int>(1, 30)(rng);
                c.wins[{g, f}] = std::uniform_int_distribution<int>(1, 30)(rng);
            }
        }
    }
    auto base = lsr_estimate(c, 0.01);

    SUBCASE("doubling all counts leaves theta nearly unchanged at alpha=0") {
        auto a0 = lsr_estimate(c, 0.0);
        FactorComparisons doubled = c;
        for (auto& [pair, count] : doubled.wins) count *= 2;
        auto d0 = lsr_estimate(doubled, 0.0);
        for (const auto& f : c.factor_index) {
            CHECK(d0.theta.at(f) == doctest::Approx(a0.theta.at(f)).epsilon(1e-7));
        }
    }
    SUBCASE("swapping winners and losers negates theta") {
        FactorComparisons swapped;
        swapped.factor_index = c.factor_index;
        for (const auto& [pair, count] : c.wins) swapped.wins[{pair.second, pair.first}] = count;
        auto neg = lsr_estimate(swapped, 0.01);
        for (const auto& f : c.factor_index) {
            CHECK(neg.theta.at(f) == doctest::Approx(-base.theta.at(f)).epsilon(1e-6));
        }
    }
    SUBCASE("relabeling factors permutes theta") {
        auto rename = [](const std::string& f) { return "zz-" + f; };
        FactorComparisons relabeled;
        for (const auto& f : c.factor_index) relabeled.factor_index.push_back(rename(f));
        std::sort(relabeled.factor_index.begin(), relabeled.factor_index.end());
        for (const auto& [pair, count] : c.wins) {
            relabeled.wins[{rename(pair.first), rename(pair.second)}] = count;
        }
        auto perm = lsr_estimate(relabeled, 0.01);
        for (const auto& f : c.factor_index) {
            CHECK(perm.theta.at(rename(f)) == doctest::Approx(base.theta.at(f)).epsilon(1e-9));
        }
    }
    SUBCASE("coverage counts both sides of each outcome") {
        std::int64_t total = 0;
        for (const auto& [pair, count] : c.wins) total += count;
        std::int64_t coverage_sum = 0;
        for (const auto& [f, cov] : base.coverage) coverage_sum += cov;
        CHECK(coverage_sum == 2 * total);
    }
}

TEST_CASE("alpha=0 requires a strongly connected comparison graph") {
    FactorComparisons c;
    c.factor_index = {"a", "b"};
    c.wins[{"a", "b"}] = 5;  // b never wins
    CHECK_THROWS_AS(lsr_estimate(c, 0.0), BtlError);
    CHECK_THROWS_AS(mle_oracle(c, 0.0), BtlError);
    // Regularization repairs it.
    auto s = lsr_estimate(c, 0.01);
    CHECK(s.theta.at("a") > s.theta.at("b"));
}

TEST_CASE("lsr agrees with the MLE oracle on random instances") {
    std::mt19937_64 rng(2024);
    for (int instance = 0; instance < 20; ++instance) {
        const int n = std::uniform_int_distribution<int>(8, 50)(rng);
        const int outcomes = std::uniform_int_distribution<int>(10000, 100000)(rng);

        std::vector<double> theta(n);
        std::uniform_real_distribution<double> spread(-1.0, 1.0);
        for (auto& t : theta) t = spread(rng);

        FactorComparisons c;
        for (int i = 0; i < n; ++i) c.factor_index.push_back("f" + std::to_string(1000 + i));
        std::uniform_int_distribution<int> pick(0, n - 1);
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        for (int o = 0; o < outcomes; ++o) {
            int i = pick(rng), j = pick(rng);
            if (i == j) continue;
            const double p = 1.0 / (1.0 + std::exp(theta[j] - theta[i]));
            if (coin(rng) < p) {
                ++c.wins[{c.factor_index[i], c.factor_index[j]}];
            } else {
                ++c.wins[{c.factor_index[j], c.factor_index[i]}];
            }
        }

        auto lsr = lsr_estimate(c, 0.01);
        auto mle = mle_oracle(c, 0.01);
        std::vector<double> lv, mv;
        for (const auto& f : c.factor_index) {
            lv.push_back(lsr.theta.at(f));
            mv.push_back(mle.theta.at(f));
        }
        CHECK(kendall_tau(lv, mv) == doctest::Approx(1.0));
        double linf = 0;
        for (std::size_t k = 0; k < lv.size(); ++k) linf = std::max(linf, std::abs(lv[k] - mv[k]));
        CHECK(linf < 0.02);
    }
}

TEST_CASE("synthetic ground-truth recovery") {
    std::mt19937_64 rng(7);
    const int n = 10;
    std::vector<double> truth(n);
    for (int i = 0; i < n; ++i) truth[i] = -1.0 + 2.0 * i / (n - 1);

    FactorComparisons c;
    for (int i = 0; i < n; ++i) c.factor_index.push_back("f" + std::to_string(100 + i));
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int o = 0; o < 50000; ++o) {
        int i = pick(rng), j = pick(rng);
        if (i == j) continue;
        const double p = 1.0 / (1.0 + std::exp(truth[j] - truth[i]));
        if (coin(rng) < p) {
            ++c.wins[{c.factor_index[i], c.factor_index[j]}];
        } else {
            ++c.wins[{c.factor_index[j], c.factor_index[i]}];
        }
    }
    auto est = lsr_estimate(c, 0.01);
    std::vector<double> fitted;
    for (const auto& f : c.factor_index) fitted.push_back(est.theta.at(f));
    CHECK(spearman_rho(fitted, truth) >= 0.95);
}

TEST_CASE("scores round-trip through the TSV format") {
    namespace fs = std::filesystem;
    const auto path =
        (fs::temp_directory_path() / ("preffactor-scores-" + std::to_string(::getpid()) + ".tsv"))
            .string();
    auto a = lsr_estimate(two_factor(3, 1), 0.01, "C0");
    auto b = lsr_estimate(two_factor(1, 4), 0.01, "all_users");
    append_scores(a, path, /*truncate=*/true);
    append_scores(b, path, /*truncate=*/false);

    auto loaded = load_scores(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].condition_id == "C0");
    CHECK(loaded[1].condition_id == "all_users");
    CHECK(loaded[0].theta.at("a") == doctest::Approx(a.theta.at("a")).epsilon(1e-15));
    CHECK(loaded[0].coverage.at("a") == a.coverage.at("a"));
    CHECK(loaded[1].alpha == doctest::Approx(0.01));
    fs::remove(path);
}
