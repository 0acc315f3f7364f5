#pragma once

#include <array>
#include <set>
#include <string>
#include <string_view>

namespace pref {

enum class FactorGroup {
    basic,
    morphological,
    symbol,
    ending,
    style,
    relational,
    strategy,
};

struct FactorId {
    std::string name;
    FactorGroup group;

    auto operator<=>(const FactorId& other) const { return name <=> other.name; }
    bool operator==(const FactorId& other) const { return name == other.name; }
};

struct FactorSet {
    std::string response_id;
    std::set<FactorId> factors;
};

inline constexpr std::array<std::string_view, 11> kStrategyLabels = {
    "wordplay",       "shared_experience", "exaggeration",  "black_joke_satire",
    "surreal_nonsense", "incongruity",     "meta",          "self_reference",
    "personification", "parody",           "mini_story",
};

inline bool is_strategy_label(std::string_view name) {
    for (auto l : kStrategyLabels) {
        if (l == name) return true;
    }
    return false;
}

std::string_view factor_group_name(FactorGroup g);

} // namespace pref
