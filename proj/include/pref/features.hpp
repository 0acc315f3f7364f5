#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pref/factors.hpp"
#include "pref/types.hpp"

namespace pref {

enum class Pos {
    noun,
    proper_noun,
    verb,
    adjective,
    adverb,
    particle,
    auxiliary,
    other,
};

struct MorphToken {
    std::string surface;
    Pos pos = Pos::other;
};

struct MorphAnnotation {
    std::string response_id;  // opaque key; prompt annotations use the prompt_id
    std::vector<MorphToken> tokens;
};

Pos parse_pos(const std::string& tag);
std::string pos_name(Pos p);

struct RawFeatureVector {
    std::map<std::string, double> continuous;
    std::map<std::string, bool> boolean;
};

// Term lists for the style flags; editable via one-term-per-line files.
struct Lexicons {
    std::vector<std::string> exaggeration;
    std::vector<std::string> negation;

    static Lexicons defaults();
    static std::vector<std::string> load_terms(const std::string& path);
};

enum class BinScheme { quartile, median, boolean };

struct FeatureDef {
    std::string name;
    FactorGroup group;
    BinScheme scheme;
    std::vector<std::string> levels;  // empty for boolean features
    bool needs_morph = false;
};

// The 45-feature registry: canonical names, groups, binning schemes and
// level suffixes.
const std::vector<FeatureDef>& feature_registry();
const FeatureDef* find_feature(const std::string& name);

// Pure function: same inputs always yield the same vector. Morph-derived
// features are absent when the corresponding annotation is missing.
RawFeatureVector extract_raw_features(const Prompt& p, const Response& r,
                                      const MorphAnnotation* response_morph = nullptr,
                                      const MorphAnnotation* prompt_morph = nullptr,
                                      const Lexicons& lex = Lexicons::defaults());

std::map<std::string, MorphAnnotation> load_morph_annotations(const std::string& path);

} // namespace pref
