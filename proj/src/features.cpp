#include "pref/features.hpp"

#include <algorithm>
#include <fstream>

#include "pref/jsonl.hpp"
#include "pref/utf8.hpp"

namespace pref {

Pos parse_pos(const std::string& tag) {
    if (tag == "noun") return Pos::noun;
    if (tag == "proper_noun") return Pos::proper_noun;
    if (tag == "verb") return Pos::verb;
    if (tag == "adjective") return Pos::adjective;
    if (tag == "adverb") return Pos::adverb;
    if (tag == "particle") return Pos::particle;
    if (tag == "auxiliary") return Pos::auxiliary;
    return Pos::other;
}

std::string pos_name(Pos p) {
    switch (p) {
        case Pos::noun: return "noun";
        case Pos::proper_noun: return "proper_noun";
        case Pos::verb: return "verb";
        case Pos::adjective: return "adjective";
        case Pos::adverb: return "adverb";
        case Pos::particle: return "particle";
        case Pos::auxiliary: return "auxiliary";
        case Pos::other: return "other";
    }
    return "other";
}

std::string_view factor_group_name(FactorGroup g) {
    switch (g) {
        case FactorGroup::basic: return "basic";
        case FactorGroup::morphological: return "morphological";
        case FactorGroup::symbol: return "symbol";
        case FactorGroup::ending: return "ending";
        case FactorGroup::style: return "style";
        case FactorGroup::relational: return "relational";
        case FactorGroup::strategy: return "strategy";
    }
    return "basic";
}

Lexicons Lexicons::defaults() {
    Lexicons lex;
    lex.exaggeration = {
        "超",     "めっちゃ", "めちゃくちゃ", "すごい", "すごく", "最強",
        "最高",   "世界一",   "一番",         "絶対",   "死ぬほど", "無限",
        "永遠",   "全部",     "100倍",        "神",
    };
    lex.negation = {
        "ない", "ません", "なかった", "無理", "だめ", "ダメ", "いや", "せん",
    };
    return lex;
}

std::vector<std::string> Lexicons::load_terms(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lexicon file " + path);
    std::vector<std::string> terms;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) {
            line.pop_back();
        }
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        terms.push_back(line.substr(start));
    }
    return terms;
}

const std::vector<FeatureDef>& feature_registry() {
    static const std::vector<FeatureDef> registry = {
        // Basic (11)
        {"len-char", FactorGroup::basic, BinScheme::quartile, {"short", "medium", "long", "xlong"}},
        {"hiragana", FactorGroup::basic, BinScheme::quartile, {"minimal", "low", "medium", "high"}},
        {"katakana", FactorGroup::basic, BinScheme::median, {"minimal", "high"}},
        {"kanji", FactorGroup::basic, BinScheme::quartile, {"minimal", "low", "medium", "high"}},
        {"alphabet", FactorGroup::basic, BinScheme::median, {"minimal", "high"}},
        {"digit", FactorGroup::basic, BinScheme::median, {"minimal", "high"}},
        {"punct", FactorGroup::basic, BinScheme::median, {"minimal", "high"}},
        {"space", FactorGroup::basic, BinScheme::median, {"minimal", "high"}},
        {"symbol", FactorGroup::basic, BinScheme::median, {"minimal", "high"}},
        {"punct-count", FactorGroup::basic, BinScheme::median, {"few", "most"}},
        {"sentences", FactorGroup::basic, BinScheme::median, {"one", "many"}},
        // Morphological (10)
        {"pos-noun", FactorGroup::morphological, BinScheme::quartile,
         {"low", "medium", "high", "dominant"}, true},
        {"pos-verb", FactorGroup::morphological, BinScheme::median, {"minimal", "high"}, true},
        {"pos-adj", FactorGroup::morphological, BinScheme::median, {"minimal", "high"}, true},
        {"pos-adverb", FactorGroup::morphological, BinScheme::median, {"minimal", "high"}, true},
        {"pos-particle", FactorGroup::morphological, BinScheme::quartile,
         {"minimal", "low", "medium", "high"}, true},
        {"pos-auxiliary", FactorGroup::morphological, BinScheme::median, {"minimal", "high"}, true},
        {"len-token", FactorGroup::morphological, BinScheme::quartile,
         {"short", "medium", "long", "xlong"}, true},
        {"vocab-unique", FactorGroup::morphological, BinScheme::quartile,
         {"few", "some", "many", "most"}, true},
        {"vocab-diversity", FactorGroup::morphological, BinScheme::median,
         {"repetitive", "very-diverse"}, true},
        {"proper-noun", FactorGroup::morphological, BinScheme::boolean, {}, true},
        // Special symbols (5)
        {"dialogue", FactorGroup::symbol, BinScheme::boolean, {}},
        {"parentheses", FactorGroup::symbol, BinScheme::boolean, {}},
        {"tilde", FactorGroup::symbol, BinScheme::boolean, {}},
        {"number", FactorGroup::symbol, BinScheme::boolean, {}},
        {"slang", FactorGroup::symbol, BinScheme::boolean, {}},
        // Sentence endings (9)
        {"ending-period", FactorGroup::ending, BinScheme::boolean, {}},
        {"ending-question", FactorGroup::ending, BinScheme::boolean, {}},
        {"ending-exclamation", FactorGroup::ending, BinScheme::boolean, {}},
        {"ending-ellipsis", FactorGroup::ending, BinScheme::boolean, {}},
        {"ending-noun", FactorGroup::ending, BinScheme::boolean, {}, true},
        {"ending-verb", FactorGroup::ending, BinScheme::boolean, {}, true},
        {"ending-adjective", FactorGroup::ending, BinScheme::boolean, {}, true},
        {"ending-particle", FactorGroup::ending, BinScheme::boolean, {}, true},
        {"ending-auxiliary", FactorGroup::ending, BinScheme::boolean, {}, true},
        // Writing style (4)
        {"polite-style", FactorGroup::style, BinScheme::boolean, {}},
        {"casual-style", FactorGroup::style, BinScheme::boolean, {}},
        {"exaggeration-rule", FactorGroup::style, BinScheme::boolean, {}},
        {"negation", FactorGroup::style, BinScheme::boolean, {}},
        // Prompt-response relational (6)
        {"prompt-overlap", FactorGroup::relational, BinScheme::quartile,
         {"minimal", "low", "medium", "high"}},
        {"prompt-kanji-share", FactorGroup::relational, BinScheme::median, {"minimal", "high"}},
        {"prompt-noun", FactorGroup::relational, BinScheme::boolean, {}, true},
        {"prompt-verb", FactorGroup::relational, BinScheme::boolean, {}, true},
        {"prompt-proper-noun", FactorGroup::relational, BinScheme::boolean, {}, true},
        {"length-ratio", FactorGroup::relational, BinScheme::quartile,
         {"short", "balanced", "long", "very-long"}},
    };
    return registry;
}

const FeatureDef* find_feature(const std::string& name) {
    for (const auto& def : feature_registry()) {
        if (def.name == name) return &def;
    }
    return nullptr;
}

namespace {

bool contains_codepoint(const std::vector<char32_t>& cps, char32_t target) {
    return std::find(cps.begin(), cps.end(), target) != cps.end();
}

bool is_sentence_final(char32_t c) {
    return c == 0x3002 || c == '.' || c == '!' || c == 0xFF01 || c == '?' || c == 0xFF1F ||
           c == 0x2026;
}

int count_sentences(const std::vector<char32_t>& cps) {
    if (cps.empty()) return 0;
    int breaks = 0;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (!is_sentence_final(cps[i])) continue;
        for (std::size_t j = i + 1; j < cps.size(); ++j) {
            if (!is_sentence_final(cps[j]) && classify_char(cps[j]) != CharClass::whitespace) {
                ++breaks;
                break;
            }
        }
    }
    return 1 + breaks;
}

bool has_slang(const std::vector<char32_t>& cps) {
    if (contains_codepoint(cps, 0x8349)) return true;  // 草
    int run = 0;
    for (char32_t c : cps) {
        if (c == 'w' || c == 'W' || c == 0xFF57) {
            if (++run >= 2) return true;
        } else {
            run = 0;
        }
    }
    return false;
}

bool contains_term(const std::string& text, const std::vector<std::string>& terms) {
    for (const auto& t : terms) {
        if (!t.empty() && text.find(t) != std::string::npos) return true;
    }
    return false;
}

// Trailing punctuation and symbols are skipped before checking the
// polite/casual suffix forms.
std::u32string content_tail(const std::vector<char32_t>& cps) {
    std::size_t end = cps.size();
    while (end > 0) {
        const CharClass cls = classify_char(cps[end - 1]);
        if (cls == CharClass::punctuation || cls == CharClass::symbol ||
            cls == CharClass::whitespace) {
            --end;
        } else {
            break;
        }
    }
    const std::size_t start = end > 8 ? end - 8 : 0;
    return std::u32string(cps.begin() + start, cps.begin() + end);
}

bool ends_with(const std::u32string& s, const std::u32string& suffix) {
    return s.size() >= suffix.size() &&
           std::equal(suffix.rbegin(), suffix.rend(), s.rbegin());
}

std::size_t multiset_intersection_size(std::vector<char32_t> a, std::vector<char32_t> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<char32_t> inter;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
    return inter.size();
}

std::vector<char32_t> kanji_only(const std::vector<char32_t>& cps) {
    std::vector<char32_t> out;
    for (char32_t c : cps) {
        if (classify_char(c) == CharClass::kanji) out.push_back(c);
    }
    return out;
}

} // namespace

RawFeatureVector extract_raw_features(const Prompt& p, const Response& r,
                                      const MorphAnnotation* response_morph,
                                      const MorphAnnotation* prompt_morph,
                                      const Lexicons& lex) {
    RawFeatureVector v;
    const auto cps = decode_utf8(r.text);
    const auto prompt_cps = decode_utf8(p.text);
    const double n = static_cast<double>(cps.size());

    std::map<CharClass, int> counts;
    for (char32_t c : cps) ++counts[classify_char(c)];
    auto ratio = [&](CharClass cls) {
        return n == 0 ? 0.0 : static_cast<double>(counts[cls]) / n;
    };

    v.continuous["len-char"] = n;
    v.continuous["hiragana"] = ratio(CharClass::hiragana);
    v.continuous["katakana"] = ratio(CharClass::katakana);
    v.continuous["kanji"] = ratio(CharClass::kanji);
    v.continuous["alphabet"] = ratio(CharClass::alphabet);
    v.continuous["digit"] = ratio(CharClass::digit);
    v.continuous["punct"] = ratio(CharClass::punctuation);
    v.continuous["space"] = ratio(CharClass::whitespace);
    v.continuous["symbol"] = ratio(CharClass::symbol);
    v.continuous["punct-count"] = counts[CharClass::punctuation];
    v.continuous["sentences"] = count_sentences(cps);

    // Special symbols
    v.boolean["dialogue"] = contains_codepoint(cps, 0x300C) || contains_codepoint(cps, 0x300D);
    v.boolean["parentheses"] =
        contains_codepoint(cps, '(') || contains_codepoint(cps, ')') ||
        contains_codepoint(cps, 0xFF08) || contains_codepoint(cps, 0xFF09);
    v.boolean["tilde"] = contains_codepoint(cps, '~') || contains_codepoint(cps, 0x301C) ||
                         contains_codepoint(cps, 0xFF5E);
    v.boolean["number"] = counts[CharClass::digit] > 0;
    v.boolean["slang"] = has_slang(cps);

    // Sentence-ending punctuation
    const char32_t last = cps.empty() ? 0 : cps.back();
    v.boolean["ending-period"] = last == 0x3002 || last == '.';
    v.boolean["ending-question"] = last == '?' || last == 0xFF1F;
    v.boolean["ending-exclamation"] = last == '!' || last == 0xFF01;
    bool ascii_ellipsis = cps.size() >= 3 && cps[cps.size() - 1] == '.' &&
                          cps[cps.size() - 2] == '.' && cps[cps.size() - 3] == '.';
    v.boolean["ending-ellipsis"] = last == 0x2026 || ascii_ellipsis;

    // Writing style
    const auto tail = content_tail(cps);
    v.boolean["polite-style"] = ends_with(tail, U"です") || ends_with(tail, U"ます") ||
                                ends_with(tail, U"でした") || ends_with(tail, U"ました") ||
                                ends_with(tail, U"ません");
    v.boolean["casual-style"] = ends_with(tail, U"だ") || ends_with(tail, U"だよ") ||
                                ends_with(tail, U"だね") || ends_with(tail, U"だろ") ||
                                ends_with(tail, U"じゃん");
    v.boolean["exaggeration-rule"] = contains_term(r.text, lex.exaggeration);
    v.boolean["negation"] = contains_term(r.text, lex.negation);

    // Prompt-response relational (character level)
    const double overlap = n == 0 ? 0.0
                                  : static_cast<double>(multiset_intersection_size(
                                        prompt_cps, cps)) /
                                        n;
    v.continuous["prompt-overlap"] = overlap;
    const auto resp_kanji = kanji_only(cps);
    const auto prompt_kanji = kanji_only(prompt_cps);
    v.continuous["prompt-kanji-share"] =
        resp_kanji.empty() ? 0.0
                           : static_cast<double>(multiset_intersection_size(prompt_kanji,
                                                                            resp_kanji)) /
                                 static_cast<double>(resp_kanji.size());
    v.continuous["length-ratio"] =
        prompt_cps.empty() ? 0.0 : n / static_cast<double>(prompt_cps.size());

    // Morphological features
    if (response_morph) {
        const auto& toks = response_morph->tokens;
        const double t = static_cast<double>(toks.size());
        std::map<Pos, int> pos_counts;
        std::set<std::string> unique_surfaces;
        for (const auto& tok : toks) {
            ++pos_counts[tok.pos];
            unique_surfaces.insert(tok.surface);
        }
        auto pos_ratio = [&](Pos pos) {
            return t == 0 ? 0.0 : static_cast<double>(pos_counts[pos]) / t;
        };
        v.continuous["pos-noun"] =
            t == 0 ? 0.0
                   : static_cast<double>(pos_counts[Pos::noun] + pos_counts[Pos::proper_noun]) / t;
        v.continuous["pos-verb"] = pos_ratio(Pos::verb);
        v.continuous["pos-adj"] = pos_ratio(Pos::adjective);
        v.continuous["pos-adverb"] = pos_ratio(Pos::adverb);
        v.continuous["pos-particle"] = pos_ratio(Pos::particle);
        v.continuous["pos-auxiliary"] = pos_ratio(Pos::auxiliary);
        v.continuous["len-token"] = t;
        v.continuous["vocab-unique"] = static_cast<double>(unique_surfaces.size());
        v.continuous["vocab-diversity"] =
            t == 0 ? 0.0 : static_cast<double>(unique_surfaces.size()) / t;
        v.boolean["proper-noun"] = pos_counts[Pos::proper_noun] > 0;

        const Pos final_pos = toks.empty() ? Pos::other : toks.back().pos;
        v.boolean["ending-noun"] = final_pos == Pos::noun || final_pos == Pos::proper_noun;
        v.boolean["ending-verb"] = final_pos == Pos::verb;
        v.boolean["ending-adjective"] = final_pos == Pos::adjective;
        v.boolean["ending-particle"] = final_pos == Pos::particle;
        v.boolean["ending-auxiliary"] = final_pos == Pos::auxiliary;
    }
    if (response_morph && prompt_morph) {
        bool has_noun = false, has_verb = false, has_proper = false;
        for (const auto& tok : prompt_morph->tokens) {
            if (tok.surface.empty()) continue;
            const bool reused = r.text.find(tok.surface) != std::string::npos;
            if (!reused) continue;
            if (tok.pos == Pos::noun) has_noun = true;
            if (tok.pos == Pos::proper_noun) has_proper = true;
            if (tok.pos == Pos::verb) has_verb = true;
        }
        v.boolean["prompt-noun"] = has_noun || has_proper;
        v.boolean["prompt-verb"] = has_verb;
        v.boolean["prompt-proper-noun"] = has_proper;
    }
    return v;
}

std::map<std::string, MorphAnnotation> load_morph_annotations(const std::string& path) {
    std::map<std::string, MorphAnnotation> out;
    for_each_jsonl(path, [&](std::size_t lineno, const nlohmann::json& obj) {
        MorphAnnotation ann;
        auto id = obj.find("response_id");
        if (id == obj.end() || !id->is_string()) {
            throw IoError(path + ":" + std::to_string(lineno) + ": missing response_id");
        }
        ann.response_id = id->get<std::string>();
        for (const auto& tok : obj.value("tokens", nlohmann::json::array())) {
            ann.tokens.push_back(
                {tok.value("surface", std::string{}), parse_pos(tok.value("pos", std::string{}))});
        }
        out[ann.response_id] = std::move(ann);
    });
    return out;
}

} // namespace pref
