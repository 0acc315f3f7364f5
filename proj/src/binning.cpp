#include "pref/binning.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "pref/jsonl.hpp"

namespace pref {

namespace {

void warn(std::vector<std::string>* sink, std::string msg) {
    if (sink) sink->push_back(std::move(msg));
}

FactorGroup group_of(const std::string& feature) {
    const FeatureDef* def = find_feature(feature);
    return def ? def->group : FactorGroup::basic;
}

} // namespace

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("percentile of empty sample");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

std::string BinningModel::level_for(const std::string& feature, double value) const {
    const auto& bins = features.at(feature);
    std::size_t level = bins.boundaries.size();
    for (std::size_t i = 0; i < bins.boundaries.size(); ++i) {
        if (value <= bins.boundaries[i]) {
            level = i;
            break;
        }
    }
    return feature + "-" + bins.levels[level];
}

BinningModel fit_binning(const std::vector<RawFeatureVector>& vectors,
                         const std::string& population,
                         std::vector<std::string>* warnings) {
    if (vectors.empty()) throw std::invalid_argument("fit_binning: empty input collection");

    BinningModel model;
    model.population = population;

    for (const auto& def : feature_registry()) {
        if (def.scheme == BinScheme::boolean) continue;
        std::vector<double> values;
        for (const auto& v : vectors) {
            auto it = v.continuous.find(def.name);
            if (it != v.continuous.end() && std::isfinite(it->second)) values.push_back(it->second);
        }
        if (values.empty()) continue;  // feature absent from this corpus (e.g. no tagger)

        std::set<double> distinct(values.begin(), values.end());
        BinScheme scheme = def.scheme;
        if (distinct.size() < 2) {
            warn(warnings, "feature " + def.name + " has a constant value; dropped from binning");
            continue;
        }
        if (scheme == BinScheme::quartile && distinct.size() < 4) {
            warn(warnings, "feature " + def.name +
                               " has fewer than 4 distinct values; degraded to median binning");
            scheme = BinScheme::median;
        }

        FeatureBins bins;
        if (scheme == BinScheme::quartile) {
            bins.boundaries = {percentile(values, 0.25), percentile(values, 0.50),
                               percentile(values, 0.75)};
            bins.levels = def.levels;
        } else {
            bins.boundaries = {percentile(values, 0.50)};
            // A degraded quartile feature keeps its extreme level names.
            bins.levels = def.levels.size() == 2
                              ? def.levels
                              : std::vector<std::string>{def.levels.front(), def.levels.back()};
        }
        model.features[def.name] = std::move(bins);
    }
    return model;
}

FactorSet apply_binning(const RawFeatureVector& v, const BinningModel& b,
                        const std::string& response_id,
                        const std::set<FactorId>& strategy_labels,
                        std::vector<std::string>* warnings) {
    FactorSet fs;
    fs.response_id = response_id;
    for (const auto& [feature, value] : v.continuous) {
        auto it = b.features.find(feature);
        if (it == b.features.end()) {
            if (find_feature(feature) == nullptr) {
                warn(warnings, "feature " + feature + " not covered by binning model; skipped");
            }
            continue;
        }
        fs.factors.insert({b.level_for(feature, value), group_of(feature)});
    }
    for (const auto& [feature, flag] : v.boolean) {
        if (flag) fs.factors.insert({feature, group_of(feature)});
    }
    for (const auto& label : strategy_labels) {
        fs.factors.insert({label.name, FactorGroup::strategy});
    }
    return fs;
}

void save_binning_model(const BinningModel& b, const std::string& path) {
    nlohmann::json obj;
    obj["population"] = b.population;
    nlohmann::json feats = nlohmann::json::object();
    for (const auto& [name, bins] : b.features) {
        feats[name] = {{"boundaries", bins.boundaries}, {"levels", bins.levels}};
    }
    obj["features"] = feats;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << obj.dump(2) << '\n';
}

BinningModel load_binning_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json obj = nlohmann::json::parse(in);
    BinningModel b;
    b.population = obj.value("population", std::string{});
    for (const auto& [name, bins] : obj.at("features").items()) {
        FeatureBins fb;
        fb.boundaries = bins.at("boundaries").get<std::vector<double>>();
        fb.levels = bins.at("levels").get<std::vector<std::string>>();
        b.features[name] = std::move(fb);
    }
    return b;
}

void save_factor_sets(const std::vector<FactorSet>& sets, const std::string& path) {
    JsonlWriter w(path);
    for (const auto& fs : sets) {
        nlohmann::json factors = nlohmann::json::array();
        for (const auto& f : fs.factors) factors.push_back(f.name);
        w.write({{"response_id", fs.response_id}, {"factors", factors}});
    }
}

std::map<std::string, FactorSet> load_factor_sets(const std::string& path) {
    std::map<std::string, FactorSet> out;
    for_each_jsonl(path, [&](std::size_t lineno, const nlohmann::json& obj) {
        FactorSet fs;
        auto id = obj.find("response_id");
        if (id == obj.end() || !id->is_string()) {
            throw IoError(path + ":" + std::to_string(lineno) + ": missing response_id");
        }
        fs.response_id = id->get<std::string>();
        for (const auto& f : obj.value("factors", nlohmann::json::array())) {
            const std::string name = f.get<std::string>();
            FactorGroup group = FactorGroup::strategy;
            if (!is_strategy_label(name)) {
                // Binned or boolean linguistic factor; recover its group from
                // the registry by stripping candidate level suffixes.
                group = FactorGroup::basic;
                if (const FeatureDef* def = find_feature(name)) {
                    group = def->group;
                } else {
                    auto dash = name.rfind('-');
                    while (dash != std::string::npos) {
                        if (const FeatureDef* def = find_feature(name.substr(0, dash))) {
                            group = def->group;
                            break;
                        }
                        dash = dash == 0 ? std::string::npos : name.rfind('-', dash - 1);
                    }
                }
            }
            fs.factors.insert({name, group});
        }
        out[fs.response_id] = std::move(fs);
    });
    return out;
}

} // namespace pref
