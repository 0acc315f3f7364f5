#pragma once

#include <map>
#include <string>
#include <vector>

#include "pref/features.hpp"

namespace pref {

struct FeatureBins {
    std::vector<double> boundaries;       // 3 cut points (quartile) or 1 (median)
    std::vector<std::string> levels;      // matching level-name suffixes
};

struct BinningModel {
    std::map<std::string, FeatureBins> features;
    std::string population;  // identifier of the fit population

    // Factor name for a value of the given feature: value <= boundary_k picks
    // level k (exact-boundary ties take the lower level).
    std::string level_for(const std::string& feature, double value) const;
};

// Empirical percentile with linear interpolation on sorted values.
double percentile(std::vector<double> values, double q);

// Fits quartile/median boundaries per the feature registry over the given
// population. Quartile features with fewer than 4 distinct values degrade to
// median binning (warning); fewer than 2 distinct values drops the feature
// (warning). Features absent from every vector are excluded.
BinningModel fit_binning(const std::vector<RawFeatureVector>& vectors,
                         const std::string& population = "",
                         std::vector<std::string>* warnings = nullptr);

// Bins a vector against the model and unions in strategy labels. Features in
// the vector but not in the model are skipped with a warning.
FactorSet apply_binning(const RawFeatureVector& v, const BinningModel& b,
                        const std::string& response_id,
                        const std::set<FactorId>& strategy_labels = {},
                        std::vector<std::string>* warnings = nullptr);

void save_binning_model(const BinningModel& b, const std::string& path);
BinningModel load_binning_model(const std::string& path);

void save_factor_sets(const std::vector<FactorSet>& sets, const std::string& path);
std::map<std::string, FactorSet> load_factor_sets(const std::string& path);

} // namespace pref
