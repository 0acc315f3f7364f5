#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pref/btl.hpp"

namespace pref {

struct ScoreMatrix {
    std::vector<std::string> conditions;
    std::vector<std::string> factors;
    // conditions x factors; missing entries flagged in `missing`.
    std::vector<std::vector<double>> values;
    std::vector<std::vector<bool>> missing;

    static ScoreMatrix from_scores(const std::vector<BtlScores>& scores);
    std::optional<std::size_t> condition_index(const std::string& id) const;
};

struct CorrelationMatrix {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> r;           // NaN where undefined
    std::vector<std::vector<std::size_t>> n_overlap;
};

struct RankedFactor {
    std::string factor;
    double theta;
};

struct FactorRanking {
    std::vector<RankedFactor> top;
    std::vector<RankedFactor> bottom;
};

struct AlignmentEntry {
    std::string llm_condition;
    std::string best_cluster;
    double best_correlation = 0.0;
    double all_users_correlation = 0.0;  // NaN when undefined
    double delta_vs_no_persona = 0.0;    // NaN for the no_persona row itself
};

// Top-k / bottom-k by theta; ties broken by canonical factor-name order.
FactorRanking rank_factors(const BtlScores& s, std::size_t k);

// Product-moment coefficient; nullopt for length < 3 or constant input.
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

// Pairwise over jointly non-missing factors; pairs with overlap < 3 are
// undefined. Conditions ordered: clusters ascending, all_users, then
// model:persona lexicographic.
CorrelationMatrix correlation_matrix(const ScoreMatrix& m);

std::vector<std::string> canonical_condition_order(std::vector<std::string> ids);

std::vector<AlignmentEntry> alignment_report(const ScoreMatrix& human, const ScoreMatrix& llm);

void save_score_matrix(const ScoreMatrix& m, const std::string& path);
void save_correlation_matrix(const CorrelationMatrix& m, const std::string& path);
void save_rankings(const std::vector<std::pair<std::string, FactorRanking>>& rankings,
                   const std::string& path);
void save_alignment_report(const std::vector<AlignmentEntry>& report, const std::string& path);

} // namespace pref
