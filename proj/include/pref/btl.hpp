#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pref/factors.hpp"
#include "pref/types.hpp"

namespace pref {

struct ConditionVotes {
    std::string condition_id;
    // prompt_id -> (response_id, total vote count)
    std::map<std::string, std::vector<std::pair<std::string, std::int64_t>>> totals;
};

struct ResponsePair {
    std::string winner;
    std::string loser;
};

struct FactorComparisons {
    std::map<std::pair<std::string, std::string>, std::int64_t> wins;  // (winner, loser) -> count
    std::vector<std::string> factor_index;  // canonical sorted vocabulary for this run
};

struct BtlScores {
    std::string condition_id;
    std::map<std::string, double> theta;          // mean-zero over estimated factors
    std::map<std::string, std::int64_t> coverage; // appearance counts per factor
    double alpha = 0.0;
};

struct BtlError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Builds per-condition vote totals from a dataset restricted to the given
// users (empty set = all users).
ConditionVotes condition_votes(const Dataset& d, const std::string& condition_id,
                               const std::set<std::string>& users = {});

// All unordered response pairs within each prompt, ordered winner-first by
// strict vote-total inequality; ties are discarded.
std::vector<ResponsePair> derive_response_pairs(const ConditionVotes& cv);

// F+ = f(winner) \ f(loser), F- = f(loser) \ f(winner); every (f in F+,
// g in F-) contributes one outcome, |F+| x |F-| per response pair.
FactorComparisons derive_factor_comparisons(
    const std::vector<ResponsePair>& pairs,
    const std::map<std::string, FactorSet>& factorsets);

// Luce spectral ranking, iterated to its fixed point: each round takes the
// stationary distribution of the strength-rescaled win-rate Markov chain as
// the next strength estimate; theta = ln(strength), shifted to mean zero.
// alpha adds pseudo-wins in both directions of every factor pair.
BtlScores lsr_estimate(const FactorComparisons& c, double alpha = 0.01,
                       const std::string& condition_id = "");

// Numerically stable logistic form of exp(a)/(exp(a)+exp(b)).
double btl_probability(double theta_k, double theta_l);

// Independent check: regularized maximum likelihood via damped
// minorization-maximization, mean-zero normalized.
BtlScores mle_oracle(const FactorComparisons& c, double alpha,
                     const std::string& condition_id = "");

void save_comparisons(const FactorComparisons& c, const std::string& path);
void save_scores(const BtlScores& s, const std::string& path);
void append_scores(const BtlScores& s, const std::string& path, bool truncate);
std::vector<BtlScores> load_scores(const std::string& path);

} // namespace pref
