#include "pref/btl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "pref/jsonl.hpp"

namespace pref {

ConditionVotes condition_votes(const Dataset& d, const std::string& condition_id,
                               const std::set<std::string>& users) {
    ConditionVotes cv;
    cv.condition_id = condition_id;
    std::map<std::string, std::int64_t> totals;
    for (const auto& v : d.votes) {
        if (!users.empty() && !users.count(v.user_id)) continue;
        totals[v.response_id] += v.count;
    }
    for (const auto& r : d.responses) {
        auto it = totals.find(r.response_id);
        cv.totals[r.prompt_id].emplace_back(r.response_id,
                                            it == totals.end() ? 0 : it->second);
    }
    return cv;
}

std::vector<ResponsePair> derive_response_pairs(const ConditionVotes& cv) {
    std::vector<ResponsePair> pairs;
    for (const auto& [prompt_id, responses] : cv.totals) {
        for (std::size_t j = 0; j < responses.size(); ++j) {
            for (std::size_t k = j + 1; k < responses.size(); ++k) {
                const auto& [rj, vj] = responses[j];
                const auto& [rk, vk] = responses[k];
                if (vj > vk) {
                    pairs.push_back({rj, rk});
                } else if (vk > vj) {
                    pairs.push_back({rk, rj});
                }
                // ties carry no preference information
            }
        }
    }
    return pairs;
}

FactorComparisons derive_factor_comparisons(
    const std::vector<ResponsePair>& pairs,
    const std::map<std::string, FactorSet>& factorsets) {
    FactorComparisons out;
    std::set<std::string> vocab;
    for (const auto& pair : pairs) {
        auto wit = factorsets.find(pair.winner);
        auto lit = factorsets.find(pair.loser);
        if (wit == factorsets.end()) throw BtlError("missing FactorSet for " + pair.winner);
        if (lit == factorsets.end()) throw BtlError("missing FactorSet for " + pair.loser);

        std::vector<std::string> plus, minus;
        for (const auto& f : wit->second.factors) {
            if (!lit->second.factors.count(f)) plus.push_back(f.name);
        }
        for (const auto& f : lit->second.factors) {
            if (!wit->second.factors.count(f)) minus.push_back(f.name);
        }
        for (const auto& f : plus) {
            for (const auto& g : minus) {
                ++out.wins[{f, g}];
                vocab.insert(f);
                vocab.insert(g);
            }
        }
    }
    out.factor_index.assign(vocab.begin(), vocab.end());
    return out;
}

namespace {

// Dense win-count matrix W[k][l] = wins of k over l, alpha added everywhere
// off-diagonal.
std::vector<std::vector<double>> win_matrix(const FactorComparisons& c, double alpha) {
    const std::size_t n = c.factor_index.size();
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[c.factor_index[i]] = i;

    std::vector<std::vector<double>> w(n, std::vector<double>(n, alpha));
    for (std::size_t i = 0; i < n; ++i) w[i][i] = 0.0;
    for (const auto& [pair, count] : c.wins) {
        if (pair.first == pair.second) throw BtlError("self-comparison for " + pair.first);
        w[index.at(pair.first)][index.at(pair.second)] += static_cast<double>(count);
    }
    return w;
}

bool strongly_connected(const std::vector<std::vector<double>>& w) {
    const std::size_t n = w.size();
    if (n <= 1) return true;
    auto reach = [&](bool transpose) {
        std::vector<bool> seen(n, false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < n; ++v) {
                const double edge = transpose ? w[v][u] : w[u][v];
                if (edge > 0.0 && !seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
    };
    return reach(false) && reach(true);
}

std::map<std::string, std::int64_t> coverage_counts(const FactorComparisons& c) {
    std::map<std::string, std::int64_t> cov;
    for (const auto& name : c.factor_index) cov[name] = 0;
    for (const auto& [pair, count] : c.wins) {
        cov[pair.first] += count;
        cov[pair.second] += count;
    }
    return cov;
}

void center_mean_zero(std::vector<double>& theta) {
    const double mean =
        std::accumulate(theta.begin(), theta.end(), 0.0) / static_cast<double>(theta.size());
    for (double& t : theta) t -= mean;
}

BtlScores pack_scores(const FactorComparisons& c, const std::vector<double>& theta,
                      double alpha, const std::string& condition_id) {
    BtlScores s;
    s.condition_id = condition_id;
    s.alpha = alpha;
    s.coverage = coverage_counts(c);
    for (std::size_t i = 0; i < c.factor_index.size(); ++i) {
        s.theta[c.factor_index[i]] = theta[i];
    }
    return s;
}

} // namespace

namespace {

// Stationary distribution of a continuous-time chain with the given
// off-diagonal rate matrix, via uniformized power iteration.
std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& rate) {
    const std::size_t n = rate.size();
    std::vector<double> out_rate(n, 0.0);
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t k = 0; k < n; ++k) out_rate[l] += rate[k][l];
    }
    const double uniform_rate = *std::max_element(out_rate.begin(), out_rate.end());
    if (uniform_rate <= 0.0) throw BtlError("comparison graph has no outcomes");

    std::vector<double> pi(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n, 0.0);
    const int max_iterations = 100000;
    const double tolerance = 1e-10;
    for (int iter = 0; iter < max_iterations; ++iter) {
        // next = pi * P with P = I + Q/uniform_rate.
        for (std::size_t k = 0; k < n; ++k) {
            double inflow = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
                if (l != k) inflow += pi[l] * rate[k][l];
            }
            next[k] = pi[k] * (1.0 - out_rate[k] / uniform_rate) + inflow / uniform_rate;
        }
        const double total = std::accumulate(next.begin(), next.end(), 0.0);
        double delta = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            next[k] /= total;
            delta = std::max(delta, std::abs(next[k] - pi[k]) / std::max(pi[k], 1e-300));
        }
        pi.swap(next);
        if (delta < tolerance) return pi;
    }
    throw BtlError("stationary distribution did not converge");
}

} // namespace

BtlScores lsr_estimate(const FactorComparisons& c, double alpha,
                       const std::string& condition_id) {
    const std::size_t n = c.factor_index.size();
    if (n == 0) throw BtlError("no factor comparisons to estimate from");
    if (n == 1) return pack_scores(c, {0.0}, alpha, condition_id);

    const auto w = win_matrix(c, alpha);
    if (alpha <= 0.0 && !strongly_connected(w)) {
        throw BtlError("comparison graph is not strongly connected at alpha=0");
    }

    // Iterative spectral ranking. Each round builds a chain whose rate
    // loser -> winner is w[winner][loser] scaled by the current strength
    // estimates, and takes its stationary distribution as the next strengths.
    // The first round (equal strengths) is the plain spectral estimate; the
    // fixed point is the maximizer of the (alpha-regularized) likelihood.
    std::vector<double> strength(n, 1.0 / static_cast<double>(n));
    std::vector<std::vector<double>> rate(n, std::vector<double>(n, 0.0));
    const int max_rounds = 1000;
    const double round_tolerance = 1e-10;
    bool converged = false;
    for (int round = 0; round < max_rounds && !converged; ++round) {
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t l = 0; l < n; ++l) {
                if (l != k) rate[k][l] = w[k][l] / (strength[k] + strength[l]);
            }
        }
        const auto pi = stationary_distribution(rate);
        double delta = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            delta = std::max(delta, std::abs(pi[k] - strength[k]) / std::max(strength[k], 1e-300));
        }
        strength = pi;
        converged = delta < round_tolerance;
    }
    if (!converged) throw BtlError("spectral ranking did not converge");

    std::vector<double> theta(n);
    for (std::size_t k = 0; k < n; ++k) theta[k] = std::log(strength[k]);
    center_mean_zero(theta);
    return pack_scores(c, theta, alpha, condition_id);
}

double btl_probability(double theta_k, double theta_l) {
    return 1.0 / (1.0 + std::exp(theta_l - theta_k));
}

BtlScores mle_oracle(const FactorComparisons& c, double alpha,
                     const std::string& condition_id) {
    const std::size_t n = c.factor_index.size();
    if (n == 0) throw BtlError("no factor comparisons to estimate from");
    if (n == 1) return pack_scores(c, {0.0}, alpha, condition_id);

    const auto w = win_matrix(c, alpha);
    if (alpha <= 0.0) {
        if (!strongly_connected(w)) {
            throw BtlError("comparison graph is not strongly connected at alpha=0");
        }
        // A factor that never wins (or never loses) pushes the MLE to
        // infinity; surface that as an error rather than iterating forever.
        for (std::size_t k = 0; k < n; ++k) {
            double wins_k = 0.0, losses_k = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
                wins_k += w[k][l];
                losses_k += w[l][k];
            }
            if (wins_k == 0.0 || losses_k == 0.0) {
                throw BtlError("MLE diverges: factor " + c.factor_index[k] +
                               " is on one side of every comparison (use alpha > 0)");
            }
        }
    }

    std::vector<double> total_wins(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) total_wins[k] += w[k][l];
    }

    // Minorization-maximization on strengths s = exp(theta), damped in log
    // space, until the likelihood gradient is below tolerance.
    std::vector<double> strength(n, 1.0);
    const double damping = 1.0;
    const int max_iterations = 200000;
    const double grad_tolerance = 1e-9;
    bool converged = false;
    for (int iter = 0; iter < max_iterations; ++iter) {
        double grad_norm = 0.0;
        std::vector<double> updated(n);
        for (std::size_t k = 0; k < n; ++k) {
            double denom = 0.0;
            double expected_wins = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
                if (l == k) continue;
                const double pairs_kl = w[k][l] + w[l][k];
                if (pairs_kl == 0.0) continue;
                denom += pairs_kl / (strength[k] + strength[l]);
                expected_wins += pairs_kl * strength[k] / (strength[k] + strength[l]);
            }
            grad_norm = std::max(grad_norm, std::abs(total_wins[k] - expected_wins));
            updated[k] = total_wins[k] / denom;
        }
        if (grad_norm < grad_tolerance) {
            converged = true;
            break;
        }
        double log_mean = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            updated[k] = std::exp((1.0 - damping) * std::log(strength[k]) +
                                  damping * std::log(updated[k]));
            log_mean += std::log(updated[k]);
        }
        log_mean /= static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) strength[k] = updated[k] * std::exp(-log_mean);
    }
    if (!converged) throw BtlError("MLE fixed point did not converge");

    std::vector<double> theta(n);
    for (std::size_t k = 0; k < n; ++k) theta[k] = std::log(strength[k]);
    center_mean_zero(theta);
    return pack_scores(c, theta, alpha, condition_id);
}

void save_comparisons(const FactorComparisons& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "winner\tloser\tcount\n";
    for (const auto& [pair, count] : c.wins) {
        out << pair.first << '\t' << pair.second << '\t' << count << '\n';
    }
}

void append_scores(const BtlScores& s, const std::string& path, bool truncate) {
    std::ofstream out(path, truncate ? std::ios::trunc : std::ios::app);
    if (!out) throw IoError("cannot open " + path + " for writing");
    if (truncate) {
        out << "condition_id\tfactor\ttheta\tcoverage\talpha\tnormalization\n";
    }
    std::ostringstream line;
    line.precision(17);
    for (const auto& [factor, theta] : s.theta) {
        line.str("");
        line << s.condition_id << '\t' << factor << '\t' << theta << '\t'
             << s.coverage.at(factor) << '\t' << s.alpha << "\tmean-zero\n";
        out << line.str();
    }
}

void save_scores(const BtlScores& s, const std::string& path) {
    append_scores(s, path, /*truncate=*/true);
}

std::vector<BtlScores> load_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<BtlScores> out;
    std::map<std::string, std::size_t> index;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string condition, factor, theta_s, coverage_s, alpha_s, norm;
        std::getline(ss, condition, '\t');
        std::getline(ss, factor, '\t');
        std::getline(ss, theta_s, '\t');
        std::getline(ss, coverage_s, '\t');
        std::getline(ss, alpha_s, '\t');
        std::getline(ss, norm, '\t');
        auto [it, inserted] = index.emplace(condition, out.size());
        if (inserted) {
            out.emplace_back();
            out.back().condition_id = condition;
            out.back().alpha = std::stod(alpha_s);
        }
        out[it->second].theta[factor] = std::stod(theta_s);
        out[it->second].coverage[factor] = std::stoll(coverage_s);
    }
    return out;
}

} // namespace pref
