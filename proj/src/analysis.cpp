#include "pref/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "pref/jsonl.hpp"

namespace pref {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// clusters ("C<number>") ascending, then all_users, then everything else
// (model:persona) lexicographically
int condition_rank(const std::string& id) {
    if (id.size() >= 2 && id[0] == 'C' &&
        std::all_of(id.begin() + 1, id.end(), [](char c) { return std::isdigit(c); })) {
        return 0;
    }
    if (id == "all_users") return 1;
    return 2;
}

bool condition_less(const std::string& a, const std::string& b) {
    const int ra = condition_rank(a), rb = condition_rank(b);
    if (ra != rb) return ra < rb;
    if (ra == 0) return std::stoi(a.substr(1)) < std::stoi(b.substr(1));
    return a < b;
}

std::string format_value(double v) {
    if (std::isnan(v)) return "NA";
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

} // namespace

std::vector<std::string> canonical_condition_order(std::vector<std::string> ids) {
    std::sort(ids.begin(), ids.end(), condition_less);
    return ids;
}

ScoreMatrix ScoreMatrix::from_scores(const std::vector<BtlScores>& scores) {
    ScoreMatrix m;
    std::set<std::string> factor_set;
    std::vector<std::string> ids;
    for (const auto& s : scores) {
        ids.push_back(s.condition_id);
        for (const auto& [f, theta] : s.theta) factor_set.insert(f);
    }
    m.conditions = canonical_condition_order(std::move(ids));
    m.factors.assign(factor_set.begin(), factor_set.end());

    m.values.assign(m.conditions.size(), std::vector<double>(m.factors.size(), kNaN));
    m.missing.assign(m.conditions.size(), std::vector<bool>(m.factors.size(), true));
    for (const auto& s : scores) {
        const auto row = m.condition_index(s.condition_id);
        for (std::size_t j = 0; j < m.factors.size(); ++j) {
            auto it = s.theta.find(m.factors[j]);
            if (it != s.theta.end()) {
                m.values[*row][j] = it->second;
                m.missing[*row][j] = false;
            }
        }
    }
    return m;
}

std::optional<std::size_t> ScoreMatrix::condition_index(const std::string& id) const {
    auto it = std::find(conditions.begin(), conditions.end(), id);
    if (it == conditions.end()) return std::nullopt;
    return static_cast<std::size_t>(it - conditions.begin());
}

FactorRanking rank_factors(const BtlScores& s, std::size_t k) {
    std::vector<RankedFactor> all;
    for (const auto& [factor, theta] : s.theta) all.push_back({factor, theta});

    auto by_theta_desc = [](const RankedFactor& a, const RankedFactor& b) {
        if (a.theta != b.theta) return a.theta > b.theta;
        return a.factor < b.factor;
    };
    auto by_theta_asc = [](const RankedFactor& a, const RankedFactor& b) {
        if (a.theta != b.theta) return a.theta < b.theta;
        return a.factor < b.factor;
    };

    FactorRanking r;
    const std::size_t take = std::min(k, all.size());
    std::sort(all.begin(), all.end(), by_theta_desc);
    r.top.assign(all.begin(), all.begin() + take);
    std::sort(all.begin(), all.end(), by_theta_asc);
    r.bottom.assign(all.begin(), all.begin() + take);
    return r;
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) return std::nullopt;
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;  // constant input
    return sxy / std::sqrt(sxx * syy);
}

CorrelationMatrix correlation_matrix(const ScoreMatrix& m) {
    if (m.conditions.size() < 2) {
        throw std::invalid_argument("correlation_matrix: need at least 2 conditions");
    }
    CorrelationMatrix cm;
    cm.ids = m.conditions;
    const std::size_t n = m.conditions.size();
    cm.r.assign(n, std::vector<double>(n, kNaN));
    cm.n_overlap.assign(n, std::vector<std::size_t>(n, 0));

    for (std::size_t i = 0; i < n; ++i) {
        cm.r[i][i] = 1.0;
        std::size_t present = 0;
        for (std::size_t f = 0; f < m.factors.size(); ++f) {
            if (!m.missing[i][f]) ++present;
        }
        cm.n_overlap[i][i] = present;
        for (std::size_t j = i + 1; j < n; ++j) {
            std::vector<double> x, y;
            for (std::size_t f = 0; f < m.factors.size(); ++f) {
                if (!m.missing[i][f] && !m.missing[j][f]) {
                    x.push_back(m.values[i][f]);
                    y.push_back(m.values[j][f]);
                }
            }
            cm.n_overlap[i][j] = cm.n_overlap[j][i] = x.size();
            const auto r = pearson(x, y);
            cm.r[i][j] = cm.r[j][i] = r ? *r : kNaN;
        }
    }
    return cm;
}

std::vector<AlignmentEntry> alignment_report(const ScoreMatrix& human, const ScoreMatrix& llm) {
    if (human.factors != llm.factors) {
        throw std::invalid_argument("alignment_report: factor vocabularies differ");
    }

    // merged matrix so pairwise handling stays identical to correlation_matrix
    auto correlate = [&](std::size_t li, std::size_t hi) -> std::optional<double> {
        std::vector<double> x, y;
        for (std::size_t f = 0; f < human.factors.size(); ++f) {
            if (!llm.missing[li][f] && !human.missing[hi][f]) {
                x.push_back(llm.values[li][f]);
                y.push_back(human.values[hi][f]);
            }
        }
        return pearson(x, y);
    };

    std::vector<std::size_t> cluster_rows;
    std::optional<std::size_t> all_users_row;
    for (std::size_t i = 0; i < human.conditions.size(); ++i) {
        if (human.conditions[i] == "all_users") {
            all_users_row = i;
        } else {
            cluster_rows.push_back(i);
        }
    }

    std::vector<AlignmentEntry> report;
    for (std::size_t li = 0; li < llm.conditions.size(); ++li) {
        AlignmentEntry entry;
        entry.llm_condition = llm.conditions[li];
        entry.best_correlation = -std::numeric_limits<double>::infinity();
        for (std::size_t hi : cluster_rows) {
            const auto r = correlate(li, hi);
            if (r && *r > entry.best_correlation) {
                entry.best_correlation = *r;
                entry.best_cluster = human.conditions[hi];
            }
        }
        if (entry.best_cluster.empty()) entry.best_correlation = kNaN;
        entry.all_users_correlation =
            all_users_row ? correlate(li, *all_users_row).value_or(kNaN) : kNaN;
        report.push_back(entry);
    }

    // delta versus the same model's no_persona condition, evaluated on the
    // persona's best-aligned cluster
    for (auto& entry : report) {
        const auto colon = entry.llm_condition.find(':');
        if (colon == std::string::npos || std::isnan(entry.best_correlation)) {
            entry.delta_vs_no_persona = kNaN;
            continue;
        }
        const std::string baseline_id = entry.llm_condition.substr(0, colon) + ":no_persona";
        const auto baseline_row = llm.condition_index(baseline_id);
        const auto cluster_row = human.condition_index(entry.best_cluster);
        if (!baseline_row || !cluster_row) {
            entry.delta_vs_no_persona = kNaN;
            continue;
        }
        const auto baseline_r = correlate(*baseline_row, *cluster_row);
        entry.delta_vs_no_persona =
            baseline_r ? entry.best_correlation - *baseline_r : kNaN;
    }
    return report;
}

void save_score_matrix(const ScoreMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "factor";
    for (const auto& c : m.conditions) out << '\t' << c;
    out << '\n';
    for (std::size_t f = 0; f < m.factors.size(); ++f) {
        out << m.factors[f];
        for (std::size_t c = 0; c < m.conditions.size(); ++c) {
            out << '\t' << (m.missing[c][f] ? "NA" : format_value(m.values[c][f]));
        }
        out << '\n';
    }
}

void save_correlation_matrix(const CorrelationMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "condition";
    for (const auto& id : m.ids) out << '\t' << id;
    out << "\tn_overlap_row\n";
    for (std::size_t i = 0; i < m.ids.size(); ++i) {
        out << m.ids[i];
        for (std::size_t j = 0; j < m.ids.size(); ++j) out << '\t' << format_value(m.r[i][j]);
        out << '\t';
        for (std::size_t j = 0; j < m.ids.size(); ++j) {
            out << (j ? "," : "") << m.n_overlap[i][j];
        }
        out << '\n';
    }
}

void save_rankings(const std::vector<std::pair<std::string, FactorRanking>>& rankings,
                   const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "condition\tdirection\trank\tfactor\ttheta\n";
    for (const auto& [condition, ranking] : rankings) {
        for (std::size_t i = 0; i < ranking.top.size(); ++i) {
            out << condition << "\ttop\t" << (i + 1) << '\t' << ranking.top[i].factor << '\t'
                << format_value(ranking.top[i].theta) << '\n';
        }
        for (std::size_t i = 0; i < ranking.bottom.size(); ++i) {
            out << condition << "\tbottom\t" << (i + 1) << '\t' << ranking.bottom[i].factor
                << '\t' << format_value(ranking.bottom[i].theta) << '\n';
        }
    }
}

void save_alignment_report(const std::vector<AlignmentEntry>& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "llm_condition\tbest_cluster\tbest_correlation\tall_users_correlation\t"
           "delta_vs_no_persona\n";
    for (const auto& e : report) {
        out << e.llm_condition << '\t' << e.best_cluster << '\t'
            << format_value(e.best_correlation) << '\t' << format_value(e.all_users_correlation)
            << '\t' << format_value(e.delta_vs_no_persona) << '\n';
    }
}

} // namespace pref
