#include "pref/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "pref/jsonl.hpp"
#include "pref/kernels.hpp"
#include "pref/linalg.hpp"

namespace pref {

SparseMatrix build_vote_matrix(const Dataset& d) {
    std::set<std::string> users;
    for (const auto& v : d.votes) users.insert(v.user_id);
    if (users.empty()) throw ClusterError("build_vote_matrix: dataset has no voters");
    if (d.responses.empty()) throw ClusterError("build_vote_matrix: dataset has no responses");

    SparseMatrix m;
    m.row_ids.assign(users.begin(), users.end());
    std::set<std::string> cols;
    for (const auto& r : d.responses) cols.insert(r.response_id);
    m.col_ids.assign(cols.begin(), cols.end());

    std::map<std::string, std::size_t> row_index, col_index;
    for (std::size_t i = 0; i < m.row_ids.size(); ++i) row_index[m.row_ids[i]] = i;
    for (std::size_t i = 0; i < m.col_ids.size(); ++i) col_index[m.col_ids[i]] = i;

    std::vector<std::map<std::uint32_t, double>> rows(m.row_ids.size());
    for (const auto& v : d.votes) {
        rows[row_index[v.user_id]][static_cast<std::uint32_t>(col_index[v.response_id])] +=
            static_cast<double>(v.count);
    }

    m.row_ptr.push_back(0);
    for (const auto& row : rows) {
        for (const auto& [col, value] : row) {
            m.col_idx.push_back(col);
            m.values.push_back(value);
        }
        m.row_ptr.push_back(m.values.size());
    }
    return m;
}

SparseMatrix tfidf_reweight(const SparseMatrix& m, std::vector<double>* idf_out) {
    if (m.rows() == 0) throw ClusterError("tfidf_reweight: empty matrix");
    std::vector<std::size_t> df(m.cols(), 0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t p = m.row_ptr[r]; p < m.row_ptr[r + 1]; ++p) {
            if (m.values[p] != 0.0) ++df[m.col_idx[p]];
        }
    }
    const double users = static_cast<double>(m.rows());
    std::vector<double> idf(m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) {
        idf[c] = std::log((1.0 + users) / (1.0 + static_cast<double>(df[c]))) + 1.0;
    }

    SparseMatrix out = m;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        for (std::size_t p = out.row_ptr[r]; p < out.row_ptr[r + 1]; ++p) {
            out.values[p] *= idf[out.col_idx[p]];
        }
    }
    if (idf_out) *idf_out = idf;
    return out;
}

std::map<std::string, std::vector<double>> embed_users(
    const SparseMatrix& weighted, const EmbeddingModel& e,
    std::vector<std::string>* zero_norm_users) {
    std::map<std::string, std::vector<double>> out;
    for (std::size_t r = 0; r < weighted.rows(); ++r) {
        std::vector<double> z(e.rank, 0.0);
        for (std::size_t p = weighted.row_ptr[r]; p < weighted.row_ptr[r + 1]; ++p) {
            const std::size_t c = weighted.col_idx[p];
            const double v = weighted.values[p];
            for (std::size_t i = 0; i < e.rank; ++i) {
                z[i] += v * e.components[i * weighted.cols() + c];
            }
        }
        const double norm = std::sqrt(kernels::dot(z, z));
        if (norm < 1e-12) {
            if (zero_norm_users) zero_norm_users->push_back(weighted.row_ids[r]);
            std::fill(z.begin(), z.end(), 0.0);
        } else {
            for (double& x : z) x /= norm;
        }
        out[weighted.row_ids[r]] = std::move(z);
    }
    return out;
}

std::map<std::string, std::pair<double, double>> project_2d(
    const std::map<std::string, std::vector<double>>& points) {
    if (points.size() < 2) throw ClusterError("project_2d: need at least 2 points");
    const std::size_t dim = points.begin()->second.size();
    const double n = static_cast<double>(points.size());

    std::vector<double> mean(dim, 0.0);
    for (const auto& [id, p] : points) kernels::axpy(1.0, p, mean);
    for (double& x : mean) x /= n;

    std::vector<double> cov(dim * dim, 0.0);
    std::vector<double> centered(dim);
    for (const auto& [id, p] : points) {
        for (std::size_t i = 0; i < dim; ++i) centered[i] = p[i] - mean[i];
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = i; j < dim; ++j) cov[i * dim + j] += centered[i] * centered[j];
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < i; ++j) cov[i * dim + j] = cov[j * dim + i];
    }

    auto eig = linalg::jacobi_eigen(std::move(cov), dim);
    std::map<std::string, std::pair<double, double>> out;
    for (const auto& [id, p] : points) {
        for (std::size_t i = 0; i < dim; ++i) centered[i] = p[i] - mean[i];
        const double x = kernels::dot(centered, eig.vectors[0]);
        const double y = dim > 1 ? kernels::dot(centered, eig.vectors[1]) : 0.0;
        out[id] = {x, y};
    }
    return out;
}

void save_assignments(const ClusterModel& m, const std::string& path) {
    JsonlWriter w(path);
    for (const auto& [user_id, cluster] : m.assignments) {
        w.write({{"user_id", user_id}, {"cluster", cluster}});
    }
}

std::map<std::string, int> load_assignments(const std::string& path) {
    std::map<std::string, int> out;
    for_each_jsonl(path, [&](std::size_t, const nlohmann::json& obj) {
        out[obj.at("user_id").get<std::string>()] = obj.at("cluster").get<int>();
    });
    return out;
}

} // namespace pref
