#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pref/types.hpp"

namespace pref {

// Row-major CSR with string row/column ids; rows are users, columns
// responses, both sorted by id for determinism.
struct SparseMatrix {
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;
    std::vector<std::size_t> row_ptr;   // size rows+1
    std::vector<std::uint32_t> col_idx;
    std::vector<double> values;

    std::size_t rows() const { return row_ids.size(); }
    std::size_t cols() const { return col_ids.size(); }
};

struct ClusterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmbeddingModel {
    std::vector<double> idf;              // per column
    std::size_t dims = 0;                 // requested dimensionality
    std::size_t rank = 0;                 // effective rank kept
    std::vector<double> singular_values;  // size rank, non-increasing
    std::vector<double> components;       // rank x cols, row-major (right singular vectors)
};

struct ClusterModel {
    int k = 0;
    std::vector<std::vector<double>> centroids;
    std::map<std::string, int> assignments;
    double inertia = 0.0;
    double silhouette = 0.0;
    std::uint64_t seed = 0;
};

struct KSelectionRow {
    int k;
    double inertia;
    double silhouette;
};

struct KSelectionTable {
    std::vector<KSelectionRow> rows;
    int suggested_k = 0;  // max-silhouette k; a suggestion, never auto-applied
};

SparseMatrix build_vote_matrix(const Dataset& d);

// Smoothed idf: ln((1 + U) / (1 + df)) + 1; entry = count * idf.
SparseMatrix tfidf_reweight(const SparseMatrix& m, std::vector<double>* idf_out = nullptr);

// Truncated SVD by randomized subspace iteration (oversampling 10, 4 power
// iterations), seeded.
EmbeddingModel fit_svd(const SparseMatrix& weighted, std::size_t dims, std::uint64_t seed);

// z_u = row * V^T, y_u = z_u / ||z_u||; zero-norm users map to the zero
// vector and are reported so clustering can exclude them.
std::map<std::string, std::vector<double>> embed_users(
    const SparseMatrix& weighted, const EmbeddingModel& e,
    std::vector<std::string>* zero_norm_users = nullptr);

ClusterModel kmeans(const std::map<std::string, std::vector<double>>& points, int k,
                    std::uint64_t seed, int restarts = 10);

KSelectionTable select_k(const std::map<std::string, std::vector<double>>& points,
                         int k_min, int k_max, std::uint64_t seed, int restarts = 10);

double mean_silhouette(const std::vector<std::vector<double>>& points,
                       const std::vector<int>& labels, int k);

// First two principal components of the embedded points (plot-data export).
std::map<std::string, std::pair<double, double>> project_2d(
    const std::map<std::string, std::vector<double>>& points);

void save_assignments(const ClusterModel& m, const std::string& path);
std::map<std::string, int> load_assignments(const std::string& path);

} // namespace pref
