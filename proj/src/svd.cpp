#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pref/cluster.hpp"
#include "pref/kernels.hpp"
#include "pref/linalg.hpp"

namespace pref {

namespace linalg {

EigenResult jacobi_eigen(std::vector<double> a, std::size_t n) {
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        }
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a[i * n + p];
                    const double aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a[p * n + i];
                    const double aqi = a[q * n + i];
                    a[p * n + i] = c * api - s * aqi;
                    a[q * n + i] = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v[i * n + p];
                    const double viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a[i * n + i] > a[j * n + j]; });

    EigenResult res;
    res.values.reserve(n);
    res.vectors.reserve(n);
    for (std::size_t idx : order) {
        res.values.push_back(a[idx * n + idx]);
        std::vector<double> vec(n);
        for (std::size_t i = 0; i < n; ++i) vec[i] = v[i * n + idx];
        res.vectors.push_back(std::move(vec));
    }
    return res;
}

std::size_t orthonormalize_columns(std::vector<double>& a, std::size_t rows, std::size_t cols,
                                   double drop_tol) {
    // Work column-wise on a transposed copy so the inner loops are contiguous.
    std::vector<std::vector<double>> col(cols, std::vector<double>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) col[j][i] = a[i * cols + j];
    }

    double max_norm = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
        max_norm = std::max(max_norm, std::sqrt(kernels::dot(col[j], col[j])));
    }
    if (max_norm == 0.0) return 0;

    std::size_t kept = 0;
    for (std::size_t j = 0; j < cols; ++j) {
        auto& cj = col[j];
        for (std::size_t i = 0; i < kept; ++i) {
            const double proj = kernels::dot(col[i], cj);
            kernels::axpy(-proj, col[i], cj);
        }
        // second pass for numerical orthogonality
        for (std::size_t i = 0; i < kept; ++i) {
            const double proj = kernels::dot(col[i], cj);
            kernels::axpy(-proj, col[i], cj);
        }
        const double norm = std::sqrt(kernels::dot(cj, cj));
        if (norm <= drop_tol * max_norm) continue;
        for (double& x : cj) x /= norm;
        if (kept != j) col[kept] = cj;
        ++kept;
    }

    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            a[i * cols + j] = j < kept ? col[j][i] : 0.0;
        }
    }
    return kept;
}

} // namespace linalg

namespace {

// y (rows x L) = A (CSR) * x (cols x L), both row-major.
void csr_matmul(const SparseMatrix& a, const std::vector<double>& x, std::size_t l,
                std::vector<double>& y) {
    y.assign(a.rows() * l, 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double* out = y.data() + r * l;
        for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
            const double v = a.values[p];
            const double* in = x.data() + static_cast<std::size_t>(a.col_idx[p]) * l;
            kernels::axpy(v, {in, l}, {out, l});
        }
    }
}

// y (cols x L) = A^T * x (rows x L).
void csr_matmul_transpose(const SparseMatrix& a, const std::vector<double>& x, std::size_t l,
                          std::vector<double>& y) {
    y.assign(a.cols() * l, 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double* in = x.data() + r * l;
        for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
            const double v = a.values[p];
            double* out = y.data() + static_cast<std::size_t>(a.col_idx[p]) * l;
            kernels::axpy(v, {in, l}, {out, l});
        }
    }
}

} // namespace

EmbeddingModel fit_svd(const SparseMatrix& weighted, std::size_t dims, std::uint64_t seed) {
    if (dims < 1) throw ClusterError("fit_svd: dims must be >= 1");
    const std::size_t rows = weighted.rows();
    const std::size_t cols = weighted.cols();
    if (rows == 0 || cols == 0) throw ClusterError("fit_svd: empty matrix");

    const std::size_t oversampling = 10;
    const std::size_t l = std::min(dims + oversampling, std::min(rows, cols));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> omega(cols * l);
    for (double& x : omega) x = gauss(rng);

    // Randomized subspace iteration, run until the Ritz estimates of the top
    // singular values stop moving.
    const int max_power_iterations = 500;
    const double sv_tolerance = 1e-12;
    std::vector<double> y, atq;
    csr_matmul(weighted, omega, l, y);  // rows x l

    std::size_t q_cols = 0;
    linalg::EigenResult eig;
    std::vector<double> prev_sigma;
    bool converged = false;
    for (int it = 0; it < max_power_iterations && !converged; ++it) {
        q_cols = linalg::orthonormalize_columns(y, rows, l);
        if (q_cols == 0) throw ClusterError("fit_svd: matrix is zero");

        // B = Q^T A, shape q_cols x cols; computed via A^T Q then transposed.
        csr_matmul_transpose(weighted, y, l, atq);  // cols x l (first q_cols valid)

        // Gram matrix G = B B^T = (A^T Q)^T (A^T Q), q_cols x q_cols.
        std::vector<double> gram(q_cols * q_cols, 0.0);
        for (std::size_t c = 0; c < cols; ++c) {
            const double* row = atq.data() + c * l;
            for (std::size_t i = 0; i < q_cols; ++i) {
                for (std::size_t j = i; j < q_cols; ++j) gram[i * q_cols + j] += row[i] * row[j];
            }
        }
        for (std::size_t i = 0; i < q_cols; ++i) {
            for (std::size_t j = 0; j < i; ++j) gram[i * q_cols + j] = gram[j * q_cols + i];
        }
        eig = linalg::jacobi_eigen(std::move(gram), q_cols);

        std::vector<double> sigma;
        for (std::size_t i = 0; i < std::min(dims, q_cols); ++i) {
            sigma.push_back(std::sqrt(std::max(eig.values[i], 0.0)));
        }
        if (!prev_sigma.empty() && prev_sigma.size() == sigma.size()) {
            const double scale = std::max(sigma[0], 1e-300);
            double delta = 0.0;
            for (std::size_t i = 0; i < sigma.size(); ++i) {
                delta = std::max(delta, std::abs(sigma[i] - prev_sigma[i]) / scale);
            }
            converged = delta < sv_tolerance;
        }
        prev_sigma = std::move(sigma);

        if (!converged) {
            // Next iterate: Y = A * orth(A^T Q).
            std::vector<double> z = atq;
            linalg::orthonormalize_columns(z, cols, l);
            csr_matmul(weighted, z, l, y);
        }
    }

    EmbeddingModel model;
    model.dims = dims;
    const double sigma_max = std::sqrt(std::max(eig.values[0], 0.0));
    for (std::size_t i = 0; i < std::min(dims, q_cols); ++i) {
        const double sigma = std::sqrt(std::max(eig.values[i], 0.0));
        if (sigma <= 1e-10 * sigma_max) break;
        model.singular_values.push_back(sigma);
    }
    model.rank = model.singular_values.size();

    // Right singular vectors v_i = B^T u_i / sigma_i = (A^T Q) u_i / sigma_i.
    model.components.assign(model.rank * cols, 0.0);
    for (std::size_t i = 0; i < model.rank; ++i) {
        double* out = model.components.data() + i * cols;
        const auto& u = eig.vectors[i];
        for (std::size_t c = 0; c < cols; ++c) {
            const double* row = atq.data() + c * l;
            double acc = 0.0;
            for (std::size_t j = 0; j < q_cols; ++j) acc += row[j] * u[j];
            out[c] = acc / model.singular_values[i];
        }
    }
    return model;
}

} // namespace pref
