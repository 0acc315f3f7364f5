#pragma once

#include <cstddef>
#include <vector>

namespace pref::linalg {

// Symmetric eigendecomposition by cyclic Jacobi rotations. `a` is n x n
// row-major and is destroyed. Returns eigenvalues in descending order;
// eigenvectors[i] is the eigenvector for eigenvalues[i].
struct EigenResult {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;
};
EigenResult jacobi_eigen(std::vector<double> a, std::size_t n);

// Modified Gram-Schmidt on the columns of the row-major m x n matrix.
// Columns with norm below drop_tol (relative to the largest column norm)
// are dropped; returns the number of columns kept, compacted left.
std::size_t orthonormalize_columns(std::vector<double>& a, std::size_t rows, std::size_t cols,
                                   double drop_tol = 1e-12);

} // namespace pref::linalg
