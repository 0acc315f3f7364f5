#pragma once

#include <cstddef>
#include <span>

// Data-parallel inner loops used by the clustering and statistics code.
// Scalar reference versions always exist; on x86-64 an AVX2 variant (and on
// aarch64 a NEON variant) is selected once at startup if the CPU supports it.

namespace pref::kernels {

// y := sum_i x[i] * y[i]
double dot(std::span<const double> x, std::span<const double> y);

// sum_i (x[i] - y[i])^2
double squared_distance(std::span<const double> x, std::span<const double> y);

// sum_i x[i]
double sum(std::span<const double> x);

// y[i] += a * x[i]
void axpy(double a, std::span<const double> x, std::span<double> y);

// Name of the active backend: "scalar", "avx2" or "neon".
const char* backend();

// Force the scalar backend (used by equivalence tests). Returns previous name.
const char* use_scalar(bool scalar_only);

namespace detail {
double dot_scalar(const double* x, const double* y, std::size_t n);
double sqdist_scalar(const double* x, const double* y, std::size_t n);
double sum_scalar(const double* x, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);

double dot_avx2(const double* x, const double* y, std::size_t n);
double sqdist_avx2(const double* x, const double* y, std::size_t n);
double sum_avx2(const double* x, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);

double dot_neon(const double* x, const double* y, std::size_t n);
double sqdist_neon(const double* x, const double* y, std::size_t n);
double sum_neon(const double* x, std::size_t n);
void axpy_neon(double a, const double* x, double* y, std::size_t n);
} // namespace detail

} // namespace pref::kernels
