#include "pref/kernels.hpp"

#include <atomic>

namespace pref::kernels {

namespace detail {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sqdist_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - y[i];
        acc += d * d;
    }
    return acc;
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

} // namespace detail

namespace {

struct Backend {
    const char* name;
    double (*dot)(const double*, const double*, std::size_t);
    double (*sqdist)(const double*, const double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
};

constexpr Backend kScalar{
    "scalar", detail::dot_scalar, detail::sqdist_scalar,
    detail::sum_scalar, detail::axpy_scalar};

Backend pick_backend() {
#if defined(PREF_HAVE_AVX2_TU)
    if (__builtin_cpu_supports("avx2")) {
        return Backend{"avx2", detail::dot_avx2, detail::sqdist_avx2,
                       detail::sum_avx2, detail::axpy_avx2};
    }
#elif defined(PREF_HAVE_NEON_TU)
    return Backend{"neon", detail::dot_neon, detail::sqdist_neon,
                   detail::sum_neon, detail::axpy_neon};
#endif
    return kScalar;
}

Backend g_active = pick_backend();

} // namespace

double dot(std::span<const double> x, std::span<const double> y) {
    return g_active.dot(x.data(), y.data(), x.size());
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
    return g_active.sqdist(x.data(), y.data(), x.size());
}

double sum(std::span<const double> x) {
    return g_active.sum(x.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    g_active.axpy(a, x.data(), y.data(), x.size());
}

const char* backend() { return g_active.name; }

const char* use_scalar(bool scalar_only) {
    const char* prev = g_active.name;
    g_active = scalar_only ? kScalar : pick_backend();
    return prev;
}

} // namespace pref::kernels
