#include <doctest.h>

#include <random>
#include <vector>

#include "pref/kernels.hpp"

using namespace pref;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> dist(0.0, 3.0);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

} // namespace

TEST_CASE("active backend is a known name") {
    const std::string name = kernels::backend();
    CHECK((name == "scalar" || name == "avx2" || name == "neon"));
}

TEST_CASE("simd and scalar kernels agree on random inputs") {
    std::mt19937_64 rng(1234);
    // Lengths around the vector width boundaries, plus empty and large.
    for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 33, 100, 257, 1024}) {
        const auto x = random_vec(rng, n);
        const auto y = random_vec(rng, n);

        kernels::use_scalar(true);
        const double dot_ref = kernels::dot(x, y);
        const double sqd_ref = kernels::squared_distance(x, y);
        const double sum_ref = kernels::sum(x);
        auto acc_ref = y;
        kernels::axpy(0.37, x, acc_ref);

        kernels::use_scalar(false);
        const double dot_simd = kernels::dot(x, y);
        const double sqd_simd = kernels::squared_distance(x, y);
        const double sum_simd = kernels::sum(x);
        auto acc_simd = y;
        kernels::axpy(0.37, x, acc_simd);

        // FMA and re-association change rounding, so compare with a relative
        // tolerance rather than bit-exactly.
        CHECK(dot_simd == doctest::Approx(dot_ref).epsilon(1e-12));
        CHECK(sqd_simd == doctest::Approx(sqd_ref).epsilon(1e-12));
        CHECK(sum_simd == doctest::Approx(sum_ref).epsilon(1e-12));
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(acc_simd[i] == doctest::Approx(acc_ref[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("kernel closed forms") {
    kernels::use_scalar(false);
    std::vector<double> ones(11, 1.0);
    std::vector<double> twos(11, 2.0);
    CHECK(kernels::dot(ones, twos) == doctest::Approx(22.0));
    CHECK(kernels::squared_distance(ones, twos) == doctest::Approx(11.0));
    CHECK(kernels::sum(twos) == doctest::Approx(22.0));
    std::vector<double> acc(11, 1.0);
    kernels::axpy(-0.5, twos, acc);
    for (double v : acc) CHECK(v == doctest::Approx(0.0));
}
