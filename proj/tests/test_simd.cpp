#include "aonkit/linalg.hpp"
#include "aonkit/simd.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>
#include <vector>

using namespace aonkit;
namespace sd = aonkit::simd;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

std::vector<sd::Backend> available() {
    std::vector<sd::Backend> out;
    for (auto b : {sd::Backend::scalar, sd::Backend::avx2, sd::Backend::neon})
        if (sd::backend_available(b)) out.push_back(b);
    return out;
}

} // namespace

TEST_CASE("scalar backend is always available") {
    CHECK(sd::backend_available(sd::Backend::scalar));
    CHECK(sd::backend_available(sd::best_backend()));
    CHECK(sd::backend_name(sd::Backend::scalar) == "scalar");
}

TEST_CASE("unavailable backend is rejected") {
    for (auto b : {sd::Backend::avx2, sd::Backend::neon})
        if (!sd::backend_available(b)) CHECK_THROWS(sd::set_backend(b));
}

TEST_CASE("scoped backend restores the previous one") {
    const auto before = sd::active_backend();
    {
        sd::ScopedBackend s(sd::Backend::scalar);
        CHECK(sd::active_backend() == sd::Backend::scalar);
    }
    CHECK(sd::active_backend() == before);
}

TEST_CASE("dot and axpy agree with the scalar reference on every length") {
    std::mt19937_64 rng(3);
    for (auto b : available()) {
        CAPTURE(sd::backend_name(b));
        for (std::size_t n = 0; n <= 67; ++n) {
            const auto x = random_vec(n, rng), y = random_vec(n, rng);
            const double ref = sd::scalar::dot(x.data(), y.data(), n);
            double mag = 0.0;
            for (std::size_t i = 0; i < n; ++i) mag += std::abs(x[i] * y[i]);
            sd::ScopedBackend s(b);
            CHECK(std::abs(sd::dot(x, y) - ref) <= 1e-13 * (mag + 1.0));

            auto ya = y, yr = y;
            sd::axpy(0.37, x, ya);
            sd::scalar::axpy(0.37, x.data(), yr.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(ya[i] - yr[i]) <= 1e-15 * (std::abs(yr[i]) + 1.0));
        }
    }
}

TEST_CASE("axpy leaves elements past n untouched") {
    for (auto b : available()) {
        sd::ScopedBackend s(b);
        std::vector<double> x(11, 1.0), y(13, 5.0);
        sd::kernels().axpy(2.0, x.data(), y.data(), 11);
        CHECK(y[10] == 7.0);
        CHECK(y[11] == 5.0);
        CHECK(y[12] == 5.0);
    }
}

TEST_CASE("matmul matches the oracle on every backend and is deterministic per backend") {
    Rng rng(9);
    const Matrix a = random_gaussian(13, 17, rng), b = random_gaussian(17, 9, rng);
    const Matrix ref = oracle::matmul(a, b);
    for (auto be : available()) {
        sd::ScopedBackend s(be);
        const Matrix c1 = matmul(a, b), c2 = matmul(a, b);
        CHECK(c1 == c2);
        CHECK(oracle::max_abs(c1, ref) < 1e-12);
        CHECK(oracle::max_abs(matmul_nt(a, transpose(b)), ref) < 1e-12);
        CHECK(oracle::max_abs(matmul_tn(transpose(a), b), ref) < 1e-12);
    }
}
