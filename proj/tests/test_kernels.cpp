#include <doctest.h>

#include <cmath>
#include <vector>

#include "causal/kernels.hpp"
#include "causal/rng.hpp"

using namespace causal;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed,
                               double lo = -3.0, double hi = 3.0) {
    Philox rng(seed, 0);
    std::vector<double> v(n);
    for (auto& x : v) x = lo + (hi - lo) * rng.next_double();
    return v;
}

}  // namespace

TEST_CASE("active kernel set matches the scalar reference") {
    const auto& active = kern::ops();
    const auto& ref = kern::scalar_ops();

    for (const std::size_t n : {std::size_t{1}, std::size_t{7}, std::size_t{64},
                                std::size_t{1001}}) {
        const auto a = random_vec(n, 11 + n);
        const auto b = random_vec(n, 23 + n);

        CHECK(active.dot(a.data(), b.data(), n) ==
              doctest::Approx(ref.dot(a.data(), b.data(), n)).epsilon(1e-13));
        CHECK(active.sum(a.data(), n) ==
              doctest::Approx(ref.sum(a.data(), n)).epsilon(1e-13));

        auto y1 = b, y2 = b;
        active.axpy(0.37, a.data(), y1.data(), n);
        ref.axpy(0.37, a.data(), y2.data(), n);
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(y1[k] == doctest::Approx(y2[k]).epsilon(1e-14));
        }

        std::vector<double> r1(n), r2(n);
        active.rbf_row(a.data(), n, a[0], 0.8, r1.data());
        ref.rbf_row(a.data(), n, a[0], 0.8, r2.data());
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(std::abs(r1[k] - r2[k]) < 1e-14);
        }
    }
}

TEST_CASE("vectorized rbf row agrees with std::exp across magnitudes") {
    const auto& active = kern::ops();
    std::vector<double> x = {0.0, 1e-8, 0.5, 3.0, 10.0, 40.0, 100.0, -7.5};
    std::vector<double> out(x.size());
    for (double gamma : {1e-3, 0.5, 2.0, 50.0}) {
        active.rbf_row(x.data(), x.size(), 0.25, gamma, out.data());
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double d = x[k] - 0.25;
            const double want = std::exp(-gamma * d * d);
            CHECK(std::abs(out[k] - want) <= 4e-16 * std::max(1.0, want));
        }
    }
    // deep underflow must flush to zero, not garbage
    std::vector<double> far = {1e6};
    active.rbf_row(far.data(), 1, 0.0, 1.0, out.data());
    CHECK(out[0] == 0.0);
}

TEST_CASE("centered quadrant sums match the scalar reference") {
    const auto& active = kern::ops();
    const auto& ref = kern::scalar_ops();
    const std::size_t n = 37, m0 = 13;
    const auto x = random_vec(n, 99);

    std::vector<double> K(n * n), rowmean(n);
    for (std::size_t a = 0; a < n; ++a) {
        ref.rbf_row(x.data(), n, x[a], 1.3, K.data() + a * n);
    }
    double tot = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        rowmean[a] = ref.sum(K.data() + a * n, n) / n;
        tot += rowmean[a];
    }
    tot /= n;

    double s1[4], q1[4], s2[4], q2[4];
    active.centered_quadrant_sums(K.data(), rowmean.data(), tot, m0, n, s1, q1);
    ref.centered_quadrant_sums(K.data(), rowmean.data(), tot, m0, n, s2, q2);
    for (int q = 0; q < 4; ++q) {
        CHECK(s1[q] == doctest::Approx(s2[q]).epsilon(1e-12));
        CHECK(q1[q] == doctest::Approx(q2[q]).epsilon(1e-12));
    }

    // Cross-check one quadrant against a direct loop.
    double want = 0.0;
    for (std::size_t a = 0; a < m0; ++a) {
        for (std::size_t b = m0; b < n; ++b) {
            want += K[a * n + b] - rowmean[a] - rowmean[b] + tot;
        }
    }
    CHECK(s2[1] == doctest::Approx(want).epsilon(1e-12));
}
