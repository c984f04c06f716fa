#include "causal/kernels.hpp"

#include <cmath>

namespace causal::kern::scalar {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
    return acc;
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += x[k];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) y[k] += alpha * x[k];
}

void rbf_row(const double* x, std::size_t n, double xa, double gamma,
             double* out) {
    for (std::size_t k = 0; k < n; ++k) {
        const double d = x[k] - xa;
        out[k] = std::exp(-gamma * d * d);
    }
}

void centered_quadrant_sums(const double* K, const double* rowmean,
                            double totalmean, std::size_t m0, std::size_t n,
                            double out_sum[4], double out_sumsq[4]) {
    for (int q = 0; q < 4; ++q) {
        out_sum[q] = 0.0;
        out_sumsq[q] = 0.0;
    }
    for (std::size_t a = 0; a < n; ++a) {
        const double* row = K + a * n;
        const double ra = rowmean[a] - totalmean;
        const int base = a < m0 ? 0 : 2;
        double s_lo = 0.0, s2_lo = 0.0, s_hi = 0.0, s2_hi = 0.0;
        for (std::size_t b = 0; b < m0; ++b) {
            const double kc = row[b] - ra - rowmean[b];
            s_lo += kc;
            s2_lo += kc * kc;
        }
        for (std::size_t b = m0; b < n; ++b) {
            const double kc = row[b] - ra - rowmean[b];
            s_hi += kc;
            s2_hi += kc * kc;
        }
        out_sum[base + 0] += s_lo;
        out_sumsq[base + 0] += s2_lo;
        out_sum[base + 1] += s_hi;
        out_sumsq[base + 1] += s2_hi;
    }
}

}  // namespace

const Ops kOps = {dot, sum, axpy, rbf_row, centered_quadrant_sums};

}  // namespace causal::kern::scalar
