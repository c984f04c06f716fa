#include <immintrin.h>

#include <cmath>

#include "causal/kernels.hpp"

namespace causal::kern::avx2 {

namespace {

// Cephes-style exp for four doubles: Cody-Waite range reduction followed by
// a rational approximation, then scaling by 2^n through the exponent bits.
// Inputs below -708 return exactly 0 (the scaled result would go subnormal).
inline __m256d exp_pd(__m256d x) {
    const __m256d max_x = _mm256_set1_pd(709.0);
    const __m256d min_x = _mm256_set1_pd(-708.0);
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);

    const __m256d underflow = _mm256_cmp_pd(x, min_x, _CMP_LT_OQ);
    __m256d xc = _mm256_min_pd(_mm256_max_pd(x, min_x), max_x);

    __m256d n = _mm256_floor_pd(
        _mm256_fmadd_pd(log2e, xc, _mm256_set1_pd(0.5)));
    xc = _mm256_fnmadd_pd(n, c1, xc);
    xc = _mm256_fnmadd_pd(n, c2, xc);

    const __m256d xx = _mm256_mul_pd(xc, xc);
    __m256d p = _mm256_fmadd_pd(p0, xx, p1);
    p = _mm256_fmadd_pd(p, xx, p2);
    p = _mm256_mul_pd(p, xc);
    __m256d q = _mm256_fmadd_pd(q0, xx, q1);
    q = _mm256_fmadd_pd(q, xx, q2);
    q = _mm256_fmadd_pd(q, xx, q3);
    __m256d r = _mm256_div_pd(p, _mm256_sub_pd(q, p));
    r = _mm256_fmadd_pd(r, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

    const __m128i n32 = _mm256_cvttpd_epi32(n);
    const __m256i n64 = _mm256_cvtepi32_epi64(n32);
    r = _mm256_castsi256_pd(
        _mm256_add_epi64(_mm256_castpd_si256(r), _mm256_slli_epi64(n64, 52)));
    return _mm256_andnot_pd(underflow, r);
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 16 <= n; k += 16) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k),
                               _mm256_loadu_pd(b + k), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4),
                               _mm256_loadu_pd(b + k + 4), acc1);
        acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 8),
                               _mm256_loadu_pd(b + k + 8), acc2);
        acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 12),
                               _mm256_loadu_pd(b + k + 12), acc3);
    }
    for (; k + 4 <= n; k += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k),
                               _mm256_loadu_pd(b + k), acc0);
    }
    double acc = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1),
                                    _mm256_add_pd(acc2, acc3)));
    for (; k < n; ++k) acc += a[k] * b[k];
    return acc;
}

double sum(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 8 <= n; k += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + k));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + k + 4));
    }
    for (; k + 4 <= n; k += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + k));
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; k < n; ++k) acc += x[k];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        _mm256_storeu_pd(
            y + k, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + k),
                                   _mm256_loadu_pd(y + k)));
    }
    for (; k < n; ++k) y[k] += alpha * x[k];
}

void rbf_row(const double* x, std::size_t n, double xa, double gamma,
             double* out) {
    const __m256d va = _mm256_set1_pd(xa);
    const __m256d vg = _mm256_set1_pd(-gamma);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + k), va);
        _mm256_storeu_pd(out + k,
                         exp_pd(_mm256_mul_pd(vg, _mm256_mul_pd(d, d))));
    }
    for (; k < n; ++k) {
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
        const __m256d vra = _mm256_set1_pd(ra);
        const int base = a < m0 ? 0 : 2;
        std::size_t bounds[3] = {0, m0, n};
        for (int half = 0; half < 2; ++half) {
            __m256d vs = _mm256_setzero_pd();
            __m256d vs2 = _mm256_setzero_pd();
            double s = 0.0, s2 = 0.0;
            std::size_t b = bounds[half];
            const std::size_t end = bounds[half + 1];
            for (; b + 4 <= end; b += 4) {
                const __m256d kc = _mm256_sub_pd(
                    _mm256_sub_pd(_mm256_loadu_pd(row + b), vra),
                    _mm256_loadu_pd(rowmean + b));
                vs = _mm256_add_pd(vs, kc);
                vs2 = _mm256_fmadd_pd(kc, kc, vs2);
            }
            for (; b < end; ++b) {
                const double kc = row[b] - ra - rowmean[b];
                s += kc;
                s2 += kc * kc;
            }
            out_sum[base + half] += s + hsum(vs);
            out_sumsq[base + half] += s2 + hsum(vs2);
        }
    }
}

}  // namespace

const Ops kOps = {dot, sum, axpy, rbf_row, centered_quadrant_sums};

}  // namespace causal::kern::avx2
