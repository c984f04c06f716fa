#pragma once

#include <cstddef>

// Data-parallel inner loops used by the statistical tests and the simulator.
// Every kernel has a scalar reference implementation and, on x86-64 with
// AVX2+FMA, a vectorized variant. The active set is picked once at startup;
// set CAUSAL_KERNELS=scalar in the environment to force the reference path.
namespace causal::kern {

struct Ops {
    // sum_k a[k]*b[k]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_k x[k]
    double (*sum)(const double* x, std::size_t n);
    // y[k] += alpha * x[k]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // out[k] = exp(-gamma * (x[k] - xa)^2), one row of an RBF Gram matrix
    void (*rbf_row)(const double* x, std::size_t n, double xa, double gamma,
                    double* out);
    // Centered-kernel block reductions for the HSIC gamma test.
    // K is a dense symmetric n-by-n kernel matrix, rowmean its row means and
    // totalmean its grand mean; entries of the centered matrix are
    // Kc[a,b] = K[a,b] - rowmean[a] - rowmean[b] + totalmean. Rows/columns
    // below m0 belong to the first sample block. Accumulates sum(Kc) and
    // sum(Kc^2) over the four (a<m0, b<m0) quadrants, indexed
    // 0:(lo,lo) 1:(lo,hi) 2:(hi,lo) 3:(hi,hi).
    void (*centered_quadrant_sums)(const double* K, const double* rowmean,
                                   double totalmean, std::size_t m0,
                                   std::size_t n, double out_sum[4],
                                   double out_sumsq[4]);
};

// Runtime-selected implementation.
const Ops& ops();
// Always the scalar reference (used by the equivalence tests).
const Ops& scalar_ops();
// True when the AVX2 variants are active.
bool using_avx2();

namespace scalar {
extern const Ops kOps;
}
#ifdef CAUSAL_HAVE_AVX2_TU
namespace avx2 {
extern const Ops kOps;
}
#endif

}  // namespace causal::kern
