#include "causal/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "causal/kernels.hpp"

namespace causal {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double gamma_cdf(double x, double shape, double scale) {
    if (x <= 0.0) return 0.0;
    return boost::math::gamma_p(shape, x / scale);
}

double f_cdf(double x, double d1, double d2) {
    if (x <= 0.0) return 0.0;
    return boost::math::ibeta(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2));
}

// ---------------------------------------------------------------------------

void Moments::add(const Moments& other) {
    if (other.sums.size() != sums.size()) {
        throw std::invalid_argument("moment dimensions differ");
    }
    n += other.n;
    for (std::size_t k = 0; k < sums.size(); ++k) sums[k] += other.sums[k];
    for (std::size_t k = 0; k < cross.size(); ++k) cross[k] += other.cross[k];
}

std::vector<double> Moments::covariance(std::span<const NodeId> cols) const {
    const std::size_t m = cols.size();
    const std::size_t dim = sums.size();
    std::vector<double> cov(m * m);
    const double inv_n = 1.0 / static_cast<double>(n);
    const double denom = 1.0 / static_cast<double>(n - 1);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            const std::size_t ca = static_cast<std::size_t>(cols[a]);
            const std::size_t cb = static_cast<std::size_t>(cols[b]);
            const double v =
                (cross[ca * dim + cb] - sums[ca] * sums[cb] * inv_n) * denom;
            cov[a * m + b] = v;
            cov[b * m + a] = v;
        }
    }
    return cov;
}

Moments compute_moments(const ColMatrix& x) {
    const auto& k = kern::ops();
    Moments m;
    m.n = x.rows;
    m.sums.resize(x.cols);
    m.cross.assign(x.cols * x.cols, 0.0);
    for (std::size_t c = 0; c < x.cols; ++c) m.sums[c] = k.sum(x.col(c), x.rows);
    for (std::size_t a = 0; a < x.cols; ++a) {
        for (std::size_t b = a; b < x.cols; ++b) {
            const double v = k.dot(x.col(a), x.col(b), x.rows);
            m.cross[a * x.cols + b] = v;
            m.cross[b * x.cols + a] = v;
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Small dense SPD helpers (row-major m x m).

namespace {

// In-place Cholesky, lower triangle; false when a pivot degenerates.
bool cholesky(std::vector<double>& a, std::size_t m) {
    double scale = 0.0;
    for (std::size_t d = 0; d < m; ++d) scale = std::max(scale, std::abs(a[d * m + d]));
    const double tiny = std::max(scale, 1.0) * 1e-12;
    for (std::size_t c = 0; c < m; ++c) {
        double diag = a[c * m + c];
        for (std::size_t k = 0; k < c; ++k) diag -= a[c * m + k] * a[c * m + k];
        if (diag <= tiny) return false;
        const double l = std::sqrt(diag);
        a[c * m + c] = l;
        for (std::size_t r = c + 1; r < m; ++r) {
            double v = a[r * m + c];
            for (std::size_t k = 0; k < c; ++k) v -= a[r * m + k] * a[c * m + k];
            a[r * m + c] = v / l;
        }
    }
    return true;
}

// Solves L L^T x = b with the factor from cholesky().
void chol_solve(const std::vector<double>& l, std::size_t m,
                std::vector<double>& b) {
    for (std::size_t r = 0; r < m; ++r) {
        double v = b[r];
        for (std::size_t k = 0; k < r; ++k) v -= l[r * m + k] * b[k];
        b[r] = v / l[r * m + r];
    }
    for (std::size_t r = m; r-- > 0;) {
        double v = b[r];
        for (std::size_t k = r + 1; k < m; ++k) v -= l[k * m + r] * b[k];
        b[r] = v / l[r * m + r];
    }
}

// Inverse from the Cholesky factor; only the needed entries of the top-left
// 2x2 block of the inverse are returned.
bool partial_corr_from_cov(std::vector<double> cov, std::size_t m, double* r) {
    if (!cholesky(cov, m)) return false;
    // Solve for columns e0 and e1 of the inverse.
    std::vector<double> c0(m, 0.0), c1(m, 0.0);
    c0[0] = 1.0;
    c1[1] = 1.0;
    chol_solve(cov, m, c0);
    chol_solve(cov, m, c1);
    const double om00 = c0[0], om11 = c1[1], om01 = c0[1];
    if (!(om00 > 0.0) || !(om11 > 0.0)) return false;
    *r = -om01 / std::sqrt(om00 * om11);
    return true;
}

}  // namespace

CiOutcome fisher_z_from_cov(std::vector<double> cov, std::size_t m,
                            std::size_t n, double alpha) {
    const std::size_t cond_size = m - 2;
    if (n <= cond_size + 3) {
        throw NotEnoughSamplesError("fisher_z: need n > |cond| + 3, have n=" +
                                    std::to_string(n));
    }
    CiOutcome out;
    double r = 0.0;
    if (!partial_corr_from_cov(std::move(cov), m, &r)) {
        out.independent = false;
        out.degenerate = true;
        out.stat = std::numeric_limits<double>::infinity();
        out.p_value = 0.0;
        return out;
    }
    r = std::clamp(r, -1.0 + 1e-15, 1.0 - 1e-15);
    const double z = std::atanh(r) *
                     std::sqrt(static_cast<double>(n - cond_size) - 3.0);
    out.stat = z;
    out.p_value = 2.0 * normal_sf(std::abs(z));
    out.independent = out.p_value >= alpha;
    return out;
}

CiOutcome fisher_z_ci(const ColMatrix& data, NodeId i, NodeId j,
                      std::span<const NodeId> cond, double alpha) {
    if (i == j) throw std::invalid_argument("columns must be distinct");
    for (NodeId c : cond) {
        if (c == i || c == j) {
            throw std::invalid_argument("conditioning set overlaps the pair");
        }
    }
    std::vector<NodeId> cols = {i, j};
    cols.insert(cols.end(), cond.begin(), cond.end());
    const Moments m = compute_moments(data);
    return fisher_z_from_cov(m.covariance(cols), cols.size(), data.rows, alpha);
}

// ---------------------------------------------------------------------------
// HSIC gamma test.

namespace {

double median_of(std::vector<double>& v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + n / 2;
    std::nth_element(v.begin(), mid, v.end());
    double hi = *mid;
    if (n % 2 == 1) return hi;
    auto lo = std::max_element(v.begin(), mid);
    return 0.5 * (*lo + hi);
}

}  // namespace

InvOutcome hsic_gamma_test(std::span<const double> x, std::size_t m0,
                           double alpha) {
    const std::size_t n = x.size();
    const std::size_t m1 = n - m0;
    if (m0 < 2 || m1 < 2 || n < 6) {
        throw NotEnoughSamplesError("hsic: need at least 2 rows per block and 6 total");
    }
    InvOutcome out;
    out.warned = m0 < 20 || m1 < 20;

    // Median heuristic over positive squared distances.
    thread_local std::vector<double> d2;
    d2.clear();
    d2.reserve(n * (n - 1) / 2);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const double d = x[a] - x[b];
            if (d != 0.0) d2.push_back(d * d);
        }
    }
    if (d2.empty()) {  // constant sample: degenerate, keep the search cautious
        out.invariant = false;
        out.degenerate = true;
        out.p_value = 0.0;
        return out;
    }
    const double gamma_x = 1.0 / median_of(d2);

    const auto& k = kern::ops();
    thread_local std::vector<double> K, rowmean;
    K.resize(n * n);
    rowmean.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
        k.rbf_row(x.data(), n, x[a], gamma_x, K.data() + a * n);
    }
    double ktot = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        rowmean[a] = k.sum(K.data() + a * n, n) / static_cast<double>(n);
        ktot += rowmean[a];
    }
    ktot /= static_cast<double>(n);

    double sum_kc[4], sumsq_kc[4];
    k.centered_quadrant_sums(K.data(), rowmean.data(), ktot, m0, n, sum_kc,
                             sumsq_kc);

    // Label kernel closed form: within-group distance 0, across-group 1, so
    // the median heuristic always gives exp(-1) across groups.
    const double nn = static_cast<double>(n);
    const double vd = std::exp(-1.0);
    const double lrm0 = (static_cast<double>(m0) + static_cast<double>(m1) * vd) / nn;
    const double lrm1 = (static_cast<double>(m0) * vd + static_cast<double>(m1)) / nn;
    const double ltot =
        (static_cast<double>(m0) * lrm0 + static_cast<double>(m1) * lrm1) / nn;
    const double lc[4] = {1.0 - 2.0 * lrm0 + ltot, vd - lrm0 - lrm1 + ltot,
                          vd - lrm0 - lrm1 + ltot, 1.0 - 2.0 * lrm1 + ltot};

    double stat = 0.0, sumsq_all = 0.0;
    for (int q = 0; q < 4; ++q) {
        stat += lc[q] * sum_kc[q];
        sumsq_all += lc[q] * lc[q] * sumsq_kc[q];
    }
    stat /= nn;

    double diag_sq = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        const double kc = 1.0 - 2.0 * rowmean[a] + ktot;
        const double l = a < m0 ? lc[0] : lc[3];
        diag_sq += kc * kc * l * l;
    }

    double var = (sumsq_all - diag_sq) / 36.0 / (nn * (nn - 1.0));
    var *= 72.0 * (nn - 4.0) * (nn - 5.0) /
           (nn * (nn - 1.0) * (nn - 2.0) * (nn - 3.0));
    const double mu_x = (nn * nn * ktot - nn) / (nn * (nn - 1.0));
    const double mu_y = (nn * nn * ltot - nn) / (nn * (nn - 1.0));
    const double mean = (1.0 + mu_x * mu_y - mu_x - mu_y) / nn;

    out.stat = stat;
    if (!(var > 0.0) || !(mean > 0.0)) {
        out.degenerate = true;
        out.p_value = 1.0;
        out.invariant = true;
        return out;
    }
    // stat is already the m-scaled statistic tr(Kc Lc)/m; the gamma
    // parameters below are for that scaling.
    const double shape = mean * mean / var;
    const double scale = var * nn / mean;
    out.p_value = 1.0 - gamma_cdf(stat, shape, scale);
    out.invariant = out.p_value >= alpha;
    return out;
}

namespace {

std::vector<std::size_t> strided_rows(std::size_t rows, std::size_t cap) {
    std::vector<std::size_t> idx;
    if (cap == 0 || rows <= cap) {
        idx.resize(rows);
        for (std::size_t r = 0; r < rows; ++r) idx[r] = r;
    } else {
        idx.resize(cap);
        for (std::size_t t = 0; t < cap; ++t) idx[t] = t * rows / cap;
    }
    return idx;
}

}  // namespace

InvOutcome hsic_index_invariance(const ColMatrix& block0,
                                 const ColMatrix& block1, NodeId i,
                                 std::span<const NodeId> cond, double alpha,
                                 std::size_t subsample_cap) {
    if (block0.rows == 0 || block1.rows == 0) {
        throw NotEnoughSamplesError("hsic: empty block");
    }
    const auto idx0 = strided_rows(block0.rows, subsample_cap);
    const auto idx1 = strided_rows(block1.rows, subsample_cap);
    const std::size_t m0 = idx0.size();
    const std::size_t n = m0 + idx1.size();

    std::vector<double> x(n);
    for (std::size_t t = 0; t < m0; ++t) x[t] = block0.at(idx0[t], i);
    for (std::size_t t = 0; t < idx1.size(); ++t) {
        x[m0 + t] = block1.at(idx1[t], i);
    }

    if (!cond.empty()) {
        // Pooled least squares of X_i on [1, X_cond]; the HSIC then runs on
        // the residuals.
        const std::size_t q = cond.size() + 1;
        std::vector<double> z(n * cond.size());
        for (std::size_t c = 0; c < cond.size(); ++c) {
            for (std::size_t t = 0; t < m0; ++t) {
                z[c * n + t] = block0.at(idx0[t], cond[c]);
            }
            for (std::size_t t = 0; t < idx1.size(); ++t) {
                z[c * n + m0 + t] = block1.at(idx1[t], cond[c]);
            }
        }
        const auto& k = kern::ops();
        std::vector<double> ztz(q * q, 0.0), zty(q, 0.0);
        std::vector<double> ones(n, 1.0);
        auto col = [&](std::size_t a) -> const double* {
            return a == 0 ? ones.data() : z.data() + (a - 1) * n;
        };
        for (std::size_t a = 0; a < q; ++a) {
            for (std::size_t b = a; b < q; ++b) {
                const double v = k.dot(col(a), col(b), n);
                ztz[a * q + b] = v;
                ztz[b * q + a] = v;
            }
            zty[a] = k.dot(col(a), x.data(), n);
        }
        if (!cholesky(ztz, q)) {
            InvOutcome out;
            out.invariant = false;
            out.degenerate = true;
            out.p_value = 0.0;
            return out;
        }
        chol_solve(ztz, q, zty);  // zty now holds the coefficients
        for (std::size_t t = 0; t < n; ++t) x[t] -= zty[0];
        for (std::size_t c = 0; c < cond.size(); ++c) {
            k.axpy(-zty[c + 1], z.data() + c * n, x.data(), n);
        }
    }
    return hsic_gamma_test(x, m0, alpha);
}

// ---------------------------------------------------------------------------
// Parametric invariance.

namespace {

struct OlsFit {
    bool ok = false;
    double rss = 0.0;
    std::size_t n = 0;
};

// Regression of column y on [1, cols...] from raw moments.
OlsFit ols_from_moments(const Moments& m, NodeId y,
                        std::span<const NodeId> cols) {
    const std::size_t q = cols.size() + 1;
    const std::size_t dim = m.sums.size();
    std::vector<double> ztz(q * q), zty(q);
    ztz[0] = static_cast<double>(m.n);
    zty[0] = m.sums[y];
    for (std::size_t a = 0; a < cols.size(); ++a) {
        const std::size_t ca = static_cast<std::size_t>(cols[a]);
        ztz[0 * q + (a + 1)] = m.sums[ca];
        ztz[(a + 1) * q + 0] = m.sums[ca];
        zty[a + 1] = m.cross[ca * dim + static_cast<std::size_t>(y)];
        for (std::size_t b = a; b < cols.size(); ++b) {
            const std::size_t cb = static_cast<std::size_t>(cols[b]);
            const double v = m.cross[ca * dim + cb];
            ztz[(a + 1) * q + (b + 1)] = v;
            ztz[(b + 1) * q + (a + 1)] = v;
        }
    }
    OlsFit fit;
    fit.n = m.n;
    std::vector<double> beta = zty;
    if (!cholesky(ztz, q)) return fit;
    chol_solve(ztz, q, beta);
    double bty = 0.0;
    for (std::size_t a = 0; a < q; ++a) bty += beta[a] * zty[a];
    const double yty = m.cross[static_cast<std::size_t>(y) * dim +
                               static_cast<std::size_t>(y)];
    fit.rss = std::max(0.0, yty - bty);
    fit.ok = true;
    return fit;
}

}  // namespace

InvOutcome gaussian_invariance_from_moments(const Moments& m0,
                                            const Moments& m1, NodeId i,
                                            std::span<const NodeId> cond,
                                            double alpha) {
    const std::size_t q = cond.size() + 1;
    if (m0.n < q + 2 || m1.n < q + 2) {
        throw NotEnoughSamplesError("gaussian invariance: blocks too small");
    }
    Moments pooled = m0;
    pooled.add(m1);
    const OlsFit f0 = ols_from_moments(m0, i, cond);
    const OlsFit f1 = ols_from_moments(m1, i, cond);
    const OlsFit fp = ols_from_moments(pooled, i, cond);
    InvOutcome out;
    if (!f0.ok || !f1.ok || !fp.ok) {
        out.invariant = false;
        out.degenerate = true;
        out.p_value = 0.0;
        return out;
    }
    const double n0 = static_cast<double>(m0.n), n1 = static_cast<double>(m1.n);
    const double qq = static_cast<double>(q);

    // Chow test for equal coefficients.
    const double dof2 = n0 + n1 - 2.0 * qq;
    const double rss_sum = f0.rss + f1.rss;
    double p_chow = 1.0;
    double f_chow = 0.0;
    if (rss_sum > 0.0) {
        f_chow = ((fp.rss - rss_sum) / qq) / (rss_sum / dof2);
        f_chow = std::max(0.0, f_chow);
        p_chow = 1.0 - f_cdf(f_chow, qq, dof2);
    } else if (fp.rss > rss_sum) {
        p_chow = 0.0;
    }

    // Two-sided variance ratio.
    const double v0 = f0.rss / (n0 - qq);
    const double v1 = f1.rss / (n1 - qq);
    double p_var = 1.0;
    if (v0 > 0.0 && v1 > 0.0) {
        const double ratio = v0 / v1;
        const double c = f_cdf(ratio, n0 - qq, n1 - qq);
        p_var = std::min(1.0, 2.0 * std::min(c, 1.0 - c));
    } else if (v0 != v1) {
        p_var = 0.0;
    }

    out.stat = f_chow;
    out.p_value = std::min(1.0, 2.0 * std::min(p_chow, p_var));
    out.invariant = out.p_value >= alpha;
    return out;
}

InvOutcome gaussian_invariance(const ColMatrix& block0, const ColMatrix& block1,
                               NodeId i, std::span<const NodeId> cond,
                               double alpha) {
    return gaussian_invariance_from_moments(compute_moments(block0),
                                            compute_moments(block1), i, cond,
                                            alpha);
}

// ---------------------------------------------------------------------------

void TestLog::append(const std::string& kind, int i, int j_or_block,
                     std::span<const NodeId> cond, double stat, double p,
                     const std::string& decision) {
    if (sink_ == nullptr) return;
    std::string cond_str;
    for (std::size_t k = 0; k < cond.size(); ++k) {
        if (k > 0) cond_str += ';';
        cond_str += std::to_string(cond[k] + 1);
    }
    char buf[64];
    std::string line = kind + "," + std::to_string(i + 1) + "," +
                       std::to_string(j_or_block + 1) + "," + cond_str + ",";
    std::snprintf(buf, sizeof(buf), "%.17g", stat);
    line += buf;
    line += ",";
    std::snprintf(buf, sizeof(buf), "%.17g", p);
    line += buf;
    line += "," + decision + "\n";
    std::lock_guard lock(mu_);
    (*sink_) << line;
}

// ---------------------------------------------------------------------------

CiOutcome DsepCiOracle::query(NodeId i, NodeId j,
                              std::span<const NodeId> cond) const {
    counters_.queries.fetch_add(1, std::memory_order_relaxed);
    counters_.evaluated.fetch_add(1, std::memory_order_relaxed);
    const Bitset c = vector_to_bitset(g_.node_count(), cond);
    CiOutcome out;
    out.independent = d_separated(g_, i, j, c);
    out.p_value = out.independent ? 1.0 : 0.0;
    return out;
}

IdagInvarianceOracle::IdagInvarianceOracle(const Dag& g, const TargetFamily& fam)
    : fam_(fam), idag_(build_idag(g, fam)) {
    all_zetas_ = Bitset(idag_.graph.node_count());
    for (int z : idag_.zeta_of_target) {
        if (z >= 0) all_zetas_.set(z);
    }
}

InvOutcome IdagInvarianceOracle::query(NodeId i, std::span<const NodeId> cond,
                                       int block) const {
    counters_.queries.fetch_add(1, std::memory_order_relaxed);
    counters_.evaluated.fetch_add(1, std::memory_order_relaxed);
    if (block < 0 || block >= fam_.target_count() ||
        idag_.zeta_of_target[block] < 0) {
        throw std::invalid_argument("block must index a non-empty target");
    }
    const int zeta = idag_.zeta_of_target[block];
    const int total = idag_.graph.node_count();
    Bitset a(total), b(total), c(total);
    a.set(i);
    b.set(zeta);
    c = all_zetas_;
    c.reset(zeta);
    for (NodeId v : cond) {
        if (v < 0 || v >= fam_.p) throw std::invalid_argument("cond node out of range");
        c.set(v);
    }
    InvOutcome out;
    out.invariant = d_separated(idag_.graph, a, b, c);
    out.p_value = out.invariant ? 1.0 : 0.0;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

int find_obs_block(const TargetFamily& fam) {
    for (int k = 0; k < fam.target_count(); ++k) {
        if (fam.targets[k].empty()) return k;
    }
    throw std::invalid_argument("dataset has no observational block");
}

std::vector<NodeId> canonical_cond(std::span<const NodeId> cond) {
    std::vector<NodeId> s(cond.begin(), cond.end());
    std::sort(s.begin(), s.end());
    return s;
}

}  // namespace

FisherZCiDecider::FisherZCiDecider(const MultiDataset& data, double alpha,
                                   TestLog* log)
    : data_(&data), alpha_(alpha), log_(log), obs_block_(find_obs_block(data.fam)) {
    block_moments_.reserve(data.blocks.size());
    for (const auto& b : data.blocks) block_moments_.push_back(compute_moments(b));
}

const Moments& FisherZCiDecider::pooled(std::span<const int> extra) const {
    if (extra.empty()) return block_moments_[obs_block_];
    std::vector<int> key(extra.begin(), extra.end());
    std::sort(key.begin(), key.end());
    std::uint64_t h = 1469598103934665603ull;
    for (int b : key) h = (h ^ static_cast<std::uint64_t>(b + 1)) * 1099511628211ull;
    {
        std::shared_lock lock(pooled_mu_);
        const auto it = pooled_cache_.find(h);
        if (it != pooled_cache_.end()) return it->second;
    }
    Moments m = block_moments_[obs_block_];
    for (int b : key) {
        if (b < 0 || b >= static_cast<int>(block_moments_.size())) {
            throw std::invalid_argument("pooled block index out of range");
        }
        if (b != obs_block_) m.add(block_moments_[b]);
    }
    std::unique_lock lock(pooled_mu_);
    return pooled_cache_.emplace(h, std::move(m)).first->second;
}

CiOutcome FisherZCiDecider::run(NodeId i, NodeId j, std::span<const NodeId> cond,
                                std::span<const int> extra) const {
    counters_.queries.fetch_add(1, std::memory_order_relaxed);
    const NodeId a = std::min(i, j), b = std::max(i, j);
    std::vector<NodeId> key_cond = canonical_cond(cond);
    std::vector<int> extra_sorted(extra.begin(), extra.end());
    std::sort(extra_sorted.begin(), extra_sorted.end());
    // Collision-free key: cond entries, then a separator, then block ids.
    std::vector<NodeId> key_vec = key_cond;
    if (!extra_sorted.empty()) {
        key_vec.push_back(-1);
        for (int e : extra_sorted) key_vec.push_back(e);
    }
    const TestCache<CiOutcome>::Key key{0, a, b, key_vec, 0};
    CiOutcome out;
    if (cache_.lookup(key, &out)) return out;

    counters_.evaluated.fetch_add(1, std::memory_order_relaxed);
    const Moments& m = pooled(extra_sorted);
    std::vector<NodeId> cols = {a, b};
    cols.insert(cols.end(), key_cond.begin(), key_cond.end());
    out = fisher_z_from_cov(m.covariance(cols), cols.size(), m.n, alpha_);
    if (log_ != nullptr) {
        log_->append(extra_sorted.empty() ? "fisher_z" : "fisher_z_pooled", a, b,
                     key_cond, out.stat, out.p_value,
                     out.independent ? "independent" : "dependent");
    }
    cache_.insert(key, out);
    return out;
}

CiOutcome FisherZCiDecider::query(NodeId i, NodeId j,
                                  std::span<const NodeId> cond) const {
    return run(i, j, cond, {});
}

CiOutcome FisherZCiDecider::query_pooled(NodeId i, NodeId j,
                                         std::span<const NodeId> cond,
                                         std::span<const int> extra) const {
    return run(i, j, cond, extra);
}

DataInvarianceDecider::DataInvarianceDecider(const MultiDataset& data,
                                             InvarianceBacking backing,
                                             double alpha,
                                             std::size_t hsic_subsample_cap,
                                             TestLog* log)
    : data_(&data),
      backing_(backing),
      alpha_(alpha),
      cap_(hsic_subsample_cap),
      log_(log),
      obs_block_(find_obs_block(data.fam)) {
    if (backing_ == InvarianceBacking::gaussian) {
        block_moments_.reserve(data.blocks.size());
        for (const auto& b : data.blocks) {
            block_moments_.push_back(compute_moments(b));
        }
    }
}

InvOutcome DataInvarianceDecider::query(NodeId i, std::span<const NodeId> cond,
                                        int block) const {
    counters_.queries.fetch_add(1, std::memory_order_relaxed);
    if (block < 0 || block >= data_->block_count() ||
        data_->fam.targets[block].empty()) {
        throw std::invalid_argument("block must index a non-empty target");
    }
    const std::vector<NodeId> key_cond = canonical_cond(cond);
    const TestCache<InvOutcome>::Key key{1, i, block, key_cond, 0};
    InvOutcome out;
    if (cache_.lookup(key, &out)) return out;

    counters_.evaluated.fetch_add(1, std::memory_order_relaxed);
    if (backing_ == InvarianceBacking::hsic) {
        out = hsic_index_invariance(data_->blocks[obs_block_],
                                    data_->blocks[block], i, key_cond, alpha_,
                                    cap_);
    } else {
        out = gaussian_invariance_from_moments(block_moments_[obs_block_],
                                               block_moments_[block], i,
                                               key_cond, alpha_);
    }
    if (log_ != nullptr) {
        log_->append(backing_ == InvarianceBacking::hsic ? "hsic_inv"
                                                         : "gaussian_inv",
                     i, block, key_cond, out.stat, out.p_value,
                     out.invariant ? "invariant" : "varying");
    }
    cache_.insert(key, out);
    return out;
}

// ---------------------------------------------------------------------------

std::vector<int> pool_eligible_blocks(const Dag& g_pi, const Permutation& pi,
                                      const TargetFamily& fam, NodeId i,
                                      NodeId k) {
    if (!g_pi.parents(i).test(k)) {
        throw std::invalid_argument("k must be a parent of i in g_pi");
    }
    const auto pos = pi.positions();
    const Bitset an_i = g_pi.ancestors(i);
    const Bitset de_i = g_pi.descendants(i);
    int obs = -1;
    for (int t = 0; t < fam.target_count(); ++t) {
        if (fam.targets[t].empty()) {
            obs = t;
            break;
        }
    }
    std::vector<int> out;
    for (int t = 0; t < fam.target_count(); ++t) {
        if (t == obs) continue;
        bool ok = true;
        for (NodeId j : fam.targets[t]) {
            const bool cond1 = j == i || (!an_i.test(j) && !de_i.test(j));
            const bool cond2 = (pos[k] > pos[j] && !g_pi.has_edge(k, j)) ||
                               (pos[j] > pos[k] && !g_pi.is_ancestor(j, k));
            if (!cond1 || !cond2) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(t);
    }
    return out;
}

}  // namespace causal
