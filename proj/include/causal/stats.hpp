#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "causal/graph.hpp"
#include "causal/interventions.hpp"
#include "causal/matrix.hpp"
#include "causal/sem.hpp"

namespace causal {

struct NotEnoughSamplesError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CiOutcome {
    bool independent = false;
    double stat = 0.0;
    double p_value = 0.0;
    bool degenerate = false;  // singular conditioning / zero variance
    bool warned = false;
};

struct InvOutcome {
    bool invariant = false;
    double stat = 0.0;
    double p_value = 0.0;
    bool degenerate = false;
    bool warned = false;
};

// ---------------------------------------------------------------------------
// Raw moments; every Gaussian test below runs off these, so per-query cost is
// independent of the sample count once a block has been summarized.

struct Moments {
    std::size_t n = 0;
    std::vector<double> sums;   // p
    std::vector<double> cross;  // p*p, row-major, X^T X

    int p() const { return static_cast<int>(sums.size()); }
    void add(const Moments& other);
    // Sample covariance of the given columns ((m x m), denominator n-1).
    std::vector<double> covariance(std::span<const NodeId> cols) const;
};

Moments compute_moments(const ColMatrix& x);

// ---------------------------------------------------------------------------
// Test primitives.

// Partial-correlation CI test: z = atanh(r) * sqrt(n - |cond| - 3) against a
// standard normal, two-sided. Throws NotEnoughSamplesError when
// n <= |cond| + 3; singular conditioning yields a degenerate "dependent".
CiOutcome fisher_z_ci(const ColMatrix& data, NodeId i, NodeId j,
                      std::span<const NodeId> cond, double alpha);
// Same test from a covariance submatrix ordered (i, j, cond...).
CiOutcome fisher_z_from_cov(std::vector<double> cov, std::size_t m,
                            std::size_t n, double alpha);

// HSIC gamma test of X_i (optionally residualized on X_cond by pooled least
// squares) against the block index. subsample_cap > 0 caps each block at that
// many rows, taken at evenly spaced positions.
InvOutcome hsic_index_invariance(const ColMatrix& block0,
                                 const ColMatrix& block1, NodeId i,
                                 std::span<const NodeId> cond, double alpha,
                                 std::size_t subsample_cap = 0);
// The same statistic on a prepared scalar sample: x holds both groups, the
// first m0 entries belong to group 0.
InvOutcome hsic_gamma_test(std::span<const double> x, std::size_t m0,
                           double alpha);

// Parametric invariance: a Chow test on the regression of X_i on X_cond plus
// a two-sided variance-ratio test, Bonferroni-combined.
InvOutcome gaussian_invariance(const ColMatrix& block0, const ColMatrix& block1,
                               NodeId i, std::span<const NodeId> cond,
                               double alpha);
InvOutcome gaussian_invariance_from_moments(const Moments& m0,
                                            const Moments& m1, NodeId i,
                                            std::span<const NodeId> cond,
                                            double alpha);

// ---------------------------------------------------------------------------
// Decision interfaces consumed by the search.

class TestLog {
  public:
    explicit TestLog(std::ostream* sink) : sink_(sink) {}
    void append(const std::string& kind, int i, int j_or_block,
                std::span<const NodeId> cond, double stat, double p,
                const std::string& decision);

  private:
    std::ostream* sink_;
    std::mutex mu_;
};

// Memo table; many concurrent readers, exclusive insertion. Keys are
// canonicalized by the deciders before lookup.
template <typename Value>
class TestCache {
  public:
    using Key = std::tuple<int, int, int, std::vector<NodeId>, std::uint64_t>;

    bool lookup(const Key& k, Value* out) const {
        std::shared_lock lock(mu_);
        const auto it = map_.find(k);
        if (it == map_.end()) return false;
        *out = it->second;
        return true;
    }
    void insert(const Key& k, const Value& v) {
        std::unique_lock lock(mu_);
        map_.emplace(k, v);
    }

  private:
    mutable std::shared_mutex mu_;
    std::map<Key, Value> map_;
};

struct QueryCounters {
    std::atomic<long> queries{0};   // including cache hits
    std::atomic<long> evaluated{0}; // statistics actually computed
};

class CiDecider {
  public:
    virtual ~CiDecider() = default;
    // Symmetric in (i, j).
    virtual CiOutcome query(NodeId i, NodeId j,
                            std::span<const NodeId> cond) const = 0;
    // Data-backed deciders append the given non-observational blocks to the
    // observational sample; oracles ignore them.
    virtual CiOutcome query_pooled(NodeId i, NodeId j,
                                   std::span<const NodeId> cond,
                                   std::span<const int> extra_blocks) const {
        (void)extra_blocks;
        return query(i, j, cond);
    }
    virtual double alpha() const = 0;
    const QueryCounters& counters() const { return counters_; }

  protected:
    mutable QueryCounters counters_;
};

class InvarianceDecider {
  public:
    virtual ~InvarianceDecider() = default;
    // block indexes a non-empty target position of the family.
    virtual InvOutcome query(NodeId i, std::span<const NodeId> cond,
                             int block) const = 0;
    virtual double alpha() const = 0;
    const QueryCounters& counters() const { return counters_; }

  protected:
    mutable QueryCounters counters_;
};

// d-separation oracle: independent iff cond d-separates {i} and {j}.
class DsepCiOracle final : public CiDecider {
  public:
    explicit DsepCiOracle(Dag g) : g_(std::move(g)) {}
    CiOutcome query(NodeId i, NodeId j,
                    std::span<const NodeId> cond) const override;
    double alpha() const override { return 0.0; }

  private:
    Dag g_;
};

// Invariance oracle on the intervention graph: invariant iff cond plus the
// other zeta vertices d-separate {i} from the block's zeta vertex.
class IdagInvarianceOracle final : public InvarianceDecider {
  public:
    IdagInvarianceOracle(const Dag& g, const TargetFamily& fam);
    InvOutcome query(NodeId i, std::span<const NodeId> cond,
                     int block) const override;
    double alpha() const override { return 0.0; }

  private:
    TargetFamily fam_;
    IDag idag_;
    Bitset all_zetas_;
};

// Fisher-z decider over a dataset; pooled covariances are cached per block
// set, so repeated queries cost O(|cond|^3).
class FisherZCiDecider final : public CiDecider {
  public:
    FisherZCiDecider(const MultiDataset& data, double alpha,
                     TestLog* log = nullptr);
    CiOutcome query(NodeId i, NodeId j,
                    std::span<const NodeId> cond) const override;
    CiOutcome query_pooled(NodeId i, NodeId j, std::span<const NodeId> cond,
                           std::span<const int> extra_blocks) const override;
    double alpha() const override { return alpha_; }

  private:
    CiOutcome run(NodeId i, NodeId j, std::span<const NodeId> cond,
                  std::span<const int> extra_blocks) const;
    const Moments& pooled(std::span<const int> extra_blocks) const;

    const MultiDataset* data_;
    double alpha_;
    TestLog* log_;
    int obs_block_ = 0;
    std::vector<Moments> block_moments_;
    mutable std::map<std::uint64_t, Moments> pooled_cache_;
    mutable std::shared_mutex pooled_mu_;
    mutable TestCache<CiOutcome> cache_;
};

enum class InvarianceBacking { hsic, gaussian };

// Data-backed invariance decider comparing a target block against the
// observational block.
class DataInvarianceDecider final : public InvarianceDecider {
  public:
    DataInvarianceDecider(const MultiDataset& data, InvarianceBacking backing,
                          double alpha, std::size_t hsic_subsample_cap = 1000,
                          TestLog* log = nullptr);
    InvOutcome query(NodeId i, std::span<const NodeId> cond,
                     int block) const override;
    double alpha() const override { return alpha_; }

  private:
    const MultiDataset* data_;
    InvarianceBacking backing_;
    double alpha_;
    std::size_t cap_;
    TestLog* log_;
    int obs_block_ = 0;
    std::vector<Moments> block_moments_;
    mutable TestCache<InvOutcome> cache_;
};

// ---------------------------------------------------------------------------
// Data pooling rule: target positions whose blocks may be concatenated with
// the observational data when testing X_i against parent k given the other
// ancestors of i in g_pi. For every node j of an eligible target:
//   (1) j == i, or j is neither an ancestor nor a descendant of i;
//   (2) pi(k) > pi(j) and k is not a parent of j, or
//       pi(j) > pi(k) and j is not an ancestor of k.
// The observational position itself is never returned.
std::vector<int> pool_eligible_blocks(const Dag& g_pi, const Permutation& pi,
                                      const TargetFamily& fam, NodeId i,
                                      NodeId k);

// Shared distribution helpers.
double normal_sf(double z);                      // P(Z > z)
double gamma_cdf(double x, double shape, double scale);
double f_cdf(double x, double d1, double d2);

}  // namespace causal
