#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "causal/graph.hpp"
#include "causal/interventions.hpp"
#include "causal/stats.hpp"

namespace causal {

// Sparsest DAG consistent with pi: for i before j, the edge i -> j is present
// iff the decider calls (i, j) dependent given the other predecessors of j.
struct MinimalIMap {
    Permutation pi;
    Dag g;

    MinimalIMap() : g(1) {}
    MinimalIMap(Permutation p, Dag d) : pi(std::move(p)), g(std::move(d)) {}
};

MinimalIMap minimal_imap(const Permutation& pi, const CiDecider& ci);

struct PoolContext {
    bool enabled = false;
    const TargetFamily* fam = nullptr;
};

// Reverses the covered edge (i, j) and re-tests the parent edges of the two
// moved nodes given their ancestors, deleting those now independent. The
// permutation becomes the topological order of the reversed graph closest to
// the old one. Pooling, when enabled, concatenates the eligible blocks into
// each re-test.
MinimalIMap update_imap_after_reversal(const MinimalIMap& m, NodeId i, NodeId j,
                                       const CiDecider& ci,
                                       const PoolContext& pool = {});

// Covered edge additionally passing the marginal invariance requirement when
// {i} is among the targets.
bool is_i_covered(const Dag& g, NodeId i, NodeId j, const InvarianceDecider& inv,
                  const TargetFamily& fam, bool bonferroni = false);

struct ContradictoryOptions {
    int degree_cap = 8;  // largest neighbor set enumerated exhaustively
    // Divide the level by the block count inside multi-block quantifiers.
    bool bonferroni = false;
};

// General-targets contradictory-edge test; subset enumeration over the
// neighbor sets up to the degree cap. capped (optional) reports that a
// neighbor set exceeded the cap and its condition was skipped.
bool is_i_contradictory_general(const Dag& g, NodeId i, NodeId j,
                                const InvarianceDecider& inv,
                                const TargetFamily& fam,
                                const ContradictoryOptions& opt = {},
                                bool* capped = nullptr);

// Single-node-targets variant: marginal tests only. Throws unless {i} or {j}
// is a target.
bool is_i_contradictory_single(const Dag& g, NodeId i, NodeId j,
                               const InvarianceDecider& inv,
                               const TargetFamily& fam,
                               bool bonferroni = false);

int count_i_contradictory(const Dag& g, const InvarianceDecider& inv,
                          const TargetFamily& fam, bool single_node_mode,
                          const ContradictoryOptions& opt = {});

enum class MoveClass { i_contradictory, plain_i_covered };

struct TraceEntry {
    std::vector<NodeId> perm;       // permutation after this step
    std::vector<NodeId> host_perm;  // permutation the move was applied to
    int imap_edges = 0;
    std::optional<Edge> move;   // reversal applied; absent for roots
    MoveClass move_class = MoveClass::plain_i_covered;
    bool i_covered = true;      // verified at move time
    bool restart = false;       // marks the root of a DFS round
    int i_contradictory_count = -1;
};

struct SearchTrace {
    std::vector<TraceEntry> entries;
    bool truncated = false;
};

struct SearchConfig {
    const CiDecider* ci = nullptr;
    const InvarianceDecider* inv = nullptr;
    TargetFamily fam;
    std::optional<int> dfs_depth_limit;      // default p(p-1)/2
    std::optional<bool> single_node_mode;    // default: all targets singletons
    bool pool = false;
    std::uint64_t rng_seed = 0;
    int max_restarts = 1;  // independent starts; the first uses pi0
    ContradictoryOptions contradictory;

    bool effective_single_node_mode() const {
        return single_node_mode.value_or(fam.all_singletons());
    }
};

struct SearchResult {
    Permutation pi;
    Dag g;
    SearchTrace trace;
    int i_contradictory_count = 0;

    SearchResult() : g(1) {}
};

// Greedy sparsest-permutation search over covered-edge reversals restricted
// to i-covered edges, contradictory reversals first; restarts whenever a
// strictly sparser I-map appears, and at the local optimum returns the
// visited same-size I-map with the fewest contradictory edges.
SearchResult igsp_search(const SearchConfig& cfg, const Permutation& pi0);

}  // namespace causal
