#pragma once

#include <optional>
#include <vector>

#include "causal/graph.hpp"

namespace causal {

// Ordered multiset of intervention targets over nodes 0..p-1. Order is
// significant: zeta vertices are matched by position, so duplicate targets
// stay distinct.
struct TargetFamily {
    int p = 0;
    std::vector<std::vector<NodeId>> targets;  // each sorted and duplicate-free

    static TargetFamily of(int p, std::vector<std::vector<NodeId>> targets);

    int target_count() const { return static_cast<int>(targets.size()); }
    bool has_empty() const;
    // True iff every node is missing from at least one target.
    bool is_conservative() const;
    // True iff every non-empty target has exactly one node.
    bool all_singletons() const;

    // Positions whose target is exactly {i}.
    std::vector<int> singleton_positions(NodeId i) const;
    // Positions whose target contains `with` and not `without`.
    std::vector<int> positions_with_without(NodeId with, NodeId without) const;

    // Same family with the first empty target moved to position 0 (stable
    // otherwise). old_position[k] gives the original index of entry k.
    TargetFamily normalized(std::vector<int>* old_position = nullptr) const;

    bool operator==(const TargetFamily&) const = default;
};

// The intervention graph: the base DAG augmented with one zeta vertex per
// non-empty target and an edge zeta -> i for every targeted node i.
struct IDag {
    Dag graph;                        // base_p regular nodes first
    int base_p = 0;
    std::vector<int> zeta_of_target;  // per family position; -1 for the empty target

    IDag() : graph(1) {}
};

IDag build_idag(const Dag& g, const TargetFamily& fam);

// Skeleton + v-structures of a graph; equality of signatures is the
// equivalence criterion everywhere below.
struct EquivSignature {
    std::vector<SkeletonEdge> skel;
    std::vector<VStructure> vstructs;

    bool operator==(const EquivSignature&) const = default;
    bool operator<(const EquivSignature& o) const {
        return std::tie(skel, vstructs) < std::tie(o.skel, o.vstructs);
    }
};

EquivSignature signature_of(const Dag& g);

// Signature of the intervention graph (requires an empty target in fam).
EquivSignature imec_signature(const Dag& g, const TargetFamily& fam);
// One intervention-graph signature per family position, under the relabeled
// family around that position (conservative fam, empty target optional).
std::vector<EquivSignature> imec_signature_conservative(const Dag& g,
                                                        const TargetFamily& fam);
// One signature per target of the sub-DAG dropping edges into targeted nodes.
std::vector<EquivSignature> perfect_imec_signature(const Dag& g,
                                                   const TargetFamily& fam);

// Equivalence of intervention graphs by skeleton and v-structures; requires
// the empty target to be present in fam.
bool i_markov_equivalent(const Dag& g1, const Dag& g2, const TargetFamily& fam);

// Family relabeled around the target at position idx:
// {empty} followed by {target[idx] union target[k]} for every k != idx.
TargetFamily relabeled_family(const TargetFamily& fam, int idx);

// Equivalence for conservative families without an observational entry:
// agreement of the relabeled criterion at every position.
bool i_markov_equivalent_conservative(const Dag& g1, const Dag& g2,
                                      const TargetFamily& fam);

// Equivalence of the per-target sub-DAGs (edges into targeted nodes removed),
// each compared by plain Markov equivalence. Requires a conservative family.
bool perfect_i_mec_equivalent(const Dag& g1, const Dag& g2,
                              const TargetFamily& fam);

// Sub-DAG keeping only edges (a -> b) with b outside the target.
Dag intervened_subdag(const Dag& g, const std::vector<NodeId>& target);

}  // namespace causal
