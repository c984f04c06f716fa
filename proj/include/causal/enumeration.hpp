#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "causal/graph.hpp"
#include "causal/interventions.hpp"

namespace causal {

// Every labeled DAG on p nodes, deterministically ordered. Built by two
// independent generators whose counts are cross-checked.
struct DagCatalog {
    int p = 0;
    std::vector<Dag> dags;

    int size() const { return static_cast<int>(dags.size()); }
};

// Known counts: 1, 3, 25, 543, 29281 for p = 1..5.
// p = 6 (3781503 DAGs) only with allow_large.
DagCatalog enumerate_dags(int p, bool allow_large = false);

// Partition of the catalog into interventional equivalence classes. Uses the
// skeleton/v-structure criterion of the intervention graph when fam contains
// the empty target, the relabeled per-target criterion for conservative
// families without it; throws otherwise.
std::vector<std::vector<int>> partition_imec(const DagCatalog& cat,
                                             const TargetFamily& fam);

// Partition under the perfect-interventions criterion (per-target sub-DAG
// Markov equivalence); requires a conservative family.
std::vector<std::vector<int>> partition_perfect_imec(const DagCatalog& cat,
                                                     const TargetFamily& fam);

// Plain Markov equivalence classes.
std::vector<std::vector<int>> partition_mec(const DagCatalog& cat);

struct TheoremMismatch {
    int family_index = 0;
    int dag_a = 0;
    int dag_b = 0;
    std::string detail;
};

struct CrossValidationReport {
    int families_checked = 0;
    long pair_universe = 0;  // catalog pairs times families
    std::vector<TheoremMismatch> mismatches;

    bool clean() const { return mismatches.empty(); }
};

// Checks that the three equivalence criteria (intervention-graph,
// perfect-sub-DAG, relabeled) induce identical partitions of the catalog for
// every family in the battery. Families must contain the empty target (which
// also makes them conservative).
CrossValidationReport cross_validate_theorems(
    const DagCatalog& cat, const std::vector<TargetFamily>& battery);

// The standard battery: per-node singleton families with the empty target,
// the all-singletons family, the all-pairs family, and `random_count` random
// conservative families (empty target included), derived from seed.
std::vector<TargetFamily> standard_family_battery(int p, int random_count,
                                                  std::uint64_t seed);

}  // namespace causal
