#include <doctest.h>

#include "causal/enumeration.hpp"
#include "causal/interventions.hpp"
#include "causal/rng.hpp"

using namespace causal;

namespace {

Dag make(int p, std::initializer_list<Edge> edges) {
    return Dag::from_edges(p, std::vector<Edge>(edges));
}

TargetFamily fam_of(int p, std::initializer_list<std::vector<NodeId>> targets) {
    return TargetFamily::of(p, std::vector<std::vector<NodeId>>(targets));
}

// The three members of the 3-chain equivalence class, labels 0..2.
const Dag kChain = make(3, {{0, 1}, {1, 2}});        // 0 -> 1 -> 2
const Dag kFork = make(3, {{1, 0}, {1, 2}});         // 0 <- 1 -> 2
const Dag kRevChain = make(3, {{2, 1}, {1, 0}});     // 0 <- 1 <- 2

}  // namespace

TEST_CASE("target family flags") {
    CHECK(fam_of(3, {{}, {1}}).has_empty());
    CHECK_FALSE(fam_of(3, {{1}}).has_empty());
    CHECK(fam_of(3, {{}, {1}}).is_conservative());  // empty target misses all
    CHECK(fam_of(2, {{0}, {1}}).is_conservative());
    CHECK_FALSE(fam_of(2, {{0}, {0, 1}}).is_conservative());  // 0 always hit
    CHECK(fam_of(3, {{}, {0}, {2}}).all_singletons());
    CHECK_FALSE(fam_of(3, {{}, {0, 1}}).all_singletons());
    CHECK_THROWS_AS(TargetFamily::of(2, {{0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(TargetFamily::of(2, {{5}}), std::invalid_argument);

    const TargetFamily multi = fam_of(3, {{1}, {}, {1}, {0, 1}});
    CHECK(multi.singleton_positions(1) == std::vector<int>{0, 2});
    CHECK(multi.positions_with_without(1, 0) == std::vector<int>{0, 2});
    CHECK(multi.positions_with_without(1, 2) == std::vector<int>{0, 2, 3});
    std::vector<int> old_pos;
    const TargetFamily norm = multi.normalized(&old_pos);
    CHECK(norm.targets[0].empty());
    CHECK(old_pos == std::vector<int>{1, 0, 2, 3});
}

TEST_CASE("intervention graph construction") {
    // chain with targets {} / {1} / {2}: one zeta per non-empty target
    const TargetFamily fam = fam_of(3, {{}, {1}, {2}});
    const IDag idag = build_idag(kChain, fam);
    CHECK(idag.graph.node_count() == 5);
    CHECK(idag.zeta_of_target == std::vector<int>{-1, 3, 4});
    CHECK(idag.graph.has_edge(3, 1));
    CHECK(idag.graph.has_edge(4, 2));
    CHECK(idag.graph.has_edge(0, 1));
    CHECK(idag.graph.has_edge(1, 2));
    CHECK(idag.graph.edge_count() == 4);
    // zeta vertices have no incoming edges
    CHECK(idag.graph.parents(3).none());
    CHECK(idag.graph.parents(4).none());

    // family with only the empty target adds nothing
    const IDag plain = build_idag(kChain, fam_of(3, {{}}));
    CHECK(plain.graph == kChain);

    // one multi-node target: a single zeta with two edges
    const IDag multi = build_idag(make(2, {{0, 1}}), fam_of(2, {{}, {0, 1}}));
    CHECK(multi.graph.node_count() == 3);
    CHECK(multi.graph.has_edge(2, 0));
    CHECK(multi.graph.has_edge(2, 1));

    // duplicate targets in the multiset get distinct zeta vertices
    const IDag dup = build_idag(make(2, {{0, 1}}), fam_of(2, {{}, {0}, {0}}));
    CHECK(dup.graph.node_count() == 4);
    CHECK(dup.zeta_of_target == std::vector<int>{-1, 2, 3});

    CHECK_THROWS_AS(build_idag(kChain, fam_of(2, {{}})), std::invalid_argument);
}

TEST_CASE("interventional equivalence with the empty target") {
    // chain MEC under {} / {0} / {1,2}: the chain splits from the two others
    const TargetFamily fam = fam_of(3, {{}, {0}, {1, 2}});
    CHECK_FALSE(i_markov_equivalent(kChain, kFork, fam));
    CHECK_FALSE(i_markov_equivalent(kChain, kRevChain, fam));
    CHECK(i_markov_equivalent(kFork, kRevChain, fam));

    // with only the empty target the criterion reduces to Markov equivalence
    CHECK(i_markov_equivalent(kChain, kFork, fam_of(3, {{}})));

    // two-node graphs split once node 0 is targeted
    const Dag fwd = make(2, {{0, 1}});
    const Dag bwd = make(2, {{1, 0}});
    CHECK_FALSE(i_markov_equivalent(fwd, bwd, fam_of(2, {{}, {0}})));

    CHECK_THROWS_AS(i_markov_equivalent(fwd, bwd, fam_of(2, {{0}, {1}})),
                    std::invalid_argument);
}

TEST_CASE("relabeled families") {
    // relabeling {1},{2} around {1} gives {} and {1,2}
    CHECK(relabeled_family(fam_of(3, {{1}, {2}}), 0).targets ==
          std::vector<std::vector<NodeId>>{{}, {1, 2}});
    // relabeling around the empty target is the identity on the sets
    CHECK(relabeled_family(fam_of(2, {{}, {0}}), 0).targets ==
          std::vector<std::vector<NodeId>>{{}, {0}});
    CHECK(relabeled_family(fam_of(4, {{0}, {1}, {2}}), 0).targets ==
          std::vector<std::vector<NodeId>>{{}, {0, 1}, {0, 2}});
    CHECK_THROWS_AS(relabeled_family(fam_of(2, {{0}}), 3),
                    std::invalid_argument);
}

TEST_CASE("conservative equivalence without the empty target") {
    // chain MEC under targets {1},{2}: the chain splits from the other two
    const TargetFamily fam = fam_of(3, {{1}, {2}});
    CHECK_FALSE(i_markov_equivalent_conservative(kChain, kFork, fam));
    CHECK(i_markov_equivalent_conservative(kFork, kRevChain, fam));

    // two nodes, single-node targets on both: indistinguishable
    const Dag fwd = make(2, {{0, 1}});
    const Dag bwd = make(2, {{1, 0}});
    CHECK(i_markov_equivalent_conservative(fwd, bwd, fam_of(2, {{0}, {1}})));

    CHECK_THROWS_AS(
        i_markov_equivalent_conservative(fwd, bwd, fam_of(2, {{0}, {0, 1}})),
        std::invalid_argument);
}

TEST_CASE("conservative criterion collapses to the plain one when the empty target is present") {
    const DagCatalog cat = enumerate_dags(3);
    Philox rng(5150, 0);
    for (int f = 0; f < 20; ++f) {
        // random family, empty target included
        std::vector<std::vector<NodeId>> targets = {{}};
        const int count = 1 + static_cast<int>(rng.next_below(3));
        for (int t = 0; t < count; ++t) {
            std::vector<NodeId> target;
            for (NodeId v = 0; v < 3; ++v) {
                if (rng.next_double() < 0.5) target.push_back(v);
            }
            if (target.empty()) target.push_back(static_cast<NodeId>(rng.next_below(3)));
            targets.push_back(std::move(target));
        }
        const TargetFamily fam = TargetFamily::of(3, targets);
        for (int x = 0; x < cat.size(); ++x) {
            for (int y = x + 1; y < cat.size(); ++y) {
                CHECK(i_markov_equivalent_conservative(cat.dags[x], cat.dags[y],
                                                       fam) ==
                      i_markov_equivalent(cat.dags[x], cat.dags[y], fam));
            }
        }
    }
}

TEST_CASE("perfect-interventions criterion") {
    const Dag fwd = make(2, {{0, 1}});
    const Dag bwd = make(2, {{1, 0}});
    // sub-DAG at target {1}: {} vs {1 -> 0}
    CHECK_FALSE(perfect_i_mec_equivalent(fwd, bwd, fam_of(2, {{}, {1}})));
    // the empty family alone reduces to Markov equivalence
    CHECK(perfect_i_mec_equivalent(kChain, kFork, fam_of(3, {{}})));
    CHECK_THROWS_AS(perfect_i_mec_equivalent(fwd, bwd, fam_of(2, {{0}, {0, 1}})),
                    std::invalid_argument);

    const Dag sub = intervened_subdag(kChain, {1});
    CHECK(sub.edge_count() == 1);
    CHECK(sub.has_edge(1, 2));
}

TEST_CASE("perfect and interventional criteria coincide on the p=3 catalog") {
    const DagCatalog cat = enumerate_dags(3);
    const auto battery = standard_family_battery(3, 10, 99);
    for (const TargetFamily& fam : battery) {
        REQUIRE(fam.has_empty());
        for (int x = 0; x < cat.size(); ++x) {
            for (int y = x + 1; y < cat.size(); ++y) {
                CHECK(perfect_i_mec_equivalent(cat.dags[x], cat.dags[y], fam) ==
                      i_markov_equivalent(cat.dags[x], cat.dags[y], fam));
            }
        }
    }
}

TEST_CASE("interventional equivalence refines Markov equivalence") {
    const DagCatalog cat = enumerate_dags(4);
    Philox rng(31, 0);
    const auto battery = standard_family_battery(4, 5, 17);
    for (int trial = 0; trial < 400; ++trial) {
        const int x = static_cast<int>(rng.next_below(cat.size()));
        const int y = static_cast<int>(rng.next_below(cat.size()));
        const TargetFamily& fam = battery[rng.next_below(battery.size())];
        if (i_markov_equivalent(cat.dags[x], cat.dags[y], fam)) {
            CHECK(markov_equivalent(cat.dags[x], cat.dags[y]));
        }
    }
}
