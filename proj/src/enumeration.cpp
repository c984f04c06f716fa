#include "causal/enumeration.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "causal/rng.hpp"

namespace causal {

namespace {

// Independent recount: every assignment of {absent, forward, backward} to the
// node pairs, filtered by acyclicity. Only used to double-check the
// permutation-based generator.
long count_dags_by_edge_states(int p) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < p; ++a) {
        for (int b = a + 1; b < p; ++b) pairs.emplace_back(a, b);
    }
    const int m = static_cast<int>(pairs.size());
    std::vector<int> state(m, 0);
    long count = 0;
    std::vector<int> indeg(p);
    std::vector<int> adj;  // p*p adjacency
    while (true) {
        // acyclicity via Kahn on small arrays
        adj.assign(p * p, 0);
        std::fill(indeg.begin(), indeg.end(), 0);
        for (int e = 0; e < m; ++e) {
            if (state[e] == 0) continue;
            const int u = state[e] == 1 ? pairs[e].first : pairs[e].second;
            const int v = state[e] == 1 ? pairs[e].second : pairs[e].first;
            adj[u * p + v] = 1;
            ++indeg[v];
        }
        std::vector<int> ready;
        for (int v = 0; v < p; ++v) {
            if (indeg[v] == 0) ready.push_back(v);
        }
        int seen = 0;
        while (!ready.empty()) {
            const int v = ready.back();
            ready.pop_back();
            ++seen;
            for (int w = 0; w < p; ++w) {
                if (adj[v * p + w] && --indeg[w] == 0) ready.push_back(w);
            }
        }
        if (seen == p) ++count;

        int e = 0;
        while (e < m && state[e] == 2) state[e++] = 0;
        if (e == m) break;
        ++state[e];
    }
    return count;
}

}  // namespace

DagCatalog enumerate_dags(int p, bool allow_large) {
    if (p < 1 || p > 6) {
        throw std::invalid_argument("catalog supports 1 <= p <= 6");
    }
    if (p == 6 && !allow_large) {
        throw std::invalid_argument(
            "p = 6 enumerates 3781503 DAGs; pass allow_large to confirm");
    }
    std::vector<std::pair<int, int>> slots;  // positions (a < b) in the order
    for (int a = 0; a < p; ++a) {
        for (int b = a + 1; b < p; ++b) slots.emplace_back(a, b);
    }
    const int m = static_cast<int>(slots.size());

    std::set<std::vector<Edge>> seen;
    std::vector<NodeId> perm(p);
    for (int v = 0; v < p; ++v) perm[v] = v;
    do {
        for (std::uint64_t mask = 0; mask < (1ull << m); ++mask) {
            std::vector<Edge> edges;
            for (int e = 0; e < m; ++e) {
                if (mask & (1ull << e)) {
                    edges.emplace_back(perm[slots[e].first],
                                       perm[slots[e].second]);
                }
            }
            std::sort(edges.begin(), edges.end());
            seen.insert(std::move(edges));
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    const long recount = count_dags_by_edge_states(p);
    if (recount != static_cast<long>(seen.size())) {
        throw std::logic_error("catalog generators disagree: " +
                               std::to_string(seen.size()) + " vs " +
                               std::to_string(recount));
    }

    DagCatalog cat;
    cat.p = p;
    cat.dags.reserve(seen.size());
    for (const auto& edges : seen) cat.dags.push_back(Dag::from_edges(p, edges));
    return cat;
}

namespace {

template <typename Key, typename Fn>
std::vector<std::vector<int>> group_by(const DagCatalog& cat, Fn&& key_of) {
    std::map<Key, std::vector<int>> groups;
    for (int d = 0; d < cat.size(); ++d) {
        groups[key_of(cat.dags[d])].push_back(d);
    }
    std::vector<std::vector<int>> out;
    out.reserve(groups.size());
    for (auto& [k, v] : groups) out.push_back(std::move(v));
    return out;
}

}  // namespace

std::vector<std::vector<int>> partition_mec(const DagCatalog& cat) {
    return group_by<EquivSignature>(
        cat, [](const Dag& g) { return signature_of(g); });
}

std::vector<std::vector<int>> partition_imec(const DagCatalog& cat,
                                             const TargetFamily& fam) {
    if (fam.has_empty()) {
        return group_by<EquivSignature>(
            cat, [&](const Dag& g) { return imec_signature(g, fam); });
    }
    if (fam.is_conservative()) {
        return group_by<std::vector<EquivSignature>>(cat, [&](const Dag& g) {
            return imec_signature_conservative(g, fam);
        });
    }
    throw std::invalid_argument(
        "family is neither conservative nor contains the empty target");
}

std::vector<std::vector<int>> partition_perfect_imec(const DagCatalog& cat,
                                                     const TargetFamily& fam) {
    if (!fam.is_conservative()) {
        throw std::invalid_argument("family is not conservative");
    }
    return group_by<std::vector<EquivSignature>>(cat, [&](const Dag& g) {
        return perfect_imec_signature(g, fam);
    });
}

namespace {

std::vector<int> class_ids(const std::vector<std::vector<int>>& partition,
                           int n) {
    std::vector<int> id(n, -1);
    for (int c = 0; c < static_cast<int>(partition.size()); ++c) {
        for (int d : partition[c]) id[d] = c;
    }
    return id;
}

// Finds one witness pair proving ids_a and ids_b induce different relations.
bool find_mismatch_pair(const std::vector<int>& ids_a,
                        const std::vector<int>& ids_b, int* out_x, int* out_y) {
    std::map<int, int> first_in_a_class;
    for (int d = 0; d < static_cast<int>(ids_a.size()); ++d) {
        auto [it, fresh] = first_in_a_class.emplace(ids_a[d], d);
        if (!fresh && ids_b[it->second] != ids_b[d]) {
            *out_x = it->second;
            *out_y = d;
            return true;  // same class in a, split in b
        }
    }
    std::map<int, int> first_in_b_class;
    for (int d = 0; d < static_cast<int>(ids_b.size()); ++d) {
        auto [it, fresh] = first_in_b_class.emplace(ids_b[d], d);
        if (!fresh && ids_a[it->second] != ids_a[d]) {
            *out_x = it->second;
            *out_y = d;
            return true;  // same class in b, split in a
        }
    }
    return false;
}

}  // namespace

CrossValidationReport cross_validate_theorems(
    const DagCatalog& cat, const std::vector<TargetFamily>& battery) {
    CrossValidationReport report;
    const int n = cat.size();
    for (int f = 0; f < static_cast<int>(battery.size()); ++f) {
        const TargetFamily& fam = battery[f];
        if (!fam.has_empty()) {
            throw std::invalid_argument(
                "battery families must contain the empty target");
        }
        const auto ids_imec = class_ids(partition_imec(cat, fam), n);
        const auto ids_perfect = class_ids(partition_perfect_imec(cat, fam), n);
        // Relabeled criterion evaluated directly (not via the has_empty
        // shortcut inside partition_imec).
        const auto ids_relabel = class_ids(
            group_by<std::vector<EquivSignature>>(
                cat,
                [&](const Dag& g) { return imec_signature_conservative(g, fam); }),
            n);

        int x = 0, y = 0;
        if (find_mismatch_pair(ids_imec, ids_perfect, &x, &y)) {
            report.mismatches.push_back(
                {f, x, y, "intervention-graph vs perfect criteria disagree"});
        }
        if (find_mismatch_pair(ids_imec, ids_relabel, &x, &y)) {
            report.mismatches.push_back(
                {f, x, y, "intervention-graph vs relabeled criteria disagree"});
        }
        ++report.families_checked;
        report.pair_universe += static_cast<long>(n) * (n - 1) / 2;
    }
    return report;
}

std::vector<TargetFamily> standard_family_battery(int p, int random_count,
                                                  std::uint64_t seed) {
    std::vector<TargetFamily> battery;
    for (int i = 0; i < p; ++i) {
        battery.push_back(TargetFamily::of(p, {{}, {i}}));
    }
    {
        std::vector<std::vector<NodeId>> targets = {{}};
        for (int i = 0; i < p; ++i) targets.push_back({i});
        battery.push_back(TargetFamily::of(p, std::move(targets)));
    }
    if (p >= 2) {
        std::vector<std::vector<NodeId>> targets = {{}};
        for (int i = 0; i < p; ++i) {
            for (int j = i + 1; j < p; ++j) targets.push_back({i, j});
        }
        battery.push_back(TargetFamily::of(p, std::move(targets)));
    }
    for (int r = 0; r < random_count; ++r) {
        Philox rng(seed, static_cast<std::uint64_t>(r));
        const int count = 1 + static_cast<int>(rng.next_below(
                                  std::min<std::uint64_t>(p, 4)));
        std::vector<std::vector<NodeId>> targets = {{}};
        std::vector<NodeId> nodes(p);
        for (int v = 0; v < p; ++v) nodes[v] = v;
        for (int t = 0; t < count; ++t) {
            const int size = 1 + static_cast<int>(rng.next_below(p - 1));
            rng.shuffle(nodes);
            std::vector<NodeId> target(nodes.begin(), nodes.begin() + size);
            std::sort(target.begin(), target.end());
            targets.push_back(std::move(target));
        }
        battery.push_back(TargetFamily::of(p, std::move(targets)));
    }
    return battery;
}

}  // namespace causal
