#include "causal/igsp.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "causal/rng.hpp"

namespace causal {

MinimalIMap minimal_imap(const Permutation& pi, const CiDecider& ci) {
    const int p = pi.size();
    Dag g(p);
    std::vector<NodeId> pre;
    for (int b = 0; b < p; ++b) {
        const NodeId j = pi.order[b];
        for (int a = 0; a < b; ++a) {
            const NodeId i = pi.order[a];
            std::vector<NodeId> cond;
            cond.reserve(pre.size());
            for (NodeId v : pre) {
                if (v != i) cond.push_back(v);
            }
            std::sort(cond.begin(), cond.end());
            if (!ci.query(i, j, cond).independent) g.add_edge(i, j);
        }
        pre.push_back(j);
    }
    return {pi, std::move(g)};
}

MinimalIMap update_imap_after_reversal(const MinimalIMap& m, NodeId i, NodeId j,
                                       const CiDecider& ci,
                                       const PoolContext& pool) {
    if (!is_covered(m.g, i, j)) {
        throw std::invalid_argument("edge (" + std::to_string(i) + "," +
                                    std::to_string(j) +
                                    ") is not covered; cannot reverse");
    }
    Dag g2 = reverse_edge(m.g, i, j);
    Permutation tau =
        Permutation::of(g2.topological_order_preferring(m.pi.positions()));

    Dag g3 = g2;
    for (const NodeId node : {i, j}) {
        const Bitset an = g2.ancestors(node);
        const auto parents = bitset_to_vector(g2.parents(node));
        for (const NodeId k : parents) {
            Bitset cond_mask = an;
            cond_mask.reset(k);
            const std::vector<NodeId> cond = bitset_to_vector(cond_mask);
            CiOutcome outcome;
            if (pool.enabled && pool.fam != nullptr) {
                const auto blocks =
                    pool_eligible_blocks(g2, tau, *pool.fam, node, k);
                outcome = ci.query_pooled(node, k, cond, blocks);
            } else {
                outcome = ci.query(node, k, cond);
            }
            if (outcome.independent) g3.remove_edge(k, node);
        }
    }
    return {std::move(tau), std::move(g3)};
}

namespace {

// Per-block invariance decision inside a quantifier over m blocks; the
// Bonferroni option moves the level to alpha/m.
bool block_invariant(const InvarianceDecider& inv, NodeId i,
                     std::span<const NodeId> cond, int block, std::size_t m,
                     bool bonferroni) {
    const InvOutcome out = inv.query(i, cond, block);
    if (!bonferroni || m <= 1) return out.invariant;
    return out.p_value >= inv.alpha() / static_cast<double>(m);
}

}  // namespace

bool is_i_covered(const Dag& g, NodeId i, NodeId j, const InvarianceDecider& inv,
                  const TargetFamily& fam, bool bonferroni) {
    if (!is_covered(g, i, j)) {
        throw std::invalid_argument("edge is not covered");
    }
    const auto blocks = fam.singleton_positions(i);
    for (const int b : blocks) {
        if (!block_invariant(inv, j, {}, b, blocks.size(), bonferroni)) {
            return false;
        }
    }
    return true;
}

namespace {

// Invokes fn on every subset of base (as a sorted vector), smallest mask
// first; stops early when fn returns true.
template <typename Fn>
bool any_subset(const std::vector<NodeId>& base, Fn&& fn) {
    const std::size_t d = base.size();
    for (std::uint64_t mask = 0; mask < (1ull << d); ++mask) {
        std::vector<NodeId> s;
        for (std::size_t t = 0; t < d; ++t) {
            if (mask & (1ull << t)) s.push_back(base[t]);
        }
        if (fn(s)) return true;
    }
    return false;
}

}  // namespace

bool is_i_contradictory_general(const Dag& g, NodeId i, NodeId j,
                                const InvarianceDecider& inv,
                                const TargetFamily& fam,
                                const ContradictoryOptions& opt, bool* capped) {
    if (!g.has_edge(i, j)) throw std::invalid_argument("edge absent");
    const auto blocks_ij = fam.positions_with_without(i, j);
    const auto blocks_ji = fam.positions_with_without(j, i);

    // (1) some subset of j's other neighbors renders X_j invariant across
    // every block targeting i but not j. Vacuous quantification is rejected:
    // the condition only applies when such blocks exist.
    if (!blocks_ij.empty()) {
        Bitset ne = g.neighbors(j);
        ne.reset(i);
        const auto base = bitset_to_vector(ne);
        if (static_cast<int>(base.size()) > opt.degree_cap) {
            if (capped != nullptr) *capped = true;
        } else {
            const bool found = any_subset(base, [&](const std::vector<NodeId>& s) {
                for (const int b : blocks_ij) {
                    if (!block_invariant(inv, j, s, b, blocks_ij.size(),
                                         opt.bonferroni)) {
                        return false;
                    }
                }
                return true;
            });
            if (found) return true;
        }
    }

    // (2) every subset of i's other neighbors leaves X_i varying for some
    // block targeting j but not i.
    if (!blocks_ji.empty()) {
        Bitset ne = g.neighbors(i);
        ne.reset(j);
        const auto base = bitset_to_vector(ne);
        if (static_cast<int>(base.size()) > opt.degree_cap) {
            if (capped != nullptr) *capped = true;
        } else {
            const bool some_subset_all_invariant =
                any_subset(base, [&](const std::vector<NodeId>& s) {
                    for (const int b : blocks_ji) {
                        if (!block_invariant(inv, i, s, b, blocks_ji.size(),
                                             opt.bonferroni)) {
                            return false;
                        }
                    }
                    return true;
                });
            if (!some_subset_all_invariant) return true;
        }
    }
    return false;
}

bool is_i_contradictory_single(const Dag& g, NodeId i, NodeId j,
                               const InvarianceDecider& inv,
                               const TargetFamily& fam, bool bonferroni) {
    if (!g.has_edge(i, j)) throw std::invalid_argument("edge absent");
    const auto si = fam.singleton_positions(i);
    const auto sj = fam.singleton_positions(j);
    if (si.empty() && sj.empty()) {
        throw std::invalid_argument(
            "single-node contradictory test needs {i} or {j} among the targets");
    }
    if (!si.empty()) {
        bool all_invariant = true;
        for (const int b : si) {
            if (!block_invariant(inv, j, {}, b, si.size(), bonferroni)) {
                all_invariant = false;
                break;
            }
        }
        if (all_invariant) return true;
    }
    if (!sj.empty()) {
        for (const int b : sj) {
            if (!block_invariant(inv, i, {}, b, sj.size(), bonferroni)) {
                return true;
            }
        }
    }
    return false;
}

namespace {

bool edge_contradictory(const Dag& g, NodeId i, NodeId j,
                        const InvarianceDecider& inv, const TargetFamily& fam,
                        bool single_mode, const ContradictoryOptions& opt) {
    if (single_mode) {
        if (fam.singleton_positions(i).empty() &&
            fam.singleton_positions(j).empty()) {
            return false;
        }
        return is_i_contradictory_single(g, i, j, inv, fam, opt.bonferroni);
    }
    return is_i_contradictory_general(g, i, j, inv, fam, opt);
}

}  // namespace

int count_i_contradictory(const Dag& g, const InvarianceDecider& inv,
                          const TargetFamily& fam, bool single_node_mode,
                          const ContradictoryOptions& opt) {
    int count = 0;
    for (const auto& [i, j] : g.edges()) {
        if (edge_contradictory(g, i, j, inv, fam, single_node_mode, opt)) {
            ++count;
        }
    }
    return count;
}

// ---------------------------------------------------------------------------

namespace {

struct Move {
    Edge edge;
    MoveClass cls;
};

struct Dfs {
    const SearchConfig* cfg;
    bool single_mode;
    int depth_limit;
    PoolContext pool;
    SearchTrace* trace;
    // Same-size states seen in the current round, keyed by canonical edges.
    std::map<std::vector<Edge>, MinimalIMap> visited;
    // Contradictory-edge counts per canonical edge set (shared across rounds).
    std::map<std::vector<Edge>, int> count_memo;
    std::optional<MinimalIMap> improved;

    int contradictory_count(const MinimalIMap& m) {
        auto key = m.g.edges();
        const auto it = count_memo.find(key);
        if (it != count_memo.end()) return it->second;
        const int c = count_i_contradictory(m.g, *cfg->inv, cfg->fam,
                                            single_mode, cfg->contradictory);
        count_memo.emplace(std::move(key), c);
        return c;
    }

    std::vector<Move> moves_of(const MinimalIMap& m) {
        std::vector<Move> contradictory, plain;
        for (const auto& [i, j] : covered_edges(m.g)) {
            if (!is_i_covered(m.g, i, j, *cfg->inv, cfg->fam,
                              cfg->contradictory.bonferroni)) {
                continue;
            }
            const bool contra = edge_contradictory(m.g, i, j, *cfg->inv,
                                                   cfg->fam, single_mode,
                                                   cfg->contradictory);
            (contra ? contradictory : plain)
                .push_back({{i, j},
                            contra ? MoveClass::i_contradictory
                                   : MoveClass::plain_i_covered});
        }
        // Lexicographic within each class; covered_edges is already sorted.
        contradictory.insert(contradictory.end(), plain.begin(), plain.end());
        return contradictory;
    }

    bool run(const MinimalIMap& cur, int root_edges, int depth) {
        for (const Move& mv : moves_of(cur)) {
            MinimalIMap child = update_imap_after_reversal(
                cur, mv.edge.first, mv.edge.second, *cfg->ci, pool);
            TraceEntry entry;
            entry.perm = child.pi.order;
            entry.host_perm = cur.pi.order;
            entry.imap_edges = child.g.edge_count();
            entry.move = mv.edge;
            entry.move_class = mv.cls;
            entry.i_covered = true;
            entry.i_contradictory_count = contradictory_count(child);
            trace->entries.push_back(std::move(entry));

            if (child.g.edge_count() < root_edges) {
                improved = std::move(child);
                return true;
            }
            auto key = child.g.edges();
            if (visited.contains(key)) continue;
            if (depth + 1 > depth_limit) {
                trace->truncated = true;
                continue;
            }
            visited.emplace(std::move(key), child);
            if (run(child, root_edges, depth + 1)) return true;
        }
        return false;
    }
};

struct RunOutcome {
    MinimalIMap best;
    SearchTrace trace;
    int contradictory = 0;
};

RunOutcome run_single_start(const SearchConfig& cfg, const Permutation& pi0) {
    const int p = pi0.size();
    Dfs dfs;
    dfs.cfg = &cfg;
    dfs.single_mode = cfg.effective_single_node_mode();
    dfs.depth_limit = cfg.dfs_depth_limit.value_or(p * (p - 1) / 2);
    dfs.pool = PoolContext{cfg.pool, &cfg.fam};

    RunOutcome out;
    dfs.trace = &out.trace;

    MinimalIMap cur = minimal_imap(pi0, *cfg.ci);
    {
        TraceEntry root;
        root.perm = cur.pi.order;
        root.imap_edges = cur.g.edge_count();
        root.restart = true;
        root.i_contradictory_count = dfs.contradictory_count(cur);
        out.trace.entries.push_back(std::move(root));
    }
    while (true) {
        dfs.visited.clear();
        dfs.visited.emplace(cur.g.edges(), cur);
        dfs.improved.reset();
        const bool found = dfs.run(cur, cur.g.edge_count(), 0);
        if (!found) break;
        cur = *dfs.improved;
        TraceEntry root;
        root.perm = cur.pi.order;
        root.imap_edges = cur.g.edge_count();
        root.restart = true;
        root.i_contradictory_count = dfs.contradictory_count(cur);
        out.trace.entries.push_back(std::move(root));
    }

    // Local optimum: minimize the contradictory count over the component
    // explored by the final round, ties by canonical edge list.
    const MinimalIMap* best = nullptr;
    int best_count = 0;
    for (const auto& [edges, state] : dfs.visited) {
        const int c = dfs.contradictory_count(state);
        if (best == nullptr || c < best_count) {
            best = &state;
            best_count = c;
        }
    }
    out.best = *best;
    out.contradictory = best_count;
    return out;
}

}  // namespace

SearchResult igsp_search(const SearchConfig& cfg, const Permutation& pi0) {
    if (cfg.ci == nullptr || cfg.inv == nullptr) {
        throw std::invalid_argument("search needs CI and invariance deciders");
    }
    if (!cfg.fam.has_empty()) {
        throw std::invalid_argument(
            "the target family must contain the observational (empty) target");
    }
    if (cfg.fam.p != pi0.size()) {
        throw std::invalid_argument("permutation size does not match family");
    }
    const int restarts = std::max(1, cfg.max_restarts);

    std::optional<RunOutcome> best;
    for (int r = 0; r < restarts; ++r) {
        Permutation start = pi0;
        if (r > 0) {
            Philox rng(cfg.rng_seed, static_cast<std::uint64_t>(r));
            rng.shuffle(start.order);
        }
        RunOutcome run = run_single_start(cfg, start);
        const bool better =
            !best ||
            std::tuple(run.best.g.edge_count(), run.contradictory,
                       run.best.g.edges()) <
                std::tuple(best->best.g.edge_count(), best->contradictory,
                           best->best.g.edges());
        if (better) best = std::move(run);
    }

    SearchResult result;
    result.pi = best->best.pi;
    result.g = best->best.g;
    result.trace = std::move(best->trace);
    result.i_contradictory_count = best->contradictory;
    return result;
}

}  // namespace causal
