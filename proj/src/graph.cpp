#include "causal/graph.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <stdexcept>

namespace causal {

std::vector<NodeId> bitset_to_vector(const Bitset& b) {
    std::vector<NodeId> out;
    out.reserve(b.count());
    for (auto i = b.find_first(); i != Bitset::npos; i = b.find_next(i)) {
        out.push_back(static_cast<NodeId>(i));
    }
    return out;
}

Bitset vector_to_bitset(int p, std::span<const NodeId> nodes) {
    Bitset b(p);
    for (NodeId v : nodes) {
        if (v < 0 || v >= p) {
            throw std::invalid_argument("node " + std::to_string(v) +
                                        " out of range [0," +
                                        std::to_string(p) + ")");
        }
        b.set(v);
    }
    return b;
}

Dag::Dag(int p) : p_(p) {
    if (p < 1) throw std::invalid_argument("node count must be positive");
    parents_.assign(p, Bitset(p));
    children_.assign(p, Bitset(p));
}

Dag Dag::from_edges(int p, std::span<const Edge> edges) {
    Dag g(p);
    for (const auto& [i, j] : edges) g.add_edge(i, j);
    return g;
}

void Dag::check_node(NodeId i) const {
    if (i < 0 || i >= p_) {
        throw std::invalid_argument("node " + std::to_string(i) +
                                    " out of range [0," + std::to_string(p_) +
                                    ")");
    }
}

bool Dag::has_edge(NodeId i, NodeId j) const {
    check_node(i);
    check_node(j);
    return children_[i].test(j);
}

bool Dag::adjacent(NodeId i, NodeId j) const {
    check_node(i);
    check_node(j);
    return children_[i].test(j) || children_[j].test(i);
}

void Dag::add_edge(NodeId i, NodeId j) {
    check_node(i);
    check_node(j);
    if (i == j) throw std::invalid_argument("self loop at node " + std::to_string(i));
    if (children_[i].test(j)) {
        throw std::invalid_argument("duplicate edge (" + std::to_string(i) +
                                    "," + std::to_string(j) + ")");
    }
    if (children_[j].test(i)) {
        throw std::invalid_argument("both orientations of {" +
                                    std::to_string(i) + "," +
                                    std::to_string(j) + "} present");
    }
    if (is_ancestor(j, i)) {
        throw std::invalid_argument("edge (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") creates a cycle");
    }
    children_[i].set(j);
    parents_[j].set(i);
    ++edge_count_;
}

void Dag::remove_edge(NodeId i, NodeId j) {
    if (!has_edge(i, j)) {
        throw std::invalid_argument("edge (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") absent");
    }
    children_[i].reset(j);
    parents_[j].reset(i);
    --edge_count_;
}

const Bitset& Dag::parents(NodeId i) const {
    check_node(i);
    return parents_[i];
}

const Bitset& Dag::children(NodeId i) const {
    check_node(i);
    return children_[i];
}

Bitset Dag::neighbors(NodeId i) const {
    check_node(i);
    return parents_[i] | children_[i];
}

Bitset Dag::descendants(NodeId i) const {
    check_node(i);
    Bitset seen(p_);
    std::vector<NodeId> stack = {i};
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        const Bitset fresh = children_[v] & ~seen;
        seen |= fresh;
        for (auto w = fresh.find_first(); w != Bitset::npos;
             w = fresh.find_next(w)) {
            stack.push_back(static_cast<NodeId>(w));
        }
    }
    return seen;
}

Bitset Dag::ancestors(NodeId i) const {
    check_node(i);
    Bitset seen(p_);
    std::vector<NodeId> stack = {i};
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        const Bitset fresh = parents_[v] & ~seen;
        seen |= fresh;
        for (auto w = fresh.find_first(); w != Bitset::npos;
             w = fresh.find_next(w)) {
            stack.push_back(static_cast<NodeId>(w));
        }
    }
    return seen;
}

Bitset Dag::ancestors_of_set(const Bitset& s) const {
    Bitset seen = s;
    std::vector<NodeId> stack = bitset_to_vector(s);
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        const Bitset fresh = parents_[v] & ~seen;
        seen |= fresh;
        for (auto w = fresh.find_first(); w != Bitset::npos;
             w = fresh.find_next(w)) {
            stack.push_back(static_cast<NodeId>(w));
        }
    }
    return seen;
}

bool Dag::is_ancestor(NodeId a, NodeId b) const {
    check_node(a);
    check_node(b);
    if (a == b) return false;
    return descendants(a).test(b);
}

std::vector<NodeId> Dag::topological_order() const {
    std::vector<int> prio(p_);
    for (int v = 0; v < p_; ++v) prio[v] = v;
    return topological_order_preferring(prio);
}

std::vector<NodeId> Dag::topological_order_preferring(
    std::span<const int> priority) const {
    if (static_cast<int>(priority.size()) != p_) {
        throw std::invalid_argument("priority size mismatch");
    }
    std::vector<int> indeg(p_);
    for (int v = 0; v < p_; ++v) indeg[v] = static_cast<int>(parents_[v].count());
    using Entry = std::pair<int, NodeId>;  // (rank, node)
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
    for (int v = 0; v < p_; ++v) {
        if (indeg[v] == 0) ready.emplace(priority[v], v);
    }
    std::vector<NodeId> order;
    order.reserve(p_);
    while (!ready.empty()) {
        const NodeId v = ready.top().second;
        ready.pop();
        order.push_back(v);
        const Bitset& ch = children_[v];
        for (auto w = ch.find_first(); w != Bitset::npos; w = ch.find_next(w)) {
            if (--indeg[w] == 0) ready.emplace(priority[w], static_cast<NodeId>(w));
        }
    }
    if (static_cast<int>(order.size()) != p_) {
        throw std::logic_error("graph contains a cycle");
    }
    return order;
}

std::vector<Edge> Dag::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (int i = 0; i < p_; ++i) {
        const Bitset& ch = children_[i];
        for (auto j = ch.find_first(); j != Bitset::npos; j = ch.find_next(j)) {
            out.emplace_back(i, static_cast<NodeId>(j));
        }
    }
    return out;
}

bool Dag::operator==(const Dag& other) const {
    return p_ == other.p_ && children_ == other.children_;
}

Permutation Permutation::identity(int p) {
    Permutation pi;
    pi.order.resize(p);
    for (int k = 0; k < p; ++k) pi.order[k] = k;
    return pi;
}

Permutation Permutation::of(std::vector<NodeId> order) {
    const int p = static_cast<int>(order.size());
    std::vector<bool> seen(p, false);
    for (NodeId v : order) {
        if (v < 0 || v >= p || seen[v]) {
            throw std::invalid_argument("not a permutation of 0.." +
                                        std::to_string(p - 1));
        }
        seen[v] = true;
    }
    return Permutation{std::move(order)};
}

std::vector<int> Permutation::positions() const {
    std::vector<int> pos(order.size());
    for (int k = 0; k < static_cast<int>(order.size()); ++k) pos[order[k]] = k;
    return pos;
}

namespace {

void check_query_sets(const Dag& g, const Bitset& a, const Bitset& b,
                      const Bitset& c) {
    const auto p = static_cast<std::size_t>(g.node_count());
    if (a.size() != p || b.size() != p || c.size() != p) {
        throw std::invalid_argument("query set size does not match node count");
    }
    if ((a & b).any() || (a & c).any() || (b & c).any()) {
        throw std::invalid_argument("query sets must be pairwise disjoint");
    }
}

}  // namespace

// Reachability formulation of d-separation: breadth-first search over
// (node, arrival direction) states. Arriving from a parent, the walk may
// continue to children when the node is unconditioned and to parents when
// the node is a conditioned collider or has a conditioned descendant.
bool d_separated(const Dag& g, const Bitset& a, const Bitset& b,
                 const Bitset& c) {
    check_query_sets(g, a, b, c);
    if (a.none() || b.none()) return true;
    const int p = g.node_count();
    const Bitset an_c = g.ancestors_of_set(c);  // c plus its ancestors

    // visited[v] bit 0: reached from a child; bit 1: reached from a parent.
    std::vector<unsigned char> visited(p, 0);
    std::deque<std::pair<NodeId, int>> queue;  // direction 0: from child
    for (auto v = a.find_first(); v != Bitset::npos; v = a.find_next(v)) {
        queue.emplace_back(static_cast<NodeId>(v), 0);
    }
    while (!queue.empty()) {
        const auto [v, dir] = queue.front();
        queue.pop_front();
        const unsigned char bit = dir == 0 ? 1 : 2;
        if (visited[v] & bit) continue;
        visited[v] |= bit;
        if (b.test(v)) return false;

        const bool in_c = c.test(v);
        if (dir == 0) {
            // Arrived via one of v's outgoing edges; v acts as a chain or
            // fork node, so both moves require v unconditioned.
            if (!in_c) {
                const Bitset& pa = g.parents(v);
                for (auto w = pa.find_first(); w != Bitset::npos;
                     w = pa.find_next(w)) {
                    queue.emplace_back(static_cast<NodeId>(w), 0);
                }
                const Bitset& ch = g.children(v);
                for (auto w = ch.find_first(); w != Bitset::npos;
                     w = ch.find_next(w)) {
                    queue.emplace_back(static_cast<NodeId>(w), 1);
                }
            }
        } else {
            if (!in_c) {
                const Bitset& ch = g.children(v);
                for (auto w = ch.find_first(); w != Bitset::npos;
                     w = ch.find_next(w)) {
                    queue.emplace_back(static_cast<NodeId>(w), 1);
                }
            }
            if (an_c.test(v)) {
                // Collider with v or one of its descendants conditioned.
                const Bitset& pa = g.parents(v);
                for (auto w = pa.find_first(); w != Bitset::npos;
                     w = pa.find_next(w)) {
                    queue.emplace_back(static_cast<NodeId>(w), 0);
                }
            }
        }
    }
    return true;
}

bool d_separated(const Dag& g, NodeId a, NodeId b, const Bitset& c) {
    Bitset sa(g.node_count()), sb(g.node_count());
    sa.set(a);
    sb.set(b);
    return d_separated(g, sa, sb, c);
}

std::vector<SkeletonEdge> skeleton(const Dag& g) {
    std::vector<SkeletonEdge> out;
    out.reserve(g.edge_count());
    for (const auto& [i, j] : g.edges()) {
        out.emplace_back(std::min(i, j), std::max(i, j));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<VStructure> v_structures(const Dag& g) {
    std::vector<VStructure> out;
    const int p = g.node_count();
    for (NodeId j = 0; j < p; ++j) {
        const auto pa = bitset_to_vector(g.parents(j));
        for (std::size_t x = 0; x < pa.size(); ++x) {
            for (std::size_t y = x + 1; y < pa.size(); ++y) {
                if (!g.adjacent(pa[x], pa[y])) {
                    out.emplace_back(pa[x], j, pa[y]);
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool markov_equivalent(const Dag& g1, const Dag& g2) {
    if (g1.node_count() != g2.node_count()) {
        throw std::invalid_argument("node counts differ");
    }
    return skeleton(g1) == skeleton(g2) && v_structures(g1) == v_structures(g2);
}

bool is_covered(const Dag& g, NodeId i, NodeId j) {
    if (!g.has_edge(i, j)) return false;
    Bitset pa_j = g.parents(j);
    pa_j.reset(i);
    return g.parents(i) == pa_j;
}

std::vector<Edge> covered_edges(const Dag& g) {
    std::vector<Edge> out;
    for (const auto& [i, j] : g.edges()) {
        if (is_covered(g, i, j)) out.emplace_back(i, j);
    }
    return out;
}

Dag reverse_edge(const Dag& g, NodeId i, NodeId j) {
    if (!g.has_edge(i, j)) {
        throw std::invalid_argument("edge (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") absent");
    }
    Dag out = g;
    out.remove_edge(i, j);
    try {
        out.add_edge(j, i);
    } catch (const std::invalid_argument&) {
        throw std::logic_error(
            "reversal of (" + std::to_string(i) + "," + std::to_string(j) +
            ") creates a cycle; the edge cannot have been covered");
    }
    return out;
}

std::string to_string(const Dag& g) {
    std::string s = "p=" + std::to_string(g.node_count()) + " {";
    bool first = true;
    for (const auto& [i, j] : g.edges()) {
        if (!first) s += ", ";
        first = false;
        s += std::to_string(i) + "->" + std::to_string(j);
    }
    return s + "}";
}

}  // namespace causal
