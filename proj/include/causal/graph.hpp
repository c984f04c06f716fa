#pragma once

#include <boost/dynamic_bitset.hpp>
#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace causal {

// Node ids are 0-based throughout the library; file formats are 1-based.
using NodeId = int;
using Bitset = boost::dynamic_bitset<std::uint64_t>;

using Edge = std::pair<NodeId, NodeId>;              // (i, j) means i -> j
using SkeletonEdge = std::pair<NodeId, NodeId>;      // unordered, stored i < j
using VStructure = std::tuple<NodeId, NodeId, NodeId>;  // i -> j <- k, i < k

std::vector<NodeId> bitset_to_vector(const Bitset& b);
Bitset vector_to_bitset(int p, std::span<const NodeId> nodes);

// Immutable after construction in practice: the mutating operations are used
// by builders and always preserve acyclicity.
class Dag {
  public:
    explicit Dag(int p);
    static Dag from_edges(int p, std::span<const Edge> edges);

    int node_count() const { return p_; }
    int edge_count() const { return edge_count_; }

    bool has_edge(NodeId i, NodeId j) const;
    bool adjacent(NodeId i, NodeId j) const;

    // Throws std::invalid_argument on self loops, duplicates, an existing
    // opposite edge, or a would-be cycle.
    void add_edge(NodeId i, NodeId j);
    void remove_edge(NodeId i, NodeId j);

    const Bitset& parents(NodeId i) const;
    const Bitset& children(NodeId i) const;
    Bitset neighbors(NodeId i) const;

    // Reachability; both exclude the node itself.
    Bitset ancestors(NodeId i) const;
    Bitset descendants(NodeId i) const;
    Bitset ancestors_of_set(const Bitset& s) const;  // includes the set

    bool is_ancestor(NodeId a, NodeId b) const;  // a in ancestors(b)

    std::vector<NodeId> topological_order() const;
    // Kahn's algorithm preferring the smallest rank in `priority` among ready
    // nodes; priority[v] is the position of v in some reference order.
    std::vector<NodeId> topological_order_preferring(
        std::span<const int> priority) const;

    std::vector<Edge> edges() const;  // sorted lexicographically

    bool operator==(const Dag& other) const;

  private:
    void check_node(NodeId i) const;

    int p_ = 0;
    int edge_count_ = 0;
    std::vector<Bitset> parents_;
    std::vector<Bitset> children_;
};

struct Permutation {
    std::vector<NodeId> order;  // order[k] = node at position k

    static Permutation identity(int p);
    // Throws unless `order` is a bijection on 0..p-1.
    static Permutation of(std::vector<NodeId> order);

    int size() const { return static_cast<int>(order.size()); }
    // positions()[v] = index of node v in the order.
    std::vector<int> positions() const;
    bool operator==(const Permutation&) const = default;
};

// Standard d-separation: true iff every path between a and b is blocked by c.
// a, b, c must be pairwise disjoint subsets of the nodes.
bool d_separated(const Dag& g, const Bitset& a, const Bitset& b,
                 const Bitset& c);
bool d_separated(const Dag& g, NodeId a, NodeId b, const Bitset& c);

std::vector<SkeletonEdge> skeleton(const Dag& g);
std::vector<VStructure> v_structures(const Dag& g);

bool markov_equivalent(const Dag& g1, const Dag& g2);

bool is_covered(const Dag& g, NodeId i, NodeId j);
std::vector<Edge> covered_edges(const Dag& g);

// Returns a copy with (i, j) replaced by (j, i). Throws std::invalid_argument
// if the edge is absent and std::logic_error if the reversal creates a cycle
// (the caller is expected to reverse covered edges only).
Dag reverse_edge(const Dag& g, NodeId i, NodeId j);

std::string to_string(const Dag& g);

}  // namespace causal
