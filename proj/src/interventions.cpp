#include "causal/interventions.hpp"

#include <algorithm>
#include <stdexcept>

namespace causal {

TargetFamily TargetFamily::of(int p, std::vector<std::vector<NodeId>> targets) {
    if (p < 1) throw std::invalid_argument("node count must be positive");
    for (auto& t : targets) {
        std::sort(t.begin(), t.end());
        if (std::adjacent_find(t.begin(), t.end()) != t.end()) {
            throw std::invalid_argument("duplicate node in target");
        }
        for (NodeId v : t) {
            if (v < 0 || v >= p) {
                throw std::invalid_argument("target node " + std::to_string(v) +
                                            " out of range [0," +
                                            std::to_string(p) + ")");
            }
        }
    }
    return TargetFamily{p, std::move(targets)};
}

bool TargetFamily::has_empty() const {
    return std::any_of(targets.begin(), targets.end(),
                       [](const auto& t) { return t.empty(); });
}

bool TargetFamily::is_conservative() const {
    for (NodeId v = 0; v < p; ++v) {
        bool missing_somewhere = false;
        for (const auto& t : targets) {
            if (!std::binary_search(t.begin(), t.end(), v)) {
                missing_somewhere = true;
                break;
            }
        }
        if (!missing_somewhere) return false;
    }
    return !targets.empty();
}

bool TargetFamily::all_singletons() const {
    return std::all_of(targets.begin(), targets.end(),
                       [](const auto& t) { return t.size() <= 1; });
}

std::vector<int> TargetFamily::singleton_positions(NodeId i) const {
    std::vector<int> out;
    for (int k = 0; k < target_count(); ++k) {
        if (targets[k].size() == 1 && targets[k][0] == i) out.push_back(k);
    }
    return out;
}

std::vector<int> TargetFamily::positions_with_without(NodeId with,
                                                      NodeId without) const {
    std::vector<int> out;
    for (int k = 0; k < target_count(); ++k) {
        const auto& t = targets[k];
        if (std::binary_search(t.begin(), t.end(), with) &&
            !std::binary_search(t.begin(), t.end(), without)) {
            out.push_back(k);
        }
    }
    return out;
}

TargetFamily TargetFamily::normalized(std::vector<int>* old_position) const {
    std::vector<int> idx;
    idx.reserve(targets.size());
    int empty_pos = -1;
    for (int k = 0; k < target_count(); ++k) {
        if (empty_pos < 0 && targets[k].empty()) empty_pos = k;
    }
    if (empty_pos >= 0) idx.push_back(empty_pos);
    for (int k = 0; k < target_count(); ++k) {
        if (k != empty_pos) idx.push_back(k);
    }
    TargetFamily out;
    out.p = p;
    for (int k : idx) out.targets.push_back(targets[k]);
    if (old_position != nullptr) *old_position = std::move(idx);
    return out;
}

IDag build_idag(const Dag& g, const TargetFamily& fam) {
    if (fam.p != g.node_count()) {
        throw std::invalid_argument("family node count does not match graph");
    }
    const int p = g.node_count();
    int zeta_count = 0;
    for (const auto& t : fam.targets) {
        if (!t.empty()) ++zeta_count;
    }
    IDag out;
    out.base_p = p;
    out.graph = Dag(p + zeta_count);
    for (const auto& [i, j] : g.edges()) out.graph.add_edge(i, j);
    out.zeta_of_target.assign(fam.target_count(), -1);
    int next = p;
    for (int k = 0; k < fam.target_count(); ++k) {
        if (fam.targets[k].empty()) continue;
        out.zeta_of_target[k] = next;
        for (NodeId i : fam.targets[k]) out.graph.add_edge(next, i);
        ++next;
    }
    return out;
}

EquivSignature signature_of(const Dag& g) {
    return EquivSignature{skeleton(g), v_structures(g)};
}

EquivSignature imec_signature(const Dag& g, const TargetFamily& fam) {
    if (!fam.has_empty()) {
        throw std::invalid_argument(
            "family lacks the observational (empty) target; the skeleton/"
            "v-structure criterion is only valid with it -- use "
            "i_markov_equivalent_conservative for conservative families");
    }
    return signature_of(build_idag(g, fam).graph);
}

bool i_markov_equivalent(const Dag& g1, const Dag& g2,
                         const TargetFamily& fam) {
    if (g1.node_count() != g2.node_count() || g1.node_count() != fam.p) {
        throw std::invalid_argument("node counts differ");
    }
    return imec_signature(g1, fam) == imec_signature(g2, fam);
}

TargetFamily relabeled_family(const TargetFamily& fam, int idx) {
    if (idx < 0 || idx >= fam.target_count()) {
        throw std::invalid_argument("target position out of range");
    }
    TargetFamily out;
    out.p = fam.p;
    out.targets.push_back({});
    const auto& base = fam.targets[idx];
    for (int k = 0; k < fam.target_count(); ++k) {
        if (k == idx) continue;
        std::vector<NodeId> u;
        std::set_union(base.begin(), base.end(), fam.targets[k].begin(),
                       fam.targets[k].end(), std::back_inserter(u));
        out.targets.push_back(std::move(u));
    }
    return out;
}

std::vector<EquivSignature> imec_signature_conservative(
    const Dag& g, const TargetFamily& fam) {
    std::vector<EquivSignature> out;
    out.reserve(fam.target_count());
    for (int k = 0; k < fam.target_count(); ++k) {
        out.push_back(imec_signature(g, relabeled_family(fam, k)));
    }
    return out;
}

bool i_markov_equivalent_conservative(const Dag& g1, const Dag& g2,
                                      const TargetFamily& fam) {
    if (!fam.is_conservative()) {
        throw std::invalid_argument("family is not conservative");
    }
    if (g1.node_count() != g2.node_count() || g1.node_count() != fam.p) {
        throw std::invalid_argument("node counts differ");
    }
    return imec_signature_conservative(g1, fam) ==
           imec_signature_conservative(g2, fam);
}

Dag intervened_subdag(const Dag& g, const std::vector<NodeId>& target) {
    Dag out(g.node_count());
    for (const auto& [a, b] : g.edges()) {
        if (!std::binary_search(target.begin(), target.end(), b)) {
            out.add_edge(a, b);
        }
    }
    return out;
}

std::vector<EquivSignature> perfect_imec_signature(const Dag& g,
                                                   const TargetFamily& fam) {
    std::vector<EquivSignature> out;
    out.reserve(fam.target_count());
    for (const auto& t : fam.targets) {
        out.push_back(signature_of(intervened_subdag(g, t)));
    }
    return out;
}

bool perfect_i_mec_equivalent(const Dag& g1, const Dag& g2,
                              const TargetFamily& fam) {
    if (!fam.is_conservative()) {
        throw std::invalid_argument("family is not conservative");
    }
    if (g1.node_count() != g2.node_count() || g1.node_count() != fam.p) {
        throw std::invalid_argument("node counts differ");
    }
    return perfect_imec_signature(g1, fam) == perfect_imec_signature(g2, fam);
}

}  // namespace causal
