#include "causal/sem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "causal/rng.hpp"

namespace causal {

void SemModel::validate() const {
    const auto edges = g.edges();
    if (weights.size() != edges.size()) {
        throw std::invalid_argument("weights must be keyed exactly by the edges");
    }
    for (const auto& e : edges) {
        if (weights.find(e) == weights.end()) {
            throw std::invalid_argument("missing weight for edge (" +
                                        std::to_string(e.first) + "," +
                                        std::to_string(e.second) + ")");
        }
    }
    if (static_cast<int>(noise_var.size()) != g.node_count()) {
        throw std::invalid_argument("noise_var size does not match node count");
    }
    for (double v : noise_var) {
        if (!(v > 0.0)) throw std::invalid_argument("noise variances must be positive");
    }
}

bool SemModel::has_out_of_range_weights() const {
    for (const auto& [e, w] : weights) {
        const double a = std::abs(w);
        if (a < 0.25 || a > 1.0) return true;
    }
    return false;
}

void InterventionSpec::validate(int p) const {
    if (targets.empty()) {
        throw std::invalid_argument("intervention target set must be nonempty");
    }
    for (NodeId v : targets) {
        if (v < 0 || v >= p) {
            throw std::invalid_argument("target node out of range");
        }
    }
    if (kind == InterventionKind::inhibiting && !(factor > 1.0)) {
        throw std::invalid_argument("inhibiting factor must exceed 1");
    }
    if (kind == InterventionKind::imperfect && !(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("imperfect success rate must lie in (0,1)");
    }
    if (kind == InterventionKind::shift && !(shift_var > 0.0)) {
        throw std::invalid_argument("shift variance must be positive");
    }
}

namespace {

SemModel zero_incoming(const SemModel& m, const std::vector<NodeId>& targets) {
    SemModel out = m;
    for (auto& [e, w] : out.weights) {
        if (std::binary_search(targets.begin(), targets.end(), e.second)) w = 0.0;
    }
    return out;
}

}  // namespace

BlockModel apply_intervention(const SemModel& m, const InterventionSpec& spec) {
    spec.validate(m.g.node_count());
    BlockModel out;
    switch (spec.kind) {
        case InterventionKind::perfect:
            out.applied = zero_incoming(m, spec.targets);
            break;
        case InterventionKind::inhibiting: {
            out.applied = m;
            for (auto& [e, w] : out.applied.weights) {
                if (std::binary_search(spec.targets.begin(), spec.targets.end(),
                                       e.second)) {
                    w /= spec.factor;
                }
            }
            break;
        }
        case InterventionKind::imperfect:
            out.applied = zero_incoming(m, spec.targets);
            out.fallback = m;
            out.success_prob = spec.alpha;
            break;
        case InterventionKind::shift: {
            out.applied = m;
            for (NodeId t : spec.targets) out.applied.noise_var[t] += spec.shift_var;
            break;
        }
    }
    return out;
}

Dag sample_random_dag(int p, double avg_neighborhood, std::uint64_t seed) {
    if (p < 2) throw std::invalid_argument("need at least two nodes");
    if (!(avg_neighborhood > 0.0) || !(avg_neighborhood < p)) {
        throw std::invalid_argument("average neighborhood size must lie in (0, p)");
    }
    const double q = std::min(1.0, avg_neighborhood / (p - 1));
    Philox rng(seed, 0);
    std::vector<NodeId> order(p);
    for (int k = 0; k < p; ++k) order[k] = k;
    rng.shuffle(order);
    Dag g(p);
    for (int a = 0; a < p; ++a) {
        for (int b = a + 1; b < p; ++b) {
            if (rng.next_double() < q) g.add_edge(order[a], order[b]);
        }
    }
    return g;
}

SemModel sample_weights(const Dag& g, std::uint64_t seed) {
    Philox rng(seed, 0);
    SemModel m;
    m.g = g;
    for (const auto& e : g.edges()) {
        const double sign = rng.next_double() < 0.5 ? -1.0 : 1.0;
        const double mag = 0.25 + 0.75 * rng.next_double();
        m.weights[e] = sign * mag;
    }
    m.noise_var.assign(g.node_count(), 1.0);
    return m;
}

namespace {

struct SamplerModel {
    // Per node: parent list and matching weights, plus noise standard
    // deviations, laid out for the forward pass.
    std::vector<std::vector<std::pair<NodeId, double>>> parents;
    std::vector<double> noise_sd;

    explicit SamplerModel(const SemModel& m) {
        const int p = m.g.node_count();
        parents.resize(p);
        noise_sd.resize(p);
        for (int j = 0; j < p; ++j) noise_sd[j] = std::sqrt(m.noise_var[j]);
        for (const auto& [e, w] : m.weights) parents[e.second].emplace_back(e.first, w);
        for (auto& lst : parents) std::sort(lst.begin(), lst.end());
    }
};

void draw_block(const BlockModel& bm, const std::vector<NodeId>& topo, int n,
                Philox& rng, ColMatrix& out, std::vector<std::uint8_t>& success) {
    const int p = static_cast<int>(out.cols);
    const SamplerModel applied(bm.applied);
    std::optional<SamplerModel> fallback;
    if (bm.fallback) fallback.emplace(*bm.fallback);

    std::vector<double> eps(p);
    success.assign(n, 1);
    for (int r = 0; r < n; ++r) {
        bool ok = true;
        if (bm.is_mixture()) {
            ok = rng.next_double() < bm.success_prob;
            success[r] = ok ? 1 : 0;
        }
        const SamplerModel& sm = ok ? applied : *fallback;
        for (int j = 0; j < p; ++j) eps[j] = rng.next_normal() * sm.noise_sd[j];
        for (NodeId j : topo) {
            double x = eps[j];
            for (const auto& [i, w] : sm.parents[j]) x += w * out.at(r, i);
            out.at(r, j) = x;
        }
    }
}

}  // namespace

MultiDataset sample_data(const SemModel& m,
                         const std::vector<InterventionSpec>& specs,
                         int n_per_block, std::uint64_t seed) {
    if (n_per_block < 1) throw std::invalid_argument("need at least one sample per block");
    m.validate();
    const int p = m.g.node_count();
    const auto topo = m.g.topological_order();

    MultiDataset out;
    std::vector<std::vector<NodeId>> targets;
    targets.push_back({});
    for (const auto& spec : specs) {
        spec.validate(p);
        targets.push_back(spec.targets);
    }
    out.fam = TargetFamily::of(p, std::move(targets));

    out.blocks.reserve(specs.size() + 1);
    out.success.resize(specs.size() + 1);
    for (int b = 0; b <= static_cast<int>(specs.size()); ++b) {
        BlockModel bm;
        if (b == 0) {
            bm.applied = m;
        } else {
            bm = apply_intervention(m, specs[b - 1]);
        }
        Philox rng(seed, static_cast<std::uint64_t>(b));
        ColMatrix block(n_per_block, p);
        draw_block(bm, topo, n_per_block, rng, block, out.success[b]);
        out.blocks.push_back(std::move(block));
    }
    return out;
}

ColMatrix implied_covariance(const SemModel& m) {
    m.validate();
    const int p = m.g.node_count();
    // Rows of M = (I - W^T)^{-1} by forward substitution in topological
    // order: X = M eps.
    ColMatrix M(p, p);
    for (NodeId j : m.g.topological_order()) {
        M.at(j, j) = 1.0;
        const Bitset& pa = m.g.parents(j);
        for (auto i = pa.find_first(); i != Bitset::npos; i = pa.find_next(i)) {
            const double w = m.weights.at({static_cast<NodeId>(i), j});
            for (int k = 0; k < p; ++k) M.at(j, k) += w * M.at(i, k);
        }
    }
    ColMatrix sigma(p, p);
    for (int a = 0; a < p; ++a) {
        for (int b = a; b < p; ++b) {
            double s = 0.0;
            for (int k = 0; k < p; ++k) {
                s += M.at(a, k) * m.noise_var[k] * M.at(b, k);
            }
            sigma.at(a, b) = s;
            sigma.at(b, a) = s;
        }
    }
    return sigma;
}

}  // namespace causal
