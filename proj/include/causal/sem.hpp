#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "causal/graph.hpp"
#include "causal/interventions.hpp"
#include "causal/matrix.hpp"

namespace causal {

// Linear Gaussian structural equation model:
//   X_j = sum_{i in pa(j)} w_ij X_i + eps_j,   eps_j ~ N(0, noise_var_j).
struct SemModel {
    Dag g;
    std::map<Edge, double> weights;   // keyed exactly by g.edges()
    std::vector<double> noise_var;    // one per node, all positive

    SemModel() : g(1), noise_var(1, 1.0) {}

    void validate() const;
    // True when some |weight| falls outside the generation-time range
    // [0.25, 1]; user-supplied models may do this deliberately.
    bool has_out_of_range_weights() const;
};

enum class InterventionKind { perfect, inhibiting, imperfect, shift };

struct InterventionSpec {
    InterventionKind kind = InterventionKind::perfect;
    std::vector<NodeId> targets;   // nonempty, sorted
    double factor = 10.0;          // inhibiting divisor, > 1
    double alpha = 0.5;            // imperfect success rate, in (0,1)
    double shift_var = 1.0;        // added noise variance for shift

    void validate(int p) const;
};

// Result of applying an intervention: a model, or for imperfect
// interventions a two-component mixture resolved per sample at draw time.
struct BlockModel {
    SemModel applied;                  // the (possibly modified) model
    std::optional<SemModel> fallback;  // original model, mixtures only
    double success_prob = 1.0;

    bool is_mixture() const { return fallback.has_value(); }
};

BlockModel apply_intervention(const SemModel& m, const InterventionSpec& spec);

struct MultiDataset {
    TargetFamily fam;
    std::vector<ColMatrix> blocks;  // aligned with fam.targets
    // Per block, per row: 1 when the intervention took effect in that draw.
    // Trivially all-1 outside mixtures; exposed for tests.
    std::vector<std::vector<std::uint8_t>> success;

    int p() const { return fam.p; }
    int block_count() const { return static_cast<int>(blocks.size()); }

    bool operator==(const MultiDataset&) const = default;
};

// Random DAG with a uniformly random topological order; each order-respecting
// pair becomes an edge independently with probability avg_neighborhood/(p-1).
Dag sample_random_dag(int p, double avg_neighborhood, std::uint64_t seed);

// Edge weights uniform on [-1, -0.25] u [0.25, 1]; unit noise variances.
SemModel sample_weights(const Dag& g, std::uint64_t seed);

// Block 0 holds observational draws, block k the draws under specs[k-1].
// Each block uses its own counter substream, so the result is a pure
// function of (model, specs, n_per_block, seed).
MultiDataset sample_data(const SemModel& m,
                         const std::vector<InterventionSpec>& specs,
                         int n_per_block, std::uint64_t seed);

// Closed-form covariance (I - W^T)^{-1} D (I - W)^{-1}.
ColMatrix implied_covariance(const SemModel& m);

}  // namespace causal
