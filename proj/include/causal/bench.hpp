#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "causal/graph.hpp"
#include "causal/sem.hpp"

namespace causal {

enum class FamilyGen { none, singletons, pairs, ksubset };
enum class DeciderKind { hsic, gaussian, oracle };

struct ExperimentPlan {
    int p = 10;
    double avg_neighborhood = 1.5;
    int n_per_block = 1000;
    InterventionKind kind = InterventionKind::perfect;
    double factor = 10.0;
    double alpha_success = 0.5;
    double shift_var = 1.0;
    FamilyGen family = FamilyGen::singletons;
    int k = 1;  // ksubset: number of randomly chosen singleton targets
    int replicates = 1;
    std::uint64_t seed = 0;
    DeciderKind decider = DeciderKind::gaussian;
    double alpha_ci = 1e-3;
    double alpha_inv = 1e-3;
    bool pool = false;
    int restarts = 1;
    int hsic_cap = 1000;
    int threads = 1;
};

ExperimentPlan plan_from_json(const std::string& text);
std::string plan_to_json(const ExperimentPlan& plan);
// FNV-1a hash of the canonical serialization, hex-encoded.
std::string plan_config_hash(const ExperimentPlan& plan);

// Count of node pairs whose edge status (absent / -> / <-) differs; a
// reversed edge counts once.
int hamming_distance(const Dag& g1, const Dag& g2);
// Symmetric difference of the skeletons.
int skeleton_hamming(const Dag& g1, const Dag& g2);

struct ReplicateRow {
    int replicate = 0;
    std::uint64_t seed = 0;
    int true_edges = 0;
    int learned_edges = 0;
    int hamming = -1;
    int skel_hamming = -1;
    bool imec_member = false;
    long ci_tests = 0;
    long inv_tests = 0;
    double wall_s = 0.0;
    bool failed = false;
    std::string error;
};

struct ExperimentSummary {
    int replicates = 0;
    int failures = 0;
    double hamming_min = 0, hamming_q1 = 0, hamming_median = 0, hamming_q3 = 0,
           hamming_max = 0;
    double imec_rate = 0.0;
};

struct ExperimentResults {
    ExperimentPlan plan;
    std::vector<ReplicateRow> rows;
    ExperimentSummary summary;
};

ExperimentResults run_experiment(const ExperimentPlan& plan);

// CSV with one row per replicate plus a trailing summary comment block.
std::string results_to_csv(const ExperimentResults& results);
std::string results_manifest_json(const ExperimentResults& results);

// Summary recomputation used by tests (aggregates carry no hidden state).
ExperimentSummary summarize(const std::vector<ReplicateRow>& rows);

}  // namespace causal
