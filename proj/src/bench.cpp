#include "causal/bench.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "causal/igsp.hpp"
#include "causal/io.hpp"
#include "causal/rng.hpp"
#include "causal/stats.hpp"

namespace causal {

using json = nlohmann::ordered_json;

namespace {

std::string kind_name(InterventionKind k) {
    switch (k) {
        case InterventionKind::perfect: return "perfect";
        case InterventionKind::inhibiting: return "inhibiting";
        case InterventionKind::imperfect: return "imperfect";
        case InterventionKind::shift: return "shift";
    }
    throw std::logic_error("bad intervention kind");
}

InterventionKind kind_of(const std::string& s) {
    if (s == "perfect") return InterventionKind::perfect;
    if (s == "inhibiting") return InterventionKind::inhibiting;
    if (s == "imperfect") return InterventionKind::imperfect;
    if (s == "shift") return InterventionKind::shift;
    throw std::invalid_argument("unknown intervention kind: " + s);
}

std::string family_name(FamilyGen f) {
    switch (f) {
        case FamilyGen::none: return "none";
        case FamilyGen::singletons: return "singletons";
        case FamilyGen::pairs: return "pairs";
        case FamilyGen::ksubset: return "ksubset";
    }
    throw std::logic_error("bad family generator");
}

FamilyGen family_of(const std::string& s) {
    if (s == "none") return FamilyGen::none;
    if (s == "singletons") return FamilyGen::singletons;
    if (s == "pairs") return FamilyGen::pairs;
    if (s == "ksubset") return FamilyGen::ksubset;
    throw std::invalid_argument("unknown family generator: " + s);
}

std::string decider_name(DeciderKind d) {
    switch (d) {
        case DeciderKind::hsic: return "hsic";
        case DeciderKind::gaussian: return "gaussian";
        case DeciderKind::oracle: return "oracle";
    }
    throw std::logic_error("bad decider kind");
}

DeciderKind decider_of(const std::string& s) {
    if (s == "hsic") return DeciderKind::hsic;
    if (s == "gaussian") return DeciderKind::gaussian;
    if (s == "oracle") return DeciderKind::oracle;
    throw std::invalid_argument("unknown decider: " + s);
}

}  // namespace

std::string plan_to_json(const ExperimentPlan& plan) {
    json j;
    j["p"] = plan.p;
    j["avg_neighborhood"] = plan.avg_neighborhood;
    j["n_per_block"] = plan.n_per_block;
    j["intervention"] = {{"kind", kind_name(plan.kind)},
                         {"factor", plan.factor},
                         {"alpha", plan.alpha_success},
                         {"shift_var", plan.shift_var}};
    j["family"] = {{"type", family_name(plan.family)}, {"k", plan.k}};
    j["replicates"] = plan.replicates;
    j["seed"] = plan.seed;
    j["decider"] = {{"type", decider_name(plan.decider)},
                    {"alpha_ci", plan.alpha_ci},
                    {"alpha_inv", plan.alpha_inv},
                    {"pool", plan.pool},
                    {"hsic_cap", plan.hsic_cap}};
    j["restarts"] = plan.restarts;
    j["threads"] = plan.threads;
    return j.dump(2) + "\n";
}

ExperimentPlan plan_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("plan JSON parse error: ") +
                                    e.what());
    }
    ExperimentPlan plan;
    plan.p = j.at("p").get<int>();
    plan.avg_neighborhood = j.at("avg_neighborhood").get<double>();
    plan.n_per_block = j.at("n_per_block").get<int>();
    const auto& iv = j.at("intervention");
    plan.kind = kind_of(iv.at("kind").get<std::string>());
    plan.factor = iv.value("factor", 10.0);
    plan.alpha_success = iv.value("alpha", 0.5);
    plan.shift_var = iv.value("shift_var", 1.0);
    const auto& fam = j.at("family");
    plan.family = family_of(fam.at("type").get<std::string>());
    plan.k = fam.value("k", 1);
    plan.replicates = j.at("replicates").get<int>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    const auto& dec = j.at("decider");
    plan.decider = decider_of(dec.at("type").get<std::string>());
    plan.alpha_ci = dec.value("alpha_ci", 1e-3);
    plan.alpha_inv = dec.value("alpha_inv", 1e-3);
    plan.pool = dec.value("pool", false);
    plan.hsic_cap = dec.value("hsic_cap", 1000);
    plan.restarts = j.value("restarts", 1);
    plan.threads = j.value("threads", 1);
    return plan;
}

std::string plan_config_hash(const ExperimentPlan& plan) {
    const std::string text = plan_to_json(plan);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) h = (h ^ c) * 1099511628211ull;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

int hamming_distance(const Dag& g1, const Dag& g2) {
    if (g1.node_count() != g2.node_count()) {
        throw std::invalid_argument("node counts differ");
    }
    int dist = 0;
    for (NodeId i = 0; i < g1.node_count(); ++i) {
        for (NodeId j = i + 1; j < g1.node_count(); ++j) {
            const int s1 = g1.has_edge(i, j) ? 1 : (g1.has_edge(j, i) ? 2 : 0);
            const int s2 = g2.has_edge(i, j) ? 1 : (g2.has_edge(j, i) ? 2 : 0);
            if (s1 != s2) ++dist;
        }
    }
    return dist;
}

int skeleton_hamming(const Dag& g1, const Dag& g2) {
    if (g1.node_count() != g2.node_count()) {
        throw std::invalid_argument("node counts differ");
    }
    int dist = 0;
    for (NodeId i = 0; i < g1.node_count(); ++i) {
        for (NodeId j = i + 1; j < g1.node_count(); ++j) {
            if (g1.adjacent(i, j) != g2.adjacent(i, j)) ++dist;
        }
    }
    return dist;
}

namespace {

std::vector<std::vector<NodeId>> family_targets(const ExperimentPlan& plan,
                                                std::uint64_t seed) {
    std::vector<std::vector<NodeId>> targets = {{}};
    switch (plan.family) {
        case FamilyGen::none:
            break;
        case FamilyGen::singletons:
            for (int i = 0; i < plan.p; ++i) targets.push_back({i});
            break;
        case FamilyGen::pairs:
            for (int i = 0; i < plan.p; ++i) {
                for (int j = i + 1; j < plan.p; ++j) targets.push_back({i, j});
            }
            break;
        case FamilyGen::ksubset: {
            if (plan.k < 1 || plan.k > plan.p) {
                throw std::invalid_argument("ksubset needs 1 <= k <= p");
            }
            Philox rng(seed, 0);
            std::vector<NodeId> nodes(plan.p);
            for (int v = 0; v < plan.p; ++v) nodes[v] = v;
            rng.shuffle(nodes);
            std::vector<NodeId> chosen(nodes.begin(), nodes.begin() + plan.k);
            std::sort(chosen.begin(), chosen.end());
            for (NodeId v : chosen) targets.push_back({v});
            break;
        }
    }
    return targets;
}

ReplicateRow run_replicate(const ExperimentPlan& plan, int r) {
    ReplicateRow row;
    row.replicate = r;
    row.seed = mix_seed(plan.seed, static_cast<std::uint64_t>(r));
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const Dag truth = sample_random_dag(plan.p, plan.avg_neighborhood,
                                            mix_seed(row.seed, 1));
        const SemModel model = sample_weights(truth, mix_seed(row.seed, 2));
        const auto targets = family_targets(plan, mix_seed(row.seed, 3));
        const TargetFamily fam = TargetFamily::of(plan.p, targets);

        std::vector<InterventionSpec> specs;
        for (const auto& t : fam.targets) {
            if (t.empty()) continue;
            InterventionSpec spec;
            spec.kind = plan.kind;
            spec.targets = t;
            spec.factor = plan.factor;
            spec.alpha = plan.alpha_success;
            spec.shift_var = plan.shift_var;
            specs.push_back(std::move(spec));
        }
        const MultiDataset data =
            sample_data(model, specs, plan.n_per_block, mix_seed(row.seed, 4));

        std::unique_ptr<CiDecider> ci;
        std::unique_ptr<InvarianceDecider> inv;
        if (plan.decider == DeciderKind::oracle) {
            ci = std::make_unique<DsepCiOracle>(truth);
            inv = std::make_unique<IdagInvarianceOracle>(truth, fam);
        } else {
            ci = std::make_unique<FisherZCiDecider>(data, plan.alpha_ci);
            inv = std::make_unique<DataInvarianceDecider>(
                data,
                plan.decider == DeciderKind::hsic ? InvarianceBacking::hsic
                                                  : InvarianceBacking::gaussian,
                plan.alpha_inv, plan.hsic_cap);
        }

        SearchConfig cfg;
        cfg.ci = ci.get();
        cfg.inv = inv.get();
        cfg.fam = fam;
        cfg.pool = plan.pool;
        cfg.rng_seed = mix_seed(row.seed, 5);
        cfg.max_restarts = plan.restarts;

        Permutation pi0 = Permutation::identity(plan.p);
        Philox rng(mix_seed(row.seed, 6), 0);
        rng.shuffle(pi0.order);

        const SearchResult result = igsp_search(cfg, pi0);
        row.true_edges = truth.edge_count();
        row.learned_edges = result.g.edge_count();
        row.hamming = hamming_distance(result.g, truth);
        row.skel_hamming = skeleton_hamming(result.g, truth);
        row.imec_member = i_markov_equivalent(result.g, truth, fam);
        row.ci_tests = ci->counters().evaluated.load();
        row.inv_tests = inv->counters().evaluated.load();
    } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
    }
    row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                               t0)
                     .count();
    return row;
}

double quantile(std::vector<double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

ExperimentSummary summarize(const std::vector<ReplicateRow>& rows) {
    ExperimentSummary s;
    s.replicates = static_cast<int>(rows.size());
    std::vector<double> hamming;
    int members = 0, ok = 0;
    for (const auto& row : rows) {
        if (row.failed) {
            ++s.failures;
            continue;
        }
        ++ok;
        hamming.push_back(row.hamming);
        if (row.imec_member) ++members;
    }
    std::sort(hamming.begin(), hamming.end());
    s.hamming_min = quantile(hamming, 0.0);
    s.hamming_q1 = quantile(hamming, 0.25);
    s.hamming_median = quantile(hamming, 0.5);
    s.hamming_q3 = quantile(hamming, 0.75);
    s.hamming_max = quantile(hamming, 1.0);
    s.imec_rate = ok > 0 ? static_cast<double>(members) / ok : 0.0;
    return s;
}

ExperimentResults run_experiment(const ExperimentPlan& plan) {
    if (plan.replicates < 1) throw std::invalid_argument("need replicates >= 1");
    ExperimentResults results;
    results.plan = plan;
    results.rows.resize(plan.replicates);

    const int threads = std::max(1, plan.threads);
    if (threads == 1) {
        for (int r = 0; r < plan.replicates; ++r) {
            results.rows[r] = run_replicate(plan, r);
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&]() {
                while (true) {
                    const int r = next.fetch_add(1);
                    if (r >= plan.replicates) return;
                    results.rows[r] = run_replicate(plan, r);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    results.summary = summarize(results.rows);
    return results;
}

std::string results_to_csv(const ExperimentResults& results) {
    std::string out =
        "replicate,seed,true_edges,learned_edges,hamming,skeleton_hamming,"
        "imec_member,ci_tests,inv_tests,wall_s,error\n";
    for (const auto& r : results.rows) {
        out += std::to_string(r.replicate) + ',' + std::to_string(r.seed) + ',' +
               std::to_string(r.true_edges) + ',' +
               std::to_string(r.learned_edges) + ',' +
               std::to_string(r.hamming) + ',' + std::to_string(r.skel_hamming) +
               ',' + (r.imec_member ? "1" : "0") + ',' +
               std::to_string(r.ci_tests) + ',' + std::to_string(r.inv_tests) +
               ',' + format_double(r.wall_s) + ',' + r.error + "\n";
    }
    return out;
}

std::string results_manifest_json(const ExperimentResults& results) {
    json j;
    j["config_hash"] = plan_config_hash(results.plan);
    j["plan"] = json::parse(plan_to_json(results.plan));
    const ExperimentSummary& s = results.summary;
    j["summary"] = {{"replicates", s.replicates},
                    {"failures", s.failures},
                    {"hamming_min", s.hamming_min},
                    {"hamming_q1", s.hamming_q1},
                    {"hamming_median", s.hamming_median},
                    {"hamming_q3", s.hamming_q3},
                    {"hamming_max", s.hamming_max},
                    {"imec_rate", s.imec_rate}};
    return j.dump(2) + "\n";
}

}  // namespace causal
