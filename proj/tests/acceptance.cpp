// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exit code 0 iff all pass.
//
// Usage: acceptance --cli <path-to-igsp-binary> --golden <thresholds.json>
//        [--only <n>] [--pilot]
//
// --pilot prints the measured statistics used to freeze the golden
// thresholds instead of enforcing them.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "causal/bench.hpp"
#include "causal/enumeration.hpp"
#include "causal/igsp.hpp"
#include "causal/io.hpp"
#include "causal/rng.hpp"
#include "causal/sem.hpp"
#include "causal/stats.hpp"

using namespace causal;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct Context {
    std::string cli;
    std::string golden_path;
    json golden;
    bool pilot = false;
    int failures = 0;

    void report(int criterion, bool pass, const std::string& detail) {
        std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
                    detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }
};

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

Dag make(int p, std::initializer_list<Edge> edges) {
    return Dag::from_edges(p, std::vector<Edge>(edges));
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: the three graphical criteria agree over the full battery.

void criterion_1(Context& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    long mismatches = 0;
    int families = 0;
    long pairs = 0;
    for (int p = 2; p <= 4; ++p) {
        const DagCatalog cat = enumerate_dags(p);
        const auto battery = standard_family_battery(p, 20, 424200 + p);
        const auto report = cross_validate_theorems(cat, battery);
        mismatches += static_cast<long>(report.mismatches.size());
        families += report.families_checked;
        pairs += report.pair_universe;
    }
    const double secs = elapsed_s(t0);
    ctx.report(1, mismatches == 0 && secs < 60.0,
               "theorem battery: " + std::to_string(mismatches) +
                   " mismatches over " + std::to_string(families) +
                   " families / " + std::to_string(pairs) + " DAG pairs in " +
                   fmt(secs) + " s (target < 60 s)");
}

// ---------------------------------------------------------------------------
// Criterion 2: worked examples, zero tolerance. Node labels in the comments
// are the paper's 1-based ones; code is 0-based.

void criterion_2(Context& ctx) {
    int checks = 0, ok = 0;
    auto expect = [&](bool cond) {
        ++checks;
        if (cond) ++ok;
    };

    const Dag chain = make(3, {{0, 1}, {1, 2}});      // 1 -> 2 -> 3
    const Dag fork = make(3, {{1, 0}, {1, 2}});       // 1 <- 2 -> 3
    const Dag rev_chain = make(3, {{2, 1}, {1, 0}});  // 1 <- 2 <- 3

    // Intervention-graph construction for the chain with targets {2}, {3}.
    {
        const TargetFamily fam = TargetFamily::of(3, {{}, {1}, {2}});
        const IDag idag = build_idag(chain, fam);
        expect(idag.graph.node_count() == 5);
        expect(idag.zeta_of_target == std::vector<int>{-1, 3, 4});
        expect(idag.graph.edges() ==
               std::vector<Edge>{{0, 1}, {1, 2}, {3, 1}, {4, 2}});
    }
    // Invariance statements read off that graph.
    {
        const TargetFamily fam = TargetFamily::of(3, {{}, {1}, {2}});
        const IdagInvarianceOracle inv(chain, fam);
        expect(inv.query(0, {}, 1).invariant);   // X1 under target {2}
        expect(inv.query(0, {}, 2).invariant);   // X1 under target {3}
        expect(inv.query(2, std::vector<NodeId>{1}, 1).invariant);  // X3 | X2
        expect(inv.query(1, std::vector<NodeId>{0}, 2).invariant);  // X2 | X1
        expect(!inv.query(1, {}, 1).invariant);  // targeted variable varies
    }
    // Chain MEC under {}, {1}, {2,3}: the chain leaves the class of the
    // other two members.
    {
        const TargetFamily fam = TargetFamily::of(3, {{}, {0}, {1, 2}});
        expect(!i_markov_equivalent(chain, fork, fam));
        expect(!i_markov_equivalent(chain, rev_chain, fam));
        expect(i_markov_equivalent(fork, rev_chain, fam));
    }
    // Conservative family {2},{3} without observational data: same split,
    // and the relabeled family around {2} is {{}, {2,3}}.
    {
        const TargetFamily fam = TargetFamily::of(3, {{1}, {2}});
        expect(relabeled_family(fam, 0).targets ==
               std::vector<std::vector<NodeId>>{{}, {1, 2}});
        expect(relabeled_family(fam, 1).targets ==
               std::vector<std::vector<NodeId>>{{}, {1, 2}});
        expect(!i_markov_equivalent_conservative(chain, fork, fam));
        expect(!i_markov_equivalent_conservative(chain, rev_chain, fam));
        expect(i_markov_equivalent_conservative(fork, rev_chain, fam));
    }
    // Two nodes under single-node targets on both: equivalent.
    {
        const TargetFamily fam = TargetFamily::of(2, {{0}, {1}});
        expect(i_markov_equivalent_conservative(make(2, {{0, 1}}),
                                                make(2, {{1, 0}}), fam));
    }
    ctx.report(2, ok == checks,
               "worked examples: " + std::to_string(ok) + "/" +
                   std::to_string(checks) + " boolean checks");
}

// ---------------------------------------------------------------------------
// Criteria 3 and 4: oracle consistency of the search plus trace audits.

void criterion_3_4(Context& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    int instances = 0, correct = 0;
    long runs = 0;
    bool traces_ok = true;
    Philox fam_rng(77001, 0);

    for (int inst = 0; inst < 200; ++inst) {
        const int p = 4 + inst % 3;
        const double density = (inst / 3) % 2 == 0 ? 1.0 : 1.5;
        const Dag truth = sample_random_dag(p, density, 50000 + inst);
        // random family with the empty target (hence conservative)
        std::vector<std::vector<NodeId>> targets = {{}};
        const int count = 1 + static_cast<int>(fam_rng.next_below(3));
        for (int t = 0; t < count; ++t) {
            std::vector<NodeId> target;
            for (NodeId v = 0; v < p; ++v) {
                if (fam_rng.next_double() < 0.4) target.push_back(v);
            }
            if (target.empty()) {
                target.push_back(static_cast<NodeId>(fam_rng.next_below(p)));
            }
            targets.push_back(std::move(target));
        }
        const TargetFamily fam = TargetFamily::of(p, targets);
        const DsepCiOracle ci(truth);
        const IdagInvarianceOracle inv(truth, fam);
        SearchConfig cfg;
        cfg.ci = &ci;
        cfg.inv = &inv;
        cfg.fam = fam;

        bool instance_ok = true;
        Philox start_rng(60000 + inst, 0);
        for (int s = 0; s < 5; ++s) {
            Permutation pi0 = Permutation::identity(p);
            start_rng.shuffle(pi0.order);
            const SearchResult res = igsp_search(cfg, pi0);
            ++runs;
            if (!i_markov_equivalent(res.g, truth, fam)) instance_ok = false;

            int last_restart = -1;
            for (const TraceEntry& e : res.trace.entries) {
                if (e.restart) {
                    if (last_restart >= 0 && e.imap_edges > last_restart) {
                        traces_ok = false;
                    }
                    last_restart = e.imap_edges;
                } else if (!e.i_covered || !e.move.has_value()) {
                    traces_ok = false;
                }
            }
        }
        ++instances;
        if (instance_ok) ++correct;
    }
    const double secs = elapsed_s(t0);
    ctx.report(3, correct == instances && secs < 300.0,
               "oracle consistency: " + std::to_string(correct) + "/" +
                   std::to_string(instances) + " instances (" +
                   std::to_string(runs) + " searches) in " + fmt(secs) +
                   " s (target < 300 s)");
    ctx.report(4, traces_ok,
               "search traces: weakly decreasing restart sizes and i-covered "
               "moves only, across all criterion-3 searches");
}

// ---------------------------------------------------------------------------
// Criterion 5: statistical calibration under true nulls.

void criterion_5(Context& ctx) {
    const int trials = 2000;
    const int n = 1000;
    std::vector<double> p_fisher, p_hsic, p_gauss;
    p_fisher.reserve(trials);
    p_hsic.reserve(trials);
    p_gauss.reserve(trials);

    for (int t = 0; t < trials; ++t) {
        Philox rng(90000 + t, 0);
        ColMatrix pair(n, 2);
        for (int r = 0; r < n; ++r) {
            pair.at(r, 0) = rng.next_normal();
            pair.at(r, 1) = rng.next_normal();
        }
        p_fisher.push_back(fisher_z_ci(pair, 0, 1, {}, 0.5).p_value);

        std::vector<double> x(n);
        for (auto& v : x) v = rng.next_normal();
        p_hsic.push_back(hsic_gamma_test(x, n / 2, 0.5).p_value);

        ColMatrix b0(n / 2, 1), b1(n / 2, 1);
        for (int r = 0; r < n / 2; ++r) {
            b0.at(r, 0) = rng.next_normal();
            b1.at(r, 0) = rng.next_normal();
        }
        p_gauss.push_back(gaussian_invariance(b0, b1, 0, {}, 0.5).p_value);
    }

    bool pass = true;
    std::string detail = "null rejection rates:";
    for (const auto& [name, ps] :
         {std::pair{"fisher_z", &p_fisher}, {"hsic", &p_hsic},
          {"gaussian", &p_gauss}}) {
        for (double alpha : {0.01, 0.05}) {
            int rej = 0;
            for (double p : *ps) {
                if (p < alpha) ++rej;
            }
            const double rate = static_cast<double>(rej) / trials;
            const bool ok = std::abs(rate - alpha) <= 0.025;
            pass = pass && ok;
            detail += std::string(" ") + name + "@" + fmt(alpha) + "=" +
                      fmt(rate);
        }
    }
    ctx.report(5, pass, detail + " (tolerance +/- 2.5 pp, n=1000, " +
                            std::to_string(trials) + " trials)");
}

// ---------------------------------------------------------------------------
// Criterion 6: finite-sample behaviour of the full pipeline.

ExperimentPlan base_plan_p10() {
    ExperimentPlan plan;
    plan.p = 10;
    plan.avg_neighborhood = 1.5;
    plan.family = FamilyGen::singletons;
    plan.kind = InterventionKind::perfect;
    plan.replicates = 100;
    plan.decider = DeciderKind::hsic;
    plan.alpha_ci = 1e-3;
    plan.alpha_inv = 1e-3;
    plan.hsic_cap = 1000;
    plan.seed = 20260809;
    return plan;
}

void criterion_6(Context& ctx) {
    const auto t0 = std::chrono::steady_clock::now();

    // (a) perfect singleton interventions across sample sizes
    std::vector<double> medians;
    double imec_rate_at_10k = 0.0;
    for (const int n : {500, 2000, 10000}) {
        ExperimentPlan plan = base_plan_p10();
        plan.n_per_block = n;
        const ExperimentResults res = run_experiment(plan);
        medians.push_back(res.summary.hamming_median);
        if (n == 10000) imec_rate_at_10k = res.summary.imec_rate;
    }
    int inversions = 0;
    for (std::size_t k = 1; k < medians.size(); ++k) {
        if (medians[k] > medians[k - 1]) ++inversions;
    }

    // (b) non-perfect interventions against the observational baseline
    ExperimentPlan obs_plan = base_plan_p10();
    obs_plan.family = FamilyGen::none;
    obs_plan.n_per_block = 10000;
    const double obs_median = run_experiment(obs_plan).summary.hamming_median;

    ExperimentPlan inhib_plan = base_plan_p10();
    inhib_plan.kind = InterventionKind::inhibiting;
    inhib_plan.n_per_block = 10000;
    const double inhib_median =
        run_experiment(inhib_plan).summary.hamming_median;

    ExperimentPlan imperf_plan = base_plan_p10();
    imperf_plan.kind = InterventionKind::imperfect;
    imperf_plan.n_per_block = 10000;
    const double imperf_median =
        run_experiment(imperf_plan).summary.hamming_median;

    const double secs = elapsed_s(t0);
    const std::string detail =
        "medians(n=500,2000,10000)=(" + fmt(medians[0]) + "," + fmt(medians[1]) +
        "," + fmt(medians[2]) + ") inversions=" + std::to_string(inversions) +
        " imec_rate@10k=" + fmt(imec_rate_at_10k) + " obs=" + fmt(obs_median) +
        " inhibiting=" + fmt(inhib_median) + " imperfect=" +
        fmt(imperf_median) + " [" + fmt(secs) + " s]";

    if (ctx.pilot) {
        std::printf("[PILOT] criterion 6: %s\n", detail.c_str());
        return;
    }
    const double rate_min = ctx.golden.at("imec_rate_min").get<double>();
    const bool pass_a = imec_rate_at_10k >= rate_min && inversions <= 1;
    const bool pass_b = inhib_median < obs_median && imperf_median < obs_median;
    ctx.report(6, pass_a && pass_b,
               detail + " | (a) rate >= " + fmt(rate_min) +
                   " and medians non-increasing: " + (pass_a ? "ok" : "FAILED") +
                   " | (b) non-perfect medians strictly below observational: " +
                   (pass_b ? "ok" : "FAILED"));
}

// ---------------------------------------------------------------------------
// Criterion 7: the pooling conditions bind.

struct PoolFixture {
    SemModel model;
    Dag g_pi{1};
    Permutation pi;
    TargetFamily fam;
    NodeId i = 0, k = 0;
    std::vector<NodeId> cond;
};

// chain 0 -> 1 -> 2, hypothesis DAG complete over (0, 1, 2); the tested edge
// 0 -> 2 is spurious (X2 and X0 are separated by X1).
PoolFixture chain_fixture() {
    PoolFixture f;
    f.model.g = make(3, {{0, 1}, {1, 2}});
    f.model.weights[{0, 1}] = 0.8;
    f.model.weights[{1, 2}] = 0.7;
    f.model.noise_var = {1.0, 1.0, 1.0};
    f.g_pi = make(3, {{0, 1}, {0, 2}, {1, 2}});
    f.pi = Permutation::of({0, 1, 2});
    f.fam = TargetFamily::of(3, {{}, {2}, {1, 2}});
    f.i = 2;
    f.k = 0;
    f.cond = {1};
    return f;
}

// collider 0 -> 2 <- 1, hypothesis with the spurious edge 0 -> 1; the tested
// pair (1, 0) is marginally independent.
PoolFixture collider_fixture() {
    PoolFixture f;
    f.model.g = make(3, {{0, 2}, {1, 2}});
    f.model.weights[{0, 2}] = 0.8;
    f.model.weights[{1, 2}] = 0.7;
    f.model.noise_var = {1.0, 1.0, 1.0};
    f.g_pi = make(3, {{0, 1}, {0, 2}, {1, 2}});
    f.pi = Permutation::of({0, 1, 2});
    f.fam = TargetFamily::of(3, {{}, {1}, {0, 1}});
    f.i = 1;
    f.k = 0;
    f.cond = {};
    return f;
}

double pooled_rejection_rate(const PoolFixture& f, const std::vector<int>& pool,
                             double alpha, int trials, std::uint64_t seed) {
    std::vector<InterventionSpec> specs;
    for (const auto& t : f.fam.targets) {
        if (t.empty()) continue;
        InterventionSpec spec;
        spec.kind = InterventionKind::perfect;
        spec.targets = t;
        specs.push_back(std::move(spec));
    }
    int rejections = 0;
    for (int t = 0; t < trials; ++t) {
        const MultiDataset data =
            sample_data(f.model, specs, 500, mix_seed(seed, t));
        const FisherZCiDecider ci(data, alpha);
        if (!ci.query_pooled(f.i, f.k, f.cond, pool).independent) ++rejections;
    }
    return static_cast<double>(rejections) / trials;
}

void criterion_7(Context& ctx) {
    const double alpha = 0.05;
    const int trials = 2000;

    const PoolFixture chain = chain_fixture();
    const auto chain_eligible =
        pool_eligible_blocks(chain.g_pi, chain.pi, chain.fam, chain.i, chain.k);
    const PoolFixture collider = collider_fixture();
    const auto collider_eligible = pool_eligible_blocks(
        collider.g_pi, collider.pi, collider.fam, collider.i, collider.k);

    // {2} pools, {1,2} does not (node 1 is an ancestor of the tested node);
    // symmetrically for the collider fixture.
    const bool eligibility_ok = chain_eligible == std::vector<int>{1} &&
                                collider_eligible == std::vector<int>{1};

    const double chain_elig_rate =
        pooled_rejection_rate(chain, {1}, alpha, trials, 111);
    const double chain_inelig_rate =
        pooled_rejection_rate(chain, {1, 2}, alpha, trials, 222);
    const double collider_elig_rate =
        pooled_rejection_rate(collider, {1}, alpha, trials, 333);

    const bool pass = eligibility_ok &&
                      std::abs(chain_elig_rate - alpha) <= 0.025 &&
                      std::abs(collider_elig_rate - alpha) <= 0.025 &&
                      chain_inelig_rate > 3.0 * alpha;
    ctx.report(
        7, pass,
        "pooling: eligible rates chain=" + fmt(chain_elig_rate) + " collider=" +
            fmt(collider_elig_rate) + " (target " + fmt(alpha) +
            " +/- 2.5 pp), ineligible chain rate=" + fmt(chain_inelig_rate) +
            " (must exceed " + fmt(3.0 * alpha) + ")");
}

// ---------------------------------------------------------------------------
// Criterion 8: byte-level determinism through the command line.

int run_cli(const std::string& args) {
    const int rc = std::system(args.c_str());
    return rc;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// results.csv with the wall_s column blanked (the one legitimately
// non-deterministic field).
std::string strip_wall(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    std::getline(in, line);
    out += line + "\n";
    while (std::getline(in, line)) {
        // wall_s is the second-to-last comma-separated field
        const auto last = line.rfind(',');
        if (last == std::string::npos) continue;
        const auto prev = line.rfind(',', last - 1);
        out += line.substr(0, prev + 1) + line.substr(last) + "\n";
    }
    return out;
}

void criterion_8(Context& ctx) {
    const fs::path dir = fs::temp_directory_path() / "igsp_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir / "a");
    fs::create_directories(dir / "b");

    bool pass = true;
    std::string detail;
    for (const std::string run : {"a", "b"}) {
        const fs::path d = dir / run;
        std::string cmd = ctx.cli + " --seed 31415 --log-level quiet simulate" +
                          " --p 8 --n 400 --kind imperfect" +
                          " --targets singletons --out-model " +
                          (d / "model.json").string() + " --out-data " +
                          (d / "data.csv").string();
        pass = pass && run_cli(cmd) == 0;
        cmd = ctx.cli + " --seed 27182 --log-level quiet learn --data " +
              (d / "data.csv").string() + " --test gaussian --pi0 random" +
              " --out " + (d / "learned.json").string() + " --test-log " +
              (d / "log.csv").string();
        pass = pass && run_cli(cmd) == 0;

        write_file((d / "plan.json").string(), R"({
  "p": 5, "avg_neighborhood": 1.5, "n_per_block": 400,
  "intervention": {"kind": "perfect"},
  "family": {"type": "singletons"},
  "replicates": 3, "seed": 777,
  "decider": {"type": "gaussian", "alpha_ci": 0.001, "alpha_inv": 0.001}
})");
        cmd = ctx.cli + " --log-level quiet bench --plan " +
              (d / "plan.json").string() + " --out-dir " + d.string();
        pass = pass && run_cli(cmd) == 0;
    }

    if (pass) {
        const bool data_same =
            slurp(dir / "a/data.csv") == slurp(dir / "b/data.csv");
        const bool model_same =
            slurp(dir / "a/model.json") == slurp(dir / "b/model.json");
        const bool learn_same =
            slurp(dir / "a/learned.json") == slurp(dir / "b/learned.json");
        const bool log_same = slurp(dir / "a/log.csv") == slurp(dir / "b/log.csv");
        const bool bench_same =
            strip_wall(slurp(dir / "a/results.csv")) ==
                strip_wall(slurp(dir / "b/results.csv")) &&
            slurp(dir / "a/manifest.json") == slurp(dir / "b/manifest.json");
        pass = data_same && model_same && learn_same && log_same && bench_same;
        detail = std::string("dataset csv ") + (data_same ? "ok" : "DIFFERS") +
                 ", model json " + (model_same ? "ok" : "DIFFERS") +
                 ", learn json+trace " + (learn_same ? "ok" : "DIFFERS") +
                 ", test log " + (log_same ? "ok" : "DIFFERS") +
                 ", bench outputs " + (bench_same ? "ok" : "DIFFERS");
    } else {
        detail = "CLI invocation failed";
    }
    ctx.report(8, pass, "two identical runs: " + detail);
}

}  // namespace

int main(int argc, char** argv) {
    Context ctx;
    int only = 0;
    for (int a = 1; a < argc; ++a) {
        const std::string arg = argv[a];
        if (arg == "--cli" && a + 1 < argc) ctx.cli = argv[++a];
        if (arg == "--golden" && a + 1 < argc) ctx.golden_path = argv[++a];
        if (arg == "--only" && a + 1 < argc) only = std::atoi(argv[++a]);
        if (arg == "--pilot") ctx.pilot = true;
    }
    if (ctx.cli.empty() || ctx.golden_path.empty()) {
        std::cerr << "usage: acceptance --cli <igsp> --golden <json> "
                     "[--only n] [--pilot]\n";
        return 2;
    }
    try {
        ctx.golden = json::parse(read_file(ctx.golden_path));
    } catch (const std::exception& e) {
        std::cerr << "cannot read golden thresholds: " << e.what() << "\n";
        return 2;
    }

    const auto want = [&](int n) { return only == 0 || only == n; };
    try {
        if (want(1)) criterion_1(ctx);
        if (want(2)) criterion_2(ctx);
        if (want(3) || want(4)) criterion_3_4(ctx);
        if (want(5)) criterion_5(ctx);
        if (want(6)) criterion_6(ctx);
        if (want(7)) criterion_7(ctx);
        if (want(8)) criterion_8(ctx);
    } catch (const std::exception& e) {
        std::cerr << "acceptance suite aborted: " << e.what() << "\n";
        return 3;
    }
    if (ctx.failures > 0) {
        std::printf("%d criterion(s) failed\n", ctx.failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
