#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "causal/bench.hpp"
#include "causal/enumeration.hpp"
#include "causal/igsp.hpp"
#include "causal/io.hpp"
#include "causal/rng.hpp"
#include "causal/sem.hpp"
#include "causal/stats.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace causal;

int g_log_level = 1;  // 0 quiet, 1 info, 2 debug

void info(const std::string& msg) {
    if (g_log_level >= 1) std::cerr << "[igsp] " << msg << "\n";
}

InterventionKind parse_kind(const std::string& s) {
    if (s == "perfect") return InterventionKind::perfect;
    if (s == "inhibiting") return InterventionKind::inhibiting;
    if (s == "imperfect") return InterventionKind::imperfect;
    if (s == "shift") return InterventionKind::shift;
    throw std::invalid_argument("unknown intervention kind: " + s);
}

std::vector<std::vector<NodeId>> targets_from_arg(const std::string& arg, int p) {
    std::vector<std::vector<NodeId>> targets = {{}};
    if (arg == "singletons") {
        for (int i = 0; i < p; ++i) targets.push_back({i});
    } else if (arg == "pairs") {
        for (int i = 0; i < p; ++i) {
            for (int j = i + 1; j < p; ++j) targets.push_back({i, j});
        }
    } else {
        const TargetFamily fam = family_from_json(read_file(arg));
        if (fam.p != p) {
            throw std::invalid_argument("target family is for p=" +
                                        std::to_string(fam.p) +
                                        ", expected p=" + std::to_string(p));
        }
        return fam.targets;
    }
    return targets;
}

int cmd_simulate(int p, double avg, int n, const std::string& kind_arg,
                 const std::string& targets_arg, double factor,
                 double success_alpha, double shift_var, std::uint64_t seed,
                 const std::string& out_model, const std::string& out_data) {
    const Dag g = sample_random_dag(p, avg, mix_seed(seed, 1));
    const SemModel model = sample_weights(g, mix_seed(seed, 2));
    const auto targets = targets_from_arg(targets_arg, p);

    std::vector<InterventionSpec> specs;
    const InterventionKind kind = parse_kind(kind_arg);
    for (const auto& t : targets) {
        if (t.empty()) continue;
        InterventionSpec spec;
        spec.kind = kind;
        spec.targets = t;
        spec.factor = factor;
        spec.alpha = success_alpha;
        spec.shift_var = shift_var;
        specs.push_back(std::move(spec));
    }
    const MultiDataset data = sample_data(model, specs, n, mix_seed(seed, 3));

    if (!out_model.empty()) write_file(out_model, model_to_json(model) + "\n");
    if (!out_data.empty()) {
        std::ofstream out(out_data, std::ios::binary);
        if (!out) throw std::invalid_argument("cannot write " + out_data);
        write_dataset_csv(out, data);
    }
    info("simulated p=" + std::to_string(p) + " blocks=" +
         std::to_string(data.block_count()) + " n/block=" + std::to_string(n));
    return 0;
}

Permutation parse_pi0(const std::string& arg, int p, std::uint64_t seed) {
    if (arg == "random") {
        Permutation pi = Permutation::identity(p);
        Philox rng(mix_seed(seed, 7), 0);
        rng.shuffle(pi.order);
        return pi;
    }
    const std::string prefix = "given:";
    if (arg.rfind(prefix, 0) != 0) {
        throw std::invalid_argument("--pi0 expects random or given:<perm>");
    }
    std::vector<NodeId> order;
    std::stringstream ss(arg.substr(prefix.size()));
    std::string tok;
    while (std::getline(ss, tok, ',')) order.push_back(std::stoi(tok) - 1);
    if (static_cast<int>(order.size()) != p) {
        throw std::invalid_argument("--pi0 permutation must list all " +
                                    std::to_string(p) + " nodes");
    }
    return Permutation::of(std::move(order));
}

int cmd_learn(const std::string& data_path, const std::string& targets_path,
              double alpha_ci, double alpha_inv, const std::string& test,
              const std::string& oracle_graph, const std::string& pool,
              std::uint64_t seed, const std::string& pi0_arg, int restarts,
              int hsic_cap, bool bonferroni, const std::string& out_path,
              const std::string& test_log_path) {
    std::ifstream in(data_path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open " + data_path);
    const MultiDataset data = read_dataset_csv(in);
    TargetFamily fam = data.fam;
    if (!targets_path.empty()) {
        const TargetFamily given = family_from_json(read_file(targets_path));
        if (given.p != fam.p || given.targets != fam.targets) {
            throw std::invalid_argument(
                "--targets disagrees with the dataset's block labels");
        }
    }

    std::ofstream log_stream;
    std::unique_ptr<TestLog> log;
    if (!test_log_path.empty()) {
        log_stream.open(test_log_path, std::ios::binary);
        if (!log_stream) {
            throw std::invalid_argument("cannot write " + test_log_path);
        }
        log_stream << "kind,i,j_or_block,cond,stat,p,decision\n";
        log = std::make_unique<TestLog>(&log_stream);
    }

    std::unique_ptr<CiDecider> ci;
    std::unique_ptr<InvarianceDecider> inv;
    if (!oracle_graph.empty()) {
        const Dag truth = graph_from_json(read_file(oracle_graph));
        if (truth.node_count() != fam.p) {
            throw std::invalid_argument("--oracle-graph node count mismatch");
        }
        ci = std::make_unique<DsepCiOracle>(truth);
        inv = std::make_unique<IdagInvarianceOracle>(truth, fam);
    } else {
        ci = std::make_unique<FisherZCiDecider>(data, alpha_ci, log.get());
        inv = std::make_unique<DataInvarianceDecider>(
            data,
            test == "gaussian" ? InvarianceBacking::gaussian
                               : InvarianceBacking::hsic,
            alpha_inv, static_cast<std::size_t>(hsic_cap), log.get());
    }

    SearchConfig cfg;
    cfg.ci = ci.get();
    cfg.inv = inv.get();
    cfg.fam = fam;
    cfg.pool = pool == "on";
    cfg.rng_seed = seed;
    cfg.max_restarts = restarts;
    cfg.contradictory.bonferroni = bonferroni;

    const Permutation pi0 = parse_pi0(pi0_arg, fam.p, seed);
    LearnReport report;
    report.result = igsp_search(cfg, pi0);
    report.ci_queries = ci->counters().queries.load();
    report.ci_evaluated = ci->counters().evaluated.load();
    report.inv_queries = inv->counters().queries.load();
    report.inv_evaluated = inv->counters().evaluated.load();

    const std::string out = learn_report_to_json(report);
    if (out_path.empty()) {
        std::cout << out;
    } else {
        write_file(out_path, out);
    }
    info("learned " + std::to_string(report.result.g.edge_count()) +
         " edges; ci tests " + std::to_string(report.ci_evaluated) +
         ", invariance tests " + std::to_string(report.inv_evaluated));
    return 0;
}

int cmd_equiv(const std::string& g1_path, const std::string& g2_path,
              const std::string& targets_path, const std::string& criterion,
              const std::string& out_path) {
    const Dag g1 = graph_from_json(read_file(g1_path));
    const Dag g2 = graph_from_json(read_file(g2_path));
    const TargetFamily fam = family_from_json(read_file(targets_path));

    std::string used = criterion;
    bool equivalent = false;
    if (criterion == "auto") {
        used = fam.has_empty() ? "imec" : "conservative";
    }
    if (used == "imec") {
        equivalent = i_markov_equivalent(g1, g2, fam);
    } else if (used == "conservative") {
        equivalent = i_markov_equivalent_conservative(g1, g2, fam);
    } else if (used == "perfect") {
        equivalent = perfect_i_mec_equivalent(g1, g2, fam);
    } else {
        throw std::invalid_argument("unknown criterion: " + criterion);
    }
    json j;
    j["equivalent"] = equivalent;
    j["criterion"] = used;
    const std::string out = j.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << out;
    } else {
        write_file(out_path, out);
    }
    return 0;
}

int cmd_enumerate(int p, const std::string& targets_path,
                  const std::string& emit, std::uint64_t seed, bool allow_large,
                  const std::string& out_path) {
    const DagCatalog cat = enumerate_dags(p, allow_large);
    json j;
    j["p"] = p;
    j["dag_count"] = cat.size();
    if (emit == "classes") {
        if (targets_path.empty()) {
            throw std::invalid_argument("--emit classes needs --targets");
        }
        const TargetFamily fam = family_from_json(read_file(targets_path));
        if (fam.p != p) throw std::invalid_argument("family p mismatch");
        const auto classes = partition_imec(cat, fam);
        j["class_count"] = classes.size();
        json jc = json::array();
        for (const auto& cls : classes) {
            json members = json::array();
            for (int d : cls) members.push_back(d);
            jc.push_back({{"size", cls.size()}, {"members", std::move(members)}});
        }
        j["classes"] = std::move(jc);
        json dags = json::array();
        for (const Dag& g : cat.dags) dags.push_back(json::parse(graph_to_json(g)));
        j["dags"] = std::move(dags);
    } else if (emit == "report") {
        const auto battery = standard_family_battery(p, 20, seed);
        const auto report = cross_validate_theorems(cat, battery);
        j["families_checked"] = report.families_checked;
        j["pair_universe"] = report.pair_universe;
        json jm = json::array();
        for (const auto& m : report.mismatches) {
            jm.push_back({{"family", m.family_index},
                          {"dag_a", json::parse(graph_to_json(cat.dags[m.dag_a]))},
                          {"dag_b", json::parse(graph_to_json(cat.dags[m.dag_b]))},
                          {"detail", m.detail}});
        }
        j["mismatches"] = std::move(jm);
    } else {
        throw std::invalid_argument("--emit must be classes or report");
    }
    const std::string out = j.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << out;
    } else {
        write_file(out_path, out);
    }
    return 0;
}

int cmd_bench(const std::string& plan_path, const std::string& out_dir,
              int threads_override) {
    ExperimentPlan plan = plan_from_json(read_file(plan_path));
    if (threads_override > 1) plan.threads = threads_override;
    info("running " + std::to_string(plan.replicates) + " replicates");
    const ExperimentResults results = run_experiment(plan);
    write_file(out_dir + "/results.csv", results_to_csv(results));
    write_file(out_dir + "/manifest.json", results_manifest_json(results));
    info("median hamming " + format_double(results.summary.hamming_median) +
         ", equivalence-class hit rate " +
         format_double(results.summary.imec_rate));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interventional greedy sparsest permutation search toolkit"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    int threads = 1;
    std::string log_level = "info";
    app.add_option("--seed", seed, "master RNG seed")->capture_default_str();
    app.add_option("--threads", threads, "worker threads for bench")
        ->capture_default_str();
    app.add_option("--log-level", log_level, "quiet|info|debug")
        ->capture_default_str();

    // simulate
    auto* sim = app.add_subcommand("simulate", "sample a model and datasets");
    int sim_p = 10;
    double sim_avg = 1.5;
    int sim_n = 1000;
    std::string sim_kind = "perfect", sim_targets = "singletons";
    double sim_factor = 10.0, sim_alpha = 0.5, sim_shift = 1.0;
    std::string sim_out_model, sim_out_data;
    sim->add_option("--p", sim_p, "node count")->capture_default_str();
    sim->add_option("--avg-neighborhood", sim_avg, "expected degree")
        ->capture_default_str();
    sim->add_option("--n", sim_n, "samples per block")->required();
    sim->add_option("--kind", sim_kind, "perfect|inhibiting|imperfect|shift")
        ->capture_default_str();
    sim->add_option("--targets", sim_targets,
                    "singletons|pairs|<family.json>")
        ->capture_default_str();
    sim->add_option("--factor", sim_factor, "inhibiting divisor")
        ->capture_default_str();
    sim->add_option("--success-alpha", sim_alpha, "imperfect success rate")
        ->capture_default_str();
    sim->add_option("--shift-var", sim_shift, "added noise variance (shift)")
        ->capture_default_str();
    sim->add_option("--out-model", sim_out_model, "model JSON path");
    sim->add_option("--out-data", sim_out_data, "dataset CSV path");

    // learn
    auto* learn = app.add_subcommand("learn", "run the permutation search");
    std::string learn_data, learn_targets, learn_test = "hsic";
    std::string learn_oracle, learn_pool = "off", learn_pi0 = "random";
    std::string learn_out, learn_log;
    double learn_alpha_ci = 1e-3, learn_alpha_inv = 1e-3;
    int learn_restarts = 1, learn_hsic_cap = 1000;
    learn->add_option("--data", learn_data, "dataset CSV")->required();
    learn->add_option("--targets", learn_targets, "family JSON (validation)");
    learn->add_option("--alpha-ci", learn_alpha_ci, "CI test level")
        ->capture_default_str();
    learn->add_option("--alpha-inv", learn_alpha_inv, "invariance test level")
        ->capture_default_str();
    learn->add_option("--test", learn_test, "hsic|gaussian")
        ->capture_default_str();
    learn->add_option("--oracle-graph", learn_oracle,
                      "graph JSON enabling oracle deciders");
    learn->add_option("--pool", learn_pool, "on|off")->capture_default_str();
    learn->add_option("--pi0", learn_pi0, "random|given:<perm>")
        ->capture_default_str();
    learn->add_option("--restarts", learn_restarts, "independent starts")
        ->capture_default_str();
    learn->add_option("--hsic-cap", learn_hsic_cap,
                      "per-block subsample cap for the HSIC test")
        ->capture_default_str();
    bool learn_bonferroni = false;
    learn->add_flag("--bonferroni", learn_bonferroni,
                    "correct multi-block invariance quantifiers");
    learn->add_option("--out", learn_out, "output JSON path");
    learn->add_option("--test-log", learn_log, "append-only test log CSV");

    // equiv
    auto* equiv = app.add_subcommand("equiv", "pairwise equivalence check");
    std::string eq_g1, eq_g2, eq_targets, eq_criterion = "auto", eq_out;
    equiv->add_option("--g1", eq_g1, "graph JSON")->required();
    equiv->add_option("--g2", eq_g2, "graph JSON")->required();
    equiv->add_option("--targets", eq_targets, "family JSON")->required();
    equiv->add_option("--criterion", eq_criterion,
                      "auto|imec|conservative|perfect")
        ->capture_default_str();
    equiv->add_option("--out", eq_out, "output JSON path");

    // enumerate
    auto* enumerate = app.add_subcommand("enumerate", "catalog-based checks");
    int en_p = 3;
    std::string en_targets, en_emit = "report", en_out;
    bool en_allow_large = false;
    enumerate->add_option("--p", en_p, "node count (1..6)")
        ->capture_default_str();
    enumerate->add_option("--targets", en_targets, "family JSON (for classes)");
    enumerate->add_option("--emit", en_emit, "classes|report")
        ->capture_default_str();
    enumerate->add_flag("--allow-large", en_allow_large, "permit p = 6");
    enumerate->add_option("--out", en_out, "output JSON path");

    // bench
    auto* bench = app.add_subcommand("bench", "run an experiment plan");
    std::string bench_plan, bench_out_dir = ".";
    bench->add_option("--plan", bench_plan, "plan JSON")->required();
    bench->add_option("--out-dir", bench_out_dir, "output directory")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (log_level == "quiet") {
        g_log_level = 0;
    } else if (log_level == "debug") {
        g_log_level = 2;
    }

    try {
        if (sim->parsed()) {
            return cmd_simulate(sim_p, sim_avg, sim_n, sim_kind, sim_targets,
                                sim_factor, sim_alpha, sim_shift, seed,
                                sim_out_model, sim_out_data);
        }
        if (learn->parsed()) {
            return cmd_learn(learn_data, learn_targets, learn_alpha_ci,
                             learn_alpha_inv, learn_test, learn_oracle,
                             learn_pool, seed, learn_pi0, learn_restarts,
                             learn_hsic_cap, learn_bonferroni, learn_out,
                             learn_log);
        }
        if (equiv->parsed()) {
            return cmd_equiv(eq_g1, eq_g2, eq_targets, eq_criterion, eq_out);
        }
        if (enumerate->parsed()) {
            return cmd_enumerate(en_p, en_targets, en_emit, seed,
                                 en_allow_large, en_out);
        }
        if (bench->parsed()) {
            return cmd_bench(bench_plan, bench_out_dir, threads);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const causal::NotEnoughSamplesError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
