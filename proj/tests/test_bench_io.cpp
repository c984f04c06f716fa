#include <doctest.h>

#include <sstream>

#include "causal/bench.hpp"
#include "causal/io.hpp"
#include "causal/sem.hpp"

using namespace causal;

namespace {

Dag make(int p, std::initializer_list<Edge> edges) {
    return Dag::from_edges(p, std::vector<Edge>(edges));
}

}  // namespace

TEST_CASE("hamming distances") {
    const Dag chain = make(3, {{0, 1}, {1, 2}});
    CHECK(hamming_distance(chain, chain) == 0);
    CHECK(hamming_distance(make(2, {{0, 1}}), make(2, {{1, 0}})) == 1);
    CHECK(hamming_distance(chain, Dag(3)) == 2);
    CHECK(skeleton_hamming(chain, Dag(3)) == 2);
    CHECK(skeleton_hamming(make(2, {{0, 1}}), make(2, {{1, 0}})) == 0);
    CHECK_THROWS_AS(hamming_distance(Dag(2), Dag(3)), std::invalid_argument);
}

TEST_CASE("graph json round trip and precise errors") {
    const Dag g = make(3, {{0, 1}, {2, 1}});
    CHECK(graph_from_json(graph_to_json(g)) == g);

    CHECK_THROWS_WITH_AS(graph_from_json(R"({"p": 2, "edges": [[1, 5]]})"),
                         doctest::Contains("edges[0][1]"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        graph_from_json(R"({"p": 2, "edges": [[1, 2], [1, 2]]})"),
        doctest::Contains("edges[1]"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        graph_from_json(R"({"p": 3, "edges": [[1, 2], [2, 3], [3, 1]]})"),
        doctest::Contains("cycle"), std::invalid_argument);
    CHECK_THROWS_AS(graph_from_json("{"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(graph_from_json(R"({"edges": []})"),
                         doctest::Contains("\"p\""), std::invalid_argument);
}

TEST_CASE("family and model json round trips") {
    const TargetFamily fam = TargetFamily::of(3, {{}, {1}, {1, 2}});
    const TargetFamily parsed = family_from_json(family_to_json(fam));
    CHECK(parsed.p == fam.p);
    CHECK(parsed.targets == fam.targets);

    SemModel m;
    m.g = make(3, {{0, 1}, {1, 2}});
    m.weights[{0, 1}] = 0.731;
    m.weights[{1, 2}] = -0.42;
    m.noise_var = {1.0, 2.0, 0.5};
    const SemModel back = model_from_json(model_to_json(m));
    CHECK(back.g == m.g);
    CHECK(back.weights == m.weights);
    CHECK(back.noise_var == m.noise_var);

    CHECK_THROWS_WITH_AS(
        model_from_json(
            R"({"p": 2, "edges": [[1, 2]], "weights": [[2, 1, 0.5]], "noise_var": [1, 1]})"),
        doctest::Contains("non-edge"), std::invalid_argument);
}

TEST_CASE("dataset csv round trips bitwise") {
    const Dag g = sample_random_dag(4, 1.5, 404);
    const SemModel m = sample_weights(g, 405);
    const std::vector<InterventionSpec> specs = {
        {InterventionKind::perfect, {1}, 10.0, 0.5, 1.0},
        {InterventionKind::shift, {0, 2}, 10.0, 0.5, 2.0}};
    const MultiDataset data = sample_data(m, specs, 50, 12);

    std::ostringstream out;
    write_dataset_csv(out, data);
    std::istringstream in(out.str());
    const MultiDataset back = read_dataset_csv(in);
    CHECK(back.fam.targets == data.fam.targets);
    REQUIRE(back.block_count() == data.block_count());
    for (int b = 0; b < data.block_count(); ++b) {
        CHECK(back.blocks[b].data == data.blocks[b].data);  // exact doubles
    }

    // writing the parsed dataset again reproduces the bytes
    std::ostringstream out2;
    write_dataset_csv(out2, back);
    CHECK(out.str() == out2.str());
}

TEST_CASE("experiment plan round trips exactly") {
    ExperimentPlan plan;
    plan.p = 8;
    plan.n_per_block = 777;
    plan.kind = InterventionKind::inhibiting;
    plan.family = FamilyGen::ksubset;
    plan.k = 3;
    plan.replicates = 4;
    plan.seed = 123456789;
    plan.decider = DeciderKind::hsic;
    plan.alpha_ci = 0.001;
    plan.pool = true;
    const std::string text = plan_to_json(plan);
    CHECK(plan_to_json(plan_from_json(text)) == text);
    CHECK(plan_config_hash(plan) == plan_config_hash(plan_from_json(text)));
    plan.seed = 5;
    CHECK(plan_config_hash(plan) != plan_config_hash(plan_from_json(text)));
}

TEST_CASE("small oracle experiment recovers the class every time") {
    ExperimentPlan plan;
    plan.p = 5;
    plan.n_per_block = 100;
    plan.replicates = 6;
    plan.seed = 31337;
    plan.decider = DeciderKind::oracle;
    plan.family = FamilyGen::singletons;
    const ExperimentResults results = run_experiment(plan);
    REQUIRE(static_cast<int>(results.rows.size()) == plan.replicates);
    for (const auto& row : results.rows) {
        REQUIRE_FALSE(row.failed);
        CHECK(row.imec_member);
    }
    CHECK(results.summary.imec_rate == doctest::Approx(1.0));
    CHECK(results.summary.failures == 0);

    // aggregates are recomputable from the rows
    const ExperimentSummary again = summarize(results.rows);
    CHECK(again.hamming_median == results.summary.hamming_median);
    CHECK(again.imec_rate == results.summary.imec_rate);
}

TEST_CASE("experiments are deterministic modulo wall time") {
    ExperimentPlan plan;
    plan.p = 4;
    plan.n_per_block = 300;
    plan.replicates = 3;
    plan.seed = 99;
    plan.decider = DeciderKind::gaussian;
    plan.family = FamilyGen::singletons;
    const ExperimentResults a = run_experiment(plan);
    plan.threads = 2;  // thread count must not change the results
    const ExperimentResults b = run_experiment(plan);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        CHECK(a.rows[r].seed == b.rows[r].seed);
        CHECK(a.rows[r].hamming == b.rows[r].hamming);
        CHECK(a.rows[r].learned_edges == b.rows[r].learned_edges);
        CHECK(a.rows[r].imec_member == b.rows[r].imec_member);
        CHECK(a.rows[r].ci_tests == b.rows[r].ci_tests);
    }
}

TEST_CASE("observational-only plans run the plain search") {
    ExperimentPlan plan;
    plan.p = 4;
    plan.n_per_block = 500;
    plan.replicates = 2;
    plan.seed = 7;
    plan.decider = DeciderKind::oracle;
    plan.family = FamilyGen::none;
    const ExperimentResults results = run_experiment(plan);
    for (const auto& row : results.rows) {
        REQUIRE_FALSE(row.failed);
        CHECK(row.inv_tests == 0);  // no non-observational blocks to test
    }
}
