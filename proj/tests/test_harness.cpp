#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "pmtbn/errors.hpp"
#include "pmtbn/harness.hpp"
#include "pmtbn/inference.hpp"
#include "pmtbn/io.hpp"
#include "pmtbn/learning.hpp"

using namespace pmtbn;

namespace {

StudyConfig small_study() {
    StudyConfig c;
    c.n_train = 400;
    c.n_test = 200;
    c.seeds = {1, 2, 3, 4};
    return c;
}

}  // namespace

TEST_CASE("default seeds") {
    CHECK(default_seeds(3) == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(default_seeds().size() == 20);
}

TEST_CASE("ground truth rows are distributions and deterministic") {
    auto s = default_pmt_structure().structure;
    auto a = random_ground_truth(s.schema, s.dag, 11, 2.0);
    auto b = random_ground_truth(s.schema, s.dag, 11, 2.0);
    auto c = random_ground_truth(s.schema, s.dag, 12, 2.0);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    for (const auto& cpt : a.cpts()) {
        for (std::size_t r = 0; r < cpt.rows(); ++r) {
            double sum = 0.0;
            for (double p : cpt.row(r)) {
                CHECK(p >= 0.0);
                sum += p;
            }
            CHECK(std::abs(sum - 1.0) <= 1e-9);
        }
    }
    CHECK_THROWS_AS(random_ground_truth(s.schema, s.dag, 1, 0.0), InvalidArgumentError);
}

TEST_CASE("ground truth rows follow the u^gamma recipe") {
    auto s = oracle::make_schema({3, 2});
    Dag dag(s.names(), {{"v0", "v1"}});
    auto m = random_ground_truth(s, dag, 77, 3.0);
    SplitMix64 rng(77);
    std::vector<double> expected;
    for (std::size_t card : {3u, 2u, 2u, 2u}) {
        std::vector<double> row;
        double sum = 0.0;
        for (std::size_t k = 0; k < card; ++k) {
            row.push_back(std::pow(rng.next_open_unit(), 3.0));
            sum += row.back();
        }
        for (double v : row) expected.push_back(v / sum);
    }
    std::vector<double> got = m.cpts()[0].table();
    got.insert(got.end(), m.cpts()[1].table().begin(), m.cpts()[1].table().end());
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-15));
}

TEST_CASE("large gamma drives rows of the default network towards one-hot") {
    auto s = default_pmt_structure().structure;
    auto m = random_ground_truth(s.schema, s.dag, 17, 64.0);
    std::size_t sharp = 0, total = 0;
    for (const auto& cpt : m.cpts()) {
        for (std::size_t r = 0; r < cpt.rows(); ++r) {
            auto row = cpt.row(r);
            if (*std::max_element(row.begin(), row.end()) >= 0.9) ++sharp;
            ++total;
        }
    }
    CHECK(static_cast<double>(sharp) >= 0.9 * static_cast<double>(total));
}

TEST_CASE("gamma one gives binary rows centred on one half") {
    // A binary child under four 10-state parents has 10,000 rows.
    std::vector<Variable> vars;
    std::vector<std::string> ten;
    for (int k = 0; k < 10; ++k) ten.push_back("s" + std::to_string(k));
    std::vector<Edge> edges;
    for (int i = 0; i < 4; ++i) {
        vars.emplace_back("p" + std::to_string(i), ten);
        edges.push_back({"p" + std::to_string(i), "child"});
    }
    vars.emplace_back("child", std::vector<std::string>{"a", "b"});
    Schema schema(std::move(vars));
    auto m = random_ground_truth(schema, Dag(schema.names(), edges), 23, 1.0);
    const auto& child = m.cpts().back();
    REQUIRE(child.rows() == 10000);
    double sum = 0.0;
    for (std::size_t r = 0; r < child.rows(); ++r) sum += child.row(r)[0];
    const double mean = sum / 10000.0;
    CHECK(mean >= 0.49);
    CHECK(mean <= 0.51);
}

TEST_CASE("experiment data splits one sample stream") {
    auto s = default_pmt_structure().structure;
    auto truth = random_ground_truth(s.schema, s.dag, 3, 2.0);
    auto data = generate_experiment_data(truth, 9, kDefaultTrainRows, kDefaultTestRows);
    CHECK(data.train.size() == 3840);
    CHECK(data.test.size() == 960);
    auto whole = ancestral_sample(truth, 9, 4800);
    CHECK(data.train == whole.slice(0, 3840));
    CHECK(data.test == whole.slice(3840, 960));

    auto tiny = generate_experiment_data(truth, 9, 1, 1);
    CHECK(tiny.train == whole.slice(0, 1));
    CHECK(tiny.test == whole.slice(1, 1));
    CHECK_FALSE(generate_experiment_data(truth, 10, 50, 10).train == generate_experiment_data(truth, 9, 50, 10).train);
}

TEST_CASE("seed streams differ") {
    auto a = derive_seed_streams(1);
    auto b = derive_seed_streams(2);
    CHECK(a.ground_truth != a.data);
    CHECK(a.ground_truth != b.ground_truth);
    SplitMix64 m(1);
    CHECK(a.ground_truth == m.next_u64());
    CHECK(a.data == m.next_u64());
}

TEST_CASE("evaluate accuracy on small hand cases") {
    auto m = parse_model(
        "node C : c0,c1\nnode X : x0,x1\nedge C -> X\n"
        "cpt C | : 0.5,0.5\n"
        "cpt X | C=c0 : 0.9,0.1\n"
        "cpt X | C=c1 : 0.1,0.9\n");
    Dataset perfect(m.schema(), std::vector<std::vector<StateIndex>>{{0, 0}, {1, 1}});
    CHECK(evaluate_accuracy(m, perfect, "C") == 1.0);
    Dataset three_of_four(m.schema(), std::vector<std::vector<StateIndex>>{{0, 0}, {1, 1}, {0, 0}, {1, 0}});
    CHECK(evaluate_accuracy(m, three_of_four, "C") == 0.75);
    CHECK_THROWS_AS(evaluate_accuracy(m, Dataset(m.schema()), "C"), EmptyDatasetError);
    // Missing features are left out of the evidence.
    Dataset partial(m.schema(), std::vector<std::vector<StateIndex>>{{0, kMissing}});
    CHECK(evaluate_accuracy(m, partial, "C") == 1.0);
}

TEST_CASE("oracle accuracy agrees with brute-force argmax") {
    SplitMix64 rng(41);
    auto truth = oracle::random_model(rng, {2, 3, 2, 2}, 0.6);
    auto test = ancestral_sample(truth, 8, 300);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < test.size(); ++r) {
        Evidence e;
        for (std::size_t i = 1; i < 4; ++i) e[oracle::node_name(i)] = test.at(r, i);
        auto dist = brute_force_posterior(truth, e, "v0");
        auto best = static_cast<StateIndex>(std::max_element(dist.begin(), dist.end()) - dist.begin());
        if (best == test.at(r, 0)) ++correct;
    }
    CHECK(evaluate_accuracy(truth, test, "v0") == static_cast<double>(correct) / 300.0);
}

TEST_CASE("majority baseline") {
    auto schema = oracle::make_schema({2, 2});
    Dataset train(schema, std::vector<std::vector<StateIndex>>{{1, 0}, {1, 0}, {0, 0}});
    Dataset test(schema, std::vector<std::vector<StateIndex>>{{1, 0}, {0, 0}, {1, 1}, {1, 1}});
    CHECK(majority_class_accuracy(train, test, "v0") == 0.75);
}

TEST_CASE("summaries") {
    auto s = summarize({0.5, 0.7});
    CHECK(s.mean == doctest::Approx(0.6));
    CHECK(s.stddev == doctest::Approx(std::sqrt(0.02)));
    CHECK(summarize({0.4}).stddev == 0.0);
}

TEST_CASE("study config validation") {
    auto c = small_study();
    CHECK_NOTHROW(c.validate());
    c.seeds = {};
    CHECK_THROWS_AS(c.validate(), InvalidArgumentError);
    c = small_study();
    c.seeds = {1, 1};
    CHECK_THROWS_AS(c.validate(), InvalidArgumentError);
    c = small_study();
    c.n_train = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgumentError);
    c = small_study();
    c.alpha = -1;
    CHECK_THROWS_AS(run_comparison(c), InvalidArgumentError);
    c = small_study();
    c.class_name = "nope";
    CHECK_THROWS_AS(run_comparison(c), UnknownNodeError);
}

TEST_CASE("comparison report is consistent and deterministic") {
    auto c = small_study();
    auto a = run_comparison(c);
    REQUIRE(a.seeds.size() == 4);
    CHECK(a.class_name == "purchase_protection");
    CHECK(a.tan_structure_scores == 28);
    CHECK(a.fixed_structure_scores == 0);
    CHECK(a.gap == a.fixed.mean - a.tan.mean);
    for (std::size_t i = 0; i < a.seeds.size(); ++i) {
        const auto& r = a.seeds[i];
        CHECK(r.seed == i + 1);
        CHECK(r.tan_edges == 15);
        CHECK(r.flagged.size() >= 1);
        for (double acc : {r.tan_accuracy, r.fixed_accuracy, r.oracle_accuracy, r.majority_accuracy}) {
            CHECK(acc >= 0.0);
            CHECK(acc <= 1.0);
        }
    }
    c.parallel = false;
    auto b = run_comparison(c);
    CHECK(emit_report(a) == emit_report(b));
    CHECK(render_comparison_table(a) == render_comparison_table(b));

    auto text = emit_report(a);
    CHECK(text.find("format pmtbn-comparison-1\n") != std::string::npos);
    CHECK(text.find("\nper_seed\n") != std::string::npos);
    CHECK(text.substr(text.size() - 4) == "end\n");
    auto table = render_comparison_table(a);
    CHECK(table.find("Pure ML model") != std::string::npos);
    CHECK(table.find("PMT-based model") != std::string::npos);
}

TEST_CASE("a given ground-truth model is used for every seed") {
    auto s = default_pmt_structure().structure;
    auto truth = random_ground_truth(s.schema, s.dag, 5, 4.0).with_class_name(s.class_name);
    auto path = std::filesystem::temp_directory_path() / "pmtbn_harness_truth.model";
    write_text_file(path, emit_model(truth));
    auto c = small_study();
    c.ground_truth_path = path;
    c.seeds = {1, 2};
    auto report = run_comparison(c);
    CHECK(report.ground_truth_source == path.string());
    for (const auto& r : report.seeds) {
        auto data = generate_experiment_data(truth, derive_seed_streams(r.seed).data, c.n_train, c.n_test);
        CHECK(r.oracle_accuracy == evaluate_accuracy(truth, data.test, "purchase_protection"));
    }
    std::filesystem::remove(path);
}

TEST_CASE("learned TAN beats the majority baseline on average") {
    auto c = small_study();
    c.gamma = 6.0;
    auto report = run_comparison(c);
    CHECK(report.tan.mean >= report.majority.mean);
    CHECK(report.oracle.mean >= report.majority.mean - 0.02);
}

TEST_CASE("both competitors are scored on the same split") {
    auto c = small_study();
    c.seeds = {7};
    auto report = run_comparison(c);
    REQUIRE(report.seeds.size() == 1);
    auto s = default_pmt_structure().structure;
    const auto streams = derive_seed_streams(7);
    auto truth = random_ground_truth(s.schema, s.dag, streams.ground_truth, c.gamma);
    auto data = generate_experiment_data(truth, streams.data, c.n_train, c.n_test);
    auto tan = learn_tan(data.train, s.schema, "purchase_protection", c.alpha);
    auto fixed = estimate_cpts(s.dag, s.schema, data.train, c.alpha);
    CHECK(report.seeds[0].tan_accuracy == evaluate_accuracy(tan, data.test, "purchase_protection"));
    CHECK(report.seeds[0].fixed_accuracy == evaluate_accuracy(fixed, data.test, "purchase_protection"));
    CHECK(report.seeds[0].oracle_accuracy == evaluate_accuracy(truth, data.test, "purchase_protection"));
}

TEST_CASE("reported gap equals the difference of per-seed means") {
    auto report = run_comparison(small_study());
    double tan = 0.0, fixed = 0.0;
    for (const auto& r : report.seeds) {
        tan += r.tan_accuracy;
        fixed += r.fixed_accuracy;
    }
    const double n = static_cast<double>(report.seeds.size());
    CHECK(std::abs(report.gap - (fixed / n - tan / n)) <= 1e-12);
}
