#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pmtbn/errors.hpp"
#include "pmtbn/inference.hpp"
#include "pmtbn/learning.hpp"

using namespace pmtbn;

namespace {

Schema binary_schema(const std::vector<std::string>& names) {
    std::vector<Variable> vars;
    for (const auto& n : names) vars.emplace_back(n, std::vector<std::string>{"0", "1"});
    return Schema(std::move(vars));
}

Dataset random_dataset(SplitMix64& rng, const Schema& schema, std::size_t n, double missing = 0.0) {
    std::vector<StateIndex> cells;
    for (std::size_t r = 0; r < n; ++r) {
        for (const auto& var : schema.variables()) {
            if (missing > 0.0 && rng.next_unit() < missing) {
                cells.push_back(kMissing);
            } else {
                cells.push_back(static_cast<StateIndex>(oracle::uniform_index(rng, var.cardinality())));
            }
        }
    }
    return Dataset(schema, std::move(cells));
}

}  // namespace

TEST_CASE("laplace estimate of a parentless node") {
    auto schema = binary_schema({"A"});
    Dataset d(schema, std::vector<std::vector<StateIndex>>{{1}, {1}, {1}, {0}});
    auto m = estimate_cpts(Dag({"A"}, {}), schema, d, 1.0);
    CHECK(m.cpts()[0].table()[1] == 4.0 / 6.0);
    CHECK(m.cpts()[0].table()[0] == 2.0 / 6.0);
}

TEST_CASE("empty data gives uniform rows") {
    auto schema = oracle::make_schema({3, 2});
    Dataset d(schema);
    auto m = estimate_cpts(Dag(schema.names(), {{"v0", "v1"}}), schema, d, 1.0);
    for (double p : m.cpts()[0].table()) CHECK(p == 1.0 / 3.0);
    for (double p : m.cpts()[1].table()) CHECK(p == 0.5);
    auto m0 = estimate_cpts(Dag(schema.names(), {{"v0", "v1"}}), schema, d, 0.0);
    for (double p : m0.cpts()[1].table()) CHECK(p == 0.5);
}

TEST_CASE("estimates match the counting oracle") {
    SplitMix64 rng(21);
    for (int trial = 0; trial < 25; ++trial) {
        auto truth = oracle::random_model(rng, {2, 3, 2, 4}, 0.6);
        auto data = random_dataset(rng, truth.schema(), 1 + oracle::uniform_index(rng, 200), 0.1);
        for (auto [num, den] : {std::pair{1, 1}, std::pair{0, 1}, std::pair{1, 2}}) {
            const double alpha = static_cast<double>(num) / den;
            auto m = estimate_cpts(truth.dag(), truth.schema(), data, alpha);
            for (std::size_t i = 0; i < truth.schema().size(); ++i) {
                std::vector<std::size_t> parents;
                for (const auto& p : m.cpts()[i].parents()) parents.push_back(truth.schema().index_of(p));
                auto expected = oracle::counted_cpt(data, i, parents, num, den);
                const auto& table = m.cpts()[i].table();
                REQUIRE(table.size() == expected.size());
                for (std::size_t k = 0; k < table.size(); ++k) CHECK(table[k] == expected[k]);
            }
        }
    }
}

TEST_CASE("alpha zero with an unseen parent assignment") {
    auto schema = binary_schema({"P", "C"});
    Dataset d(schema, std::vector<std::vector<StateIndex>>{{0, 1}, {0, 1}, {0, 0}});
    auto m = estimate_cpts(Dag({"P", "C"}, {{"P", "C"}}), schema, d, 0.0);
    const auto& t = m.cpts()[1].table();
    CHECK(t[0] == 1.0 / 3.0);
    CHECK(t[1] == 2.0 / 3.0);
    CHECK(t[2] == 0.5);
    CHECK(t[3] == 0.5);
}

TEST_CASE("estimated rows sum to one") {
    SplitMix64 rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        auto truth = oracle::random_model(rng, {3, 3, 2, 5, 2}, 0.5);
        auto data = random_dataset(rng, truth.schema(), 300);
        auto m = estimate_cpts(truth.dag(), truth.schema(), data, 0.5);
        for (const auto& cpt : m.cpts()) {
            for (std::size_t r = 0; r < cpt.rows(); ++r) {
                double s = 0.0;
                for (double p : cpt.row(r)) s += p;
                CHECK(std::abs(s - 1.0) <= 1e-12);
            }
        }
    }
}

TEST_CASE("estimation rejects a foreign schema and negative alpha") {
    auto schema = binary_schema({"A"});
    Dataset other(binary_schema({"B"}));
    CHECK_THROWS_AS(estimate_cpts(Dag({"A"}, {}), schema, other), InvalidArgumentError);
    CHECK_THROWS_AS(estimate_cpts(Dag({"A"}, {}), schema, Dataset(schema), -1.0), InvalidArgumentError);
}

TEST_CASE("ml estimates converge to the generating model") {
    SplitMix64 rng(23);
    auto truth = oracle::random_model(rng, {2, 3, 2}, 1.0);
    auto data = ancestral_sample(truth, 5, 100000);
    auto m = estimate_cpts(truth.dag(), truth.schema(), data, 0.0);
    for (std::size_t i = 0; i < truth.cpts().size(); ++i) {
        const auto& a = truth.cpts()[i].table();
        const auto& b = m.cpts()[i].table();
        for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) <= 0.02);
    }
}

TEST_CASE("cmi examples") {
    auto schema = binary_schema({"X", "Y", "C"});
    // X and Y independent given C.
    Dataset indep(schema, std::vector<std::vector<StateIndex>>{
                              {0, 0, 0}, {0, 1, 0}, {1, 0, 0}, {1, 1, 0},
                              {0, 0, 1}, {0, 1, 1}, {1, 0, 1}, {1, 1, 1}});
    CHECK(conditional_mutual_information(indep, "X", "Y", "C") == 0.0);
    // Y copies X, X uniform, C constant.
    Dataset copy(schema, std::vector<std::vector<StateIndex>>{{0, 0, 0}, {1, 1, 0}, {0, 0, 0}, {1, 1, 0}});
    CHECK(conditional_mutual_information(copy, "X", "Y", "C") == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("cmi matches the triple-sum oracle") {
    auto schema = binary_schema({"X", "Y", "C"});
    Dataset d(schema, std::vector<std::vector<StateIndex>>{
                          {0, 0, 0}, {0, 0, 0}, {1, 1, 0}, {0, 1, 0},
                          {1, 0, 1}, {1, 1, 1}, {1, 1, 1}, {0, 0, 1}});
    CHECK(std::abs(conditional_mutual_information(d, "X", "Y", "C") - oracle::triple_sum_cmi(d, 0, 1, 2)) <= 1e-12);
}

TEST_CASE("cmi is symmetric and non-negative") {
    SplitMix64 rng(24);
    auto schema = oracle::make_schema({2, 3, 4, 2});
    for (int trial = 0; trial < 50; ++trial) {
        auto d = random_dataset(rng, schema, 1 + oracle::uniform_index(rng, 60), 0.05);
        bool any_complete = false;
        for (std::size_t r = 0; r < d.size(); ++r)
            if (d.at(r, 0) != kMissing && d.at(r, 1) != kMissing && d.at(r, 2) != kMissing) any_complete = true;
        if (!any_complete) continue;
        const double xy = conditional_mutual_information(d, "v0", "v1", "v2");
        const double yx = conditional_mutual_information(d, "v1", "v0", "v2");
        CHECK(xy == yx);
        CHECK(xy >= 0.0);
        CHECK(std::abs(xy - std::max(0.0, oracle::triple_sum_cmi(d, 0, 1, 2))) <= 1e-12);
    }
}

TEST_CASE("cmi errors") {
    auto schema = binary_schema({"X", "Y", "C"});
    Dataset empty(schema);
    CHECK_THROWS_AS(conditional_mutual_information(empty, "X", "Y", "C"), EmptyDataError);
    Dataset all_missing(schema, std::vector<std::vector<StateIndex>>{{kMissing, 0, 0}});
    CHECK_THROWS_AS(conditional_mutual_information(all_missing, "X", "Y", "C"), EmptyDataError);
    Dataset d(schema, std::vector<std::vector<StateIndex>>{{0, 0, 0}});
    CHECK_THROWS_AS(conditional_mutual_information(d, "X", "X", "C"), InvalidArgumentError);
    CHECK_THROWS_AS(conditional_mutual_information(d, "X", "Q", "C"), UnknownNodeError);
}

TEST_CASE("maximum spanning tree") {
    WeightedPairGraph g({"A", "B", "C"});
    g.set_weight("A", "B", 0.9);
    g.set_weight("B", "C", 0.5);
    g.set_weight("A", "C", 0.1);
    auto t = max_spanning_tree(g);
    CHECK(t == std::vector<UndirectedEdge>{{"A", "B"}, {"B", "C"}});

    CHECK(max_spanning_tree(WeightedPairGraph({"A"})).empty());

    WeightedPairGraph ties({"A", "B", "C"});
    auto tied = max_spanning_tree(ties);
    CHECK(tied == std::vector<UndirectedEdge>{{"A", "B"}, {"A", "C"}});

    CHECK(UndirectedEdge("B", "A").first == "A");
}

TEST_CASE("pair weights") {
    WeightedPairGraph g({"A", "B"});
    g.set_weight("B", "A", -1e-13);
    CHECK(g.weight("A", "B") == 0.0);
    CHECK_THROWS_AS(g.set_weight("A", "B", -0.1), InvalidArgumentError);
    CHECK_THROWS_AS(g.set_weight("A", "B", std::nan("")), InvalidArgumentError);
    CHECK_THROWS_AS(g.set_weight("A", "Z", 0.1), UnknownNodeError);
}

TEST_CASE("maximum spanning tree is maximal on random graphs") {
    SplitMix64 rng(25);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + oracle::uniform_index(rng, 4);
        std::vector<std::string> names;
        for (std::size_t i = 0; i < n; ++i) names.push_back(oracle::node_name(i));
        WeightedPairGraph g(names);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) g.set_weight(names[i], names[j], rng.next_unit());
        auto tree = max_spanning_tree(g);
        REQUIRE(tree.size() == n - 1);
        double w = 0.0;
        for (const auto& e : tree) w += g.weight(e.first, e.second);

        // Exhaustive best over all (n-1)-subsets of pairs that form a tree.
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
        double best = -1.0;
        for (std::uint32_t mask = 0; mask < (1u << pairs.size()); ++mask) {
            if (static_cast<std::size_t>(__builtin_popcount(mask)) != n - 1) continue;
            std::vector<std::size_t> comp(n);
            for (std::size_t i = 0; i < n; ++i) comp[i] = i;
            bool cycle = false;
            double sum = 0.0;
            for (std::size_t b = 0; b < pairs.size(); ++b) {
                if (!(mask >> b & 1)) continue;
                auto [i, j] = pairs[b];
                auto ci = comp[i], cj = comp[j];
                if (ci == cj) { cycle = true; break; }
                for (auto& c : comp) if (c == cj) c = ci;
                sum += g.weight(i, j);
            }
            if (!cycle) best = std::max(best, sum);
        }
        CHECK(w == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("orient tree from a root") {
    std::vector<UndirectedEdge> tree{{"A", "B"}, {"B", "C"}};
    CHECK(orient_tree(tree, "B") == std::vector<Edge>{{"B", "A"}, {"B", "C"}});
    CHECK(orient_tree(tree, "A") == std::vector<Edge>{{"A", "B"}, {"B", "C"}});
    CHECK(orient_tree({}, "A").empty());

    std::vector<UndirectedEdge> split{{"A", "B"}, {"C", "D"}};
    CHECK_THROWS_AS(orient_tree(split, "A"), DisconnectedError);
    std::vector<std::string> features{"A", "B", "C"};
    std::vector<UndirectedEdge> partial{{"A", "B"}};
    CHECK_THROWS_AS(orient_tree(partial, "A", features), DisconnectedError);
}

TEST_CASE("learned tan has the expected shape") {
    SplitMix64 rng(26);
    for (int trial = 0; trial < 10; ++trial) {
        auto truth = oracle::random_model(rng, {2, 3, 2, 3, 2}, 0.5);
        auto data = ancestral_sample(truth, rng.next_u64(), 400);
        auto m = learn_tan(data, truth.schema(), "v0");
        CHECK(m.class_name() == std::optional<std::string>("v0"));
        CHECK(validate_dag(m.dag()).size() == 5);
        CHECK(m.dag().parents("v0").empty());
        CHECK(m.dag().edges().size() == 2 * 4 - 1);
        for (const auto& f : feature_names(truth.schema(), "v0")) {
            auto parents = m.dag().parents(f);
            CHECK(m.dag().has_edge("v0", f));
            CHECK(parents.size() <= 2);
        }
        // The first feature is the tree root.
        CHECK(m.dag().parents("v1").size() == 1);
    }
}

TEST_CASE("tan with two features") {
    auto schema = binary_schema({"C", "A", "B"});
    Dataset d(schema, std::vector<std::vector<StateIndex>>{{0, 0, 0}, {1, 1, 1}, {0, 1, 0}});
    auto m = learn_tan(d, schema, "C");
    CHECK(m.dag().edges() == std::set<Edge>{{"A", "B"}, {"C", "A"}, {"C", "B"}});
    CHECK_THROWS_AS(learn_tan(d, schema, "Z"), UnknownNodeError);
}
