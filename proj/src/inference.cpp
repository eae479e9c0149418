#include "pmtbn/inference.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "pmtbn/errors.hpp"
#include "pmtbn/random.hpp"

namespace pmtbn {

namespace {

void check_query(const NetworkModel& model, const Evidence& evidence, std::string_view query) {
    const auto& schema = model.schema();
    schema.index_of(query);
    for (const auto& [name, state] : evidence) {
        const auto& var = schema.variable(name);
        if (state < 0 || static_cast<std::size_t>(state) >= var.cardinality()) {
            throw InvalidArgumentError(
                fmt::format("evidence {}={} is out of range", name, state));
        }
    }
    if (evidence.contains(query)) {
        throw InvalidArgumentError(fmt::format("query variable '{}' is also observed", query));
    }
}

Factor normalized_or_throw(const Factor& f) {
    const double mass = f.sum();
    if (!(mass >= kImpossibleEvidenceMass)) {
        throw ImpossibleEvidenceError("evidence has zero probability under the model");
    }
    return f.scaled(mass);
}

std::string pick_min_degree(const std::set<std::string>& candidates,
                            const std::vector<Factor>& factors) {
    const std::string* best = nullptr;
    std::size_t best_degree = 0;
    for (const auto& v : candidates) {
        std::set<std::string_view> neighbours;
        for (const auto& f : factors) {
            if (!f.contains(v)) continue;
            for (const auto& s : f.scope()) {
                if (s != v) neighbours.insert(s);
            }
        }
        if (best == nullptr || neighbours.size() < best_degree) {
            best = &v;
            best_degree = neighbours.size();
        }
    }
    return *best;
}

}  // namespace

Evidence evidence_from_row(const Schema& schema, std::span<const StateIndex> row,
                           std::string_view exclude) {
    if (row.size() != schema.size()) {
        throw InvalidArgumentError(
            fmt::format("row has {} entries, schema has {}", row.size(), schema.size()));
    }
    Evidence out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        const auto& name = schema.variable(i).name();
        if (row[i] == kMissing || name == exclude) continue;
        out.emplace(name, row[i]);
    }
    return out;
}

std::vector<double> posterior(const NetworkModel& model, const Evidence& evidence,
                              std::string_view query, EliminationOrder order) {
    check_query(model, evidence, query);

    std::vector<Factor> factors;
    factors.reserve(model.cpts().size());
    for (const auto& cpt : model.cpts()) {
        Factor f = Factor::from_cpt(cpt);
        for (const auto& [name, state] : evidence) {
            if (f.contains(name)) f = factor_reduce(f, name, state);
        }
        factors.push_back(std::move(f));
    }

    std::set<std::string> pending;
    for (const auto& name : model.schema().names()) {
        if (name != query && !evidence.contains(name)) pending.insert(name);
    }

    std::vector<std::string> fixed_order;
    if (order == EliminationOrder::ReverseTopological) {
        const auto& topo = model.topological_order();
        for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
            const auto& name = model.schema().variable(*it).name();
            if (pending.contains(name)) fixed_order.push_back(name);
        }
    }

    for (std::size_t step = 0; !pending.empty(); ++step) {
        std::string var = order == EliminationOrder::MinDegree ? pick_min_degree(pending, factors)
                                                               : fixed_order[step];
        pending.erase(var);

        std::vector<Factor> rest;
        Factor product;
        for (auto& f : factors) {
            if (f.contains(var)) {
                product = factor_product(product, f);
            } else {
                rest.push_back(std::move(f));
            }
        }
        rest.push_back(normalized_or_throw(factor_marginalize(product, var)));
        factors = std::move(rest);
    }

    Factor result;
    for (const auto& f : factors) result = normalized_or_throw(factor_product(result, f));
    result = normalized_or_throw(result);
    if (result.scope().size() != 1 || result.scope().front() != query) {
        throw InvalidModelError("elimination did not leave a factor over the query alone");
    }
    return result.values();
}

std::vector<double> brute_force_posterior(const NetworkModel& model, const Evidence& evidence,
                                          std::string_view query) {
    check_query(model, evidence, query);
    const auto& schema = model.schema();

    std::uint64_t total = 1;
    for (const auto& v : schema.variables()) {
        total *= v.cardinality();
        if (total > kBruteForceLimit) {
            throw TooLargeError(fmt::format("joint table exceeds {} entries", kBruteForceLimit));
        }
    }

    std::vector<StateIndex> assignment(schema.size(), 0);
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        auto it = evidence.find(schema.variable(i).name());
        if (it != evidence.end()) {
            assignment[i] = it->second;
        } else {
            free.push_back(i);
        }
    }

    const auto q = schema.index_of(query);
    std::vector<double> dist(schema.variable(q).cardinality(), 0.0);
    while (true) {
        dist[static_cast<std::size_t>(assignment[q])] += joint_probability(model, assignment);
        std::size_t d = free.size();
        while (d > 0) {
            auto i = free[d - 1];
            if (static_cast<std::size_t>(++assignment[i]) < schema.variable(i).cardinality()) break;
            assignment[i] = 0;
            --d;
        }
        if (d == 0) break;
    }

    double mass = 0.0;
    for (double p : dist) mass += p;
    if (!(mass >= kImpossibleEvidenceMass)) {
        throw ImpossibleEvidenceError("evidence has zero probability under the model");
    }
    for (double& p : dist) p /= mass;
    return dist;
}

StateIndex argmax_state(std::span<const double> distribution) {
    if (distribution.empty()) throw InvalidArgumentError("argmax of an empty distribution");
    std::size_t best = 0;
    for (std::size_t k = 1; k < distribution.size(); ++k) {
        if (distribution[k] > distribution[best]) best = k;
    }
    return static_cast<StateIndex>(best);
}

Classification classify(const NetworkModel& model, const Evidence& evidence,
                        std::string_view class_name) {
    auto dist = posterior(model, evidence, class_name);
    return {argmax_state(dist), std::move(dist)};
}

StateIndex inverse_cdf(std::span<const double> distribution, double u) {
    double cumulative = 0.0;
    for (std::size_t k = 0; k < distribution.size(); ++k) {
        cumulative += distribution[k];
        if (u < cumulative) return static_cast<StateIndex>(k);
    }
    for (std::size_t k = distribution.size(); k-- > 0;) {
        if (distribution[k] > 0.0) return static_cast<StateIndex>(k);
    }
    throw InvalidArgumentError("inverse_cdf on a distribution with no mass");
}

Dataset ancestral_sample(const NetworkModel& model, std::uint64_t seed, std::size_t n) {
    const auto& schema = model.schema();
    const auto width = schema.size();
    SplitMix64 rng(seed);
    std::vector<StateIndex> cells(n * width, kMissing);
    std::vector<StateIndex> parent_states;
    for (std::size_t r = 0; r < n; ++r) {
        StateIndex* row = cells.data() + r * width;
        for (auto node : model.topological_order()) {
            parent_states.clear();
            for (auto p : model.parent_indices(node)) parent_states.push_back(row[p]);
            const auto& cpt = model.cpts()[node];
            row[node] = inverse_cdf(cpt.row(cpt.row_index(parent_states)), rng.next_unit());
        }
    }
    return Dataset(schema, std::move(cells));
}

}  // namespace pmtbn
