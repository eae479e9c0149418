#include "pmtbn/learning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "pmtbn/errors.hpp"

namespace pmtbn {

NetworkModel estimate_cpts(const Dag& dag, const Schema& schema, const Dataset& data,
                           double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw InvalidArgumentError(fmt::format("smoothing pseudocount {} must be finite and >= 0", alpha));
    }
    if (!(data.schema() == schema)) {
        throw InvalidArgumentError("dataset is bound to a different schema");
    }
    validate_dag(dag);

    std::vector<Cpt> cpts;
    cpts.reserve(schema.size());
    for (std::size_t i = 0; i < schema.size(); ++i) {
        const auto& var = schema.variable(i);
        auto parents = parents_in_schema_order(dag, schema, var.name());
        std::vector<std::size_t> parent_idx;
        std::vector<std::size_t> parent_cards;
        std::size_t rows = 1;
        for (const auto& p : parents) {
            parent_idx.push_back(schema.index_of(p));
            parent_cards.push_back(schema.variable(parent_idx.back()).cardinality());
            rows *= parent_cards.back();
        }
        const std::size_t card = var.cardinality();

        std::vector<std::uint64_t> counts(rows * card, 0);
        for (std::size_t r = 0; r < data.size(); ++r) {
            auto row = data.row(r);
            if (row[i] == kMissing) continue;
            std::size_t u = 0;
            bool complete = true;
            for (std::size_t p = 0; p < parent_idx.size(); ++p) {
                auto s = row[parent_idx[p]];
                if (s == kMissing) {
                    complete = false;
                    break;
                }
                u = u * parent_cards[p] + static_cast<std::size_t>(s);
            }
            if (complete) ++counts[u * card + static_cast<std::size_t>(row[i])];
        }

        std::vector<double> table(rows * card);
        for (std::size_t u = 0; u < rows; ++u) {
            std::uint64_t total = 0;
            for (std::size_t k = 0; k < card; ++k) total += counts[u * card + k];
            const double denominator = static_cast<double>(total) + alpha * static_cast<double>(card);
            for (std::size_t k = 0; k < card; ++k) {
                table[u * card + k] =
                    denominator == 0.0
                        ? 1.0 / static_cast<double>(card)
                        : (static_cast<double>(counts[u * card + k]) + alpha) / denominator;
            }
        }
        cpts.emplace_back(var.name(), card, std::move(parents), std::move(parent_cards),
                          std::move(table));
    }
    return NetworkModel(schema, dag, std::move(cpts));
}

double conditional_mutual_information(const Dataset& data, std::string_view xi,
                                      std::string_view xj, std::string_view c) {
    if (xi == xj || xi == c || xj == c) {
        throw InvalidArgumentError(
            fmt::format("conditional mutual information needs three distinct variables, got {}, {}, {}",
                        xi, xj, c));
    }
    const auto& schema = data.schema();
    auto a = schema.index_of(xi);
    auto b = schema.index_of(xj);
    // Canonical argument order makes the result bitwise symmetric.
    if (a > b) std::swap(a, b);
    const auto ci = schema.index_of(c);
    const std::size_t na = schema.variable(a).cardinality();
    const std::size_t nb = schema.variable(b).cardinality();
    const std::size_t nc = schema.variable(ci).cardinality();

    std::vector<std::uint64_t> joint(na * nb * nc, 0);
    std::uint64_t complete = 0;
    for (std::size_t r = 0; r < data.size(); ++r) {
        auto row = data.row(r);
        if (row[a] == kMissing || row[b] == kMissing || row[ci] == kMissing) continue;
        ++joint[(static_cast<std::size_t>(row[ci]) * na + static_cast<std::size_t>(row[a])) * nb +
                static_cast<std::size_t>(row[b])];
        ++complete;
    }
    if (complete == 0) {
        throw EmptyDataError(fmt::format("no row observes all of {}, {}, {}", xi, xj, c));
    }

    const double n = static_cast<double>(complete);
    double total = 0.0;
    std::vector<std::uint64_t> count_a(na);
    std::vector<std::uint64_t> count_b(nb);
    for (std::size_t k = 0; k < nc; ++k) {
        std::fill(count_a.begin(), count_a.end(), 0);
        std::fill(count_b.begin(), count_b.end(), 0);
        std::uint64_t count_c = 0;
        for (std::size_t x = 0; x < na; ++x) {
            for (std::size_t y = 0; y < nb; ++y) {
                auto v = joint[(k * na + x) * nb + y];
                count_a[x] += v;
                count_b[y] += v;
                count_c += v;
            }
        }
        for (std::size_t x = 0; x < na; ++x) {
            for (std::size_t y = 0; y < nb; ++y) {
                auto v = joint[(k * na + x) * nb + y];
                if (v == 0 || count_a[x] == 0 || count_b[y] == 0) continue;
                const double ratio = (static_cast<double>(v) * static_cast<double>(count_c)) /
                                     (static_cast<double>(count_a[x]) * static_cast<double>(count_b[y]));
                total += static_cast<double>(v) / n * std::log(ratio);
            }
        }
    }
    return std::max(total, 0.0);
}

// ---------------------------------------------------------------------------
// WeightedPairGraph

WeightedPairGraph::WeightedPairGraph(std::vector<std::string> features)
    : features_(std::move(features)), weights_(features_.size() * features_.size(), 0.0) {
    std::set<std::string_view> seen;
    for (const auto& f : features_) {
        if (!seen.insert(f).second) throw DuplicateError(fmt::format("duplicate feature '{}'", f));
    }
}

std::size_t WeightedPairGraph::index_of(std::string_view name) const {
    auto it = std::find(features_.begin(), features_.end(), name);
    if (it == features_.end()) throw UnknownNodeError(fmt::format("unknown feature '{}'", name));
    return static_cast<std::size_t>(it - features_.begin());
}

double WeightedPairGraph::weight(std::size_t i, std::size_t j) const {
    return weights_.at(i * features_.size() + j);
}

double WeightedPairGraph::weight(std::string_view a, std::string_view b) const {
    return weight(index_of(a), index_of(b));
}

void WeightedPairGraph::set_weight(std::string_view a, std::string_view b, double w) {
    const auto i = index_of(a);
    const auto j = index_of(b);
    if (i == j) throw InvalidArgumentError(fmt::format("self-pair weight for '{}'", a));
    if (!std::isfinite(w) || w < -1e-12) {
        throw InvalidArgumentError(fmt::format("pair weight {} for {}-{} is invalid", w, a, b));
    }
    w = std::max(w, 0.0);
    weights_[i * features_.size() + j] = w;
    weights_[j * features_.size() + i] = w;
}

// ---------------------------------------------------------------------------
// Trees

UndirectedEdge::UndirectedEdge(std::string a, std::string b) {
    if (a == b) throw InvalidArgumentError(fmt::format("undirected self-edge on '{}'", a));
    if (b < a) std::swap(a, b);
    first = std::move(a);
    second = std::move(b);
}

std::vector<UndirectedEdge> max_spanning_tree(const WeightedPairGraph& graph) {
    const auto& features = graph.features();
    if (features.empty()) throw InvalidArgumentError("spanning tree over zero features");

    struct Candidate {
        double weight;
        UndirectedEdge edge;
        std::size_t i;
        std::size_t j;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < features.size(); ++i) {
        for (std::size_t j = i + 1; j < features.size(); ++j) {
            candidates.push_back({graph.weight(i, j), UndirectedEdge(features[i], features[j]), i, j});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& l, const Candidate& r) {
        if (l.weight != r.weight) return l.weight > r.weight;
        return l.edge < r.edge;
    });

    std::vector<std::size_t> parent(features.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    std::vector<UndirectedEdge> tree;
    for (auto& c : candidates) {
        auto ri = find(c.i);
        auto rj = find(c.j);
        if (ri == rj) continue;
        parent[ri] = rj;
        tree.push_back(std::move(c.edge));
        if (tree.size() + 1 == features.size()) break;
    }
    std::sort(tree.begin(), tree.end());
    return tree;
}

std::vector<Edge> orient_tree(std::span<const UndirectedEdge> tree, std::string_view root,
                              std::span<const std::string> features) {
    std::set<std::string> nodes;
    if (features.empty()) {
        nodes.insert(std::string(root));
        for (const auto& e : tree) {
            nodes.insert(e.first);
            nodes.insert(e.second);
        }
    } else {
        nodes.insert(features.begin(), features.end());
    }
    if (!nodes.contains(std::string(root))) {
        throw DisconnectedError(fmt::format("root '{}' is not a tree node", root));
    }

    std::map<std::string, std::set<std::string>> adjacency;
    for (const auto& e : tree) {
        if (!nodes.contains(e.first) || !nodes.contains(e.second)) {
            throw DisconnectedError(
                fmt::format("edge {}-{} leaves the feature set", e.first, e.second));
        }
        adjacency[e.first].insert(e.second);
        adjacency[e.second].insert(e.first);
    }
    if (tree.size() + 1 != nodes.size()) {
        throw DisconnectedError(fmt::format("{} edges cannot span {} nodes as a tree", tree.size(),
                                            nodes.size()));
    }

    std::vector<Edge> out;
    std::set<std::string> visited{std::string(root)};
    std::deque<std::string> queue{std::string(root)};
    while (!queue.empty()) {
        auto node = std::move(queue.front());
        queue.pop_front();
        for (const auto& next : adjacency[node]) {
            if (visited.insert(next).second) {
                out.push_back({node, next});
                queue.push_back(next);
            }
        }
    }
    if (visited.size() != nodes.size()) {
        throw DisconnectedError(fmt::format("tree reaches {} of {} nodes from '{}'",
                                            visited.size(), nodes.size(), root));
    }
    return out;
}

// ---------------------------------------------------------------------------
// TAN

std::vector<std::string> feature_names(const Schema& schema, std::string_view class_name) {
    schema.index_of(class_name);
    std::vector<std::string> out;
    for (const auto& v : schema.variables()) {
        if (v.name() != class_name) out.push_back(v.name());
    }
    return out;
}

std::vector<UndirectedEdge> learn_tan_tree(const Dataset& data, std::string_view class_name) {
    auto features = feature_names(data.schema(), class_name);
    if (features.empty()) throw InvalidArgumentError("TAN needs at least one feature");
    WeightedPairGraph graph(features);
    for (std::size_t i = 0; i < features.size(); ++i) {
        for (std::size_t j = i + 1; j < features.size(); ++j) {
            graph.set_weight(features[i], features[j],
                             conditional_mutual_information(data, features[i], features[j], class_name));
        }
    }
    return max_spanning_tree(graph);
}

NetworkModel learn_tan(const Dataset& data, const Schema& schema, std::string_view class_name,
                       double alpha) {
    if (!(data.schema() == schema)) {
        throw InvalidArgumentError("dataset is bound to a different schema");
    }
    auto features = feature_names(schema, class_name);
    auto tree = learn_tan_tree(data, class_name);
    auto edges = orient_tree(tree, features.front(), features);
    for (const auto& f : features) edges.push_back({std::string(class_name), f});
    Dag dag(schema.names(), std::move(edges));
    return estimate_cpts(dag, schema, data, alpha).with_class_name(std::string(class_name));
}

}  // namespace pmtbn
