#pragma once

#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pmtbn/model.hpp"

namespace pmtbn {

/// Laplace pseudocount used when the caller does not choose one.
inline constexpr double kDefaultAlpha = 1.0;

/// Smoothed maximum-likelihood CPTs for `dag`:
///
///   P(x | u) = (count(x, u) + alpha) / (count(u) + alpha * |X|)
///
/// Rows with a missing value in the child or any parent are left out of
/// that node's counts only. With alpha = 0 an unseen parent assignment
/// gets a uniform row.
NetworkModel estimate_cpts(const Dag& dag, const Schema& schema, const Dataset& data,
                           double alpha = kDefaultAlpha);

/// Empirical I(Xi; Xj | C) in nats over rows where xi, xj and c are all
/// observed. Terms with a zero numerator or denominator contribute 0; the
/// result is clamped at 0. Throws EmptyDataError if no row is complete.
double conditional_mutual_information(const Dataset& data, std::string_view xi,
                                      std::string_view xj, std::string_view c);

/// Complete graph over features with a symmetric non-negative weight per pair.
class WeightedPairGraph {
  public:
    explicit WeightedPairGraph(std::vector<std::string> features);

    const std::vector<std::string>& features() const noexcept { return features_; }
    double weight(std::size_t i, std::size_t j) const;
    double weight(std::string_view a, std::string_view b) const;

    /// Values in [-1e-12, 0) are stored as 0; anything lower or non-finite
    /// is rejected.
    void set_weight(std::string_view a, std::string_view b, double w);

  private:
    std::size_t index_of(std::string_view name) const;

    std::vector<std::string> features_;
    std::vector<double> weights_;
};

/// Undirected edge with first < second lexicographically.
struct UndirectedEdge {
    std::string first;
    std::string second;

    UndirectedEdge(std::string a, std::string b);

    auto operator<=>(const UndirectedEdge&) const = default;
    bool operator==(const UndirectedEdge&) const = default;
};

/// Kruskal over pairs sorted by descending weight, ties broken by the
/// ascending (first, second) names. Returns |features| - 1 edges, sorted.
std::vector<UndirectedEdge> max_spanning_tree(const WeightedPairGraph& graph);

/// Directs tree edges away from `root` (breadth first, neighbours in
/// lexicographic order). `features` is the node set the tree must span;
/// when empty, the tree's own endpoints plus the root are used. Throws
/// DisconnectedError if the edges do not form a spanning tree.
std::vector<Edge> orient_tree(std::span<const UndirectedEdge> tree, std::string_view root,
                              std::span<const std::string> features = {});

/// Features of a TAN classifier: every schema variable except the class,
/// in schema order.
std::vector<std::string> feature_names(const Schema& schema, std::string_view class_name);

/// The undirected feature tree learn_tan() would build.
std::vector<UndirectedEdge> learn_tan_tree(const Dataset& data, std::string_view class_name);

/// Tree-augmented naive Bayes: CMI weights -> maximum spanning tree ->
/// orientation from the first feature -> class parent on every feature ->
/// estimate_cpts. The class variable of the result is `class_name`.
NetworkModel learn_tan(const Dataset& data, const Schema& schema, std::string_view class_name,
                       double alpha = kDefaultAlpha);

}  // namespace pmtbn
