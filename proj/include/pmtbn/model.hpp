#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pmtbn {

using StateIndex = std::int32_t;

/// Marker for an unobserved cell ("?" in dataset files).
inline constexpr StateIndex kMissing = -1;

/// Rows of a stored CPT must sum to one within this tolerance.
inline constexpr double kRowSumTolerance = 1e-9;

/// True if `name` is usable as a variable name or state label in the text
/// formats: non-empty, made of letters, digits, '_', '.', '-'.
bool is_identifier(std::string_view name) noexcept;

/// A discrete random variable with an ordered list of named states.
class Variable {
  public:
    Variable(std::string name, std::vector<std::string> states);

    const std::string& name() const noexcept { return name_; }
    const std::vector<std::string>& states() const noexcept { return states_; }
    std::size_t cardinality() const noexcept { return states_.size(); }

    std::optional<StateIndex> state_index(std::string_view label) const noexcept;

    bool operator==(const Variable&) const = default;

  private:
    std::string name_;
    std::vector<std::string> states_;
};

/// Ordered set of variables. The order fixes dataset columns, CPT parent
/// order and every tie-break in the library.
class Schema {
  public:
    Schema() = default;
    explicit Schema(std::vector<Variable> variables);

    std::size_t size() const noexcept { return variables_.size(); }
    bool empty() const noexcept { return variables_.empty(); }
    const std::vector<Variable>& variables() const noexcept { return variables_; }
    const Variable& variable(std::size_t index) const { return variables_.at(index); }

    /// Throws UnknownNodeError if absent.
    const Variable& variable(std::string_view name) const;
    std::size_t index_of(std::string_view name) const;
    std::optional<std::size_t> find(std::string_view name) const noexcept;
    bool contains(std::string_view name) const noexcept { return find(name).has_value(); }

    std::vector<std::string> names() const;

    bool operator==(const Schema& other) const { return variables_ == other.variables_; }

  private:
    std::vector<Variable> variables_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct Edge {
    std::string parent;
    std::string child;

    auto operator<=>(const Edge&) const = default;
    bool operator==(const Edge&) const = default;
};

/// Directed graph over variable names. Construction rejects undeclared
/// endpoints, self-loops, and duplicate nodes or edges; acyclicity is
/// checked by validate_dag().
class Dag {
  public:
    Dag() = default;
    Dag(std::vector<std::string> nodes, std::vector<Edge> edges);

    const std::set<std::string>& nodes() const noexcept { return nodes_; }
    const std::set<Edge>& edges() const noexcept { return edges_; }

    bool contains(std::string_view node) const;
    bool has_edge(std::string_view parent, std::string_view child) const;

    /// Parents and children, sorted lexicographically.
    std::vector<std::string> parents(std::string_view node) const;
    std::vector<std::string> children(std::string_view node) const;

    bool operator==(const Dag&) const = default;

  private:
    std::set<std::string> nodes_;
    std::set<Edge> edges_;
};

/// Returns the topological order that always takes the lexicographically
/// smallest available node next. Throws CycleError naming an edge on a cycle.
std::vector<std::string> validate_dag(const Dag& dag);

/// A schema, a graph over it, and the designated class variable if any.
struct Structure {
    Schema schema;
    Dag dag;
    std::optional<std::string> class_name;

    bool operator==(const Structure&) const = default;
};

/// Conditional probability table P(child | parents). Rows are indexed
/// row-major over the parent states (last parent varies fastest); each row
/// is a distribution over the child states.
class Cpt {
  public:
    Cpt(std::string child, std::size_t child_cardinality, std::vector<std::string> parents,
        std::vector<std::size_t> parent_cardinalities, std::vector<double> table);

    const std::string& child() const noexcept { return child_; }
    const std::vector<std::string>& parents() const noexcept { return parents_; }
    const std::vector<std::size_t>& parent_cardinalities() const noexcept {
        return parent_cardinalities_;
    }
    std::size_t cardinality() const noexcept { return cardinality_; }
    std::size_t rows() const noexcept { return rows_; }
    const std::vector<double>& table() const noexcept { return table_; }

    std::span<const double> row(std::size_t r) const;
    double probability(std::size_t row, StateIndex state) const;

    /// Row index for the given parent states (listed in parents() order).
    std::size_t row_index(std::span<const StateIndex> parent_states) const;

    /// Inverse of row_index().
    std::vector<StateIndex> parent_states(std::size_t row) const;

    bool operator==(const Cpt&) const = default;

  private:
    std::string child_;
    std::size_t cardinality_;
    std::vector<std::string> parents_;
    std::vector<std::size_t> parent_cardinalities_;
    std::size_t rows_;
    std::vector<double> table_;
};

/// A complete discrete Bayesian network: schema, DAG and one CPT per node.
class NetworkModel {
  public:
    /// `cpts` must be given in schema order, with each CPT's parents equal
    /// to the node's DAG parents listed in schema order.
    NetworkModel(Schema schema, Dag dag, std::vector<Cpt> cpts,
                 std::optional<std::string> class_name = std::nullopt);

    const Schema& schema() const noexcept { return schema_; }
    const Dag& dag() const noexcept { return dag_; }
    const std::vector<Cpt>& cpts() const noexcept { return cpts_; }
    const Cpt& cpt(std::string_view node) const { return cpts_[schema_.index_of(node)]; }
    const std::optional<std::string>& class_name() const noexcept { return class_name_; }

    /// Schema indices of the parents of node `index`, in schema order.
    const std::vector<std::size_t>& parent_indices(std::size_t index) const {
        return parent_indices_.at(index);
    }

    /// Schema indices in the deterministic topological order.
    const std::vector<std::size_t>& topological_order() const noexcept { return topo_; }

    Structure structure() const { return {schema_, dag_, class_name_}; }

    NetworkModel with_class_name(std::optional<std::string> class_name) const;

    bool operator==(const NetworkModel& other) const {
        return schema_ == other.schema_ && dag_ == other.dag_ && cpts_ == other.cpts_ &&
               class_name_ == other.class_name_;
    }

  private:
    Schema schema_;
    Dag dag_;
    std::vector<Cpt> cpts_;
    std::optional<std::string> class_name_;
    std::vector<std::vector<std::size_t>> parent_indices_;
    std::vector<std::size_t> topo_;
};

/// Parents of `node` in `dag`, ordered as in `schema`.
std::vector<std::string> parents_in_schema_order(const Dag& dag, const Schema& schema,
                                                 std::string_view node);

/// Chain-rule product of CPT entries for a full assignment in schema order.
/// Throws IncompleteAssignmentError on a short assignment or a MISSING entry.
double joint_probability(const NetworkModel& model, std::span<const StateIndex> assignment);

/// Rows of state indices (or kMissing) bound to a schema. Stored row-major.
class Dataset {
  public:
    explicit Dataset(Schema schema) : schema_(std::move(schema)) {}
    Dataset(Schema schema, std::vector<StateIndex> cells);
    Dataset(Schema schema, const std::vector<std::vector<StateIndex>>& rows);

    const Schema& schema() const noexcept { return schema_; }
    std::size_t size() const noexcept { return schema_.empty() ? 0 : cells_.size() / schema_.size(); }
    bool empty() const noexcept { return cells_.empty(); }
    std::size_t width() const noexcept { return schema_.size(); }

    std::span<const StateIndex> row(std::size_t r) const;
    StateIndex at(std::size_t r, std::size_t column) const { return cells_.at(r * width() + column); }
    const std::vector<StateIndex>& cells() const noexcept { return cells_; }

    /// Rows [first, first + count).
    Dataset slice(std::size_t first, std::size_t count) const;

    bool operator==(const Dataset&) const = default;

  private:
    Schema schema_;
    std::vector<StateIndex> cells_;
};

}  // namespace pmtbn
