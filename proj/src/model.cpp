#include "pmtbn/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include <fmt/format.h>

#include "pmtbn/errors.hpp"

namespace pmtbn {

bool is_identifier(std::string_view name) noexcept {
    if (name.empty()) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '_' || c == '.' || c == '-';
    });
}

// ---------------------------------------------------------------------------
// Variable / Schema

Variable::Variable(std::string name, std::vector<std::string> states)
    : name_(std::move(name)), states_(std::move(states)) {
    if (!is_identifier(name_)) {
        throw InvalidArgumentError(fmt::format("invalid variable name '{}'", name_));
    }
    if (states_.size() < 2) {
        throw InvalidArgumentError(
            fmt::format("variable '{}' needs at least 2 states, has {}", name_, states_.size()));
    }
    std::set<std::string_view> seen;
    for (const auto& s : states_) {
        if (!is_identifier(s)) {
            throw InvalidArgumentError(
                fmt::format("variable '{}': invalid state label '{}'", name_, s));
        }
        if (!seen.insert(s).second) {
            throw DuplicateError(fmt::format("variable '{}': duplicate state '{}'", name_, s));
        }
    }
}

std::optional<StateIndex> Variable::state_index(std::string_view label) const noexcept {
    for (std::size_t i = 0; i < states_.size(); ++i) {
        if (states_[i] == label) return static_cast<StateIndex>(i);
    }
    return std::nullopt;
}

Schema::Schema(std::vector<Variable> variables) : variables_(std::move(variables)) {
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        if (!index_.emplace(variables_[i].name(), i).second) {
            throw DuplicateError(fmt::format("duplicate variable '{}'", variables_[i].name()));
        }
    }
}

std::optional<std::size_t> Schema::find(std::string_view name) const noexcept {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t Schema::index_of(std::string_view name) const {
    auto idx = find(name);
    if (!idx) throw UnknownNodeError(fmt::format("unknown variable '{}'", name));
    return *idx;
}

const Variable& Schema::variable(std::string_view name) const {
    return variables_[index_of(name)];
}

std::vector<std::string> Schema::names() const {
    std::vector<std::string> out;
    out.reserve(variables_.size());
    for (const auto& v : variables_) out.push_back(v.name());
    return out;
}

// ---------------------------------------------------------------------------
// Dag

Dag::Dag(std::vector<std::string> nodes, std::vector<Edge> edges) {
    for (auto& n : nodes) {
        if (!nodes_.insert(n).second) {
            throw DuplicateError(fmt::format("duplicate node '{}'", n));
        }
    }
    for (auto& e : edges) {
        if (!nodes_.contains(e.parent)) {
            throw UnknownNodeError(fmt::format("edge {} -> {}: undeclared node '{}'", e.parent,
                                               e.child, e.parent));
        }
        if (!nodes_.contains(e.child)) {
            throw UnknownNodeError(fmt::format("edge {} -> {}: undeclared node '{}'", e.parent,
                                               e.child, e.child));
        }
        if (e.parent == e.child) {
            throw CycleError(fmt::format("self-loop on '{}'", e.parent));
        }
        std::string label = fmt::format("{} -> {}", e.parent, e.child);
        if (!edges_.insert(std::move(e)).second) {
            throw DuplicateError(fmt::format("duplicate edge {}", label));
        }
    }
}

bool Dag::contains(std::string_view node) const {
    return nodes_.contains(std::string(node));
}

bool Dag::has_edge(std::string_view parent, std::string_view child) const {
    return edges_.contains(Edge{std::string(parent), std::string(child)});
}

std::vector<std::string> Dag::parents(std::string_view node) const {
    std::vector<std::string> out;
    for (const auto& e : edges_) {
        if (e.child == node) out.push_back(e.parent);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> Dag::children(std::string_view node) const {
    std::vector<std::string> out;
    for (const auto& e : edges_) {
        if (e.parent == node) out.push_back(e.child);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> validate_dag(const Dag& dag) {
    std::map<std::string, std::size_t> indegree;
    std::map<std::string, std::vector<std::string>> children;
    for (const auto& n : dag.nodes()) indegree[n] = 0;
    for (const auto& e : dag.edges()) {
        if (!indegree.contains(e.parent) || !indegree.contains(e.child)) {
            throw UnknownNodeError(fmt::format("edge {} -> {} has an undeclared endpoint",
                                               e.parent, e.child));
        }
        ++indegree[e.child];
        children[e.parent].push_back(e.child);
    }

    std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
    for (const auto& [n, d] : indegree) {
        if (d == 0) ready.push(n);
    }
    std::vector<std::string> order;
    order.reserve(indegree.size());
    while (!ready.empty()) {
        std::string n = ready.top();
        ready.pop();
        for (const auto& c : children[n]) {
            if (--indegree[c] == 0) ready.push(c);
        }
        order.push_back(std::move(n));
    }
    if (order.size() == indegree.size()) return order;

    // Every unpeeled node keeps an unpeeled parent, so walking parents from
    // any of them must revisit a node; the revisit closes a cycle.
    std::map<std::string, std::string> first_parent;
    for (const auto& e : dag.edges()) {
        if (indegree[e.parent] > 0 && indegree[e.child] > 0 && !first_parent.contains(e.child)) {
            first_parent[e.child] = e.parent;
        }
    }
    std::string node = first_parent.begin()->first;
    std::set<std::string> visited;
    while (visited.insert(node).second) node = first_parent.at(node);
    const std::string& parent = first_parent.at(node);
    throw CycleError(fmt::format("edge {} -> {} lies on a directed cycle", parent, node));
}

// ---------------------------------------------------------------------------
// Cpt

Cpt::Cpt(std::string child, std::size_t child_cardinality, std::vector<std::string> parents,
         std::vector<std::size_t> parent_cardinalities, std::vector<double> table)
    : child_(std::move(child)),
      cardinality_(child_cardinality),
      parents_(std::move(parents)),
      parent_cardinalities_(std::move(parent_cardinalities)),
      rows_(1),
      table_(std::move(table)) {
    if (parents_.size() != parent_cardinalities_.size()) {
        throw InvalidModelError(
            fmt::format("cpt '{}': {} parents but {} parent cardinalities", child_,
                        parents_.size(), parent_cardinalities_.size()));
    }
    if (cardinality_ < 2) {
        throw InvalidModelError(fmt::format("cpt '{}': cardinality below 2", child_));
    }
    for (auto c : parent_cardinalities_) rows_ *= c;
    if (table_.size() != rows_ * cardinality_) {
        throw InvalidModelError(fmt::format("cpt '{}': expected {}x{} entries, got {}", child_,
                                            rows_, cardinality_, table_.size()));
    }
    for (std::size_t r = 0; r < rows_; ++r) {
        double sum = 0.0;
        for (std::size_t k = 0; k < cardinality_; ++k) {
            double p = table_[r * cardinality_ + k];
            if (!(p >= 0.0 && p <= 1.0)) {
                throw InvalidModelError(
                    fmt::format("cpt '{}' row {}: entry {} outside [0, 1]", child_, r, p));
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
            throw RowSumError(fmt::format("cpt '{}' row {} sums to {:.17g}", child_, r, sum));
        }
    }
}

std::span<const double> Cpt::row(std::size_t r) const {
    if (r >= rows_) throw InvalidArgumentError(fmt::format("cpt '{}': row {} out of range", child_, r));
    return std::span<const double>(table_).subspan(r * cardinality_, cardinality_);
}

double Cpt::probability(std::size_t row, StateIndex state) const {
    return table_[row * cardinality_ + static_cast<std::size_t>(state)];
}

std::size_t Cpt::row_index(std::span<const StateIndex> parent_states) const {
    if (parent_states.size() != parents_.size()) {
        throw InvalidArgumentError(fmt::format("cpt '{}': expected {} parent states, got {}",
                                               child_, parents_.size(), parent_states.size()));
    }
    std::size_t r = 0;
    for (std::size_t i = 0; i < parents_.size(); ++i) {
        auto s = parent_states[i];
        if (s < 0 || static_cast<std::size_t>(s) >= parent_cardinalities_[i]) {
            throw InvalidArgumentError(
                fmt::format("cpt '{}': parent '{}' state {} out of range", child_, parents_[i], s));
        }
        r = r * parent_cardinalities_[i] + static_cast<std::size_t>(s);
    }
    return r;
}

std::vector<StateIndex> Cpt::parent_states(std::size_t row) const {
    std::vector<StateIndex> out(parents_.size());
    for (std::size_t i = parents_.size(); i-- > 0;) {
        out[i] = static_cast<StateIndex>(row % parent_cardinalities_[i]);
        row /= parent_cardinalities_[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// NetworkModel

std::vector<std::string> parents_in_schema_order(const Dag& dag, const Schema& schema,
                                                 std::string_view node) {
    auto parents = dag.parents(node);
    std::sort(parents.begin(), parents.end(), [&](const auto& a, const auto& b) {
        return schema.index_of(a) < schema.index_of(b);
    });
    return parents;
}

NetworkModel::NetworkModel(Schema schema, Dag dag, std::vector<Cpt> cpts,
                           std::optional<std::string> class_name)
    : schema_(std::move(schema)),
      dag_(std::move(dag)),
      cpts_(std::move(cpts)),
      class_name_(std::move(class_name)) {
    auto names = schema_.names();
    if (std::set<std::string>(names.begin(), names.end()) != dag_.nodes()) {
        throw InvalidModelError("dag nodes differ from schema variables");
    }
    if (class_name_ && !schema_.contains(*class_name_)) {
        throw UnknownNodeError(fmt::format("class variable '{}' not in schema", *class_name_));
    }
    if (cpts_.size() != schema_.size()) {
        throw InvalidModelError(
            fmt::format("expected {} cpts, got {}", schema_.size(), cpts_.size()));
    }
    for (std::size_t i = 0; i < schema_.size(); ++i) {
        const auto& var = schema_.variable(i);
        const auto& cpt = cpts_[i];
        if (cpt.child() != var.name()) {
            throw InvalidModelError(
                fmt::format("cpt {} is for '{}', expected '{}'", i, cpt.child(), var.name()));
        }
        if (cpt.cardinality() != var.cardinality()) {
            throw InvalidModelError(fmt::format("cpt '{}': cardinality mismatch", var.name()));
        }
        auto expected = parents_in_schema_order(dag_, schema_, var.name());
        if (cpt.parents() != expected) {
            throw InvalidModelError(
                fmt::format("cpt '{}': parents do not match the dag", var.name()));
        }
        std::vector<std::size_t> indices;
        for (std::size_t p = 0; p < expected.size(); ++p) {
            auto idx = schema_.index_of(expected[p]);
            if (cpt.parent_cardinalities()[p] != schema_.variable(idx).cardinality()) {
                throw InvalidModelError(fmt::format("cpt '{}': parent '{}' cardinality mismatch",
                                                    var.name(), expected[p]));
            }
            indices.push_back(idx);
        }
        parent_indices_.push_back(std::move(indices));
    }
    for (const auto& n : validate_dag(dag_)) topo_.push_back(schema_.index_of(n));
}

NetworkModel NetworkModel::with_class_name(std::optional<std::string> class_name) const {
    return NetworkModel(schema_, dag_, cpts_, std::move(class_name));
}

double joint_probability(const NetworkModel& model, std::span<const StateIndex> assignment) {
    const auto& schema = model.schema();
    if (assignment.size() != schema.size()) {
        throw IncompleteAssignmentError(fmt::format("assignment has {} entries, schema has {}",
                                                    assignment.size(), schema.size()));
    }
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] == kMissing) {
            throw IncompleteAssignmentError(
                fmt::format("variable '{}' is missing", schema.variable(i).name()));
        }
        if (assignment[i] < 0 ||
            static_cast<std::size_t>(assignment[i]) >= schema.variable(i).cardinality()) {
            throw InvalidArgumentError(fmt::format("variable '{}': state {} out of range",
                                                   schema.variable(i).name(), assignment[i]));
        }
    }
    double p = 1.0;
    std::vector<StateIndex> parent_states;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        const auto& parents = model.parent_indices(i);
        parent_states.clear();
        for (auto pi : parents) parent_states.push_back(assignment[pi]);
        const auto& cpt = model.cpts()[i];
        p *= cpt.probability(cpt.row_index(parent_states), assignment[i]);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Dataset

namespace {

void check_cells(const Schema& schema, const std::vector<StateIndex>& cells) {
    const auto width = schema.size();
    if (width == 0) {
        if (!cells.empty()) throw InvalidArgumentError("cells given for an empty schema");
        return;
    }
    if (cells.size() % width != 0) {
        throw InvalidArgumentError(
            fmt::format("{} cells do not form rows of width {}", cells.size(), width));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        auto s = cells[i];
        const auto& var = schema.variable(i % width);
        if (s == kMissing) continue;
        if (s < 0 || static_cast<std::size_t>(s) >= var.cardinality()) {
            throw InvalidArgumentError(fmt::format("row {}, variable '{}': state index {} out of range",
                                                   i / width, var.name(), s));
        }
    }
}

}  // namespace

Dataset::Dataset(Schema schema, std::vector<StateIndex> cells)
    : schema_(std::move(schema)), cells_(std::move(cells)) {
    check_cells(schema_, cells_);
}

Dataset::Dataset(Schema schema, const std::vector<std::vector<StateIndex>>& rows)
    : schema_(std::move(schema)) {
    cells_.reserve(rows.size() * schema_.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != schema_.size()) {
            throw InvalidArgumentError(fmt::format("row {} has {} entries, schema has {}", r,
                                                   rows[r].size(), schema_.size()));
        }
        cells_.insert(cells_.end(), rows[r].begin(), rows[r].end());
    }
    check_cells(schema_, cells_);
}

std::span<const StateIndex> Dataset::row(std::size_t r) const {
    if (r >= size()) throw InvalidArgumentError(fmt::format("row {} out of range", r));
    return std::span<const StateIndex>(cells_).subspan(r * width(), width());
}

Dataset Dataset::slice(std::size_t first, std::size_t count) const {
    if (first + count > size()) {
        throw InvalidArgumentError(fmt::format("slice [{}, {}) exceeds {} rows", first,
                                               first + count, size()));
    }
    auto begin = cells_.begin() + static_cast<std::ptrdiff_t>(first * width());
    auto end = begin + static_cast<std::ptrdiff_t>(count * width());
    return Dataset(schema_, std::vector<StateIndex>(begin, end));
}

}  // namespace pmtbn
