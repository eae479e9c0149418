#include "pmtbn/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "pmtbn/errors.hpp"
#include "text.hpp"

namespace pmtbn {

namespace {

constexpr double kParseRowSumTolerance = 1e-6;

using text::content_lines;
using text::split;
using text::trim;

std::string identifier(std::string_view token, std::size_t line, std::string_view what) {
    token = trim(token);
    if (!is_identifier(token)) {
        throw SyntaxError(line, fmt::format("invalid {} '{}'", what, token));
    }
    return std::string(token);
}

double parse_real(std::string_view token, std::size_t line) {
    token = trim(token);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
        throw SyntaxError(line, fmt::format("invalid number '{}'", token));
    }
    return value;
}

struct CptLine {
    std::size_t line;
    std::string child;
    std::vector<std::pair<std::string, std::string>> assignment;
    std::vector<double> probabilities;
};

struct RawFile {
    Structure structure;
    std::vector<CptLine> cpts;
};

RawFile parse_lines(std::string_view text, bool allow_cpt) {
    std::vector<Variable> variables;
    std::set<std::string> declared;
    std::vector<std::pair<std::size_t, Edge>> edges;
    std::optional<std::pair<std::size_t, std::string>> class_line;
    std::vector<CptLine> cpts;

    for (const auto& [number, body] : content_lines(text)) {
        auto space = body.find_first_of(" \t");
        auto keyword = body.substr(0, space);
        auto rest = space == std::string_view::npos ? std::string_view{} : trim(body.substr(space));

        if (keyword == "node") {
            if (!cpts.empty()) throw SyntaxError(number, "node line after cpt lines");
            auto colon = rest.find(':');
            if (colon == std::string_view::npos) {
                throw SyntaxError(number, "expected 'node <name> : <state>,<state>...'");
            }
            auto name = identifier(rest.substr(0, colon), number, "node name");
            std::vector<std::string> states;
            for (auto s : split(rest.substr(colon + 1), ',')) {
                states.push_back(identifier(s, number, "state label"));
            }
            if (states.size() < 2) {
                throw SyntaxError(number, fmt::format("node '{}' needs at least 2 states", name));
            }
            if (!declared.insert(name).second) {
                throw DuplicateError(fmt::format("line {}: node '{}' declared twice", number, name));
            }
            variables.emplace_back(std::move(name), std::move(states));
        } else if (keyword == "class") {
            if (!cpts.empty()) throw SyntaxError(number, "class line after cpt lines");
            auto name = identifier(rest, number, "class name");
            if (class_line) {
                throw DuplicateError(
                    fmt::format("line {}: second class line (first on line {})", number,
                                class_line->first));
            }
            class_line.emplace(number, std::move(name));
        } else if (keyword == "edge") {
            if (!cpts.empty()) throw SyntaxError(number, "edge line after cpt lines");
            auto arrow = rest.find("->");
            if (arrow == std::string_view::npos) {
                throw SyntaxError(number, "expected 'edge <parent> -> <child>'");
            }
            edges.push_back({number, Edge{identifier(rest.substr(0, arrow), number, "node name"),
                                          identifier(rest.substr(arrow + 2), number, "node name")}});
        } else if (keyword == "cpt" && allow_cpt) {
            auto bar = rest.find('|');
            auto colon = rest.find(':', bar == std::string_view::npos ? 0 : bar);
            if (bar == std::string_view::npos || colon == std::string_view::npos) {
                throw SyntaxError(number,
                                  "expected 'cpt <child> | <parent>=<state>,... : <p1>,<p2>,...'");
            }
            CptLine cpt{number, identifier(rest.substr(0, bar), number, "node name"), {}, {}};
            auto assignment = trim(rest.substr(bar + 1, colon - bar - 1));
            if (!assignment.empty()) {
                for (auto item : split(assignment, ',')) {
                    auto eq = item.find('=');
                    if (eq == std::string_view::npos) {
                        throw SyntaxError(number, fmt::format("expected <parent>=<state>, got '{}'",
                                                              trim(item)));
                    }
                    cpt.assignment.emplace_back(identifier(item.substr(0, eq), number, "parent name"),
                                                identifier(item.substr(eq + 1), number, "state label"));
                }
            }
            for (auto p : split(rest.substr(colon + 1), ',')) {
                cpt.probabilities.push_back(parse_real(p, number));
            }
            cpts.push_back(std::move(cpt));
        } else {
            throw SyntaxError(number, fmt::format("unknown keyword '{}'", keyword));
        }
    }

    std::vector<std::string> nodes;
    for (const auto& v : variables) nodes.push_back(v.name());
    std::vector<Edge> edge_list;
    std::set<Edge> seen_edges;
    for (auto& [number, e] : edges) {
        for (const auto* end : {&e.parent, &e.child}) {
            if (!declared.contains(*end)) {
                throw UnknownNodeError(fmt::format("line {}: edge {} -> {} uses undeclared node '{}'",
                                                   number, e.parent, e.child, *end));
            }
        }
        if (!seen_edges.insert(e).second) {
            throw DuplicateError(
                fmt::format("line {}: duplicate edge {} -> {}", number, e.parent, e.child));
        }
        edge_list.push_back(std::move(e));
    }
    if (class_line && !declared.contains(class_line->second)) {
        throw UnknownNodeError(fmt::format("line {}: class '{}' is not a declared node",
                                           class_line->first, class_line->second));
    }

    RawFile out;
    out.structure.schema = Schema(std::move(variables));
    out.structure.dag = Dag(std::move(nodes), std::move(edge_list));
    if (class_line) out.structure.class_name = class_line->second;
    validate_dag(out.structure.dag);
    out.cpts = std::move(cpts);
    return out;
}

}  // namespace

std::string format_real(double value) {
    return fmt::format("{:.17g}", value);
}

// ---------------------------------------------------------------------------
// Structure

Structure parse_structure(std::string_view text) {
    return parse_lines(text, false).structure;
}

std::string emit_structure(const Structure& structure) {
    std::string out;
    for (const auto& v : structure.schema.variables()) {
        out += fmt::format("node {} : {}\n", v.name(), fmt::join(v.states(), ","));
    }
    if (structure.class_name) out += fmt::format("class {}\n", *structure.class_name);
    for (const auto& e : structure.dag.edges()) {
        out += fmt::format("edge {} -> {}\n", e.parent, e.child);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dataset

Dataset parse_dataset(std::string_view text, const Schema& schema) {
    auto lines = split(text, '\n');
    std::size_t i = 0;
    while (i < lines.size() && trim(lines[i]).empty()) ++i;
    if (i == lines.size()) throw HeaderMismatchError("dataset has no header row");

    std::vector<std::size_t> column_to_schema;
    std::set<std::size_t> bound;
    for (auto cell : split(trim(lines[i]), ',')) {
        auto name = trim(cell);
        auto idx = schema.find(name);
        if (!idx) {
            throw HeaderMismatchError(fmt::format("header column '{}' is not a schema variable", name));
        }
        if (!bound.insert(*idx).second) {
            throw HeaderMismatchError(fmt::format("header column '{}' appears twice", name));
        }
        column_to_schema.push_back(*idx);
    }
    if (column_to_schema.size() != schema.size()) {
        std::vector<std::string> absent;
        for (std::size_t v = 0; v < schema.size(); ++v) {
            if (!bound.contains(v)) absent.push_back(schema.variable(v).name());
        }
        throw HeaderMismatchError(
            fmt::format("header lacks schema variables: {}", fmt::join(absent, ", ")));
    }

    std::vector<StateIndex> cells;
    std::vector<StateIndex> row(schema.size());
    std::size_t data_row = 0;
    for (++i; i < lines.size(); ++i) {
        auto line = trim(lines[i]);
        if (line.empty()) continue;
        ++data_row;
        auto fields = split(line, ',');
        if (fields.size() != column_to_schema.size()) {
            throw SyntaxError(i + 1, fmt::format("expected {} cells, got {}",
                                                 column_to_schema.size(), fields.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            auto label = trim(fields[c]);
            const auto& var = schema.variable(column_to_schema[c]);
            if (label == "?") {
                row[column_to_schema[c]] = kMissing;
                continue;
            }
            auto state = var.state_index(label);
            if (!state) throw UnknownStateLabelError(data_row, var.name(), std::string(label));
            row[column_to_schema[c]] = *state;
        }
        cells.insert(cells.end(), row.begin(), row.end());
    }
    return Dataset(schema, std::move(cells));
}

std::string emit_dataset(const Dataset& data) {
    const auto& schema = data.schema();
    std::string out = fmt::format("{}\n", fmt::join(schema.names(), ","));
    for (std::size_t r = 0; r < data.size(); ++r) {
        auto row = data.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out += ',';
            out += row[c] == kMissing ? std::string("?")
                                      : schema.variable(c).states()[static_cast<std::size_t>(row[c])];
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model

NetworkModel parse_model(std::string_view text) {
    auto raw = parse_lines(text, true);
    const auto& schema = raw.structure.schema;
    const auto& dag = raw.structure.dag;

    struct Table {
        std::vector<std::string> parents;
        std::vector<std::size_t> cards;
        std::vector<double> values;
        std::vector<bool> filled;
        std::size_t rows = 1;
    };
    std::vector<Table> tables(schema.size());
    for (std::size_t i = 0; i < schema.size(); ++i) {
        auto& t = tables[i];
        t.parents = parents_in_schema_order(dag, schema, schema.variable(i).name());
        for (const auto& p : t.parents) {
            t.cards.push_back(schema.variable(p).cardinality());
            t.rows *= t.cards.back();
        }
        t.values.assign(t.rows * schema.variable(i).cardinality(), 0.0);
        t.filled.assign(t.rows, false);
    }

    for (const auto& line : raw.cpts) {
        auto child_idx = schema.find(line.child);
        if (!child_idx) {
            throw UnknownNodeError(fmt::format("line {}: cpt for undeclared node '{}'", line.line,
                                               line.child));
        }
        const auto& child = schema.variable(*child_idx);
        auto& t = tables[*child_idx];

        std::vector<StateIndex> states(t.parents.size(), kMissing);
        for (const auto& [parent, label] : line.assignment) {
            auto pos = std::find(t.parents.begin(), t.parents.end(), parent);
            if (pos == t.parents.end()) {
                if (!schema.contains(parent)) {
                    throw UnknownNodeError(
                        fmt::format("line {}: undeclared node '{}'", line.line, parent));
                }
                throw SyntaxError(line.line,
                                  fmt::format("'{}' is not a parent of '{}'", parent, child.name()));
            }
            auto p = static_cast<std::size_t>(pos - t.parents.begin());
            if (states[p] != kMissing) {
                throw SyntaxError(line.line, fmt::format("parent '{}' assigned twice", parent));
            }
            auto s = schema.variable(parent).state_index(label);
            if (!s) {
                throw SyntaxError(line.line,
                                  fmt::format("unknown state '{}' for parent '{}'", label, parent));
            }
            states[p] = *s;
        }
        for (std::size_t p = 0; p < states.size(); ++p) {
            if (states[p] == kMissing) {
                throw SyntaxError(line.line, fmt::format("parent '{}' not assigned", t.parents[p]));
            }
        }
        if (line.probabilities.size() != child.cardinality()) {
            throw SyntaxError(line.line, fmt::format("expected {} probabilities, got {}",
                                                     child.cardinality(), line.probabilities.size()));
        }
        std::size_t r = 0;
        for (std::size_t p = 0; p < states.size(); ++p) {
            r = r * t.cards[p] + static_cast<std::size_t>(states[p]);
        }
        if (t.filled[r]) {
            throw DuplicateError(fmt::format("line {}: duplicate cpt row for '{}'", line.line,
                                             child.name()));
        }
        double sum = 0.0;
        for (double p : line.probabilities) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw SyntaxError(line.line, fmt::format("probability {} outside [0, 1]", p));
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kParseRowSumTolerance) {
            throw RowSumError(fmt::format("line {}: cpt row for '{}' sums to {}", line.line,
                                          child.name(), format_real(sum)));
        }
        const bool renormalize = std::abs(sum - 1.0) > kRowSumTolerance;
        for (std::size_t k = 0; k < child.cardinality(); ++k) {
            double p = line.probabilities[k];
            t.values[r * child.cardinality() + k] = renormalize ? p / sum : p;
        }
        t.filled[r] = true;
    }

    std::vector<Cpt> cpts;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        auto& t = tables[i];
        const auto& var = schema.variable(i);
        for (std::size_t r = 0; r < t.rows; ++r) {
            if (t.filled[r]) continue;
            std::vector<std::string> parts;
            auto rr = r;
            std::vector<std::string> labels(t.parents.size());
            for (std::size_t p = t.parents.size(); p-- > 0;) {
                labels[p] = schema.variable(t.parents[p]).states()[rr % t.cards[p]];
                rr /= t.cards[p];
            }
            for (std::size_t p = 0; p < t.parents.size(); ++p) {
                parts.push_back(t.parents[p] + "=" + labels[p]);
            }
            throw MissingCptRowError(
                fmt::format("no cpt row for {} | {}", var.name(), fmt::join(parts, ",")));
        }
        cpts.emplace_back(var.name(), var.cardinality(), std::move(t.parents), std::move(t.cards),
                          std::move(t.values));
    }
    return NetworkModel(schema, dag, std::move(cpts), raw.structure.class_name);
}

std::string emit_model(const NetworkModel& model) {
    std::string out = emit_structure(model.structure());
    const auto& schema = model.schema();
    for (const auto& cpt : model.cpts()) {
        for (std::size_t r = 0; r < cpt.rows(); ++r) {
            auto states = cpt.parent_states(r);
            std::vector<std::string> parts;
            for (std::size_t p = 0; p < states.size(); ++p) {
                parts.push_back(cpt.parents()[p] + "=" +
                                schema.variable(cpt.parents()[p]).states()[static_cast<std::size_t>(states[p])]);
            }
            std::vector<std::string> values;
            for (double v : cpt.row(r)) values.push_back(format_real(v));
            if (parts.empty()) {
                out += fmt::format("cpt {} | : {}\n", cpt.child(), fmt::join(values, ","));
            } else {
                out += fmt::format("cpt {} | {} : {}\n", cpt.child(), fmt::join(parts, ","),
                                   fmt::join(values, ","));
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Files

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace pmtbn
