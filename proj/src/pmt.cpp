#include "pmtbn/pmt.hpp"

#include <fmt/format.h>

#include "pmtbn/errors.hpp"
#include "pmtbn/io.hpp"
#include "text.hpp"

namespace pmtbn {

EdgeWhitelist::EdgeWhitelist(const Schema& schema, std::vector<Edge> allowed) {
    for (const auto& name : schema.names()) nodes_.insert(name);
    for (auto& e : allowed) {
        for (const auto* end : {&e.parent, &e.child}) {
            if (!nodes_.contains(*end)) {
                throw UnknownNodeError(fmt::format("whitelist edge {} -> {}: undeclared node '{}'",
                                                   e.parent, e.child, *end));
            }
        }
        allowed_.insert(std::move(e));
    }
}

bool EdgeWhitelist::allows(std::string_view parent, std::string_view child) const {
    return allowed_.contains(Edge{std::string(parent), std::string(child)});
}

PmtStructure default_pmt_structure() {
    auto structure = parse_structure(default_pmt_structure_text());
    auto whitelist = parse_whitelist(default_pmt_whitelist_text(), structure.schema);
    return {std::move(structure), std::move(whitelist)};
}

AuditReport audit_structure(const Dag& dag, const EdgeWhitelist& whitelist) {
    for (const auto& n : dag.nodes()) {
        if (!whitelist.nodes().contains(n)) {
            throw UnknownNodeError(fmt::format("dag node '{}' is not in the whitelist schema", n));
        }
    }
    AuditReport report;
    report.total_edges = dag.edges().size();
    // dag.edges() is ordered by (parent, child), so flagged comes out sorted.
    for (const auto& e : dag.edges()) {
        if (whitelist.allows(e.parent, e.child)) continue;
        std::string note = whitelist.allows(e.child, e.parent)
                               ? fmt::format("reverses the endorsed relation {} -> {}", e.child,
                                             e.parent)
                               : fmt::format("no endorsed relation from {} to {}", e.parent,
                                             e.child);
        report.flagged.push_back({e, std::move(note)});
    }
    return report;
}

std::string render_audit(const AuditReport& report) {
    std::string out = fmt::format("{} of {} edges are not endorsed by the whitelist\n",
                                  report.flagged_count(), report.total_edges);
    for (const auto& f : report.flagged) {
        out += fmt::format("  {} -> {}: {}\n", f.edge.parent, f.edge.child, f.note);
    }
    return out;
}

EdgeWhitelist parse_whitelist(std::string_view text, const Schema& schema) {
    std::vector<Edge> allowed;
    for (const auto& [number, body] : text::content_lines(text)) {
        auto space = body.find_first_of(" \t");
        auto keyword = body.substr(0, space);
        if (keyword != "allow") {
            throw SyntaxError(number, fmt::format("unknown keyword '{}'", keyword));
        }
        if (space == std::string_view::npos) {
            throw SyntaxError(number, "expected 'allow <parent> -> <child>'");
        }
        auto rest = text::trim(body.substr(space));
        auto arrow = rest.find("->");
        if (arrow == std::string_view::npos) {
            throw SyntaxError(number, "expected 'allow <parent> -> <child>'");
        }
        auto parent = text::trim(rest.substr(0, arrow));
        auto child = text::trim(rest.substr(arrow + 2));
        if (!is_identifier(parent) || !is_identifier(child)) {
            throw SyntaxError(number, fmt::format("invalid node name in '{}'", rest));
        }
        for (auto name : {parent, child}) {
            if (!schema.contains(name)) {
                throw UnknownNodeError(fmt::format("line {}: undeclared node '{}'", number, name));
            }
        }
        allowed.push_back({std::string(parent), std::string(child)});
    }
    return EdgeWhitelist(schema, std::move(allowed));
}

std::string emit_whitelist(const EdgeWhitelist& whitelist) {
    std::string out;
    for (const auto& e : whitelist.allowed()) {
        out += fmt::format("allow {} -> {}\n", e.parent, e.child);
    }
    return out;
}

}  // namespace pmtbn
