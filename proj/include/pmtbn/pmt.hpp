#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pmtbn/model.hpp"

namespace pmtbn {

/// Directed edges endorsed by domain theory. A -> B does not allow B -> A.
class EdgeWhitelist {
  public:
    EdgeWhitelist() = default;

    /// Duplicates collapse; endpoints outside `schema` raise UnknownNodeError.
    EdgeWhitelist(const Schema& schema, std::vector<Edge> allowed);

    const std::set<Edge>& allowed() const noexcept { return allowed_; }
    const std::set<std::string>& nodes() const noexcept { return nodes_; }
    bool allows(std::string_view parent, std::string_view child) const;

    bool operator==(const EdgeWhitelist&) const = default;

  private:
    std::set<std::string> nodes_;
    std::set<Edge> allowed_;
};

struct FlaggedEdge {
    Edge edge;
    std::string note;

    bool operator==(const FlaggedEdge&) const = default;
};

struct AuditReport {
    std::vector<FlaggedEdge> flagged;  // sorted by (parent, child)
    std::size_t total_edges = 0;

    std::size_t flagged_count() const noexcept { return flagged.size(); }
};

/// Default protection-motivation network (9 variables, 8 edges, class
/// purchase_protection) and its whitelist, which holds exactly those edges.
struct PmtStructure {
    Structure structure;
    EdgeWhitelist whitelist;
};

PmtStructure default_pmt_structure();

/// Text of the shipped data files the defaults are built from.
std::string_view default_pmt_structure_text() noexcept;
std::string_view default_pmt_whitelist_text() noexcept;

/// Flags every DAG edge absent from the whitelist. Throws UnknownNodeError
/// when the DAG has a node the whitelist's schema does not declare.
AuditReport audit_structure(const Dag& dag, const EdgeWhitelist& whitelist);

std::string render_audit(const AuditReport& report);

/// Lines `allow <parent> -> <child>`, '#' comments.
EdgeWhitelist parse_whitelist(std::string_view text, const Schema& schema);
std::string emit_whitelist(const EdgeWhitelist& whitelist);

}  // namespace pmtbn
