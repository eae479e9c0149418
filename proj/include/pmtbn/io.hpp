#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pmtbn/model.hpp"

namespace pmtbn {

// Structure files are line based:
//
//   # comment
//   node <name> : <state>[,<state>...]
//   class <name>
//   edge <parent> -> <child>
//
// Node lines fix the schema order. At most one class line is allowed.

Structure parse_structure(std::string_view text);
std::string emit_structure(const Structure& structure);

/// CSV with a header naming every schema variable once (any order). Cells
/// are state labels or "?" for missing.
Dataset parse_dataset(std::string_view text, const Schema& schema);
std::string emit_dataset(const Dataset& data);

/// A structure file followed by one line per CPT row:
///
///   cpt <child> | <parent>=<state>[,<parent>=<state>...] : <p1>,<p2>,...
///
/// Rows whose sum is off by more than 1e-9 but at most 1e-6 are
/// renormalized; larger deviations raise RowSumError.
NetworkModel parse_model(std::string_view text);

/// Probabilities are written with 17 significant digits, so
/// parse_model(emit_model(m)) == m bitwise.
std::string emit_model(const NetworkModel& model);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// "%.17g"-style rendering used by every emitter.
std::string format_real(double value);

}  // namespace pmtbn
