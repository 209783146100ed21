#pragma once

#include <string>

#include "polychain/io/report.hpp"
#include "polychain/io/spec.hpp"

namespace polychain::io {

/// Accepts full kind names and the CLI short forms (lyapunov, ids, transport, deviations, levels).
ExperimentKind parse_plot_kind(const std::string& name);

/// Self-contained SVG for a report table. SchemaMismatch when the header is not the
/// documented one for `kind`, when there are no rows, or when the kind has no plot.
std::string plot_svg(const Table& table, ExperimentKind kind);

/// Reads csv_path and writes the SVG to svg_path.
void plot(const std::string& csv_path, ExperimentKind kind, const std::string& svg_path);

}  // namespace polychain::io
