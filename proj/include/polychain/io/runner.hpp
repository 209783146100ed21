#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "polychain/io/report.hpp"
#include "polychain/io/spec.hpp"

namespace polychain::io {

struct RunOptions {
  int threads = 0;                     ///< 0: hardware concurrency
  std::string out_dir = ".";           ///< base for relative output paths
  std::optional<std::uint64_t> seed;   ///< overrides the spec's seed
};

struct RunResult {
  Table table;
  std::string summary;  ///< one line
  std::string csv_path;
  std::string svg_path;  ///< empty when the spec names no SVG
};

/// Computes the experiment's table without touching the file system.
RunResult compute(const ExperimentSpec& spec, const RunOptions& options = {});

/// compute() plus CSV (and optional SVG) output. Output is byte-identical for equal
/// spec and seed whatever the thread count.
RunResult run(const ExperimentSpec& spec, const RunOptions& options = {});

}  // namespace polychain::io
