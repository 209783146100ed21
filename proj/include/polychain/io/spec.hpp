#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "polychain/model.hpp"

namespace polychain::io {

enum class ExperimentKind { CriticalScan, LyapunovSweep, IdsSweep, Levels, Deviations, Transport };

const char* to_string(ExperimentKind kind);
/// Throws ParseError for unknown names.
ExperimentKind parse_kind(const std::string& name);

enum class ParamType { Real, Integer, RealList, IntegerList, Text };

struct ParamValue {
  ParamType type = ParamType::Real;
  double real = 0.0;
  std::int64_t integer = 0;
  std::vector<double> reals;
  std::vector<std::int64_t> integers;
  std::string text;
  int line = 0;  ///< 0 for defaults
};

struct ParamSchema {
  const char* key;
  ParamType type;
  bool required;
  const char* default_value;  ///< parsed like file input when the key is absent
  double min;
  double max;
  const char* choices;  ///< comma-separated allowed words for Text, else nullptr
};

/// Keys accepted in [experiment] for a kind, besides `kind` and `seed`.
const std::vector<ParamSchema>& experiment_schema(ExperimentKind kind);

struct ExperimentSpec {
  std::string source;  ///< file path or "<string>"
  std::vector<double> plus_hopping, plus_potential;
  std::vector<double> minus_hopping, minus_potential;
  double p_plus = 0.5;
  ExperimentKind kind = ExperimentKind::CriticalScan;
  std::uint64_t seed = 1;
  std::map<std::string, ParamValue> params;  ///< every schema key, defaults filled in
  std::string csv;  ///< output CSV path, relative paths resolve against the run's output directory
  std::string svg;  ///< optional SVG path

  PolymerEnsemble ensemble() const;
  double real(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  const std::vector<double>& reals(const std::string& key) const;
  const std::vector<std::int64_t>& integers(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  bool has(const std::string& key) const;
};

/// Strict parse: unknown sections or keys, duplicates, malformed numbers and
/// out-of-range values raise ParseError/ValidationError naming key and line.
ExperimentSpec parse_spec(const std::string& path);
ExperimentSpec parse_spec_string(const std::string& text, const std::string& source = "<string>");

/// Levenshtein distance, used for "did you mean" hints.
std::size_t edit_distance(const std::string& a, const std::string& b);

}  // namespace polychain::io
