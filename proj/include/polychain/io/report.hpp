#pragma once

#include <string>
#include <vector>

#include "polychain/io/spec.hpp"

namespace polychain::io {

/// Column names for each experiment kind, in output order.
const std::vector<std::string>& csv_schema(ExperimentKind kind);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Round-trip float formatting with 17 significant digits; "nan" for missing values.
std::string format_real(double x);
std::string format_int(long long x);

/// Serialized CSV text, LF line endings, no quoting (fields never contain commas).
std::string to_csv(const Table& table);
void write_text(const std::string& path, const std::string& text);
void write_csv(const std::string& path, const Table& table);

/// Header plus rows; IoError if unreadable, SchemaMismatch on ragged rows.
Table read_csv(const std::string& path);
Table parse_csv(const std::string& text);

/// Column index by name, SchemaMismatch if absent.
std::size_t column(const Table& table, const std::string& name);

}  // namespace polychain::io
