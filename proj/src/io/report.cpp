#include "polychain/io/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "polychain/error.hpp"

namespace polychain::io {

const std::vector<std::string>& csv_schema(ExperimentKind kind) {
  static const std::vector<std::string> critical = {
      "E_c",       "eta_plus",   "eta_minus",  "eta_lift_plus", "eta_lift_minus", "kind_plus",
      "kind_minus", "order",     "c_plus_re",  "c_plus_im",     "c_minus_re",     "c_minus_im",
      "d_plus",    "d_minus",    "anomalous"};
  static const std::vector<std::string> lyapunov = {"eps", "gamma_mc", "gamma_stderr", "gamma_formula"};
  static const std::vector<std::string> ids = {"eps", "ids_mc", "ids_stderr", "ids_formula"};
  static const std::vector<std::string> levels = {"sample",      "n_levels",   "min_spacing_N", "max_spacing_N",
                                                  "min_spread",  "max_spread", "required_C",    "pass"};
  static const std::vector<std::string> deviations = {"N",        "samples",  "hits",      "fraction",
                                                      "wilson_lo", "wilson_hi", "threshold", "weyl_q99",
                                                      "sup_norm_q99"};
  static const std::vector<std::string> transport = {"config", "config_seed", "T",      "q",
                                                     "M_green", "M_green_err", "M_oracle", "beta_window"};
  switch (kind) {
    case ExperimentKind::CriticalScan: return critical;
    case ExperimentKind::LyapunovSweep: return lyapunov;
    case ExperimentKind::IdsSweep: return ids;
    case ExperimentKind::Levels: return levels;
    case ExperimentKind::Deviations: return deviations;
    case ExperimentKind::Transport: return transport;
  }
  return critical;
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_int(long long x) { return std::to_string(x); }

std::string to_csv(const Table& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  os << text;
  if (!os) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

void write_csv(const std::string& path, const Table& table) { write_text(path, to_csv(table)); }

Table parse_csv(const std::string& text) {
  Table t;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string f;
    std::istringstream ls(line);
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (line.back() == ',') fields.emplace_back();
    if (first) {
      t.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != t.header.size())
        throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(t.rows.size() + 1) + " has " +
                                                   std::to_string(fields.size()) + " fields, header has " +
                                                   std::to_string(t.header.size()));
      t.rows.push_back(std::move(fields));
    }
  }
  return t;
}

Table read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

std::size_t column(const Table& table, const std::string& name) {
  for (std::size_t i = 0; i < table.header.size(); ++i)
    if (table.header[i] == name) return i;
  throw Error(ErrorCode::SchemaMismatch, "missing column '" + name + "'");
}

}  // namespace polychain::io
