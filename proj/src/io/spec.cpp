#include "polychain/io/spec.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "polychain/error.hpp"

namespace polychain::io {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<std::string> kSections = {"polymer.plus", "polymer.minus", "model", "experiment", "output"};

const std::vector<ParamSchema> kCriticalScan = {
    {"energy_min", ParamType::Real, false, "-2", -1e6, 1e6, nullptr},
    {"energy_max", ParamType::Real, false, "2", -1e6, 1e6, nullptr},
    {"grid", ParamType::Integer, false, "2001", 11, 1e7, nullptr},
};
const std::vector<ParamSchema> kLyapunov = {
    {"critical_energy", ParamType::Real, true, nullptr, -1e6, 1e6, nullptr},
    {"eps", ParamType::RealList, true, nullptr, 0.0, 1.0, nullptr},
    {"frame", ParamType::Text, false, "critical", 0, 0, "critical,identity"},
    {"polymers", ParamType::Integer, false, "1000", 1, 1e9, nullptr},
    {"samples", ParamType::Integer, false, "1000", 1, 1e9, nullptr},
    {"nodes", ParamType::Integer, false, "64", 1, 4096, nullptr},
};
const std::vector<ParamSchema> kIds = {
    {"critical_energy", ParamType::Real, true, nullptr, -1e6, 1e6, nullptr},
    {"eps", ParamType::RealList, true, nullptr, -1.0, 1.0, nullptr},
    {"sites", ParamType::Integer, false, "10000", 1, 1e9, nullptr},
    {"samples", ParamType::Integer, false, "100", 1, 1e9, nullptr},
};
const std::vector<ParamSchema> kLevels = {
    {"critical_energy", ParamType::Real, true, nullptr, -1e6, 1e6, nullptr},
    {"sites", ParamType::Integer, false, "2000", 2, 1e8, nullptr},
    {"alpha", ParamType::Real, false, "0.1", 0.0, 0.5, nullptr},
    {"samples", ParamType::Integer, false, "200", 1, 1e9, nullptr},
    {"C", ParamType::Real, false, "50", 1.0, 1e12, nullptr},
};
const std::vector<ParamSchema> kDeviations = {
    {"critical_energy", ParamType::Real, true, nullptr, -1e6, 1e6, nullptr},
    {"sites", ParamType::IntegerList, false, "1024, 4096, 16384", 2, 1e9, nullptr},
    {"alpha", ParamType::Real, false, "0.2", 0.0, 0.5, nullptr},
    {"samples", ParamType::Integer, false, "10000", 1, 1e9, nullptr},
    {"norm_samples", ParamType::Integer, false, "1000", 0, 1e9, nullptr},
};
const std::vector<ParamSchema> kTransport = {
    {"q", ParamType::Real, false, "2", 0.0, 16.0, nullptr},
    {"times", ParamType::RealList, true, nullptr, 1e-6, 1e7, nullptr},
    {"configuration", ParamType::Text, false, "random", 0, 0, "random,all_plus,all_minus,period2,free"},
    {"configs", ParamType::Integer, false, "1", 1, 1e6, nullptr},
    {"oracle_radius", ParamType::Integer, false, "0", 0, 1e5, nullptr},
    {"rel_tol", ParamType::Real, false, "1e-5", 1e-12, 0.1, nullptr},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(ErrorCode code, const std::string& source, int line, const std::string& msg) {
  std::ostringstream os;
  os << source;
  if (line > 0) os << ":" << line;
  os << ": " << msg;
  throw Error(code, os.str());
}

std::string suggestion(const std::string& word, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const auto& c : candidates) {
    std::size_t d = edit_distance(word, c);
    const auto dot = c.find('.');
    if (dot != std::string::npos) d = std::min(d, edit_distance(word, c.substr(0, dot)));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (best.empty() || best_d > std::max<std::size_t>(2, word.size() / 2)) {
    std::string all;
    for (const auto& c : candidates) all += (all.empty() ? "" : ", ") + c;
    return " (expected one of: " + all + ")";
  }
  return " (did you mean '" + best + "'?)";
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno == 0 && std::isfinite(out);
}

bool parse_integer(const std::string& s, std::int64_t& out) {
  double x = 0.0;
  if (!parse_real(s, x) || x != std::floor(x) || std::abs(x) > 9.0e15) return false;
  out = static_cast<std::int64_t>(x);
  return true;
}

std::vector<std::string> split_list(std::string s) {
  s = trim(s);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') return {""};
    s = s.substr(1, s.size() - 2);
  }
  std::vector<std::string> items;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) items.push_back(trim(cur));
  if (!s.empty() && s.back() == ',') items.push_back("");
  return items;
}

struct Entry {
  std::string value;
  int line = 0;
};

ParamValue convert(const std::string& key, const Entry& e, ParamType type, double min, double max,
                   const char* choices, const std::string& source) {
  ParamValue v;
  v.type = type;
  v.line = e.line;
  auto range = [&](double x) {
    if (x < min || x > max) {
      std::ostringstream os;
      os.precision(17);
      os << "key '" << key << "': value " << x << " outside [" << min << ", " << max << "]";
      fail(ErrorCode::ValidationError, source, e.line, os.str());
    }
  };
  switch (type) {
    case ParamType::Real:
      if (!parse_real(trim(e.value), v.real))
        fail(ErrorCode::ParseError, source, e.line, "key '" + key + "': expected a number, got '" + e.value + "'");
      range(v.real);
      break;
    case ParamType::Integer:
      if (!parse_integer(trim(e.value), v.integer))
        fail(ErrorCode::ParseError, source, e.line, "key '" + key + "': expected an integer, got '" + e.value + "'");
      range(static_cast<double>(v.integer));
      break;
    case ParamType::RealList:
    case ParamType::IntegerList:
      for (const auto& item : split_list(e.value)) {
        if (type == ParamType::RealList) {
          double x = 0.0;
          if (!parse_real(item, x))
            fail(ErrorCode::ParseError, source, e.line, "key '" + key + "': bad list element '" + item + "'");
          range(x);
          v.reals.push_back(x);
        } else {
          std::int64_t x = 0;
          if (!parse_integer(item, x))
            fail(ErrorCode::ParseError, source, e.line, "key '" + key + "': bad integer element '" + item + "'");
          range(static_cast<double>(x));
          v.integers.push_back(x);
        }
      }
      if (v.reals.empty() && v.integers.empty())
        fail(ErrorCode::ValidationError, source, e.line, "key '" + key + "': empty list");
      break;
    case ParamType::Text: {
      std::string t = trim(e.value);
      if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
      if (choices != nullptr) {
        std::vector<std::string> allowed;
        std::istringstream is(choices);
        std::string c;
        while (std::getline(is, c, ',')) allowed.push_back(c);
        if (std::find(allowed.begin(), allowed.end(), t) == allowed.end())
          fail(ErrorCode::ValidationError, source, e.line,
               "key '" + key + "': invalid value '" + t + "'" + suggestion(t, allowed));
      }
      v.text = t;
      break;
    }
  }
  return v;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::CriticalScan: return "critical_scan";
    case ExperimentKind::LyapunovSweep: return "lyapunov_sweep";
    case ExperimentKind::IdsSweep: return "ids_sweep";
    case ExperimentKind::Levels: return "levels";
    case ExperimentKind::Deviations: return "deviations";
    case ExperimentKind::Transport: return "transport";
  }
  return "?";
}

ExperimentKind parse_kind(const std::string& name) {
  static const std::vector<std::string> names = {"critical_scan", "lyapunov_sweep", "ids_sweep",
                                                 "levels",        "deviations",     "transport"};
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<ExperimentKind>(i);
  throw Error(ErrorCode::ParseError, "unknown experiment kind '" + name + "'" + suggestion(name, names));
}

const std::vector<ParamSchema>& experiment_schema(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::CriticalScan: return kCriticalScan;
    case ExperimentKind::LyapunovSweep: return kLyapunov;
    case ExperimentKind::IdsSweep: return kIds;
    case ExperimentKind::Levels: return kLevels;
    case ExperimentKind::Deviations: return kDeviations;
    case ExperimentKind::Transport: return kTransport;
  }
  return kCriticalScan;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

ExperimentSpec parse_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open spec file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec_string(ss.str(), path);
}

ExperimentSpec parse_spec_string(const std::string& text, const std::string& source) {
  std::map<std::string, std::map<std::string, Entry>> sections;
  std::map<std::string, int> section_line;
  std::string current;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorCode::ParseError, source, line_no, "unterminated section header");
      current = trim(line.substr(1, line.size() - 2));
      if (std::find(kSections.begin(), kSections.end(), current) == kSections.end())
        fail(ErrorCode::ParseError, source, line_no, "unknown section '" + current + "'" + suggestion(current, kSections));
      if (section_line.count(current)) fail(ErrorCode::ParseError, source, line_no, "duplicate section '" + current + "'");
      section_line[current] = line_no;
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::ParseError, source, line_no, "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) fail(ErrorCode::ParseError, source, line_no, "missing key before '='");
    if (current.empty()) fail(ErrorCode::ParseError, source, line_no, "key '" + key + "' outside any section");
    auto& sec = sections[current];
    if (sec.count(key)) fail(ErrorCode::ParseError, source, line_no, "duplicate key '" + key + "' in [" + current + "]");
    sec[key] = {line.substr(eq + 1), line_no};
  }

  ExperimentSpec spec;
  spec.source = source;
  auto require_section = [&](const std::string& name) -> std::map<std::string, Entry>& {
    if (!sections.count(name)) fail(ErrorCode::ValidationError, source, 0, "missing section [" + name + "]");
    return sections[name];
  };
  auto check_keys = [&](const std::string& sec, const std::vector<std::string>& allowed) {
    for (const auto& [key, entry] : sections[sec])
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        std::vector<std::string> cands = allowed;
        cands.insert(cands.end(), kSections.begin(), kSections.end());
        fail(ErrorCode::ParseError, source, entry.line,
             "unknown key '" + key + "' in [" + sec + "]" + suggestion(key, cands));
      }
  };
  auto get = [&](const std::string& sec, const std::string& key, ParamType type, double min, double max) {
    auto& s = sections[sec];
    if (!s.count(key)) fail(ErrorCode::ValidationError, source, section_line[sec], "missing key '" + key + "' in [" + sec + "]");
    return convert(key, s[key], type, min, max, nullptr, source);
  };

  for (const std::string sec : {"polymer.plus", "polymer.minus"}) {
    require_section(sec);
    check_keys(sec, {"hopping", "potential"});
    const auto t = get(sec, "hopping", ParamType::RealList, -kInf, kInf);
    const auto v = get(sec, "potential", ParamType::RealList, -kInf, kInf);
    for (double x : t.reals)
      if (!(x > 0.0)) fail(ErrorCode::ValidationError, source, t.line, "key 'hopping': hopping amplitudes must be > 0");
    if (t.reals.size() != v.reals.size())
      fail(ErrorCode::ValidationError, source, v.line, "key 'potential': length differs from 'hopping'");
    (sec == "polymer.plus" ? spec.plus_hopping : spec.minus_hopping) = t.reals;
    (sec == "polymer.plus" ? spec.plus_potential : spec.minus_potential) = v.reals;
  }

  require_section("model");
  check_keys("model", {"p_plus"});
  const auto p = get("model", "p_plus", ParamType::Real, -kInf, kInf);
  if (!(p.real > 0.0 && p.real < 1.0))
    fail(ErrorCode::ValidationError, source, p.line, "key 'p_plus': must lie in (0, 1)");
  spec.p_plus = p.real;

  auto& exp = require_section("experiment");
  if (!exp.count("kind")) fail(ErrorCode::ValidationError, source, section_line["experiment"], "missing key 'kind' in [experiment]");
  try {
    spec.kind = parse_kind(trim(exp["kind"].value));
  } catch (const Error& e) {
    fail(ErrorCode::ParseError, source, exp["kind"].line, std::string("key 'kind': ") + e.what());
  }
  const auto& schema = experiment_schema(spec.kind);
  std::vector<std::string> allowed = {"kind", "seed"};
  for (const auto& s : schema) allowed.push_back(s.key);
  check_keys("experiment", allowed);
  if (exp.count("seed")) spec.seed = static_cast<std::uint64_t>(get("experiment", "seed", ParamType::Integer, 0, 9.0e15).integer);
  for (const auto& s : schema) {
    if (exp.count(s.key)) {
      spec.params[s.key] = convert(s.key, exp[s.key], s.type, s.min, s.max, s.choices, source);
    } else if (s.required) {
      fail(ErrorCode::ValidationError, source, section_line["experiment"],
           std::string("missing key '") + s.key + "' for kind " + to_string(spec.kind));
    } else {
      spec.params[s.key] = convert(s.key, {s.default_value, 0}, s.type, s.min, s.max, s.choices, source);
    }
  }

  check_keys("output", {"csv", "svg"});
  auto& out = sections["output"];
  spec.csv = out.count("csv") ? convert("csv", out["csv"], ParamType::Text, 0, 0, nullptr, source).text
                              : std::string(to_string(spec.kind)) + ".csv";
  if (out.count("svg")) spec.svg = convert("svg", out["svg"], ParamType::Text, 0, 0, nullptr, source).text;
  if (spec.csv.empty()) fail(ErrorCode::ValidationError, source, out["csv"].line, "key 'csv': empty path");
  return spec;
}

PolymerEnsemble ExperimentSpec::ensemble() const {
  return build_ensemble(make_polymer(plus_hopping, plus_potential), make_polymer(minus_hopping, minus_potential),
                        p_plus);
}

namespace {
const ParamValue& lookup(const std::map<std::string, ParamValue>& params, const std::string& key, ParamType type) {
  const auto it = params.find(key);
  if (it == params.end() || it->second.type != type)
    throw Error(ErrorCode::ValidationError, "experiment parameter '" + key + "' not available");
  return it->second;
}
}  // namespace

double ExperimentSpec::real(const std::string& key) const { return lookup(params, key, ParamType::Real).real; }
std::int64_t ExperimentSpec::integer(const std::string& key) const {
  return lookup(params, key, ParamType::Integer).integer;
}
const std::vector<double>& ExperimentSpec::reals(const std::string& key) const {
  return lookup(params, key, ParamType::RealList).reals;
}
const std::vector<std::int64_t>& ExperimentSpec::integers(const std::string& key) const {
  return lookup(params, key, ParamType::IntegerList).integers;
}
const std::string& ExperimentSpec::text(const std::string& key) const {
  return lookup(params, key, ParamType::Text).text;
}
bool ExperimentSpec::has(const std::string& key) const { return params.count(key) != 0; }

}  // namespace polychain::io
