#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "polychain/error.hpp"
#include "polychain/io/plot.hpp"
#include "polychain/io/runner.hpp"
#include "polychain/io/spec.hpp"
#include "polychain/parallel.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

int run_spec(const std::string& path, std::optional<polychain::io::ExperimentKind> expected,
             const polychain::io::RunOptions& options) {
  const auto spec = polychain::io::parse_spec(path);
  if (expected && spec.kind != *expected)
    throw polychain::Error(polychain::ErrorCode::ValidationError,
                           path + ": experiment kind is " + polychain::io::to_string(spec.kind) + ", this verb runs " +
                               polychain::io::to_string(*expected));
  const auto result = polychain::io::run(spec, options);
  std::cout << result.summary << "\n";
  std::cout << "wrote " << result.csv_path << "\n";
  if (!result.svg_path.empty()) std::cout << "wrote " << result.svg_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using polychain::io::ExperimentKind;
  CLI::App app{"Random polymer Jacobi matrices: critical energies, Lyapunov exponents, IDS, levels, transport"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out;
  app.add_option("--seed", seed, "override the spec's seed");
  app.add_option("--threads", threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out, "output directory (plot: output SVG file)");

  const std::map<std::string, std::pair<ExperimentKind, std::string>> verbs = {
      {"scan-critical", {ExperimentKind::CriticalScan, "locate critical energies and their first-order data"}},
      {"lyapunov", {ExperimentKind::LyapunovSweep, "Lyapunov exponent sweep near a critical energy"}},
      {"ids", {ExperimentKind::IdsSweep, "integrated density of states near a critical energy"}},
      {"levels", {ExperimentKind::Levels, "level spacing and eigenfunction spread statistics"}},
      {"deviations", {ExperimentKind::Deviations, "Weyl sum exceedance and transfer matrix bounds"}},
      {"transport", {ExperimentKind::Transport, "time-averaged position moments"}},
  };
  std::string spec_path;
  std::optional<ExperimentKind> expected;
  for (const auto& [name, info] : verbs) {
    auto* sub = app.add_subcommand(name, info.second);
    sub->add_option("spec", spec_path, "experiment spec file")->required();
    const ExperimentKind kind = info.first;
    sub->callback([&expected, kind] { expected = kind; });
  }
  auto* run = app.add_subcommand("run", "run any experiment spec");
  run->add_option("spec", spec_path, "experiment spec file")->required();

  auto* plot = app.add_subcommand("plot", "render a report CSV as SVG");
  std::string csv, kind_name;
  plot->add_option("csv", csv, "report CSV")->required();
  plot->add_option("--kind", kind_name, "lyapunov | ids | transport | deviations | levels")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    polychain::default_threads() = threads;
    if (plot->parsed()) {
      const ExperimentKind kind = polychain::io::parse_plot_kind(kind_name);
      const std::string svg = out.empty() ? csv + ".svg" : out;
      polychain::io::plot(csv, kind, svg);
      std::cout << "wrote " << svg << "\n";
      return 0;
    }
    polychain::io::RunOptions options;
    options.threads = threads;
    options.out_dir = out.empty() ? "." : out;
    options.seed = seed;
    return run_spec(spec_path, expected, options);
  } catch (const polychain::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_validation() ? kExitValidation : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
