// Command-line runner: coverage, sweep, validate and sample.
//
// Exit codes: 0 success, 1 validation points flagged, 2 config error,
// 3 analytic precondition (threshold <= 0 dB), 4 quadrature failure.

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hetnet/experiment.hpp"

namespace {

using namespace hetnet;

struct Flags {
  std::string config;
  std::optional<int> model;
  std::optional<std::string> method;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> window_radius;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
  std::optional<double> quad_rel_tol;
  std::vector<double> beta_db;
  std::vector<double> r_d;
  bool timing = false;
};

void add_common(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "INI experiment config")->check(CLI::ExistingFile);
  cmd.add_option("--model", f.model, "preset model 1..4");
  cmd.add_option("--method", f.method, "mc, analytic or both");
  cmd.add_option("--trials", f.trials, "Monte Carlo trials");
  cmd.add_option("--seed", f.seed, "base seed");
  cmd.add_option("--window-radius", f.window_radius, "simulation window radius in m (0: default)");
  cmd.add_option("--out", f.out, "output CSV path (default stdout)");
  cmd.add_option("--workers", f.workers, "Monte Carlo worker threads");
  cmd.add_option("--quad-rel-tol", f.quad_rel_tol, "1-D quadrature tolerance; nested terms use 100x");
  cmd.add_option("--beta-db", f.beta_db, "sweep thresholds in dB (applied to every tier)")->delimiter(',');
  cmd.add_option("--r-d", f.r_d, "sweep cluster radii in m")->delimiter(',');
  cmd.add_flag("--timing", f.timing, "fill the wall_ms column (breaks byte-identical output)");
}

ExperimentConfig load(const Flags& f) {
  ExperimentConfig cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw Error(ErrorCode::kConfig, "cannot open " + f.config);
    cfg = parse_config(in);
  }
  if (f.model) {
    cfg.model = *f.model;
    cfg.scenario = Scenario{};
  }
  if (f.method) cfg.method = parse_method(*f.method);
  if (f.trials) cfg.trials = *f.trials;
  if (f.seed) cfg.seed = *f.seed;
  if (f.window_radius) cfg.window_radius = *f.window_radius;
  if (f.out) cfg.out = *f.out;
  if (f.workers) cfg.workers = *f.workers;
  if (f.quad_rel_tol) cfg.set_quad_rel_tol(*f.quad_rel_tol);
  if (!f.beta_db.empty()) cfg.sweep.beta_db = f.beta_db;
  if (!f.r_d.empty()) cfg.sweep.r_d = f.r_d;
  cfg.timing = f.timing;
  check_config(cfg);
  return cfg;
}

/// Output goes to a buffer first so that a failing run leaves no partial file.
class Output {
 public:
  explicit Output(std::string path) : path_(std::move(path)) {}
  std::ostream& stream() { return buf_; }
  void commit() {
    if (path_.empty()) {
      std::cout << buf_.str() << std::flush;
      return;
    }
    std::ofstream f(path_, std::ios::binary);
    if (!f) throw Error(ErrorCode::kConfig, "cannot write " + path_);
    f << buf_.str();
  }

 private:
  std::string path_;
  std::ostringstream buf_;
};

int cmd_coverage(const ExperimentConfig& cfg, bool need_sweep) {
  if (need_sweep) require(!cfg.sweep.empty(), ErrorCode::kConfig, "sweep needs a beta_db or r_d axis");
  Output out(cfg.out);
  out.stream() << kCsvHeader << '\n';
  for (const SweepPoint& pt : sweep_points(cfg.sweep)) out.stream() << csv_row(run_point(cfg, pt)) << '\n';
  out.commit();
  return 0;
}

int cmd_validate(ExperimentConfig cfg) {
  cfg.method = Method::kBoth;
  Output out(cfg.out);
  out.stream() << kValidationHeader << '\n';
  bool flagged = false;
  for (const SweepPoint& pt : sweep_points(cfg.sweep)) {
    const ValidationRow v = validate_point(run_point(cfg, pt));
    if (v.under_powered) {
      std::cerr << "warning: UNDER_POWERED stderr " << format_number(v.result.mc->std_error)
                << " > 0.05; raise --trials\n";
    }
    flagged = flagged || v.flagged;
    out.stream() << validation_row(v) << '\n';
  }
  out.commit();
  return flagged ? 1 : 0;
}

int cmd_sample(const ExperimentConfig& cfg) {
  const auto points = sweep_points(cfg.sweep);
  require(points.size() == 1, ErrorCode::kConfig, "sample takes a single parameter point, not a sweep");
  const Scenario s = build_scenario(cfg, points.front());
  const double window = cfg.window_radius > 0.0 ? cfg.window_radius : default_window_radius(s);
  for (const Issue& i : check_window(s, window)) std::cerr << "warning: " << i.code << ": " << i.message << '\n';
  Output out(cfg.out);
  write_sample(out.stream(), s, window, cfg.seed);
  out.commit();
  return 0;
}

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kThresholdRange: return 3;
    case ErrorCode::kQuadrature: return 4;
    default: return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"K-tier HetNet coverage: Monte Carlo and analytic"};
  app.require_subcommand(1);
  Flags flags;
  auto* coverage = app.add_subcommand("coverage", "coverage at one point (or each sweep point)");
  auto* sweep = app.add_subcommand("sweep", "coverage along the sweep axes");
  auto* validate_cmd = app.add_subcommand("validate", "Monte Carlo vs analytic report");
  auto* sample = app.add_subcommand("sample", "dump one realization");
  for (auto* c : {coverage, sweep, validate_cmd, sample}) add_common(*c, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const ExperimentConfig cfg = load(flags);
    if (*coverage) return cmd_coverage(cfg, false);
    if (*sweep) return cmd_coverage(cfg, true);
    if (*validate_cmd) return cmd_validate(cfg);
    return cmd_sample(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
