// wavefem: run benchmark experiments and sweeps, emit CSV, print order tables.

#include <CLI11.hpp>

#include <iostream>
#include <random>
#include <sstream>

#include <wavefem/wavefem.hpp>

using namespace wavefem;

namespace {

std::vector<int> parse_ladder(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    size_t used = 0;
    const int n = std::stoi(cell, &used);
    if (used != cell.size() || n < 1) throw std::invalid_argument("bad ladder entry '" + cell + "'");
    out.push_back(n);
  }
  if (out.empty()) throw std::invalid_argument("empty ladder");
  return out;
}

void write_records(const std::vector<RunRecord>& recs, const std::string& path) {
  if (path.empty() || path == "-") write_csv(std::cout, recs);
  else emit_csv(recs, path);
}

// Quick invariant checks on small problems; prints one line per check.
int selftest() {
  int failed = 0;
  auto report = [&](bool ok, const std::string& what, double value) {
    failed += !ok;
    std::printf("%s  %-44s %.3e\n", ok ? "PASS" : "FAIL", what.c_str(), value);
  };
  for (BenchmarkKind kind : {BenchmarkKind::standing, BenchmarkKind::propagating}) {
    const char* name = kind == BenchmarkKind::standing ? "standing" : "propagating";
    BenchmarkCase bc(kind);
    const LagrangeSpace space(UniformMesh1D(-10, 10, 8), 2);
    const DiscreteOperators ops(space);
    const SpatialRule sr(space, 8);
    const double tau = 0.9 * cfl_alpha(2) * space.mesh().h;
    const TimeGrid grid(tau, static_cast<long>(std::ceil(20.0 / tau)));
    const StateSequence seq = run_leapfrog(ops, TimeGrid(tau, grid.n_steps + 2), [&](long n) {
      return load_vector(sr, [&](double x) { return bc.forcing(grid.t(n), x); });
    });
    const SourceReconstruction ftau([&](double t, double x) { return bc.forcing(t, x); }, grid);
    const TimeReconstruction w = reconstruct_L(seq, grid, grid.n_steps);
    double jump = 0.0;
    for (int d = 0; d <= 2; ++d) jump = std::max(jump, w.poly.max_relative_jump(d));
    report(jump <= 1e-10, std::string(name) + ": C2 continuity of L", jump);
    const double comm = verify_commuting(seq, grid);
    report(comm <= 1e-10, std::string(name) + ": commuting identity", comm);
    const double eq = verify_reconstructed_equation(seq, grid, ops, sr, ftau);
    report(eq <= 1e-9, std::string(name) + ": reconstructed equation", eq);
  }
  {
    RunConfig cfg;
    cfg.n_cells = 4;
    cfg.t_star = 200.0;
    cfg.rho = 0.1;
    cfg.record_wall_time = false;
    const RunRecord a = run_experiment(cfg), b = run_experiment(cfg);
    std::ostringstream sa, sb;
    write_csv(sa, {a});
    write_csv(sb, {b});
    report(sa.str() == sb.str(), "determinism of repeated runs", 0.0);
    std::istringstream is(sa.str());
    const auto back = read_csv(is);
    std::ostringstream sc;
    write_csv(sc, back);
    report(sc.str() == sa.str(), "CSV round trip", 0.0);
    const double gap = std::abs(a.Lambda * a.Lambda - a.R * a.R - 20.0 * a.M * a.M) / (a.Lambda * a.Lambda);
    report(gap <= 1e-12, "Lambda^2 = R^2 + 20 M^2", gap);
  }
  {
    RunConfig cfg;
    cfg.time_mode = TimeMode::scaled;
    cfg.alpha = 0.15;
    double ref = 0.0, worst = 0.0;
    for (int n = 2; n <= 512; n *= 2) {
      cfg.n_cells = n;
      const double q = cfg.tau() * cfg.tau() / std::pow(cfg.h(), 3);
      if (n == 2) ref = q;
      worst = std::max(worst, std::abs(q - ref) / ref);
    }
    report(worst <= 1e-12, "tau^2 / h^3 constant in scaled mode", worst);
  }
  report(std::abs(stability_constant_x(1e-8) - 13.0 / 12.0) <= 1e-4, "C_X(0+) = 13/12",
         std::abs(stability_constant_x(1e-8) - 13.0 / 12.0));
  std::printf("%s\n", failed ? "selftest FAILED" : "selftest passed");
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leapfrog finite elements for the 1D wave equation with a posteriori error estimation"};
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  RunConfig cfg;
  std::string benchmark = "standing", time_mode = "cfl", sweep_spec;
  bool no_wall_time = false;
  app.add_option("--benchmark", benchmark, "standing | propagating")
      ->check(CLI::IsMember({"standing", "propagating"}))
      ->capture_default_str();
  app.add_option("--degree", cfg.degree, "polynomial degree k")->check(CLI::Range(1, 3))->capture_default_str();
  app.add_option("--cells", cfg.n_cells, "number of cells")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--rho", cfg.rho, "damping parameter")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--cfl-ratio", cfg.cfl_ratio, "r in tau = r alpha_k h")->capture_default_str();
  app.add_option("--time-mode", time_mode, "cfl | scaled (tau^2/h^3 fixed)")
      ->check(CLI::IsMember({"cfl", "scaled"}))
      ->capture_default_str();
  app.add_option("--tstar", cfg.t_star, "final time")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--reference-cells", cfg.reference_cells, "coarsest mesh for scaled mode")->capture_default_str();
  app.add_option("--alpha-probe", cfg.alpha_probe, "blow-up probe length for alpha_k")->capture_default_str();
  app.add_option("--alpha", cfg.alpha, "fixed alpha_k, skipping the probe");
  app.add_option("--out", cfg.output, "CSV output path (default stdout)");
  app.add_option("--sweep", sweep_spec, "comma-separated ascending cell counts, e.g. 32,64,128");
  app.add_flag("--no-wall-time", no_wall_time, "record wall_time as 0 for reproducible CSV");

  std::string rates_path;
  auto* rates = app.add_subcommand("rates", "print the empirical order table of a CSV file");
  rates->add_option("path", rates_path, "CSV file written by a sweep")->required();
  auto* self = app.add_subcommand("selftest", "run the quick invariant checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*rates) {
      std::cout << format_rate_table(rate_table(read_csv(rates_path)));
      return 0;
    }
    if (*self) return selftest();

    cfg.benchmark = benchmark == "standing" ? BenchmarkKind::standing : BenchmarkKind::propagating;
    cfg.time_mode = parse_time_mode(time_mode);
    cfg.record_wall_time = !no_wall_time;
    if (!sweep_spec.empty()) {
      RunConfig base = cfg;
      base.output.clear();
      const SweepResult s = sweep(base, parse_ladder(sweep_spec));
      write_records(s.records, cfg.output);
      std::cerr << format_rate_table(s.rates);
      for (const auto& r : s.records)
        if (!r.ok()) std::cerr << "run h=" << r.h << " failed: " << r.status << '\n';
    } else {
      const RunRecord r = run_experiment(cfg);
      write_records({r}, cfg.output);
      if (!r.ok()) {
        std::cerr << "run failed: " << r.status << '\n';
        return 2;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
