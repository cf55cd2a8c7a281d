#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "benchmarks.hpp"
#include "cfl.hpp"
#include "estimator.hpp"
#include "pipeline.hpp"

namespace wavefem {

enum class TimeMode { cfl, scaled };

inline TimeMode parse_time_mode(const std::string& s) {
  if (s == "cfl") return TimeMode::cfl;
  if (s == "scaled") return TimeMode::scaled;
  throw std::invalid_argument("unknown time mode '" + s + "'");
}

inline std::string to_string(TimeMode m) { return m == TimeMode::cfl ? "cfl" : "scaled"; }

struct RunConfig {
  BenchmarkKind benchmark = BenchmarkKind::standing;
  int degree = 1;
  int n_cells = 32;
  double rho = 0.02;
  double cfl_ratio = 0.9;
  TimeMode time_mode = TimeMode::cfl;
  double t_star = 1000.0;
  /// Scaled mode keeps tau^2/h^3 fixed at its value for this many cells, where
  /// tau = r alpha_k h.
  int reference_cells = 2;
  long alpha_probe = 20000;
  /// Overrides the probed CFL constant when set.
  std::optional<double> alpha;
  int mirror_terms = 50;
  int modes = 40;
  bool record_wall_time = true;
  std::string output;

  double h() const { return 20.0 / n_cells; }

  double alpha_k() const { return alpha ? *alpha : cfl_alpha(degree, alpha_probe); }

  double tau() const {
    const double a = alpha_k();
    if (time_mode == TimeMode::cfl) return cfl_ratio * a * h();
    const double h0 = 20.0 / reference_cells;
    return cfl_ratio * a * h0 * std::pow(h() / h0, 1.5);
  }

  long steps() const { return static_cast<long>(std::ceil(t_star / tau() - 1e-9)); }

  void validate() const {
    if (degree < 1 || degree > 3) throw std::invalid_argument("degree must be 1, 2 or 3");
    if (n_cells < 1) throw std::invalid_argument("n_cells must be positive");
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
    if (!(cfl_ratio > 0.0 && cfl_ratio < 1.0)) throw std::invalid_argument("cfl ratio must lie in (0,1)");
    if (!(t_star > 0.0)) throw std::invalid_argument("t_star must be positive");
    if (reference_cells < 1) throw std::invalid_argument("reference_cells must be positive");
  }
};

struct RunRecord {
  double h = 0, tau = 0;
  long dofs = 0, steps = 0;
  double e_U = 0, e_u = 0, e_w = 0;
  double ex_U = 0, ex_u = 0, ex_w = 0;
  double et_U = 0, et_u = 0, et_w = 0;
  double E_rho = 0, R = 0, M = 0, eta_f = 0, Lambda = 0;
  double effectivity = std::numeric_limits<double>::quiet_NaN();
  double wall_time = 0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {"h",     "tau",  "dofs", "steps",  "e_U",         "e_u",      "e_w",
                                                "ex_U",  "ex_u", "ex_w", "et_U",   "et_u",        "et_w",     "E_rho",
                                                "R",     "M",    "eta_f", "Lambda", "effectivity", "wall_time"};
  return cols;
}

namespace detail {

inline std::vector<double*> record_fields(RunRecord& r, double& dofs, double& steps) {
  dofs = static_cast<double>(r.dofs);
  steps = static_cast<double>(r.steps);
  return {&r.h,     &r.tau,  &dofs,   &steps,   &r.e_U,  &r.e_u, &r.e_w,   &r.ex_U,   &r.ex_u,        &r.ex_w,
          &r.et_U,  &r.et_u, &r.et_w, &r.E_rho, &r.R,    &r.M,   &r.eta_f, &r.Lambda, &r.effectivity, &r.wall_time};
}

}  // namespace detail

/// Runs the leapfrog scheme with load F^n = g(t^n) (p, phi_i) and streams the
/// states through the error and estimator accumulators.  Runs to U^{N+1},
/// one step past T_star, as the quartic stencil requires.
inline RunRecord run_problem(const LagrangeSpace& space, const TimeGrid& grid, double rho, const SeparableSource& src,
                             const ExactModel& exact, bool record_wall_time = true) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.h = space.mesh().h;
  rec.tau = grid.tau;
  rec.dofs = space.dofs();
  rec.steps = grid.n_steps;
  auto fail = [&](const std::string& why) {
    rec.status = why;
    for (double* f : {&rec.e_U, &rec.e_u, &rec.e_w, &rec.ex_U, &rec.ex_u, &rec.ex_w, &rec.et_U, &rec.et_u, &rec.et_w,
                      &rec.E_rho, &rec.R, &rec.M, &rec.eta_f, &rec.Lambda, &rec.effectivity})
      *f = std::numeric_limits<double>::quiet_NaN();
    return rec;
  };
  try {
    grid.check_damping(rho);
    const DiscreteOperators ops(space);
    verify_cfl(ops, grid.tau);
    const SpatialRule sr(space, space.degree() + 6);
    const Vector base = load_vector(sr, src.space);
    StreamingEvaluator ev(space, ops, grid, rho, src, exact);
    const Vector zero = Vector::Zero(space.dofs());
    ev.push(zero);
    ev.push(zero);
    LeapfrogStepper stepper(ops, grid.tau);
    stepper.reset(zero, zero, 1);
    Vector F(space.dofs());
    for (long n = 1; n <= grid.n_steps; ++n) {
      F = src.time(grid.t(n)) * base;
      ev.push(stepper.step(&F));
    }
    const StreamingTotals t = ev.totals();
    const ErrorMeasures& e = t.errors;
    rec.e_U = e.e_U;
    rec.e_u = e.e_u;
    rec.e_w = e.e_w;
    rec.ex_U = e.ex_U;
    rec.ex_u = e.ex_u;
    rec.ex_w = e.ex_w;
    rec.et_U = e.et_U;
    rec.et_u = e.et_u;
    rec.et_w = e.et_w;
    const EstimatorBreakdown b = total_estimator(t.R, t.M, t.eta_f, e.E_rho());
    rec.E_rho = b.E_rho;
    rec.R = b.R;
    rec.M = b.M;
    rec.eta_f = b.eta_f;
    rec.Lambda = b.lambda;
    rec.effectivity = ev.has_exact() ? b.effectivity : std::numeric_limits<double>::quiet_NaN();
    if (!ev.has_exact()) rec.E_rho = std::numeric_limits<double>::quiet_NaN();
  } catch (const CflViolation& ex) {
    return fail(std::string("cfl violated: ") + ex.what());
  } catch (const BlowUpError& ex) {
    return fail(ex.what());
  }
  if (record_wall_time)
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

/// Exact-solution model of a benchmark used by the error measures.
inline ModalExact benchmark_exact(const BenchmarkCase& bc, int modes = 40) {
  if (bc.kind == BenchmarkKind::standing)
    return separable_exact([bc](double t) { return bc.amplitude(t); }, [bc](double t) { return bc.amplitude_dot(t); },
                           [bc](double x) { return bc.mode(x); }, [bc](double x) { return bc.mode_dx(x); });
  const auto md = bc.propagating_modes(modes);
  ModalExact m;
  m.modes = static_cast<int>(md.size());
  m.amplitudes = [md, t0 = bc.t0](double t, double* a, double* ad) {
    for (size_t j = 0; j < md.size(); ++j) {
      a[j] = md[j].weight * BenchmarkCase::psi(md[j].omega, t - t0).real();
      ad[j] = md[j].weight * BenchmarkCase::psi_dot(md[j].omega, t - t0).real();
    }
  };
  m.mode = [md, L = bc.L](int j, double x) { return std::sin(md[j].omega * (x + L)); };
  m.mode_dx = [md, L = bc.L](int j, double x) { return md[j].omega * std::cos(md[j].omega * (x + L)); };
  return m;
}

inline SeparableSource benchmark_source(const BenchmarkCase& bc) {
  return {[bc](double t) { return bc.forcing_time(t); }, [bc](double x) { return bc.forcing_space(x); }};
}

inline RunRecord run_experiment(const RunConfig& cfg) {
  cfg.validate();
  BenchmarkCase bc(cfg.benchmark);
  bc.mirror_terms = cfg.mirror_terms;
  const double tau = cfg.tau();
  const TimeGrid grid(tau, cfg.steps());
  if (cfg.rho * tau > 1.0) throw std::invalid_argument("rho*tau exceeds 1");
  if (std::exp(-cfg.rho * grid.t_star()) > 5e-6)
    std::cerr << "warning: exp(-rho*T_star) = " << std::exp(-cfg.rho * grid.t_star())
              << " exceeds 5e-6; the truncated tail may matter\n";
  const LagrangeSpace space(UniformMesh1D(-bc.L, bc.L, cfg.n_cells), cfg.degree);
  return run_problem(space, grid, cfg.rho, benchmark_source(bc), benchmark_exact(bc, cfg.modes),
                     cfg.record_wall_time);
}

// ---- CSV

inline void write_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  const auto& cols = csv_columns();
  for (size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  char buf[64];
  for (RunRecord r : records) {
    double dofs, steps;
    const auto f = detail::record_fields(r, dofs, steps);
    for (size_t i = 0; i < f.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.16e", *f[i]);
      os << (i ? "," : "") << buf;
    }
    os << '\n';
  }
}

inline void emit_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(os, records);
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

class CsvParseError : public std::runtime_error {
 public:
  CsvParseError(const std::string& where, long line, const std::string& what)
      : std::runtime_error(where + ":" + std::to_string(line) + ": " + what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

inline std::vector<RunRecord> read_csv(std::istream& is, const std::string& where = "<stream>") {
  std::string line;
  long lineno = 1;
  if (!std::getline(is, line)) throw CsvParseError(where, lineno, "missing header");
  {
    std::string expect;
    for (const auto& c : csv_columns()) expect += (expect.empty() ? "" : ",") + c;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expect) throw CsvParseError(where, lineno, "unexpected header");
  }
  std::vector<RunRecord> out;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || *end != '\0') throw CsvParseError(where, lineno, "bad number '" + cell + "'");
      vals.push_back(v);
    }
    if (!line.empty() && line.back() == ',') vals.push_back(std::nan(""));
    if (vals.size() != csv_columns().size())
      throw CsvParseError(where, lineno,
                          "expected " + std::to_string(csv_columns().size()) + " fields, got " +
                              std::to_string(vals.size()));
    RunRecord r;
    double dofs, steps;
    auto f = detail::record_fields(r, dofs, steps);
    for (size_t i = 0; i < f.size(); ++i) *f[i] = vals[i];
    r.dofs = static_cast<long>(dofs);
    r.steps = static_cast<long>(steps);
    if (std::isnan(r.e_U)) r.status = "failed";
    const double l2 = r.R * r.R + 20.0 * r.M * r.M;
    if (std::isfinite(l2) && std::abs(r.Lambda * r.Lambda - l2) > 1e-12 * std::max(l2, 1e-300) && l2 > 0.0)
      throw CsvParseError(where, lineno, "Lambda inconsistent with R and M");
    out.push_back(r);
  }
  return out;
}

inline std::vector<RunRecord> read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "' for reading");
  return read_csv(is, path);
}

// ---- sweeps and rates

struct RateTable {
  std::vector<std::string> quantities;
  std::vector<double> h;                  // per record
  std::vector<std::vector<double>> rate;  // [refinement step][quantity]
};

inline double record_value(const RunRecord& r, const std::string& name) {
  RunRecord c = r;
  double dofs, steps;
  const auto f = detail::record_fields(c, dofs, steps);
  const auto& cols = csv_columns();
  for (size_t i = 0; i < cols.size(); ++i)
    if (cols[i] == name) return *f[i];
  throw std::invalid_argument("unknown column '" + name + "'");
}

/// Empirical orders log(q_i/q_{i+1}) / log(h_i/h_{i+1}) between consecutive
/// records, i.e. log2(q_i/q_{i+1}) on a doubling ladder.
inline RateTable rate_table(const std::vector<RunRecord>& recs) {
  RateTable t;
  t.quantities = {"e_U", "e_u", "e_w", "ex_U", "ex_u", "ex_w", "et_U", "et_u", "et_w", "E_rho", "R", "M", "eta_f",
                  "Lambda"};
  for (const auto& r : recs) t.h.push_back(r.h);
  for (size_t i = 0; i + 1 < recs.size(); ++i) {
    std::vector<double> row;
    const double dh = std::log(recs[i].h / recs[i + 1].h);
    for (const auto& q : t.quantities)
      row.push_back(std::log(record_value(recs[i], q) / record_value(recs[i + 1], q)) / dh);
    t.rate.push_back(row);
  }
  return t;
}

inline double rate_of(const RateTable& t, size_t step, const std::string& quantity) {
  for (size_t j = 0; j < t.quantities.size(); ++j)
    if (t.quantities[j] == quantity) return t.rate.at(step)[j];
  throw std::invalid_argument("unknown quantity '" + quantity + "'");
}

inline std::string format_rate_table(const RateTable& t) {
  std::ostringstream os;
  char buf[64];
  os << "   h_coarse     h_fine";
  for (const auto& q : t.quantities) {
    std::snprintf(buf, sizeof buf, " %7s", q.c_str());
    os << buf;
  }
  os << '\n';
  for (size_t i = 0; i < t.rate.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%11.4e %10.4e", t.h[i], t.h[i + 1]);
    os << buf;
    for (double v : t.rate[i]) {
      std::snprintf(buf, sizeof buf, " %7.3f", v);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

struct SweepResult {
  std::vector<RunRecord> records;
  RateTable rates;
};

inline SweepResult sweep(const RunConfig& base, const std::vector<int>& ladder) {
  for (size_t i = 0; i + 1 < ladder.size(); ++i)
    if (ladder[i] >= ladder[i + 1]) throw std::invalid_argument("sweep: ladder must be strictly ascending");
  SweepResult s;
  for (int n : ladder) {
    RunConfig c = base;
    c.n_cells = n;
    s.records.push_back(run_experiment(c));
  }
  s.rates = rate_table(s.records);
  if (!base.output.empty()) emit_csv(s.records, base.output);
  return s;
}

}  // namespace wavefem
