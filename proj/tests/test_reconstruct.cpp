#include <gtest/gtest.h>

#include <random>

#include <wavefem/wavefem.hpp>

using namespace wavefem;

namespace {

StateSequence random_sequence(int dofs, long n_states, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  StateSequence s(dofs);
  s.push_back(Vector::Zero(dofs));
  for (long n = 1; n < n_states; ++n) {
    Vector v(dofs);
    for (int i = 0; i < dofs; ++i) v[i] = N(rng);
    s.push_back(v);
  }
  return s;
}

template <class F>
StateSequence scalar_samples(const TimeGrid& grid, long n_states, F&& f) {
  StateSequence s(1);
  for (long n = 0; n < n_states; ++n) s.push_back(Vector::Constant(1, f(grid.t(n))));
  return s;
}

// members reference each other, so the run is built in place
struct SolverRun {
  LagrangeSpace space;
  DiscreteOperators ops;
  SpatialRule sr;
  StateSequence seq;

  SolverRun(BenchmarkKind kind, int k, int cells, double tau, long steps)
      : space(UniformMesh1D(-10, 10, cells), k), ops(space), sr(space, k + 6) {
    BenchmarkCase bc(kind);
    seq = run_leapfrog(ops, TimeGrid(tau, steps), [&](long n) {
      const double t = n * tau;
      return load_vector(sr, [&](double x) { return bc.forcing(t, x); });
    });
  }
  SolverRun(const SolverRun&) = delete;
};

}  // namespace

TEST(ReconstructR, ContinuousAcrossNodes) {
  std::mt19937_64 rng(1);
  const TimeGrid grid(0.1, 30);
  const StateSequence s = random_sequence(4, 31, rng);
  const TimeReconstruction r = reconstruct_R(s, grid);
  EXPECT_EQ(r.intervals(), 30);
  EXPECT_LE(r.poly.max_relative_jump(0), 1e-10);
  for (long n = 0; n < r.intervals(); ++n) {
    EXPECT_LE((r.evaluate_on(n, 0.0) - s[n]).norm(), 1e-12 * (1.0 + s[n].norm()));
    EXPECT_LE((r.evaluate_on(n, grid.tau) - s[n + 1]).norm(), 1e-12 * (1.0 + s[n + 1].norm()));
  }
}

TEST(ReconstructR, ReproducesQuadratics) {
  const TimeGrid grid(0.3, 12);
  const QuadratureRule g = gauss_legendre(4);
  for (int deg = 0; deg <= 2; ++deg) {
    auto f = [deg](double t) { return deg == 0 ? 2.5 : (deg == 1 ? t : t * t); };
    const TimeReconstruction r = reconstruct_R(scalar_samples(grid, 13, f), grid);
    for (long n = 1; n < r.intervals(); ++n)
      for (double xi : g.points) {
        const double t = grid.t(n) + xi * grid.tau;
        EXPECT_NEAR(r.evaluate_on(n, xi * grid.tau)[0], f(t), 1e-12 * std::max(1.0, f(t))) << deg;
      }
  }
}

TEST(ReconstructL, ContinuousUpToSecondDerivative) {
  std::mt19937_64 rng(2);
  const TimeGrid grid(0.05, 40);
  const StateSequence s = random_sequence(3, 42, rng);
  const TimeReconstruction l = reconstruct_L(s, grid);
  EXPECT_EQ(l.intervals(), 40);
  for (int d = 0; d <= 2; ++d) EXPECT_LE(l.poly.max_relative_jump(d), 1e-10) << d;
  // the third derivative jumps in general
  EXPECT_GT(l.poly.max_relative_jump(3), 1e-6);
}

TEST(ReconstructL, CoefficientsOnPolynomialSequences) {
  const TimeGrid grid(0.2, 10);
  const TimeReconstruction lc = reconstruct_L(scalar_samples(grid, 12, [](double) { return 1.3; }), grid);
  const TimeReconstruction ll = reconstruct_L(scalar_samples(grid, 12, [](double t) { return t; }), grid);
  for (long n = 2; n < 10; ++n) {
    const auto& c = lc.poly.coefficients(n);
    EXPECT_NEAR(c[0][0], 1.3, 1e-14);
    for (int p = 1; p < 5; ++p) EXPECT_NEAR(c[p][0], 0.0, 1e-9) << p;
    const auto& d = ll.poly.coefficients(n);
    EXPECT_NEAR(d[0][0], grid.t(n), 1e-14);
    EXPECT_NEAR(d[1][0], 1.0, 1e-13);
    for (int p = 2; p < 5; ++p) EXPECT_NEAR(d[p][0], 0.0, 1e-9) << p;
    for (double s : {0.0, 0.07, 0.2}) EXPECT_NEAR(ll.evaluate_on(n, s)[0], grid.t(n) + s, 1e-13);
  }
  const StateSequence z(2, std::vector<Vector>(8, Vector::Zero(2)));
  const TimeReconstruction lz = reconstruct_L(z, grid);
  for (long n = 0; n < lz.intervals(); ++n) EXPECT_EQ(lz.evaluate_on(n, 0.1).norm(), 0.0);
}

TEST(ReconstructL, StencilBeyondStatesIsRangeError) {
  const TimeGrid grid(0.2, 10);
  const StateSequence z(1, std::vector<Vector>(6, Vector::Zero(1)));
  EXPECT_THROW(reconstruct_L(z, grid, 5), std::out_of_range);
  EXPECT_NO_THROW(reconstruct_L(z, grid, 4));
  EXPECT_THROW(reconstruct_R(z, grid, 6), std::out_of_range);
}

TEST(Commuting, RandomAndZeroSequences) {
  std::mt19937_64 rng(3);
  const TimeGrid grid(0.1, 20);
  EXPECT_LE(verify_commuting(random_sequence(5, 21, rng), grid), 1e-11);
  const StateSequence z(3, std::vector<Vector>(21, Vector::Zero(3)));
  EXPECT_EQ(verify_commuting(z, grid), 0.0);
}

TEST(Commuting, StandingWaveTrajectory) {
  const SolverRun r(BenchmarkKind::standing, 2, 12, 0.05, 400);
  EXPECT_LE(verify_commuting(r.seq, TimeGrid(0.05, 400)), 1e-10);
}

TEST(ReconstructedEquation, StandingWaveLinear) {
  const TimeGrid grid(0.1, 300);
  const SolverRun r(BenchmarkKind::standing, 1, 8, grid.tau, grid.n_steps);
  BenchmarkCase bc(BenchmarkKind::standing);
  const SourceReconstruction ft([&](double t, double x) { return bc.forcing(t, x); }, grid);
  EXPECT_LE(verify_reconstructed_equation(r.seq, grid, r.ops, r.sr, ft), 1e-9);
}

TEST(ReconstructedEquation, PropagatingQuadratic) {
  const TimeGrid grid(0.04, 400);
  const SolverRun r(BenchmarkKind::propagating, 2, 10, grid.tau, grid.n_steps);
  BenchmarkCase bc(BenchmarkKind::propagating);
  const SourceReconstruction ft([&](double t, double x) { return bc.forcing(t, x); }, grid);
  EXPECT_LE(verify_reconstructed_equation(r.seq, grid, r.ops, r.sr, ft), 1e-9);
}

TEST(ReconstructedEquation, ZeroForcing) {
  const LagrangeSpace s(UniformMesh1D(-10, 10, 6), 3);
  const DiscreteOperators ops(s);
  const SpatialRule sr(s, 9);
  const TimeGrid grid(0.05, 50);
  const StateSequence seq = run_leapfrog(ops, grid, [&](long) { return Vector::Zero(s.dofs()); });
  const SourceReconstruction ft([](double, double) { return 0.0; }, grid);
  EXPECT_EQ(verify_reconstructed_equation(seq, grid, ops, sr, ft), 0.0);
}

TEST(SourceReconstruction, NodalExactness) {
  BenchmarkCase bc(BenchmarkKind::propagating);
  const TimeGrid grid(0.07, 200);
  const SourceReconstruction ft([&](double t, double x) { return bc.forcing(t, x); }, grid);
  for (long n = 1; n < 200; n += 7)
    for (double x : {-9.0, -1.3, 0.0, 0.4, 7.7}) {
      const double f = bc.forcing(grid.t(n), x);
      EXPECT_NEAR(ft(grid.t(n), x), f, 1e-12 * std::max(std::abs(f), 1e-300)) << n << " " << x;
    }
  EXPECT_EQ(ft(0.0, 1.0), 0.0);
}

TEST(SourceReconstruction, LoadMatchesPointwiseSamples) {
  BenchmarkCase bc(BenchmarkKind::standing);
  const LagrangeSpace s(UniformMesh1D(-10, 10, 7), 2);
  const SpatialRule sr(s, 8);
  const TimeGrid grid(0.1, 100);
  const SourceReconstruction ft([&](double t, double x) { return bc.forcing(t, x); }, grid);
  for (double t : {0.03, 3.21, 4.55}) {
    const Vector a = ft.load(sr, t);
    const Vector b = load_vector(sr, [&](double x) { return ft(t, x); });
    EXPECT_LE((a - b).norm(), 1e-13 * (1.0 + b.norm()));
  }
}

TEST(Delta, EndpointValuesAndZero) {
  std::mt19937_64 rng(4);
  const TimeGrid grid(0.1, 15);
  const StateSequence s = random_sequence(3, 17, rng);
  const PiecewisePolynomial d = delta(s, grid);
  EXPECT_EQ(d.intervals(), 15);
  for (long n = 0; n < d.intervals(); ++n) {
    const Vector alpha = (3.0 * s[n + 1] + 17.0 * s[n] + 5.0 * s[n - 1] - s[n - 2]) / 24.0;
    EXPECT_LE((d.evaluate_on(n, 0.0) - (s[n] - alpha)).norm(), 1e-13);
  }
  const StateSequence z(2, std::vector<Vector>(10, Vector::Zero(2)));
  const PiecewisePolynomial dz = delta(z, grid);
  for (long n = 0; n < dz.intervals(); ++n) {
    EXPECT_EQ(dz.evaluate_on(n, 0.05).norm(), 0.0);
    EXPECT_EQ(dz.evaluate_on(n, 0.05, 1).norm(), 0.0);
  }
}

TEST(Delta, FourthOrderDecayUnderStepHalving) {
  // squared damped norm of d_x delta' scales as tau^4, so the norm halves twice
  const double rho = 0.3;
  double prev = 0.0;
  for (double tau : {0.1, 0.05}) {
    const long steps = static_cast<long>(std::round(40.0 / tau));
    const TimeGrid grid(tau, steps);
    const SolverRun r(BenchmarkKind::standing, 1, 16, tau, steps + 2);
    const PiecewisePolynomial d = delta(reconstruct_R(r.seq, grid, steps), reconstruct_L(r.seq, grid, steps));
    const double v = std::sqrt(damped_slab_integral(
        [&](long n, double s) { return r.ops.stiffness.quadratic_form(d.evaluate_on(n, s, 1)); }, grid, rho));
    if (prev > 0.0) {
      EXPECT_GE(prev / v, 4.0 * 0.8);
      EXPECT_LE(prev / v, 4.0 * 1.2);
    }
    prev = v;
  }
}

TEST(ReconstructR, ApproximationOrders) {
  // smooth, flat at t = 0 so the zero extension is invisible at these orders
  auto v = [](double t) { return t * t * t * t * std::exp(-0.5 * t) * std::sin(t); };
  auto vd = [](double t) {
    return std::exp(-0.5 * t) * (t * t * t * (4.0 - 0.5 * t) * std::sin(t) + t * t * t * t * std::cos(t));
  };
  const double rho = 0.5, T = 24.0;
  std::vector<double> e0, e1;
  for (double tau = 0.2; tau > 0.01; tau *= 0.5) {
    const long steps = static_cast<long>(std::round(T / tau));
    const TimeGrid grid(tau, steps);
    const TimeReconstruction r = reconstruct_R(scalar_samples(grid, steps + 1, v), grid);
    e0.push_back(std::sqrt(damped_time_integral([&](double t) { return std::pow(r.evaluate(t)[0] - v(t), 2); },
                                                grid, rho)));
    e1.push_back(std::sqrt(damped_time_integral(
        [&](double t) { return std::pow(r.evaluate(t, 1)[0] - vd(t), 2); }, grid, rho)));
  }
  ASSERT_EQ(e0.size(), 5u);
  for (size_t i = 1; i < e0.size(); ++i) {
    EXPECT_NEAR(std::log2(e0[i - 1] / e0[i]), 3.0, 0.3) << i;
    EXPECT_NEAR(std::log2(e1[i - 1] / e1[i]), 2.0, 0.3) << i;
  }
}
