#include <gtest/gtest.h>

#include <random>

#include <wavefem/wavefem.hpp>

using namespace wavefem;

namespace {

Vector random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = N(rng);
  return v;
}

// single dof: k = 1, two cells on (0, 1), m = 1/3, kappa = 4
LagrangeSpace single_dof() { return LagrangeSpace(UniformMesh1D(0.0, 1.0, 2), 1); }

}  // namespace

TEST(Leapfrog, ZeroLoadGivesZeroStates) {
  const LagrangeSpace s(UniformMesh1D(-10, 10, 8), 2);
  const DiscreteOperators ops(s);
  const StateSequence seq = run_leapfrog(ops, TimeGrid(0.1, 50), [&](long) { return Vector::Zero(s.dofs()); });
  ASSERT_EQ(seq.size(), 51);
  for (const Vector& u : seq.states()) EXPECT_EQ(u.norm(), 0.0);
}

TEST(Leapfrog, SingleDofHandRecurrence) {
  const LagrangeSpace s = single_dof();
  const DiscreteOperators ops(s);
  const double tau = 0.05, m = 1.0 / 3.0, kappa = 4.0;
  auto g = [](long n) { return std::cos(0.7 * n) + 0.2 * n; };
  const StateSequence seq = run_leapfrog(ops, TimeGrid(tau, 4), [&](long n) { return Vector::Constant(1, g(n)); });
  double u0 = 0.0, u1 = 0.0;
  for (long n = 1; n < 4; ++n) {
    const double u2 = tau * tau / m * (g(n) - kappa * u1) + 2.0 * u1 - u0;
    EXPECT_NEAR(seq[n + 1][0], u2, 1e-14) << n;
    u0 = u1;
    u1 = u2;
  }
  EXPECT_EQ(seq[0][0], 0.0);
  EXPECT_EQ(seq[1][0], 0.0);
}

TEST(Leapfrog, DefiningEquationResidual) {
  std::mt19937_64 rng(1);
  for (int k = 1; k <= 3; ++k) {
    const LagrangeSpace s(UniformMesh1D(-10, 10, 10), k);
    const DiscreteOperators ops(s);
    const double tau = 0.5 * s.mesh().h / (k * k);
    const TimeGrid grid(tau, 200);
    const Vector b = random_vector(s.dofs(), rng);
    auto load = [&](long n) -> Vector { return std::sin(0.3 * n) * b; };
    const StateSequence seq = run_leapfrog(ops, grid, load);
    for (long n = 1; n < grid.n_steps; ++n) {
      const Vector F = load(n);
      const Vector r = ops.mass * ((seq[n + 1] - 2.0 * seq[n] + seq[n - 1]) / (tau * tau)) + ops.stiffness * seq[n] - F;
      EXPECT_LE(r.norm(), 1e-10 * (F.norm() + 1.0)) << "k=" << k << " n=" << n;
    }
  }
}

TEST(Leapfrog, BlowUpIsReported) {
  const LagrangeSpace s(UniformMesh1D(-10, 10, 16), 1);
  const DiscreteOperators ops(s);
  const Vector b = Vector::Ones(s.dofs());
  try {
    run_leapfrog(ops, TimeGrid(5.0 * s.mesh().h, 20000), [&](long) { return b; });
    FAIL() << "expected blow-up";
  } catch (const BlowUpError& e) {
    EXPECT_NE(std::string(e.what()).find("blow-up detected at step"), std::string::npos);
    EXPECT_GT(e.step(), 1);
  }
}

TEST(MhtForm, ZeroStepIsMassForm) {
  std::mt19937_64 rng(2);
  const LagrangeSpace s(UniformMesh1D(-10, 10, 7), 3);
  const DiscreteOperators ops(s);
  const Vector v = random_vector(s.dofs(), rng), w = random_vector(s.dofs(), rng);
  EXPECT_NEAR(mht_form(ops, 0.0, v, w), v.dot(ops.mass * w), 1e-13 * std::abs(v.dot(ops.mass * w)));
}

TEST(MhtForm, EigenvectorValue) {
  // tau^2/4 convention: m(v,v) = (1 - tau^2 lambda / 4) v^T M v
  for (int k = 1; k <= 3; ++k) {
    const LagrangeSpace s(UniformMesh1D(-10, 10, 32 / k), k);
    ASSERT_LE(s.dofs(), 33);
    const DiscreteOperators ops(s);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ops.stiffness.to_dense(), ops.mass.to_dense());
    const double tau = 0.3 * s.mesh().h / k;
    for (int j : {0, s.dofs() / 2, s.dofs() - 1}) {
      const Vector v = es.eigenvectors().col(j);
      const double lam = es.eigenvalues()[j];
      const double ref = (1.0 - 0.25 * tau * tau * lam) * ops.mass.quadratic_form(v);
      EXPECT_NEAR(mht_form(ops, tau, v, v), ref, 1e-12 * std::abs(ref)) << "k=" << k << " j=" << j;
    }
  }
}

TEST(MhtForm, Symmetric) {
  std::mt19937_64 rng(4);
  for (int k = 1; k <= 3; ++k) {
    const LagrangeSpace s(UniformMesh1D(-10, 10, 9), k);
    const DiscreteOperators ops(s);
    for (int i = 0; i < 5; ++i) {
      const Vector v = random_vector(s.dofs(), rng), w = random_vector(s.dofs(), rng);
      const double a = mht_form(ops, 0.4, v, w), b = mht_form(ops, 0.4, w, v);
      EXPECT_NEAR(a, b, 1e-13 * std::max(std::abs(a), 1.0));
    }
  }
}

TEST(Cfl, LinearElementsQuarterDeficit) {
  const LagrangeSpace s(UniformMesh1D(-10, 10, 400), 1);
  const DiscreteOperators ops(s);
  const double h = s.mesh().h;
  EXPECT_NEAR(verify_cfl(ops, 0.5 * h / std::sqrt(3.0)), 0.75, 1e-4);
}

TEST(Cfl, SmallStepGivesUnitConstant) {
  const LagrangeSpace s(UniformMesh1D(-10, 10, 20), 2);
  const DiscreteOperators ops(s);
  EXPECT_NEAR(verify_cfl(ops, 1e-7), 1.0, 1e-10);
}

TEST(Cfl, BoundaryStepFails) {
  const LagrangeSpace s(UniformMesh1D(-10, 10, 20), 2);
  const DiscreteOperators ops(s);
  const double lam = max_generalized_eigenvalue(ops);
  EXPECT_THROW(verify_cfl(ops, 2.0 / std::sqrt(lam)), CflViolation);
  EXPECT_THROW(verify_cfl(ops, 3.0 / std::sqrt(lam)), CflViolation);
  try {
    verify_cfl(ops, 3.0 / std::sqrt(lam));
  } catch (const CflViolation& e) {
    EXPECT_STREQ(e.what(), "CFL violated");
    EXPECT_LT(e.mu0(), 0.0);
  }
}

TEST(Cfl, PowerIterationMatchesDense) {
  const LagrangeSpace s(UniformMesh1D(-10, 10, 1100), 2);
  ASSERT_GT(s.dofs(), 2049);
  const DiscreteOperators ops(s);
  // highest eigenvalue of the k = 2 operator on a uniform mesh scales as h^-2
  const LagrangeSpace small(UniformMesh1D(-10, 10, 550), 2);
  const double lam_small = max_generalized_eigenvalue(DiscreteOperators(small));
  const double lam = max_generalized_eigenvalue(ops);
  EXPECT_NEAR(lam / lam_small, 4.0, 4.0 * 1e-3);
}

TEST(Cfl, EmpiricalAlphaRanges) {
  const double a1 = cfl_alpha(1), a2 = cfl_alpha(2), a3 = cfl_alpha(3);
  EXPECT_GE(a1, 0.57);
  EXPECT_LE(a1, 0.60);
  EXPECT_GE(a2, 0.24);
  EXPECT_LE(a2, 0.27);
  EXPECT_GE(a3, 0.13);
  EXPECT_LE(a3, 0.16);
}

TEST(Energy, ZeroSequence) {
  const LagrangeSpace s(UniformMesh1D(-10, 10, 5), 2);
  const DiscreteOperators ops(s);
  const StateSequence seq(s.dofs(), std::vector<Vector>(6, Vector::Zero(s.dofs())));
  const DiscreteEnergyTrace tr = discrete_energy_trace(ops, seq, TimeGrid(0.1, 5));
  ASSERT_EQ(tr.energy.size(), 5u);
  for (double e : tr.energy) EXPECT_EQ(e, 0.0);
}

TEST(Energy, UndrivenConservation) {
  std::mt19937_64 rng(8);
  for (int k = 1; k <= 3; ++k) {
    const LagrangeSpace s(UniformMesh1D(-10, 10, 12), k);
    const DiscreteOperators ops(s);
    const double lam = max_generalized_eigenvalue(ops);
    const double tau = 0.9 * 2.0 / std::sqrt(lam);
    const double mu0 = verify_cfl(ops, tau);
    ASSERT_GE(mu0, 0.1);
    const Vector u1 = random_vector(s.dofs(), rng);
    LeapfrogStepper st(ops, tau);
    st.reset(Vector::Zero(s.dofs()), u1, 1);
    auto energy = [&](const Vector& a, const Vector& b) {
      const Vector vdot = (b - a) / tau;
      return mht_form(ops, tau, vdot, vdot) + ops.stiffness.quadratic_form(0.5 * (a + b));
    };
    const double e0 = energy(Vector::Zero(s.dofs()), u1);
    double worst = 0.0;
    for (int n = 0; n < 10000; ++n) {
      const Vector prev = st.current();
      const Vector& cur = st.step(nullptr);
      worst = std::max(worst, std::abs(energy(prev, cur) - e0));
    }
    EXPECT_LE(worst, 1e-10 * e0) << "k=" << k;
  }
}

TEST(Energy, DrivenSingleDofIdentity) {
  const LagrangeSpace s = single_dof();
  const DiscreteOperators ops(s);
  const double tau = 0.1;
  const TimeGrid grid(tau, 60);
  auto g = [](long n) { return std::sin(0.4 * n) + 0.5; };
  const StateSequence seq = run_leapfrog(ops, grid, [&](long n) { return Vector::Constant(1, g(n)); });
  const DiscreteEnergyTrace tr = discrete_energy_trace(ops, seq, grid);
  for (long n = 1; n + 1 < seq.size(); ++n) {
    const double vp = (seq[n + 1][0] - seq[n][0]) / tau, vm = (seq[n][0] - seq[n - 1][0]) / tau;
    const double ref = tau * g(n) * (vp + vm);
    EXPECT_NEAR(tr.energy[n] - tr.energy[n - 1], ref, 1e-12 * std::max(std::abs(ref), tr.energy[n])) << n;
  }
}

TEST(DampedStability, ConstantLimitAndBound) {
  EXPECT_NEAR(stability_constant_x(1e-6), 13.0 / 12.0, 1e-4 * 13.0 / 12.0);
  const double bound = 169.0 / 84.0 * std::numbers::e / (std::numbers::e - 1.0);
  EXPECT_NEAR(bound, 3.1828, 1e-4);
  for (int i = 1; i <= 100; ++i) EXPECT_LE(stability_constant_x(i / 100.0), bound * (1.0 + 1e-14));
  EXPECT_NEAR(stability_constant_x(1.0), bound, 1e-12);
  EXPECT_THROW(stability_constant_x(1.5), std::invalid_argument);
  EXPECT_NEAR(stability_constant_a(0.5), 2.0 / 3.0 * stability_constant_x(0.5) * (1.0 + std::exp(1.0)), 1e-14);
  EXPECT_NEAR(stability_constant_b(0.5), 0.55 * stability_constant_x(0.5) * (2.0 + std::exp(1.0)), 1e-14);
}

TEST(DampedStability, ZeroLoads) {
  const LagrangeSpace s(UniformMesh1D(-10, 10, 6), 1);
  const DiscreteOperators ops(s);
  const TimeGrid grid(0.2, 40);
  const std::vector<Vector> loads(40, Vector::Zero(s.dofs()));
  const StateSequence seq = run_generic_leapfrog(ops, grid, [&](long n) { return loads[n]; });
  const StabilityCheck c = check_damped_stability(ops, seq, grid, 0.5, loads, verify_cfl(ops, grid.tau));
  EXPECT_EQ(c.lhs, 0.0);
  EXPECT_EQ(c.rhs, 0.0);
  EXPECT_TRUE(c.satisfied);
  EXPECT_THROW(check_damped_stability(ops, seq, grid, 10.0, loads, 1.0), std::invalid_argument);
}

TEST(DampedStability, RandomizedDrivenRuns) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const std::array<double, 3> thetas = {0.001, 0.01, 0.1};
  for (int run = 0; run < 20; ++run) {
    const int k = 1 + run % 3;
    const double theta = thetas[run % 3 == 0 ? (run / 3) % 3 : run % 3];
    const LagrangeSpace s(UniformMesh1D(-10, 10, 8), k);
    const DiscreteOperators ops(s);
    const double tau = (0.2 + 0.6 * U(rng)) * 2.0 / std::sqrt(max_generalized_eigenvalue(ops));
    const double rho = theta / tau;
    const double mu0 = verify_cfl(ops, tau);
    // smooth in time: a few random modes with random spatial profiles, decaying past 3/rho
    const long steps = static_cast<long>(std::ceil(12.0 / rho / tau));
    const TimeGrid grid(tau, std::min<long>(steps, 200000));
    const Vector b1 = random_vector(s.dofs(), rng), b2 = random_vector(s.dofs(), rng);
    const double w1 = 3.0 * U(rng), w2 = 3.0 * U(rng), p = 6.0 * U(rng);
    std::vector<Vector> loads;
    loads.reserve(grid.n_steps);
    for (long n = 0; n < grid.n_steps; ++n) {
      const double t = grid.t(n);
      loads.push_back(std::sin(w1 * t + p) * b1 + std::cos(w2 * t) * std::exp(-rho * t) * b2);
    }
    const StateSequence seq = run_generic_leapfrog(ops, grid, [&](long n) { return loads[n]; });
    const StabilityCheck c = check_damped_stability(ops, seq, grid, rho, loads, mu0);
    EXPECT_TRUE(c.satisfied) << "run " << run << " k=" << k << " theta=" << theta << " lhs=" << c.lhs
                             << " rhs=" << c.rhs;
    EXPECT_GT(c.lhs, 0.0);
  }
}

TEST(Differences, ConstantAndQuadraticSequences) {
  const TimeGrid grid(0.25, 10);
  std::vector<Vector> cst, quad;
  for (long n = 0; n <= 10; ++n) {
    cst.push_back(Vector::Constant(3, 1.7));
    quad.push_back(Vector::Constant(3, grid.t(n) * grid.t(n)));
  }
  const DifferenceSequences dc = difference_sequences(StateSequence(3, cst), grid);
  const DifferenceSequences dq = difference_sequences(StateSequence(3, quad), grid);
  // zero extension makes the first entries see a jump; the identities hold once the stencil is inside
  for (long n = 2; n < 10; ++n) {
    EXPECT_NEAR(dc.A[n].norm(), 0.0, 1e-12);
    EXPECT_NEAR(dc.B[n].norm(), 0.0, 1e-11);
    EXPECT_NEAR((dq.A[n] - Vector::Constant(3, 2.0)).norm(), 0.0, 1e-12);
    EXPECT_NEAR(dq.B[n].norm(), 0.0, 1e-10);
  }
  EXPECT_NEAR((dq.A[1] - Vector::Constant(3, 2.0)).norm(), 0.0, 1e-12);
}

TEST(Differences, ThirdDifferenceIsAccelerationRate) {
  std::mt19937_64 rng(9);
  const LagrangeSpace s(UniformMesh1D(-10, 10, 6), 2);
  const DiscreteOperators ops(s);
  const TimeGrid grid(0.1, 80);
  const Vector b = random_vector(s.dofs(), rng);
  const StateSequence seq = run_leapfrog(ops, grid, [&](long n) -> Vector { return std::cos(0.2 * n) * b; });
  const DifferenceSequences d = difference_sequences(seq, grid);
  EXPECT_EQ(d.A[0].norm(), 0.0);
  for (size_t n = 0; n + 1 < d.A_dot.size(); ++n)
    EXPECT_LE((d.B[n + 1] - d.A_dot[n]).norm(), 1e-9 * std::max(1.0, d.B[n + 1].norm())) << n;
}

TEST(DampedStability, AccelerationBoundsOnStandingWave) {
  BenchmarkCase bc(BenchmarkKind::standing);
  for (int k = 1; k <= 3; ++k) {
    const LagrangeSpace s(UniformMesh1D(-10, 10, 16), k);
    const DiscreteOperators ops(s);
    const SpatialRule sr(s, k + 6);
    const double tau = 0.5 * 2.0 / std::sqrt(max_generalized_eigenvalue(ops));
    const double mu0 = verify_cfl(ops, tau);
    const double rho = 0.5;
    const TimeGrid grid(tau, static_cast<long>(std::ceil(40.0 / tau)));
    const double theta = rho * tau;
    const Vector base = load_vector(sr, [&](double x) { return bc.forcing_space(x); });
    const StateSequence seq =
        run_leapfrog(ops, grid, [&](long n) -> Vector { return bc.forcing_time(grid.t(n)) * base; });
    const DifferenceSequences d = difference_sequences(seq, grid);

    double lhsA = 0.0, lhsB = 0.0;
    for (size_t n = 0; n < d.A_half.size(); ++n) {
      const double w = tau * std::exp(-2.0 * rho * grid.t(static_cast<long>(n)));
      lhsA += w * (mu0 * ops.mass.quadratic_form(d.A_dot[n]) + ops.stiffness.quadratic_form(d.A_half[n]));
      lhsB += w * (mu0 * ops.mass.quadratic_form(d.B_dot[n]) + ops.stiffness.quadratic_form(d.B_half[n]));
    }
    // ||p||^2 = L for the standing profile; time integral by composite Gauss on [0, 40]
    const double p2 = bc.L;
    const QuadratureRule g = gauss_legendre(10);
    double iA = 0.0, iB = 0.0;
    for (int c = 0; c < 4000; ++c)
      for (size_t q = 0; q < g.points.size(); ++q) {
        const double t = 0.01 * (c + g.points[q]), w = 0.01 * g.weights[q] * std::exp(-2.0 * rho * t);
        iA += w * std::pow(bc.forcing_time(t, 2), 2) * p2;
        iB += w * std::pow(bc.forcing_time(t, 3), 2) * p2;
      }
    const double rhsA = stability_constant_a(theta) / mu0 / (rho * rho) * iA;
    const double rhsB = stability_constant_b(theta) / mu0 / (rho * rho) * iB;
    EXPECT_GT(lhsA, 0.0);
    EXPECT_LE(lhsA, rhsA) << "k=" << k;
    EXPECT_LE(lhsB, rhsB) << "k=" << k;
  }
}
