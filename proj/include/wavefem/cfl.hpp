#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>

#include "timestepping.hpp"

namespace wavefem {

class CflViolation : public std::runtime_error {
 public:
  explicit CflViolation(double mu0) : std::runtime_error("CFL violated"), mu0_(mu0) {}
  double mu0() const { return mu0_; }

 private:
  double mu0_;
};

/// Largest eigenvalue of M^{-1} K: dense solve up to 2049 dofs, power iteration above.
inline double max_generalized_eigenvalue(const DiscreteOperators& ops) {
  const int n = ops.mass.dimension();
  if (n == 0) return 0.0;
  if (n <= 2049) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ops.stiffness.to_dense(), ops.mass.to_dense(),
                                                                  Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
  }
  // highest modes alternate in sign from node to node
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.1 * std::sin(0.37 * i));
  double lambda = 0.0;
  for (int it = 0; it < 200000; ++it) {
    Vector y = ops.mass_factor.solve(ops.stiffness * x);
    const double next = x.dot(ops.stiffness * x) / x.dot(ops.mass * x);
    x = y / y.norm();
    if (it > 10 && std::abs(next - lambda) <= 1e-12 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

/// mu0 = 1 - tau^2 lambda_max / 4, the coercivity constant of mht_form.
inline double verify_cfl(const DiscreteOperators& ops, double tau) {
  const double mu0 = 1.0 - 0.25 * tau * tau * max_generalized_eigenvalue(ops);
  if (!(mu0 > 0.0)) throw CflViolation(mu0);
  return mu0;
}

inline double verify_cfl(const LagrangeSpace& space, const TimeGrid& grid) {
  return verify_cfl(DiscreteOperators(space), grid.tau);
}

namespace detail {

/// Kick with a fixed broadband load for 10 steps, then run free.
inline bool leapfrog_probe_stable(const DiscreteOperators& ops, double tau, long horizon) {
  const int n = ops.mass.dimension();
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector load(n);
  for (int i = 0; i < n; ++i) load[i] = dist(rng);
  LeapfrogStepper st(ops, tau);
  st.reset(Vector::Zero(n), Vector::Zero(n), 1);
  double reference = 0.0;
  try {
    for (long k = 1; k <= horizon; ++k) {
      Vector prev = st.current();
      const Vector& cur = st.step(k <= 10 ? &load : nullptr);
      const Vector vdot = (cur - prev) / tau;
      const Vector mid = 0.5 * (cur + prev);
      const double e = ops.mass.quadratic_form(vdot) + ops.stiffness.quadratic_form(mid);
      if (!std::isfinite(e)) return false;
      if (k <= 10) reference = std::max(reference, e);
      else if (e > 1e6 * reference) return false;
    }
  } catch (const BlowUpError&) {
    return false;
  }
  return true;
}

}  // namespace detail

/// Largest stable ratio r in tau = r h, by bisection to 1e-3.
inline double find_cfl_alpha(const LagrangeSpace& space, long probe_horizon = 20000) {
  DiscreteOperators ops(space);
  const double h = space.mesh().h;
  double lo = 0.01, hi = 2.0;
  if (!detail::leapfrog_probe_stable(ops, lo * h, probe_horizon))
    throw std::runtime_error("find_cfl_alpha: unstable even at r = 0.01");
  while (detail::leapfrog_probe_stable(ops, hi * h, probe_horizon)) hi *= 2.0;
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    if (detail::leapfrog_probe_stable(ops, mid * h, probe_horizon)) lo = mid;
    else hi = mid;
  }
  return lo;
}

/// alpha_k on the 64-cell probe mesh of (-10, 10), computed once per (k, horizon).
inline double cfl_alpha(int degree, long probe_horizon = 20000) {
  static std::mutex mtx;
  static std::map<std::pair<int, long>, double> cache;
  std::lock_guard<std::mutex> lock(mtx);
  const auto key = std::make_pair(degree, probe_horizon);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const double alpha = find_cfl_alpha(LagrangeSpace(UniformMesh1D(-10.0, 10.0, 64), degree), probe_horizon);
  cache[key] = alpha;
  return alpha;
}

}  // namespace wavefem
