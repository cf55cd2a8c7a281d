#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "assembly.hpp"
#include "benchmarks.hpp"
#include "reconstruct.hpp"

namespace wavefem {

constexpr int kDampedRulePoints = 10;

/// sum_n sum_q w_q tau q(n, s_q) exp(-2 rho (t^n + s_q)) over the slabs J_0..J_{N-1};
/// the integrand receives the slab index and the offset inside the slab.
template <class F>
double damped_slab_integral(F&& integrand, const TimeGrid& grid, double rho, int points = kDampedRulePoints) {
  if (!(rho > 0.0)) throw std::invalid_argument("damped integral: rho must be positive");
  const QuadratureRule g = gauss_legendre(points);
  double s = 0.0;
  for (long n = 0; n < grid.n_steps; ++n)
    for (int q = 0; q < g.size(); ++q) {
      const double off = g.points[q] * grid.tau;
      const double t = grid.t(n) + off;
      s += g.weights[q] * grid.tau * integrand(n, off) * std::exp(-2.0 * rho * t);
    }
  return s;
}

/// Integral of q(t) exp(-2 rho t) over [0, t_star], 10-point Gauss per slab.
template <class F>
double damped_time_integral(F&& integrand, const TimeGrid& grid, double rho, int points = kDampedRulePoints) {
  return damped_slab_integral([&](long n, double s) { return integrand(grid.t(n) + s); }, grid, rho, points);
}

/// sqrt of the damped integral of ||phi'(t)||^2 + ||d_x phi(t)||^2.
inline double damped_energy_norm(const TimeReconstruction& recon, double rho, const TimeGrid& grid,
                                 const DiscreteOperators& ops) {
  if (recon.intervals() < grid.n_steps) throw std::out_of_range("damped_energy_norm: reconstruction too short");
  return std::sqrt(damped_slab_integral(
      [&](long n, double s) {
        return ops.mass.quadratic_form(recon.evaluate_on(n, s, 1)) +
               ops.stiffness.quadratic_form(recon.evaluate_on(n, s, 0));
      },
      grid, rho));
}

/// The nine damped error quantities (square roots of the squared forms).
struct ErrorMeasures {
  double e_U = 0.0, e_u = 0.0, e_w = 0.0;
  double ex_U = 0.0, ex_u = 0.0, ex_w = 0.0;
  double et_U = 0.0, et_u = 0.0, et_w = 0.0;

  /// E_rho(u - w_htau) = sqrt(et_w^2 + ex_w^2).
  double E_rho() const { return std::sqrt(et_w * et_w + ex_w * ex_w); }
};

using ExactFunction = std::function<ExactValue(double, double)>;

/// Direct evaluation: exact solution sampled at every space-time quadrature node.
/// Discrete sums over n = 0..N-1, integrals over J_0..J_{N-1}.
inline ErrorMeasures error_measures(const StateSequence& seq, const TimeReconstruction& recon_u,
                                    const TimeReconstruction& recon_w, const ExactFunction& exact, double rho,
                                    const TimeGrid& grid, const SpatialRule& sr) {
  if (!(rho > 0.0)) throw std::invalid_argument("error_measures: rho must be positive");
  const int np = sr.size();
  const int nq = sr.points_per_cell();
  std::vector<double> v, vx, vt;
  std::vector<ExactValue> ex(np);
  auto sample_exact = [&](double t) {
    for (int c = 0; c < sr.n_cells(); ++c)
      for (int q = 0; q < nq; ++q) ex[c * nq + q] = exact(t, sr.x(c, q));
  };
  auto sq_err = [&](const std::vector<double>& h, auto pick) {
    double s = 0.0;
    for (int c = 0; c < sr.n_cells(); ++c)
      for (int q = 0; q < nq; ++q) {
        const double d = pick(ex[c * nq + q]) - h[c * nq + q];
        s += sr.weight(q) * d * d;
      }
    return s;
  };
  auto U = [](const ExactValue& e) { return e.u; };
  auto Ut = [](const ExactValue& e) { return e.ut; };
  auto Ux = [](const ExactValue& e) { return e.ux; };

  ErrorMeasures m;
  double sU = 0, sxU = 0, stU = 0;
  for (long n = 0; n < grid.n_steps; ++n) {
    const double w = grid.tau * std::exp(-2.0 * rho * grid.t(n));
    sample_exact(grid.t(n));
    sr.evaluate(seq[n], 0, v);
    sr.evaluate(seq[n], 1, vx);
    sr.evaluate((seq[n + 1] - seq[n - 1]) / grid.tau, 0, vt);
    sU += w * sq_err(v, U);
    sxU += w * sq_err(vx, Ux);
    stU += w * sq_err(vt, Ut);
  }
  double s[6] = {0, 0, 0, 0, 0, 0};
  const QuadratureRule g = gauss_legendre(kDampedRulePoints);
  for (long n = 0; n < grid.n_steps; ++n)
    for (int q = 0; q < g.size(); ++q) {
      const double off = g.points[q] * grid.tau;
      const double t = grid.t(n) + off;
      const double w = g.weights[q] * grid.tau * std::exp(-2.0 * rho * t);
      sample_exact(t);
      const TimeReconstruction* rs[2] = {&recon_u, &recon_w};
      for (int r = 0; r < 2; ++r) {
        const Vector c0 = rs[r]->evaluate_on(n, off, 0);
        sr.evaluate(c0, 0, v);
        sr.evaluate(c0, 1, vx);
        sr.evaluate(rs[r]->evaluate_on(n, off, 1), 0, vt);
        s[3 * r + 0] += w * sq_err(v, U);
        s[3 * r + 1] += w * sq_err(vx, Ux);
        s[3 * r + 2] += w * sq_err(vt, Ut);
      }
    }
  m.e_U = std::sqrt(sU);
  m.ex_U = std::sqrt(sxU);
  m.et_U = std::sqrt(stU);
  m.e_u = std::sqrt(s[0]);
  m.ex_u = std::sqrt(s[1]);
  m.et_u = std::sqrt(s[2]);
  m.e_w = std::sqrt(s[3]);
  m.ex_w = std::sqrt(s[4]);
  m.et_w = std::sqrt(s[5]);
  return m;
}

}  // namespace wavefem
