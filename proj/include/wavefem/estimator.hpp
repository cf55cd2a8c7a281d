#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "damped.hpp"

namespace wavefem {

/// Zero-mean antiderivative of g on the mesh, anchored at the left end:
/// sigma(x) = int_{left}^{x} g - mean.  Cell integrals and partial-cell
/// integrals use the Gauss rule of the given SpatialRule.
template <class G>
class SigmaFlux {
 public:
  SigmaFlux(const SpatialRule& sr, G g) : sr_(&sr), g_(std::move(g)) {
    const UniformMesh1D& mesh = sr.space().mesh();
    offset_.assign(mesh.n_cells + 1, 0.0);
    double moment = 0.0;  // int (right - y) g(y) dy = int A(x) dx
    for (int c = 0; c < mesh.n_cells; ++c) {
      double I = 0.0;
      for (int q = 0; q < sr.points_per_cell(); ++q) {
        const double x = sr.x(c, q);
        const double gv = g_(x);
        I += sr.weight(q) * gv;
        moment += sr.weight(q) * (mesh.right - x) * gv;
      }
      offset_[c + 1] = offset_[c] + I;
    }
    mean_ = moment / mesh.length();
  }

  double mean_of_antiderivative() const { return mean_; }

  double operator()(double x) const {
    const UniformMesh1D& mesh = sr_->space().mesh();
    const int c = mesh.locate(x);
    const double a = mesh.cell_left(c);
    const double len = x - a;
    double partial = 0.0;
    const QuadratureRule& r = sr_->rule();
    for (int q = 0; q < r.size(); ++q) partial += r.weights[q] * len * g_(a + len * r.points[q]);
    return offset_[c] + partial - mean_;
  }

 private:
  const SpatialRule* sr_;
  G g_;
  std::vector<double> offset_;
  double mean_ = 0.0;
};

template <class G>
SigmaFlux<G> sigma_flux(const SpatialRule& sr, G g) {
  return SigmaFlux<G>(sr, std::move(g));
}

/// sigma(t, .) for g = f_tau(t, .) - w''(t, .) on slab n at offset s.
inline auto sigma_flux(const SpatialRule& sr, const SourceReconstruction& f_tau, const TimeReconstruction& recon_w,
                       long n, double s) {
  const double t = recon_w.poly.grid().t(n) + s;
  const Vector acc = recon_w.evaluate_on(n, s, 2);
  const LagrangeSpace* space = &sr.space();
  return SigmaFlux(sr, [space, acc, &f_tau, t](double x) { return f_tau(t, x) - space->evaluate(acc, x, 0); });
}

/// R = sqrt of the damped integral of ||d_x w + sigma||^2 (composite Gauss, sr's points per cell).
inline double estimator_R(const SpatialRule& sr, const TimeGrid& grid, const TimeReconstruction& recon_w,
                          const SourceReconstruction& f_tau, double rho) {
  std::vector<double> wx;
  return std::sqrt(damped_slab_integral(
      [&](long n, double s) {
        const auto sigma = sigma_flux(sr, f_tau, recon_w, n, s);
        sr.evaluate(recon_w.evaluate_on(n, s, 0), 1, wx);
        double acc = 0.0;
        const int nq = sr.points_per_cell();
        for (int c = 0; c < sr.n_cells(); ++c)
          for (int q = 0; q < nq; ++q) {
            const double y = wx[c * nq + q] + sigma(sr.x(c, q));
            acc += sr.weight(q) * y * y;
          }
        return acc;
      },
      grid, rho));
}

/// M = sqrt of the damped integral of rho^{-2} ||d_x delta'(t)||^2.
inline double estimator_M(const DiscreteOperators& ops, const TimeGrid& grid, const PiecewisePolynomial& delta_recon,
                          double rho) {
  if (delta_recon.intervals() < grid.n_steps) throw std::out_of_range("estimator_M: delta too short");
  return std::sqrt(damped_slab_integral(
      [&](long n, double s) { return ops.stiffness.quadratic_form(delta_recon.evaluate_on(n, s, 1)); }, grid, rho)) /
         rho;
}

/// eta_f = sqrt of the damped integral of ||f(t) - f_tau(t)||^2.
inline double data_oscillation(const SourceReconstruction& f_tau, const TimeGrid& grid, double rho,
                               const SpatialRule& sr) {
  return std::sqrt(damped_slab_integral(
      [&](long n, double s) {
        const double t = grid.t(n) + s;
        double acc = 0.0;
        for (int c = 0; c < sr.n_cells(); ++c)
          for (int q = 0; q < sr.points_per_cell(); ++q) {
            const double x = sr.x(c, q);
            const double d = f_tau.exact(t, x) - f_tau(t, x);
            acc += sr.weight(q) * d * d;
          }
        return acc;
      },
      grid, rho));
}

struct EstimatorBreakdown {
  double R = 0.0;
  double M = 0.0;
  double eta_f = 0.0;
  double lambda_sq = 0.0;  // R^2 + 20 M^2
  double lambda = 0.0;
  double E_rho = std::numeric_limits<double>::quiet_NaN();
  double effectivity = std::numeric_limits<double>::quiet_NaN();
};

inline EstimatorBreakdown total_estimator(double R, double M, double eta_f, std::optional<double> E_rho = {}) {
  if (R < 0.0 || M < 0.0 || eta_f < 0.0) throw std::invalid_argument("total_estimator: negative part");
  EstimatorBreakdown b;
  b.R = R;
  b.M = M;
  b.eta_f = eta_f;
  b.lambda_sq = R * R + 20.0 * M * M;
  b.lambda = std::sqrt(b.lambda_sq);
  if (E_rho) {
    b.E_rho = *E_rho;
    if (*E_rho > 0.0) b.effectivity = b.lambda / *E_rho;
    else if (b.lambda > 0.0) b.effectivity = std::numeric_limits<double>::infinity();
  }
  return b;
}

/// min{|s|/rho, C_app C_ell h^theta ell^(1-theta) |s| (1 + |s|/rho)}.
inline double gamma_bound(double s_modulus, double rho, double h, double theta = 1.0, double C_app = 1.0,
                          double C_ell = 1.0, double ell_Omega = 20.0) {
  if (!(theta > 0.5 && theta <= 1.0)) throw std::invalid_argument("gamma_bound: theta must lie in (1/2, 1]");
  if (!(s_modulus > 0.0 && rho > 0.0 && h > 0.0 && C_app > 0.0 && C_ell > 0.0 && ell_Omega > 0.0))
    throw std::invalid_argument("gamma_bound: inputs must be positive");
  const double first = s_modulus / rho;
  const double second =
      C_app * C_ell * std::pow(h, theta) * std::pow(ell_Omega, 1.0 - theta) * s_modulus * (1.0 + s_modulus / rho);
  return std::min(first, second);
}

}  // namespace wavefem
