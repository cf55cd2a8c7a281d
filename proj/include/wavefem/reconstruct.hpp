#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "assembly.hpp"
#include "quadrature.hpp"
#include "timestepping.hpp"

namespace wavefem {

/// Piecewise polynomial in time with vector coefficients.  On J_n the value is
/// sum_p c[n][p] (t - t^n)^p / p!, so c[n][p] is the p-th derivative at t^n.
class PiecewisePolynomial {
 public:
  PiecewisePolynomial() = default;
  PiecewisePolynomial(TimeGrid grid, int n_coeffs) : grid_(grid), n_coeffs_(n_coeffs) {}

  const TimeGrid& grid() const { return grid_; }
  long intervals() const { return static_cast<long>(coeffs_.size()); }
  int n_coeffs() const { return n_coeffs_; }
  double end_time() const { return grid_.t(intervals()); }

  void push_interval(std::vector<Vector> c) {
    if (static_cast<int>(c.size()) != n_coeffs_) throw std::invalid_argument("PiecewisePolynomial: wrong coefficient count");
    coeffs_.push_back(std::move(c));
  }

  const std::vector<Vector>& coefficients(long n) const {
    if (n < 0 || n >= intervals()) throw std::out_of_range("PiecewisePolynomial: interval out of range");
    return coeffs_[n];
  }

  /// d^deriv/dt^deriv on interval n at local offset s = t - t^n.
  Vector evaluate_on(long n, double s, int deriv = 0) const {
    const auto& c = coefficients(n);
    Vector v = Vector::Zero(c[0].size());
    if (deriv >= n_coeffs_) return v;
    // Horner in s with factorial weights
    for (int p = n_coeffs_ - 1; p >= deriv; --p) {
      v *= s / (p - deriv + 1);
      v += c[p];
    }
    return v;
  }

  long interval_of(double t) const {
    if (!(t >= 0.0 && t <= end_time())) throw std::domain_error("time outside the reconstructed range");
    long n = static_cast<long>(std::floor(t / grid_.tau));
    return std::clamp(n, 0L, intervals() - 1);
  }

  Vector evaluate(double t, int deriv = 0) const {
    const long n = interval_of(t);
    return evaluate_on(n, t - grid_.t(n), deriv);
  }

  /// Largest jump of the deriv-th derivative across interior nodes, relative
  /// to the magnitude of the terms summed on the left interval.
  double max_relative_jump(int deriv) const {
    double worst = 0.0;
    const double tau = grid_.tau;
    for (long n = 0; n + 1 < intervals(); ++n) {
      const Vector left = evaluate_on(n, tau, deriv);
      const Vector right = evaluate_on(n + 1, 0.0, deriv);
      double scale = 0.0, fac = 1.0, tp = 1.0;
      for (int p = deriv; p < n_coeffs_; ++p) {
        scale += coeffs_[n][p].lpNorm<Eigen::Infinity>() * tp / fac;
        tp *= tau;
        fac *= (p - deriv + 1);
      }
      const double jump = (left - right).lpNorm<Eigen::Infinity>();
      if (jump == 0.0) continue;
      worst = std::max(worst, scale > 0.0 ? jump / scale : INFINITY);
    }
    return worst;
  }

 private:
  TimeGrid grid_;
  int n_coeffs_ = 0;
  std::vector<std::vector<Vector>> coeffs_;
};

enum class ReconstructionKind { quadratic_R, quartic_L };

struct TimeReconstruction {
  ReconstructionKind kind;
  PiecewisePolynomial poly;

  Vector evaluate(double t, int deriv = 0) const { return poly.evaluate(t, deriv); }
  Vector evaluate_on(long n, double s, int deriv = 0) const { return poly.evaluate_on(n, s, deriv); }
  long intervals() const { return poly.intervals(); }
};

/// Quadratic Lagrange interpolation through t^{n-1}, t^n, t^{n+1} on each J_n.
/// Intervals J_0..J_{last}; last defaults to the final one the states support.
inline TimeReconstruction reconstruct_R(const StateSequence& seq, const TimeGrid& grid, long n_intervals = -1) {
  if (seq.size() < 2) throw std::invalid_argument("reconstruct_R: need at least two states");
  if (n_intervals < 0) n_intervals = seq.size() - 1;
  if (n_intervals > seq.size() - 1) throw std::out_of_range("reconstruct_R: stencil exceeds stored states");
  TimeReconstruction r{ReconstructionKind::quadratic_R, PiecewisePolynomial(grid, 3)};
  const double t = grid.tau;
  for (long n = 0; n < n_intervals; ++n) {
    r.poly.push_interval({seq[n], (seq[n + 1] - seq[n - 1]) / (2.0 * t),
                          (seq[n + 1] - 2.0 * seq[n] + seq[n - 1]) / (t * t)});
  }
  return r;
}

/// The C^2 quartic with coefficients (alpha, beta, gamma, theta, epsilon) from V^{n-2..n+2}.
inline TimeReconstruction reconstruct_L(const StateSequence& seq, const TimeGrid& grid, long n_intervals = -1) {
  if (seq.size() < 3) throw std::invalid_argument("reconstruct_L: need at least three states");
  if (n_intervals < 0) n_intervals = seq.size() - 2;
  if (n_intervals > seq.size() - 2) throw std::out_of_range("reconstruct_L: stencil exceeds stored states");
  TimeReconstruction r{ReconstructionKind::quartic_L, PiecewisePolynomial(grid, 5)};
  const double t = grid.tau;
  for (long n = 0; n < n_intervals; ++n) {
    const Vector& p2 = seq[n + 2];
    const Vector& p1 = seq[n + 1];
    const Vector& c = seq[n];
    const Vector& m1 = seq[n - 1];
    const Vector& m2 = seq[n - 2];
    r.poly.push_interval({(3.0 * p1 + 17.0 * c + 5.0 * m1 - m2) / 24.0,
                          (5.0 * p1 + 3.0 * c - 9.0 * m1 + m2) / (12.0 * t),
                          (p1 - 2.0 * c + m1) / (t * t),
                          (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * t * t * t),
                          (p2 - 4.0 * p1 + 6.0 * c - 4.0 * m1 + m2) / (t * t * t * t)});
  }
  return r;
}

/// delta = R(V) - L(V) on the intervals where both exist; degree 4, and its
/// time derivative via evaluate(t, 1).
inline PiecewisePolynomial delta(const TimeReconstruction& recon_u, const TimeReconstruction& recon_w) {
  const long n = std::min(recon_u.intervals(), recon_w.intervals());
  PiecewisePolynomial d(recon_u.poly.grid(), 5);
  for (long i = 0; i < n; ++i) {
    const auto& cu = recon_u.poly.coefficients(i);
    const auto& cw = recon_w.poly.coefficients(i);
    std::vector<Vector> c(5);
    for (int p = 0; p < 5; ++p) c[p] = (p < static_cast<int>(cu.size()) ? cu[p] : Vector::Zero(cw[p].size())) - cw[p];
    d.push_interval(std::move(c));
  }
  return d;
}

inline PiecewisePolynomial delta(const StateSequence& seq, const TimeGrid& grid) {
  return delta(reconstruct_R(seq, grid), reconstruct_L(seq, grid));
}

/// f_tau(t, x) = R applied pointwise in x to F^n(x) = f(t^n, x), with
/// F^n = 0 for n <= 0.
class SourceReconstruction {
 public:
  using Function = std::function<double(double, double)>;

  SourceReconstruction(Function f, TimeGrid grid) : f_(std::move(f)), grid_(grid) {}

  const TimeGrid& grid() const { return grid_; }
  double sample(long n, double x) const { return n <= 0 ? 0.0 : f_(grid_.t(n), x); }

  /// Lagrange weights of F^{n-1}, F^n, F^{n+1} at t = t^n + xi*tau.
  static std::array<double, 3> weights(double xi) {
    return {0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)};
  }

  long interval_of(double t) const {
    if (!(t >= 0.0)) throw std::domain_error("f_tau: negative time");
    return static_cast<long>(std::floor(t / grid_.tau));
  }

  double operator()(double t, double x) const {
    const long n = interval_of(t);
    const auto w = weights(t / grid_.tau - n);
    return w[0] * sample(n - 1, x) + w[1] * sample(n, x) + w[2] * sample(n + 1, x);
  }

  double exact(double t, double x) const { return f_(t, x); }

  /// Load vector of f_tau(t) = R applied to the nodal load vectors.
  Vector load(const SpatialRule& sr, double t) const {
    const long n = interval_of(t);
    const auto w = weights(t / grid_.tau - n);
    Vector b = Vector::Zero(sr.space().dofs());
    for (int j = 0; j < 3; ++j) {
      const long m = n - 1 + j;
      if (m <= 0 || w[j] == 0.0) continue;
      const double tm = grid_.t(m);
      b += w[j] * load_vector(sr, [&](double x) { return f_(tm, x); });
    }
    return b;
  }

 private:
  Function f_;
  TimeGrid grid_;
};

/// Max over intervals and 5 Gauss points of |L''(V) - R(D^2 V)| / (1 + |R(D^2 V)|).
inline double verify_commuting(const StateSequence& seq, const TimeGrid& grid) {
  const TimeReconstruction L = reconstruct_L(seq, grid);
  StateSequence acc(seq.dofs());
  for (long n = 0; n + 1 < seq.size(); ++n)
    acc.push_back((seq[n + 1] - 2.0 * seq[n] + seq[n - 1]) / (grid.tau * grid.tau));
  const TimeReconstruction RA = reconstruct_R(acc, grid, L.intervals());
  const QuadratureRule g = gauss_legendre(5);
  double worst = 0.0;
  for (long n = 0; n < L.intervals(); ++n)
    for (double xi : g.points) {
      const double s = xi * grid.tau;
      const Vector ra = RA.evaluate_on(n, s);
      const double dev = (L.evaluate_on(n, s, 2) - ra).norm() / (1.0 + ra.norm());
      worst = std::max(worst, dev);
    }
  return worst;
}

/// Max over intervals and 5 Gauss points of |M w'' + K u - F_tau| / (1 + |F_tau|).
inline double verify_reconstructed_equation(const StateSequence& seq, const TimeGrid& grid,
                                            const DiscreteOperators& ops, const SpatialRule& sr,
                                            const SourceReconstruction& f_tau) {
  const TimeReconstruction L = reconstruct_L(seq, grid);
  const TimeReconstruction R = reconstruct_R(seq, grid);
  const QuadratureRule g = gauss_legendre(5);
  double worst = 0.0;
  for (long n = 0; n < L.intervals(); ++n)
    for (double xi : g.points) {
      const double s = xi * grid.tau;
      const Vector F = f_tau.load(sr, grid.t(n) + s);
      const Vector r = ops.mass * L.evaluate_on(n, s, 2) + ops.stiffness * R.evaluate_on(n, s) - F;
      worst = std::max(worst, r.norm() / (1.0 + F.norm()));
    }
  return worst;
}

}  // namespace wavefem
