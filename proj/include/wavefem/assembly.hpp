#pragma once

#include <cmath>
#include <vector>

#include "banded.hpp"
#include "lagrange.hpp"
#include "quadrature.hpp"

namespace wavefem {

/// Composite Gauss rule on a space's mesh with tabulated shape functions.
/// Point (c, q) sits at x = cell_left(c) + h*xi_q with weight h*w_q.
class SpatialRule {
 public:
  SpatialRule(const LagrangeSpace& space, int points_per_cell)
      : space_(&space), rule_(gauss_legendre(points_per_cell)) {
    const int nl = space.degree() + 1;
    const int nq = rule_.size();
    phi_.resize(static_cast<size_t>(nq) * nl);
    dphi_.resize(static_cast<size_t>(nq) * nl);
    for (int q = 0; q < nq; ++q)
      for (int l = 0; l < nl; ++l) {
        phi_[q * nl + l] = space.reference().value(l, rule_.points[q]);
        dphi_[q * nl + l] = space.reference().derivative(l, rule_.points[q]) / space.mesh().h;
      }
  }

  const LagrangeSpace& space() const { return *space_; }
  const QuadratureRule& rule() const { return rule_; }
  int points_per_cell() const { return rule_.size(); }
  int n_cells() const { return space_->mesh().n_cells; }
  int size() const { return n_cells() * points_per_cell(); }

  double x(int c, int q) const { return space_->mesh().cell_left(c) + space_->mesh().h * rule_.points[q]; }
  double weight(int q) const { return space_->mesh().h * rule_.weights[q]; }
  double phi(int q, int l) const { return phi_[q * (space_->degree() + 1) + l]; }
  double dphi(int q, int l) const { return dphi_[q * (space_->degree() + 1) + l]; }

  /// Values (deriv 0) or derivatives (deriv 1) of an FE function at all points, cell-major.
  void evaluate(const Vector& coeffs, int deriv, std::vector<double>& out) const {
    const int k = space_->degree();
    const int nq = points_per_cell();
    out.assign(static_cast<size_t>(size()), 0.0);
    const auto& tab = deriv == 0 ? phi_ : dphi_;
    for (int c = 0; c < n_cells(); ++c) {
      double loc[4] = {0.0, 0.0, 0.0, 0.0};
      for (int l = 0; l <= k; ++l) {
        const int d = space_->dof(c, l);
        loc[l] = d < 0 ? 0.0 : coeffs[d];
      }
      for (int q = 0; q < nq; ++q) {
        double s = 0.0;
        for (int l = 0; l <= k; ++l) s += loc[l] * tab[q * (k + 1) + l];
        out[static_cast<size_t>(c) * nq + q] = s;
      }
    }
  }

  /// Sum over points of weight * values[i].
  double integrate(const std::vector<double>& values) const {
    const int nq = points_per_cell();
    double s = 0.0;
    for (int c = 0; c < n_cells(); ++c)
      for (int q = 0; q < nq; ++q) s += weight(q) * values[static_cast<size_t>(c) * nq + q];
    return s;
  }

 private:
  const LagrangeSpace* space_;
  QuadratureRule rule_;
  std::vector<double> phi_, dphi_;
};

namespace detail {

inline BandedSymmetricOperator assemble(const LagrangeSpace& space, int deriv) {
  const int k = space.degree();
  SpatialRule sr(space, k + 1);
  BandedSymmetricOperator A(space.dofs(), k);
  for (int c = 0; c < space.mesh().n_cells; ++c)
    for (int a = 0; a <= k; ++a) {
      const int ia = space.dof(c, a);
      if (ia < 0) continue;
      for (int b = 0; b <= a; ++b) {
        const int ib = space.dof(c, b);
        if (ib < 0) continue;
        double s = 0.0;
        for (int q = 0; q < sr.points_per_cell(); ++q)
          s += sr.weight(q) * (deriv == 0 ? sr.phi(q, a) * sr.phi(q, b) : sr.dphi(q, a) * sr.dphi(q, b));
        A.add(ia, ib, s);
      }
    }
  return A;
}

}  // namespace detail

inline BandedSymmetricOperator assemble_mass(const LagrangeSpace& space) { return detail::assemble(space, 0); }
inline BandedSymmetricOperator assemble_stiffness(const LagrangeSpace& space) { return detail::assemble(space, 1); }

/// Load vector b_i = (f, phi_i) or, with deriv = 1, b_i = (f, phi_i').
template <class F>
Vector load_vector(const SpatialRule& sr, F&& f, int deriv = 0) {
  const LagrangeSpace& space = sr.space();
  const int k = space.degree();
  Vector b = Vector::Zero(space.dofs());
  for (int c = 0; c < sr.n_cells(); ++c)
    for (int q = 0; q < sr.points_per_cell(); ++q) {
      const double fw = f(sr.x(c, q)) * sr.weight(q);
      for (int l = 0; l <= k; ++l) {
        const int d = space.dof(c, l);
        if (d >= 0) b[d] += fw * (deriv == 0 ? sr.phi(q, l) : sr.dphi(q, l));
      }
    }
  return b;
}

template <class F>
Vector load_vector(const LagrangeSpace& space, F&& f) {
  return load_vector(SpatialRule(space, space.degree() + 6), std::forward<F>(f));
}

enum class Norm { L2, H1semi };

/// ||v_h|| or ||v_h'|| by a Gauss rule exact for degree 2k.
inline double spatial_norms(const LagrangeSpace& space, const Vector& coeffs, Norm which) {
  SpatialRule sr(space, space.degree() + 1);
  std::vector<double> v;
  sr.evaluate(coeffs, which == Norm::L2 ? 0 : 1, v);
  for (auto& x : v) x *= x;
  return std::sqrt(sr.integrate(v));
}

/// The two operators of the semi-discrete system with a cached mass factorization.
struct DiscreteOperators {
  BandedSymmetricOperator mass;
  BandedSymmetricOperator stiffness;
  BandedCholesky mass_factor;

  explicit DiscreteOperators(const LagrangeSpace& space)
      : mass(assemble_mass(space)), stiffness(assemble_stiffness(space)), mass_factor(mass) {}
};

}  // namespace wavefem
