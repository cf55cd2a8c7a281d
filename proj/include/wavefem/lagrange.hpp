#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "banded.hpp"

namespace wavefem {

struct UniformMesh1D {
  double left = 0.0;
  double right = 1.0;
  int n_cells = 1;
  double h = 1.0;

  UniformMesh1D() = default;
  UniformMesh1D(double left_, double right_, int n_cells_) : left(left_), right(right_), n_cells(n_cells_) {
    if (!(right > left)) throw std::invalid_argument("UniformMesh1D: need right > left");
    if (n_cells < 1) throw std::invalid_argument("UniformMesh1D: need at least one cell");
    h = (right - left) / n_cells;
  }

  double cell_left(int c) const { return left + c * h; }
  double length() const { return right - left; }

  /// Cell containing x; interfaces go to the left cell.
  int locate(double x) const {
    if (!(x >= left && x <= right)) throw std::domain_error("point outside the mesh");
    int c = static_cast<int>(std::ceil((x - left) / h)) - 1;
    if (c < 0) c = 0;
    if (c >= n_cells) c = n_cells - 1;
    return c;
  }
};

/// Lagrange basis of degree k on [0,1] with equispaced nodes j/k.
class ReferenceElement {
 public:
  explicit ReferenceElement(int degree) : k_(degree) {
    if (degree < 1 || degree > 3) throw std::invalid_argument("ReferenceElement: degree must be 1, 2 or 3");
  }

  int degree() const { return k_; }
  int n_local() const { return k_ + 1; }
  double node(int j) const { return static_cast<double>(j) / k_; }

  double value(int j, double xi) const {
    double v = 1.0;
    for (int m = 0; m <= k_; ++m)
      if (m != j) v *= (xi - node(m)) / (node(j) - node(m));
    return v;
  }

  /// d/dxi of basis j.
  double derivative(int j, double xi) const {
    double s = 0.0;
    for (int l = 0; l <= k_; ++l) {
      if (l == j) continue;
      double p = 1.0 / (node(j) - node(l));
      for (int m = 0; m <= k_; ++m)
        if (m != j && m != l) p *= (xi - node(m)) / (node(j) - node(m));
      s += p;
    }
    return s;
  }

 private:
  int k_;
};

/// Continuous P_k space with homogeneous Dirichlet conditions eliminated.
/// Global node g = c*k + l; dof = g-1 for interior nodes, -1 on the boundary.
class LagrangeSpace {
 public:
  LagrangeSpace(const UniformMesh1D& mesh, int degree) : mesh_(mesh), ref_(degree) {}

  const UniformMesh1D& mesh() const { return mesh_; }
  int degree() const { return ref_.degree(); }
  const ReferenceElement& reference() const { return ref_; }
  int n_nodes() const { return degree() * mesh_.n_cells + 1; }
  int dofs() const { return degree() * mesh_.n_cells - 1; }
  double node_coordinate(int g) const { return mesh_.left + g * mesh_.h / degree(); }

  int dof(int cell, int local) const {
    const int g = cell * degree() + local;
    if (g == 0 || g == n_nodes() - 1) return -1;
    return g - 1;
  }

  /// Nodal interpolant of a function (boundary values dropped).
  template <class F>
  Vector interpolate(F&& f) const {
    Vector c(dofs());
    for (int i = 0; i < dofs(); ++i) c[i] = f(node_coordinate(i + 1));
    return c;
  }

  double evaluate(const Vector& coeffs, double x, int deriv = 0) const {
    if (coeffs.size() != dofs()) throw std::invalid_argument("evaluate: coefficient size mismatch");
    if (deriv < 0 || deriv > 1) throw std::invalid_argument("evaluate: deriv must be 0 or 1");
    const int c = mesh_.locate(x);
    const double xi = (x - mesh_.cell_left(c)) / mesh_.h;
    double s = 0.0;
    for (int l = 0; l <= degree(); ++l) {
      const int d = dof(c, l);
      if (d < 0) continue;
      s += coeffs[d] * (deriv == 0 ? ref_.value(l, xi) : ref_.derivative(l, xi) / mesh_.h);
    }
    return s;
  }

 private:
  UniformMesh1D mesh_;
  ReferenceElement ref_;
};

}  // namespace wavefem
