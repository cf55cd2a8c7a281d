#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cfl.hpp"

namespace wavefem {

/// C_X(theta) = (169/12) theta / ((13 - 6 theta)(1 - exp(-theta))).
inline double stability_constant_x(double theta) {
  if (!(theta > 0.0) || theta > 1.0) throw std::invalid_argument("stability constant: need theta in (0,1]");
  return 169.0 / 12.0 / (13.0 - 6.0 * theta) * theta / -std::expm1(-theta);
}

inline double stability_constant_a(double theta) {
  return 2.0 / 3.0 * stability_constant_x(theta) * (1.0 + std::exp(2.0 * theta));
}

inline double stability_constant_b(double theta) {
  return 11.0 / 20.0 * stability_constant_x(theta) * (2.0 + std::exp(2.0 * theta));
}

struct StabilityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
};

/// Damped stability of the generic scheme X^{-1} = X^0 = 0 with loads G^n, n >= 0.
/// loads[n] holds the load vector b^n = (G^n, phi_i); ||G^n|| is taken as
/// ||Pi G^n|| = sqrt(b^T M^{-1} b).  Sums run over n = 0..N-1 (N+1 states).
inline StabilityCheck check_damped_stability(const DiscreteOperators& ops, const StateSequence& seq,
                                             const TimeGrid& grid, double rho, const std::vector<Vector>& loads,
                                             double mu0) {
  const double theta = rho * grid.tau;
  if (!(theta > 0.0) || theta > 1.0) throw std::invalid_argument("check_damped_stability: need rho*tau in (0,1]");
  const DiscreteEnergyTrace tr = discrete_energy_trace(ops, seq, grid);
  StabilityCheck out;
  double gsum = 0.0;
  for (long n = 0; n < static_cast<long>(tr.energy.size()); ++n) {
    const double w = grid.tau * std::exp(-2.0 * rho * grid.t(n));
    out.lhs += w * tr.energy[n];
    if (n < static_cast<long>(loads.size())) gsum += w * loads[n].dot(ops.mass_factor.solve(loads[n]));
  }
  out.rhs = stability_constant_x(theta) / mu0 / (rho * rho) * gsum;
  out.satisfied = out.lhs <= out.rhs * (1.0 + 1e-9);
  return out;
}

}  // namespace wavefem
