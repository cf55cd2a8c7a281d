#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "assembly.hpp"

namespace wavefem {

struct TimeGrid {
  double tau = 1.0;
  long n_steps = 0;

  TimeGrid() = default;
  TimeGrid(double tau_, long n_steps_) : tau(tau_), n_steps(n_steps_) {
    if (!(tau > 0.0)) throw std::invalid_argument("TimeGrid: tau must be positive");
    if (n_steps < 0) throw std::invalid_argument("TimeGrid: negative step count");
  }

  double t(long n) const { return static_cast<double>(n) * tau; }
  double t_star() const { return t(n_steps); }

  void check_damping(double rho) const {
    if (!(rho > 0.0)) throw std::invalid_argument("damping rate must be positive");
    if (rho * tau > 1.0) throw std::invalid_argument("need rho*tau <= 1");
  }
};

/// U^0..U^N; negative indices read as zero.
class StateSequence {
 public:
  StateSequence() = default;
  explicit StateSequence(int dofs) : zero_(Vector::Zero(dofs)) {}
  StateSequence(int dofs, std::vector<Vector> states) : states_(std::move(states)), zero_(Vector::Zero(dofs)) {}

  long size() const { return static_cast<long>(states_.size()); }
  int dofs() const { return static_cast<int>(zero_.size()); }

  const Vector& operator[](long n) const {
    if (n < 0) return zero_;
    if (n >= size()) throw std::out_of_range("state index " + std::to_string(n) + " beyond stored states");
    return states_[n];
  }

  void push_back(Vector v) {
    if (v.size() != zero_.size()) throw std::invalid_argument("StateSequence: size mismatch");
    states_.push_back(std::move(v));
  }

  const std::vector<Vector>& states() const { return states_; }

 private:
  std::vector<Vector> states_;
  Vector zero_;
};

class BlowUpError : public std::runtime_error {
 public:
  explicit BlowUpError(long step)
      : std::runtime_error("blow-up detected at step " + std::to_string(step)), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

/// M (U^{n+1} - 2U^n + U^{n-1}) / tau^2 + K U^n = G^n, one step at a time.
class LeapfrogStepper {
 public:
  LeapfrogStepper(const DiscreteOperators& ops, double tau)
      : ops_(&ops), tau_(tau), prev_(Vector::Zero(ops.mass.dimension())), cur_(prev_), work_(prev_) {}

  /// Start from given X^{n0-1}, X^{n0}.
  void reset(const Vector& previous, const Vector& current, long n0) {
    prev_ = previous;
    cur_ = current;
    n_ = n0;
  }

  long index() const { return n_; }
  const Vector& current() const { return cur_; }
  const Vector& previous() const { return prev_; }

  /// Advances with load G^n (pass nullptr for zero) and returns X^{n+1}.
  const Vector& step(const Vector* load) {
    ops_->stiffness.multiply(cur_.data(), work_.data());
    if (load) work_ = *load - work_;
    else work_ = -work_;
    ops_->mass_factor.solve_in_place(work_.data());
    const double t2 = tau_ * tau_;
    double check = 0.0;
    for (Eigen::Index i = 0; i < work_.size(); ++i) {
      const double next = 2.0 * cur_[i] - prev_[i] + t2 * work_[i];
      prev_[i] = next;  // prev_ now holds X^{n+1}, swapped below
      check += next;
    }
    prev_.swap(cur_);
    ++n_;
    if (!std::isfinite(check)) throw BlowUpError(n_);
    return cur_;
  }

 private:
  const DiscreteOperators* ops_;
  double tau_;
  Vector prev_, cur_, work_;
  long n_ = 1;
};

/// Driven scheme with U^0 = U^1 = 0.  load(n) returns F^n for n >= 1.
/// Produces U^0..U^{grid.n_steps}.
template <class LoadFn>
StateSequence run_leapfrog(const DiscreteOperators& ops, const TimeGrid& grid, LoadFn&& load) {
  const int n = ops.mass.dimension();
  StateSequence seq(n);
  seq.push_back(Vector::Zero(n));
  if (grid.n_steps >= 1) seq.push_back(Vector::Zero(n));
  LeapfrogStepper stepper(ops, grid.tau);
  stepper.reset(Vector::Zero(n), Vector::Zero(n), 1);
  for (long k = 1; k < grid.n_steps; ++k) {
    const Vector F = load(k);
    seq.push_back(stepper.step(&F));
  }
  return seq;
}

template <class LoadFn>
StateSequence run_leapfrog(const LagrangeSpace& space, const TimeGrid& grid, LoadFn&& load) {
  DiscreteOperators ops(space);
  return run_leapfrog(ops, grid, std::forward<LoadFn>(load));
}

/// Generic scheme with X^{-1} = X^0 = 0 and loads G^n for n >= 0,
/// so X^1 = tau^2 M^{-1} G^0.  Produces X^0..X^{grid.n_steps}.
template <class LoadFn>
StateSequence run_generic_leapfrog(const DiscreteOperators& ops, const TimeGrid& grid, LoadFn&& load) {
  const int n = ops.mass.dimension();
  StateSequence seq(n);
  seq.push_back(Vector::Zero(n));
  LeapfrogStepper stepper(ops, grid.tau);
  stepper.reset(Vector::Zero(n), Vector::Zero(n), 0);
  for (long k = 0; k < grid.n_steps; ++k) {
    const Vector G = load(k);
    seq.push_back(stepper.step(&G));
  }
  return seq;
}

/// m(v,w) = (v,w) - (tau^2/4)(v',w').  The quarter makes the leapfrog energy
/// identity exact; coercive iff tau^2 lambda_max < 4.
inline double mht_form(const DiscreteOperators& ops, double tau, const Vector& v, const Vector& w) {
  return v.dot(ops.mass * w) - 0.25 * tau * tau * v.dot(ops.stiffness * w);
}

struct DiscreteEnergyTrace {
  std::vector<double> energy;  // E^{n+1/2}, n = 0..N-1
};

/// E^{n+1/2} = m(Xdot, Xdot) + ||(X^{n+1} + X^n)'/2||^2 for n = 0..N-1 (N+1 states).
inline DiscreteEnergyTrace discrete_energy_trace(const DiscreteOperators& ops, const StateSequence& seq,
                                                 const TimeGrid& grid) {
  DiscreteEnergyTrace tr;
  for (long n = 0; n + 1 < seq.size(); ++n) {
    const Vector vdot = (seq[n + 1] - seq[n]) / grid.tau;
    const Vector mid = 0.5 * (seq[n + 1] + seq[n]);
    tr.energy.push_back(mht_form(ops, grid.tau, vdot, vdot) + ops.stiffness.quadratic_form(mid));
  }
  return tr;
}

/// A^n = D^2 X^n, B^n = (X^{n+1} - 3X^n + 3X^{n-1} - X^{n-2})/tau^3 and
/// their half-step means and differences.
struct DifferenceSequences {
  std::vector<Vector> A;         // n = 0..N-1
  std::vector<Vector> B;         // n = 0..N-1
  std::vector<Vector> A_half;    // (A^{n+1} + A^n)/2, n = 0..N-2
  std::vector<Vector> A_dot;     // (A^{n+1} - A^n)/tau
  std::vector<Vector> B_half;
  std::vector<Vector> B_dot;
};

inline DifferenceSequences difference_sequences(const StateSequence& seq, const TimeGrid& grid) {
  DifferenceSequences d;
  const double t = grid.tau;
  const long N = seq.size() - 1;
  for (long n = 0; n < N; ++n) {
    d.A.push_back((seq[n + 1] - 2.0 * seq[n] + seq[n - 1]) / (t * t));
    d.B.push_back((seq[n + 1] - 3.0 * seq[n] + 3.0 * seq[n - 1] - seq[n - 2]) / (t * t * t));
  }
  for (long n = 0; n + 1 < N; ++n) {
    d.A_half.push_back(0.5 * (d.A[n + 1] + d.A[n]));
    d.A_dot.push_back((d.A[n + 1] - d.A[n]) / t);
    d.B_half.push_back(0.5 * (d.B[n + 1] + d.B[n]));
    d.B_dot.push_back((d.B[n + 1] - d.B[n]) / t);
  }
  return d;
}

}  // namespace wavefem
