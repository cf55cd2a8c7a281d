#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "special.hpp"

namespace wavefem {

struct ExactValue {
  double u = 0.0;
  double ut = 0.0;
  double ux = 0.0;
};

enum class BenchmarkKind { standing, propagating };

inline BenchmarkKind parse_benchmark(const std::string& s) {
  if (s == "standing") return BenchmarkKind::standing;
  if (s == "propagating") return BenchmarkKind::propagating;
  throw std::invalid_argument("unknown benchmark '" + s + "'");
}

inline std::string to_string(BenchmarkKind k) { return k == BenchmarkKind::standing ? "standing" : "propagating"; }

/// Manufactured solutions on (-L, L): a standing mode driven by a Gaussian
/// pulse in time, and a pulse localized in space and time.  Both forcings
/// factor as f(t,x) = g(t - t0) p(x) with g(T) = -2T exp(-T^2).
struct BenchmarkCase {
  BenchmarkKind kind = BenchmarkKind::standing;
  double L = 10.0;
  double t0 = 4.0;
  int m = 5;
  int mirror_terms = 50;

  BenchmarkCase() = default;
  explicit BenchmarkCase(BenchmarkKind k) : kind(k) {}

  double a() const { return m * std::numbers::pi / (2.0 * L); }

  // ---- forcing

  /// d^order/dt^order of g(t - t0), via Hermite polynomials.
  double forcing_time(double t, int order = 0) const {
    const double T = t - t0;
    // g^(m) = (-1)^(m+1) H_{m+1}(T) exp(-T^2)
    double hm1 = 1.0, h = 2.0 * T;
    for (int n = 1; n <= order; ++n) {
      const double hn = 2.0 * T * h - 2.0 * n * hm1;
      hm1 = h;
      h = hn;
    }
    const double sign = (order % 2 == 0) ? -1.0 : 1.0;
    return sign * h * std::exp(-T * T);
  }

  double forcing_space(double x) const {
    return kind == BenchmarkKind::standing ? std::sin(a() * (x - L)) : std::exp(-x * x);
  }

  double forcing(double t, double x) const { return forcing_time(t) * forcing_space(x); }

  // ---- standing wave: u = Re psi(t - t0) sin(a(x - L))

  /// psi(T) = exp(-a^2/4 + iaT) * integral_{-inf}^{T + ia/2} exp(-z^2) dz,
  /// evaluated with w in the upper half-plane only.  Solves psi'' + a^2 psi = g.
  static complex psi(double a, double T) {
    const double sp = std::sqrt(std::numbers::pi);
    if (T < 0.0) return 0.5 * sp * std::exp(-T * T) * faddeeva_w(complex(0.5 * a, -T));
    const complex osc = sp * std::exp(-0.25 * a * a) * std::exp(complex(0.0, a * T));
    if (T * T > 745.0) return osc;
    return osc - 0.5 * sp * std::exp(-T * T) * faddeeva_w(complex(-0.5 * a, T));
  }

  static complex psi_dot(double a, double T) { return complex(0.0, a) * psi(a, T) + std::exp(-T * T); }

  complex psi(double T) const { return psi(a(), T); }
  complex psi_dot(double T) const { return psi_dot(a(), T); }

  /// Separable form of the standing solution: u = amplitude(t) * mode(x).
  double amplitude(double t) const { return psi(t - t0).real(); }
  double amplitude_dot(double t) const { return psi_dot(t - t0).real(); }
  double mode(double x) const { return std::sin(a() * (x - L)); }
  double mode_dx(double x) const { return a() * std::cos(a() * (x - L)); }

  // ---- propagating wave: mirror sum of the free-space solution

  /// integral_{-inf}^{s} exp(-r^2/2) dr
  static double gauss_cdf_scaled(double s) {
    return std::sqrt(0.5 * std::numbers::pi) * std::erfc(-s / std::numbers::sqrt2);
  }

  /// g(s) = exp(s^2/2) integral_{-inf}^{s} exp(-r^2/2) dr, which satisfies g' = s g + 1.
  static double g_aux(double s) {
    const double c = std::sqrt(0.5 * std::numbers::pi);
    if (s < 0.0) {
      const double y = -s / std::numbers::sqrt2;  // exp(y^2) erfc(y) = w(iy)
      return c * faddeeva_w(complex(0.0, y)).real();
    }
    return std::exp(0.5 * s * s) * gauss_cdf_scaled(s);
  }

  /// Free-space solution with T = t - t0:
  /// 1/4 [exp(-(T-x)^2/2) G(T+x) + exp(-(T+x)^2/2) G(T-x)], G = gauss_cdf_scaled.
  static ExactValue free_space(double T, double x) {
    ExactValue r;
    for (int s = -1; s <= 1; s += 2) {
      const double dm = T - s * x;  // exponent argument
      const double e = std::exp(-0.5 * dm * dm);
      if (e == 0.0) continue;
      const double G = gauss_cdf_scaled(T + s * x);
      const double cross = std::exp(-T * T - x * x);
      r.u += 0.25 * e * G;
      r.ut += 0.25 * (-dm * e * G + cross);
      r.ux += 0.25 * s * (dm * e * G + cross);
    }
    return r;
  }

  ExactValue propagating_solution(double t, double x) const {
    const double T = t - t0;
    ExactValue r = free_space(T, x);
    for (int n = 1; n <= mirror_terms; ++n) {
      const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
      for (int side = -1; side <= 1; side += 2) {
        const ExactValue im = free_space(T, side * 2.0 * n * L + sgn * x);
        r.u += sgn * im.u;
        r.ut += sgn * im.ut;
        r.ux += im.ux;  // sgn from the image and sgn from the chain rule
      }
    }
    return r;
  }

  /// Sine-series form of the propagating solution on (-L, L):
  /// u = sum_j weight_j Re psi(omega_j, t - t0) sin(omega_j (x + L)), odd j only,
  /// omega_j = j pi / (2L), weight_j = sqrt(pi)/L sin(omega_j L) exp(-omega_j^2/4).
  /// Agrees with the mirror sum on the domain; terms beyond the last are below 1e-16.
  struct Mode {
    double omega;
    double weight;
  };

  std::vector<Mode> propagating_modes(int count = 40) const {
    std::vector<Mode> modes;
    for (int i = 0; i < count; ++i) {
      const int j = 2 * i + 1;
      const double w = j * std::numbers::pi / (2.0 * L);
      modes.push_back({w, std::sqrt(std::numbers::pi) / L * std::sin(w * L) * std::exp(-0.25 * w * w)});
    }
    return modes;
  }

  ExactValue modal_solution(double t, double x, int count = 40) const {
    ExactValue r;
    for (const Mode& md : propagating_modes(count)) {
      const complex p = psi(md.omega, t - t0);
      const complex pd = psi_dot(md.omega, t - t0);
      const double s = std::sin(md.omega * (x + L)), c = std::cos(md.omega * (x + L));
      r.u += md.weight * p.real() * s;
      r.ut += md.weight * pd.real() * s;
      r.ux += md.weight * p.real() * md.omega * c;
    }
    return r;
  }

  ExactValue standing_solution(double t, double x) const {
    const complex p = psi(t - t0);
    const complex pd = psi_dot(t - t0);
    return {p.real() * mode(x), pd.real() * mode(x), p.real() * mode_dx(x)};
  }

  ExactValue solution(double t, double x) const {
    return kind == BenchmarkKind::standing ? standing_solution(t, x) : propagating_solution(t, x);
  }

  bool separable_solution() const { return kind == BenchmarkKind::standing; }
};

}  // namespace wavefem
