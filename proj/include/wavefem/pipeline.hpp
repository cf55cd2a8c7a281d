#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "damped.hpp"
#include "estimator.hpp"

namespace wavefem {

/// f(t, x) = time(t) * space(x).
struct SeparableSource {
  std::function<double(double)> time;
  std::function<double(double)> space;
};

/// u(t, x) = sum_j a_j(t) phi_j(x) with finitely many modes.
struct ModalExact {
  int modes = 0;
  /// Fills a[0..modes) and adot[0..modes) at time t.
  std::function<void(double, double*, double*)> amplitudes;
  std::function<double(int, double)> mode;
  std::function<double(int, double)> mode_dx;
};

/// Single mode u(t, x) = amplitude(t) * mode(x).
inline ModalExact separable_exact(std::function<double(double)> amplitude, std::function<double(double)> amplitude_dot,
                                  std::function<double(double)> mode, std::function<double(double)> mode_dx) {
  ModalExact m;
  m.modes = 1;
  m.amplitudes = [a = std::move(amplitude), ad = std::move(amplitude_dot)](double t, double* v, double* d) {
    v[0] = a(t);
    d[0] = ad(t);
  };
  m.mode = [f = std::move(mode)](int, double x) { return f(x); };
  m.mode_dx = [f = std::move(mode_dx)](int, double x) { return f(x); };
  return m;
}

using ExactModel = std::variant<std::monostate, ModalExact, ExactFunction>;

namespace detail {

/// Weights c_j on V^0..V^{W-1} with vanishing sum, rewritten on first
/// differences: sum_j c_j V^j = sum_i e_i (V^{i+1} - V^i).
template <size_t W>
std::array<double, W - 1> to_differences(const std::array<double, W>& c) {
  std::array<double, W - 1> e{};
  double run = 0.0;
  for (size_t i = 0; i + 1 < W; ++i) {
    run += c[i];
    e[i] = -run;
  }
  return e;
}

/// Legendre polynomial of degree j on [0,1] (P_j(2 xi - 1)).
inline double legendre01(int j, double xi) {
  const double x = 2.0 * xi - 1.0;
  double p0 = 1.0, p1 = x;
  if (j == 0) return 1.0;
  for (int n = 2; n <= j; ++n) {
    const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

/// Gram matrix of the last W items pushed under a fixed inner product, plus
/// the inner products of each item with a few fixed vectors.
template <int W>
class SlidingGram {
 public:
  void resize(int n, int n_shift = 0) {
    for (auto& v : vec_) v = Vector::Zero(n);
    for (auto& v : img_) v = Vector::Zero(n);
    for (auto& v : h_) v = Vector::Zero(n_shift);
  }
  static int slot(long id) { return static_cast<int>(((id % W) + W) % W); }
  Vector& vec(long id) { return vec_[slot(id)]; }
  Vector& img(long id) { return img_[slot(id)]; }

  /// Records dots of item id with itself and the W-1 previous items, and
  /// shift^T vec when shift is given (columns are the fixed vectors).
  void commit(long id, bool identity_image, const Eigen::MatrixXd* shift = nullptr) {
    const int s = slot(id);
    const Vector& im = identity_image ? vec_[s] : img_[s];
    for (long o = id - W + 1; o <= id; ++o) {
      const int so = slot(o);
      G_[s][so] = G_[so][s] = im.dot(vec_[so]);
    }
    if (shift) h_[s].noalias() = shift->transpose() * vec_[s];
  }

  double gram(long a, long b) const { return G_[slot(a)][slot(b)]; }
  const Vector& shift(long a) const { return h_[slot(a)]; }

 private:
  std::array<Vector, W> vec_, img_, h_;
  double G_[W][W] = {};
};

}  // namespace detail

/// Accumulated squared integrals and sums of a run.
struct StreamingTotals {
  ErrorMeasures errors;
  double R = 0.0, M = 0.0, eta_f = 0.0;
};

/// Consumes V^0, V^1, ... one at a time and accumulates every error measure
/// and estimator part over J_0..J_{N-1}.  Slab n is closed when V^{n+2}
/// arrives, so V^0..V^{N+1} must be pushed.
///
/// Spatial integrals use the (k+6)-point composite Gauss rule and time
/// integrals the 10-point damped rule, as in the direct routines.  Errors
/// against a modal exact solution split into the projection error of the
/// modes and an M- (or K-) norm of nodal error vectors; only Gram matrices
/// of the last few nodal vectors are kept, so the cost per step is a small
/// multiple of the number of dofs.
class StreamingEvaluator {
 public:
  StreamingEvaluator(const LagrangeSpace& space, const DiscreteOperators& ops, const TimeGrid& grid, double rho,
                     SeparableSource source, ExactModel exact)
      : space_(space), ops_(ops), grid_(grid), rho_(rho), src_(std::move(source)), exact_(std::move(exact)),
        sr_(space, space.degree() + 6), rule_(gauss_legendre(kDampedRulePoints)) {
    grid_.check_damping(rho);
    n_ = space.dofs();
    k_ = space.degree();
    nb_ = k_ + 2;
    nc_ = space.mesh().n_cells;
    build_weight_tables();
    build_broken_maps();
    build_source();
    if (auto* m = std::get_if<ModalExact>(&exact_)) build_modal(*m);
    for (auto& v : V_) v = Vector::Zero(n_);
    for (auto& v : a_) v = Vector::Zero(J_);
    for (auto& v : adot_) v = Vector::Zero(J_);
    At_ = Vector::Zero(J_);
    Adt_ = Vector::Zero(J_);
    gD_.resize(n_, J_);
    gDd_.resize(n_, J_);
    gE_.resize(n_, J_);
    gT_.resize(n_);
    gR_.resize(nc_ * nb_);
    tmp_ = Vector::Zero(n_);
    acc_ = Vector::Zero(n_);
    // virtual states V^{-2}, V^{-1} = 0
    next_ = -2;
    push(Vector::Zero(n_));
    push(Vector::Zero(n_));
  }

  StreamingEvaluator(const StreamingEvaluator&) = delete;
  StreamingEvaluator& operator=(const StreamingEvaluator&) = delete;

  long next_index() const { return next_; }
  bool complete() const { return next_ >= grid_.n_steps + 2; }

  /// Feeds V^{next_index()}.
  void push(const Vector& v) {
    if (v.size() != n_) throw std::invalid_argument("StreamingEvaluator: state size mismatch");
    const long m = next_++;
    const int sm = slot5(m);
    V_[sm] = v;
    const double tm = grid_.t(m);
    gm_[sm] = m >= 1 ? src_.time(tm) : 0.0;

    if (modal_) {
      modal_->amplitudes(tm, a_[sm].data(), adot_[sm].data());
      // D^m = Pi u(t^m) - V^m, and its Ritz analogue
      gD_.vec(m).noalias() = pi_ * a_[sm];
      gD_.vec(m) -= v;
      ops_.mass.multiply(gD_.vec(m).data(), gD_.img(m).data());
      gD_.commit(m, false, &Mpi_);
      gE_.vec(m).noalias() = piE_ * a_[sm];
      gE_.vec(m) -= v;
      ops_.stiffness.multiply(gE_.vec(m).data(), gE_.img(m).data());
      gE_.commit(m, false, &KpiE_);
      gDd_.vec(m) = (gD_.vec(m) - gD_.vec(m - 1)) / grid_.tau;
      ops_.mass.multiply(gDd_.vec(m).data(), gDd_.img(m).data());
      gDd_.commit(m, false, &Mpi_);
    }
    // third difference ending at m (zero-extended history)
    gT_.vec(m) = v - 3.0 * V_[slot5(m - 1)] + 3.0 * V_[slot5(m - 2)] - V_[slot5(m - 3)];
    ops_.stiffness.multiply(gT_.vec(m).data(), gT_.img(m).data());
    gT_.commit(m, false);
    // acceleration A^{m-1} and the flux residual Y^{m-1}
    {
      const long j = m - 1;
      acc_ = (v - 2.0 * V_[slot5(m - 1)] + V_[slot5(m - 2)]) / (grid_.tau * grid_.tau);
      Vector& Y = gR_.vec(2 * j);
      Vector& dA = gR_.vec(2 * j + 1);
      broken_derivative(V_[slot5(j)], Y);
      broken_antiderivative(acc_, tmpb_);
      Y -= tmpb_;
      Y += gm_[slot5(j)] * zetaZ_;
      broken_derivative(acc_, dA);
      gR_.commit(2 * j, true);
      gR_.commit(2 * j + 1, true);
    }
    if (m >= 2 && m - 2 < grid_.n_steps) close_slab(m - 2);
  }

  StreamingTotals totals() const {
    StreamingTotals t;
    t.errors.e_U = std::sqrt(s_.eU);
    t.errors.ex_U = std::sqrt(s_.exU);
    t.errors.et_U = std::sqrt(s_.etU);
    t.errors.e_u = std::sqrt(s_.eu);
    t.errors.ex_u = std::sqrt(s_.exu);
    t.errors.et_u = std::sqrt(s_.etu);
    t.errors.e_w = std::sqrt(s_.ew);
    t.errors.ex_w = std::sqrt(s_.exw);
    t.errors.et_w = std::sqrt(s_.etw);
    t.R = std::sqrt(s_.R);
    t.M = std::sqrt(s_.M) / rho_;
    t.eta_f = std::sqrt(s_.eta);
    return t;
  }

  bool has_exact() const { return !std::holds_alternative<std::monostate>(exact_); }

 private:
  struct Sums {
    double eU = 0, exU = 0, etU = 0, eu = 0, exu = 0, etu = 0, ew = 0, exw = 0, etw = 0, R = 0, M = 0, eta = 0;
  };

  // per Gauss point weight tables; windows start at V^{n-2}
  struct PointWeights {
    std::array<double, 5> Lv{}, Rv{};
    std::array<double, 4> Ld{}, Rd{};  // rates on (V^{i+1} - V^i)/tau
    std::array<double, 3> lam{};       // delta on second differences
    std::array<double, 2> kap{};       // tau * delta' on third differences
    std::array<double, 3> ell{};       // R weights on n-1, n, n+1
  };

  static int slot5(long m) { return static_cast<int>(((m % 5) + 5) % 5); }

  void build_weight_tables() {
    // L(V) = sum_p q_p xi^p with q_p = sum_j Q[p][j] V^{n-2+j}
    static const double Q[5][5] = {{-1 / 24.0, 5 / 24.0, 17 / 24.0, 3 / 24.0, 0.0},
                                   {1 / 12.0, -9 / 12.0, 3 / 12.0, 5 / 12.0, 0.0},
                                   {0.0, 0.5, -1.0, 0.5, 0.0},
                                   {-1 / 12.0, 2 / 12.0, 0.0, -2 / 12.0, 1 / 12.0},
                                   {1 / 24.0, -4 / 24.0, 6 / 24.0, -4 / 24.0, 1 / 24.0}};
    pw_.resize(rule_.size());
    for (int q = 0; q < rule_.size(); ++q) {
      const double xi = rule_.points[q];
      PointWeights& w = pw_[q];
      std::array<double, 5> dL{}, dR{};
      for (int j = 0; j < 5; ++j) {
        double v = 0.0, d = 0.0, xp = 1.0;
        for (int p = 0; p < 5; ++p) {
          v += Q[p][j] * xp;
          if (p + 1 < 5) d += (p + 1) * Q[p + 1][j] * xp;
          xp *= xi;
        }
        w.Lv[j] = v;
        dL[j] = d;
      }
      w.ell = SourceReconstruction::weights(xi);
      w.Rv = {0.0, w.ell[0], w.ell[1], w.ell[2], 0.0};
      dR = {0.0, xi - 0.5, -2.0 * xi, xi + 0.5, 0.0};
      w.Ld = detail::to_differences<5>(dL);
      w.Rd = detail::to_differences<5>(dR);
      std::array<double, 5> dd{}, ddot{};
      for (int j = 0; j < 5; ++j) {
        dd[j] = w.Rv[j] - w.Lv[j];
        ddot[j] = dR[j] - dL[j];
      }
      w.lam = detail::to_differences<4>(detail::to_differences<5>(dd));
      w.kap = detail::to_differences<3>(detail::to_differences<4>(detail::to_differences<5>(ddot)));
    }
  }

  void build_broken_maps() {
    const double h = space_.mesh().h;
    const int nq = sr_.points_per_cell();
    const QuadratureRule inner = gauss_legendre(k_ + 1);
    psi_.assign(static_cast<size_t>(nq) * nb_, 0.0);
    for (int q = 0; q < nq; ++q)
      for (int j = 0; j < nb_; ++j)
        psi_[q * nb_ + j] = std::sqrt((2.0 * j + 1.0) / h) * detail::legendre01(j, sr_.rule().points[q]);
    Dmap_.assign(static_cast<size_t>(nb_) * (k_ + 1), 0.0);
    Imap_.assign(static_cast<size_t>(nb_) * (k_ + 1), 0.0);
    cellint_.assign(k_ + 1, 0.0);
    for (int l = 0; l <= k_; ++l)
      for (int q = 0; q < nq; ++q) {
        const double xi = sr_.rule().points[q];
        double anti = 0.0;  // h * int_0^xi phi_l
        for (int r = 0; r < inner.size(); ++r)
          anti += inner.weights[r] * xi * space_.reference().value(l, xi * inner.points[r]);
        anti *= h;
        cellint_[l] += sr_.weight(q) * sr_.phi(q, l);
        for (int j = 0; j < nb_; ++j) {
          Dmap_[j * (k_ + 1) + l] += sr_.weight(q) * sr_.dphi(q, l) * psi_[q * nb_ + j];
          Imap_[j * (k_ + 1) + l] += sr_.weight(q) * anti * psi_[q * nb_ + j];
        }
      }
    tmpb_ = Vector::Zero(nc_ * nb_);
  }

  void local_dofs(const Vector& v, int c, double* loc) const {
    for (int l = 0; l <= k_; ++l) {
      const int d = space_.dof(c, l);
      loc[l] = d < 0 ? 0.0 : v[d];
    }
  }

  /// Cellwise Legendre coefficients of d_x v.
  void broken_derivative(const Vector& v, Vector& out) const {
    out.resize(nc_ * nb_);
    double loc[4];
    for (int c = 0; c < nc_; ++c) {
      local_dofs(v, c, loc);
      for (int j = 0; j < nb_; ++j) {
        double s = 0.0;
        for (int l = 0; l <= k_; ++l) s += Dmap_[j * (k_ + 1) + l] * loc[l];
        out[c * nb_ + j] = s;
      }
    }
  }

  /// Cellwise Legendre coefficients of the zero-mean antiderivative of v
  /// anchored at the left end.
  void broken_antiderivative(const Vector& v, Vector& out) const {
    out.resize(nc_ * nb_);
    const double sh = std::sqrt(space_.mesh().h);
    double loc[4];
    double offset = 0.0, total = 0.0;
    for (int c = 0; c < nc_; ++c) {
      local_dofs(v, c, loc);
      for (int j = 0; j < nb_; ++j) {
        double s = 0.0;
        for (int l = 0; l <= k_; ++l) s += Imap_[j * (k_ + 1) + l] * loc[l];
        out[c * nb_ + j] = s;
      }
      double I = 0.0;
      for (int l = 0; l <= k_; ++l) I += cellint_[l] * loc[l];
      out[c * nb_] += offset * sh;
      total += out[c * nb_] * sh;
      offset += I;
    }
    const double mean = total / space_.mesh().length();
    for (int c = 0; c < nc_; ++c) out[c * nb_] -= mean * sh;
  }

  void build_source() {
    const int nq = sr_.points_per_cell();
    std::vector<double> pv(sr_.size());
    for (int c = 0; c < nc_; ++c)
      for (int q = 0; q < nq; ++q) {
        const double p = src_.space(sr_.x(c, q));
        pv[c * nq + q] = p * p;
      }
    p_norm2_ = sr_.integrate(pv);
    // zeta = S[p] at the quadrature points, its broken projection and remainder
    const auto zeta = sigma_flux(sr_, src_.space);
    zetaZ_ = Vector::Zero(nc_ * nb_);
    std::vector<double> zv(sr_.size());
    for (int c = 0; c < nc_; ++c)
      for (int q = 0; q < nq; ++q) {
        zv[c * nq + q] = zeta(sr_.x(c, q));
        for (int j = 0; j < nb_; ++j) zetaZ_[c * nb_ + j] += sr_.weight(q) * zv[c * nq + q] * psi_[q * nb_ + j];
      }
    zeta_perp2_ = 0.0;
    for (int c = 0; c < nc_; ++c)
      for (int q = 0; q < nq; ++q) {
        double z = zv[c * nq + q];
        for (int j = 0; j < nb_; ++j) z -= zetaZ_[c * nb_ + j] * psi_[q * nb_ + j];
        zeta_perp2_ += sr_.weight(q) * z * z;
      }
  }

  void build_modal(const ModalExact& m) {
    modal_ = &m;
    J_ = m.modes;
    if (J_ < 1) throw std::invalid_argument("StreamingEvaluator: modal exact solution without modes");
    const int nq = sr_.points_per_cell();
    pi_.resize(n_, J_);
    piE_.resize(n_, J_);
    const BandedCholesky kfac(ops_.stiffness);
    // projection remainders of the modes at the quadrature points
    Eigen::MatrixXd rem(sr_.size(), J_), remx(sr_.size(), J_);
    std::vector<double> pv, pvx;
    for (int j = 0; j < J_; ++j) {
      auto f = [&](double x) { return m.mode(j, x); };
      auto fx = [&](double x) { return m.mode_dx(j, x); };
      const Vector pj = ops_.mass_factor.solve(load_vector(sr_, f));
      const Vector pEj = kfac.solve(load_vector(sr_, fx, 1));
      pi_.col(j) = pj;
      piE_.col(j) = pEj;
      sr_.evaluate(pj, 0, pv);
      sr_.evaluate(pEj, 1, pvx);
      for (int c = 0; c < nc_; ++c)
        for (int q = 0; q < nq; ++q) {
          const double x = sr_.x(c, q);
          const double w = std::sqrt(sr_.weight(q));
          rem(c * nq + q, j) = w * (f(x) - pv[c * nq + q]);
          remx(c * nq + q, j) = w * (fx(x) - pvx[c * nq + q]);
        }
    }
    C_ = rem.transpose() * rem;
    Cx_ = remx.transpose() * remx;
    Mpi_.resize(n_, J_);
    KpiE_.resize(n_, J_);
    for (int j = 0; j < J_; ++j) {
      Mpi_.col(j) = ops_.mass * Vector(pi_.col(j));
      KpiE_.col(j) = ops_.stiffness * Vector(piE_.col(j));
    }
    P_ = pi_.transpose() * Mpi_;
    PE_ = piE_.transpose() * KpiE_;
  }

  template <size_t N>
  static double dot(const std::array<double, N>& a, const std::array<double, N>& b) {
    double s = 0.0;
    for (size_t i = 0; i < N; ++i) s += a[i] * b[i];
    return s;
  }

  static double qform(const Eigen::MatrixXd& A, const Vector& x) { return x.dot(A * x); }

  /// ||u(t) - sum_i c_i V^{j0+i}||^2 and the gradient analogue.
  void value_forms(const std::array<double, 5>& c, long j0, double& e, double& ex) {
    r_ = At_;
    for (int i = 0; i < 5; ++i)
      if (c[i] != 0.0) r_ -= c[i] * a_[slot5(j0 + i)];
    double qm = 0.0, qk = 0.0, hm = 0.0, hk = 0.0;
    for (int i = 0; i < 5; ++i) {
      if (c[i] == 0.0) continue;
      hm += c[i] * r_.dot(gD_.shift(j0 + i));
      hk += c[i] * r_.dot(gE_.shift(j0 + i));
      for (int j = 0; j < 5; ++j) {
        qm += c[i] * c[j] * gD_.gram(j0 + i, j0 + j);
        qk += c[i] * c[j] * gE_.gram(j0 + i, j0 + j);
      }
    }
    e = qform(C_, At_) + qm + 2.0 * hm + qform(P_, r_);
    ex = qform(Cx_, At_) + qk + 2.0 * hk + qform(PE_, r_);
  }

  /// ||u'(t) - sum_i c_i (V^{j0+i+1} - V^{j0+i})/tau||^2.
  double rate_form(const std::array<double, 4>& c, long j0) {
    r_ = Adt_;
    for (int i = 0; i < 4; ++i)
      if (c[i] != 0.0) r_ -= (c[i] / grid_.tau) * (a_[slot5(j0 + i + 1)] - a_[slot5(j0 + i)]);
    double qm = 0.0, hm = 0.0;
    // item id m of gDd_ holds (D^m - D^{m-1})/tau
    for (int i = 0; i < 4; ++i) {
      if (c[i] == 0.0) continue;
      hm += c[i] * r_.dot(gDd_.shift(j0 + i + 1));
      for (int j = 0; j < 4; ++j) qm += c[i] * c[j] * gDd_.gram(j0 + i + 1, j0 + j + 1);
    }
    return qform(C_, Adt_) + qm + 2.0 * hm + qform(P_, r_);
  }

  void close_slab(long n) {
    const double tau = grid_.tau;
    const long j0 = n - 2;
    std::array<double, 3> g{};
    for (int j = 0; j < 3; ++j) g[j] = gm_[slot5(n - 1 + j)];

    if (modal_) {
      const double wn = tau * std::exp(-2.0 * rho_ * grid_.t(n));
      const Vector& an = a_[slot5(n)];
      const Vector& adn = adot_[slot5(n)];
      s_.eU += wn * (qform(C_, an) + gD_.gram(n, n));
      s_.exU += wn * (qform(Cx_, an) + gE_.gram(n, n));
      r_ = adn - (a_[slot5(n + 1)] - a_[slot5(n - 1)]) / tau;
      const double qd = gDd_.gram(n, n) + 2.0 * gDd_.gram(n, n + 1) + gDd_.gram(n + 1, n + 1);
      const double hd = r_.dot(gDd_.shift(n) + gDd_.shift(n + 1));
      s_.etU += wn * (qform(C_, adn) + qd + 2.0 * hd + qform(P_, r_));
    } else if (auto* f = std::get_if<ExactFunction>(&exact_)) {
      nodal_pointwise(n, *f);
    }

    for (int q = 0; q < rule_.size(); ++q) {
      const PointWeights& w = pw_[q];
      const double t = grid_.t(n) + rule_.points[q] * tau;
      const double W = rule_.weights[q] * tau * std::exp(-2.0 * rho_ * t);

      // residual part: sum_m ell_m Y^m - d_x delta, plus the source remainder
      {
        const double c[6] = {w.ell[0], w.ell[1], w.ell[2], -tau * tau * w.lam[0], -tau * tau * w.lam[1],
                             -tau * tau * w.lam[2]};
        const long id0 = 2 * (n - 1);
        const long ids[6] = {id0, id0 + 2, id0 + 4, id0 + 1, id0 + 3, id0 + 5};
        double quad = 0.0;
        for (int i = 0; i < 6; ++i)
          for (int j = 0; j < 6; ++j) quad += c[i] * c[j] * gR_.gram(ids[i], ids[j]);
        const double gt = dot(w.ell, g);
        s_.R += W * (quad + gt * gt * zeta_perp2_);
        const double osc = src_.time(t) - gt;
        s_.eta += W * osc * osc * p_norm2_;
      }
      // time part: tau delta' = sum_i kap_i Delta^3_i
      {
        double quad = 0.0;
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) quad += w.kap[i] * w.kap[j] * gT_.gram(n + 1 + i, n + 1 + j);
        s_.M += W * quad / (tau * tau);
      }
      if (modal_) {
        modal_->amplitudes(t, At_.data(), Adt_.data());
        double e, ex;
        value_forms(w.Lv, j0, e, ex);
        s_.ew += W * e;
        s_.exw += W * ex;
        value_forms(w.Rv, j0, e, ex);
        s_.eu += W * e;
        s_.exu += W * ex;
        s_.etw += W * rate_form(w.Ld, j0);
        s_.etu += W * rate_form(w.Rd, j0);
      } else if (auto* f = std::get_if<ExactFunction>(&exact_)) {
        slab_point_pointwise(n, w, t, W, *f);
      }
    }
  }

  // ---- direct sampling for exact solutions given pointwise

  void combine(const std::array<double, 5>& c, long first, Vector& out) const {
    out.setZero();
    for (int i = 0; i < 5; ++i)
      if (c[i] != 0.0) out += c[i] * V_[slot5(first + i)];
  }

  void combine_rates(const std::array<double, 4>& c, long first, Vector& out) const {
    out.setZero();
    for (int i = 0; i < 4; ++i)
      if (c[i] != 0.0) out += (c[i] / grid_.tau) * (V_[slot5(first + i + 1)] - V_[slot5(first + i)]);
  }

  void sample_exact(const ExactFunction& f, double t) {
    const int nq = sr_.points_per_cell();
    ex_.resize(sr_.size());
    for (int c = 0; c < nc_; ++c)
      for (int q = 0; q < nq; ++q) ex_[c * nq + q] = f(t, sr_.x(c, q));
  }

  // which: 0 value, 1 space derivative, 2 time derivative
  double sq_error(const Vector& coeffs, int deriv, int which) {
    sr_.evaluate(coeffs, deriv, buf_);
    const int nq = sr_.points_per_cell();
    double s = 0.0;
    for (int c = 0; c < nc_; ++c)
      for (int q = 0; q < nq; ++q) {
        const ExactValue& e = ex_[c * nq + q];
        const double d = (which == 0 ? e.u : which == 1 ? e.ux : e.ut) - buf_[c * nq + q];
        s += sr_.weight(q) * d * d;
      }
    return s;
  }

  void nodal_pointwise(long n, const ExactFunction& f) {
    const double wn = grid_.tau * std::exp(-2.0 * rho_ * grid_.t(n));
    sample_exact(f, grid_.t(n));
    const Vector& U = V_[slot5(n)];
    s_.eU += wn * sq_error(U, 0, 0);
    s_.exU += wn * sq_error(U, 1, 1);
    tmp_ = (V_[slot5(n + 1)] - V_[slot5(n - 1)]) / grid_.tau;
    s_.etU += wn * sq_error(tmp_, 0, 2);
  }

  void slab_point_pointwise(long n, const PointWeights& w, double t, double W, const ExactFunction& f) {
    sample_exact(f, t);
    combine(w.Lv, n - 2, tmp_);
    s_.ew += W * sq_error(tmp_, 0, 0);
    s_.exw += W * sq_error(tmp_, 1, 1);
    combine(w.Rv, n - 2, tmp_);
    s_.eu += W * sq_error(tmp_, 0, 0);
    s_.exu += W * sq_error(tmp_, 1, 1);
    combine_rates(w.Ld, n - 2, tmp_);
    s_.etw += W * sq_error(tmp_, 0, 2);
    combine_rates(w.Rd, n - 2, tmp_);
    s_.etu += W * sq_error(tmp_, 0, 2);
  }

  const LagrangeSpace& space_;
  const DiscreteOperators& ops_;
  TimeGrid grid_;
  double rho_;
  SeparableSource src_;
  ExactModel exact_;
  SpatialRule sr_;
  QuadratureRule rule_;
  int n_ = 0, k_ = 0, nb_ = 0, nc_ = 0;
  long next_ = 0;

  std::vector<PointWeights> pw_;
  std::vector<double> psi_, Dmap_, Imap_, cellint_;
  Vector zetaZ_, tmpb_;
  double p_norm2_ = 0.0, zeta_perp2_ = 0.0;

  const ModalExact* modal_ = nullptr;
  int J_ = 0;
  Eigen::MatrixXd pi_, piE_, Mpi_, KpiE_, C_, Cx_, P_, PE_;
  Vector At_, Adt_, r_;

  std::array<Vector, 5> V_, a_, adot_;
  std::array<double, 5> gm_{};
  detail::SlidingGram<5> gD_, gE_, gDd_;
  detail::SlidingGram<2> gT_;
  detail::SlidingGram<6> gR_;
  Vector tmp_, acc_;
  std::vector<ExactValue> ex_;
  std::vector<double> buf_;
  Sums s_;
};

}  // namespace wavefem
