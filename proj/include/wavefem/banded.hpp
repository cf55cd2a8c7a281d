#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace wavefem {

using Vector = Eigen::VectorXd;

class NotSpdError : public std::runtime_error {
 public:
  NotSpdError() : std::runtime_error("matrix not SPD") {}
};

/// Symmetric band matrix; only the lower band is stored.
/// Entry (i, i-d), 0 <= d <= half_bandwidth, lives at lower_[i*(hb+1)+d].
class BandedSymmetricOperator {
 public:
  BandedSymmetricOperator() = default;
  BandedSymmetricOperator(int dimension, int half_bandwidth)
      : n_(dimension), hb_(half_bandwidth), lower_(static_cast<size_t>(dimension) * (half_bandwidth + 1), 0.0) {
    if (dimension < 0 || half_bandwidth < 0) throw std::invalid_argument("BandedSymmetricOperator: bad shape");
  }

  int dimension() const { return n_; }
  int half_bandwidth() const { return hb_; }
  /// Entries per row of the full matrix.
  int bandwidth() const { return 2 * hb_ + 1; }

  double operator()(int i, int j) const {
    if (i < j) std::swap(i, j);
    const int d = i - j;
    if (d > hb_) return 0.0;
    return lower_[idx(i, d)];
  }

  /// Adds v to A(i,j) (and implicitly A(j,i)).
  void add(int i, int j, double v) {
    if (i < j) std::swap(i, j);
    const int d = i - j;
    if (d > hb_) throw std::out_of_range("BandedSymmetricOperator::add outside band");
    lower_[idx(i, d)] += v;
  }

  void multiply(const double* x, double* y) const {
    const int w = hb_ + 1;
    for (int i = 0; i < n_; ++i) y[i] = 0.0;
    for (int i = 0; i < n_; ++i) {
      const double* row = &lower_[static_cast<size_t>(i) * w];
      double acc = row[0] * x[i];
      const double xi = x[i];
      const int dmax = std::min(hb_, i);
      for (int d = 1; d <= dmax; ++d) {
        acc += row[d] * x[i - d];
        y[i - d] += row[d] * xi;
      }
      y[i] += acc;
    }
  }

  Vector operator*(const Vector& x) const {
    if (x.size() != n_) throw std::invalid_argument("BandedSymmetricOperator: size mismatch");
    Vector y(n_);
    multiply(x.data(), y.data());
    return y;
  }

  /// x^T A x without forming A x.
  double quadratic_form(const double* x) const {
    const int w = hb_ + 1;
    double s = 0.0;
    for (int i = 0; i < n_; ++i) {
      const double* row = &lower_[static_cast<size_t>(i) * w];
      double off = 0.0;
      const int dmax = std::min(hb_, i);
      for (int d = 1; d <= dmax; ++d) off += row[d] * x[i - d];
      s += x[i] * (row[0] * x[i] + 2.0 * off);
    }
    return s;
  }
  double quadratic_form(const Vector& x) const { return quadratic_form(x.data()); }

  double bilinear(const Vector& x, const Vector& y) const { return x.dot(*this * y); }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int d = 0; d <= std::min(hb_, i); ++d) {
        A(i, i - d) = lower_[idx(i, d)];
        A(i - d, i) = lower_[idx(i, d)];
      }
    return A;
  }

  const std::vector<double>& lower_band() const { return lower_; }

 private:
  size_t idx(int i, int d) const { return static_cast<size_t>(i) * (hb_ + 1) + d; }

  int n_ = 0;
  int hb_ = 0;
  std::vector<double> lower_;
};

/// Banded Cholesky A = L L^T; factor once, solve many times.
class BandedCholesky {
 public:
  BandedCholesky() = default;
  explicit BandedCholesky(const BandedSymmetricOperator& A) : n_(A.dimension()), hb_(A.half_bandwidth()) {
    const int w = hb_ + 1;
    L_ = A.lower_band();
    for (int i = 0; i < n_; ++i) {
      for (int d = std::min(hb_, i); d >= 0; --d) {
        const int j = i - d;
        double s = L_[static_cast<size_t>(i) * w + d];
        // sum over m < j of L(i,m) L(j,m), both within band
        const int mlo = std::max(0, i - hb_);
        for (int m = mlo; m < j; ++m) s -= L_[static_cast<size_t>(i) * w + (i - m)] * L_[static_cast<size_t>(j) * w + (j - m)];
        if (d == 0) {
          if (!(s > 0.0) || !std::isfinite(s)) throw NotSpdError();
          L_[static_cast<size_t>(i) * w] = std::sqrt(s);
        } else {
          L_[static_cast<size_t>(i) * w + d] = s / L_[static_cast<size_t>(j) * w];
        }
      }
    }
  }

  int dimension() const { return n_; }

  void solve_in_place(double* x) const {
    const int w = hb_ + 1;
    for (int i = 0; i < n_; ++i) {
      double s = x[i];
      const int dmax = std::min(hb_, i);
      for (int d = 1; d <= dmax; ++d) s -= L_[static_cast<size_t>(i) * w + d] * x[i - d];
      x[i] = s / L_[static_cast<size_t>(i) * w];
    }
    for (int i = n_ - 1; i >= 0; --i) {
      double s = x[i] / L_[static_cast<size_t>(i) * w];
      x[i] = s;
      const int dmax = std::min(hb_, i);
      for (int d = 1; d <= dmax; ++d) x[i - d] -= L_[static_cast<size_t>(i) * w + d] * s;
    }
  }

  Vector solve(const Vector& b) const {
    if (b.size() != n_) throw std::invalid_argument("BandedCholesky: size mismatch");
    Vector x = b;
    solve_in_place(x.data());
    return x;
  }

 private:
  int n_ = 0;
  int hb_ = 0;
  std::vector<double> L_;
};

/// One-shot SPD solve (factorizes each call; keep a BandedCholesky to reuse).
inline Vector solve_spd(const BandedSymmetricOperator& A, const Vector& b) { return BandedCholesky(A).solve(b); }

}  // namespace wavefem
