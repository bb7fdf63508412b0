#include "scatlimit/daubechies.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace scatlimit {

namespace {

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Coefficients (ascending in x) of the minimum-phase spectral factor Q with
// |Q(e^{-iω})|² = P(sin²(ω/2)), P(y) = Σ_{k<N} C(N-1+k, k) y^k.
std::vector<double> minimum_phase_factor(int n) {
  std::vector<std::complex<double>> q{1.0};
  if (n > 1) {
    const int deg = n - 1;
    // Companion matrix of the monic P.
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    const double lead = binom(2 * n - 2, n - 1);
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -binom(n - 1 + i, i) / lead;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    for (int r = 0; r < deg; ++r) {
      const std::complex<double> y = es.eigenvalues()(r);
      // y = (2 - z - 1/z)/4  =>  z² - (2 - 4y) z + 1 = 0; keep the root inside the unit circle.
      const std::complex<double> b = 2.0 - 4.0 * y;
      const std::complex<double> disc = std::sqrt(b * b - 4.0);
      std::complex<double> z1 = (b + disc) / 2.0, z2 = (b - disc) / 2.0;
      const std::complex<double> z = std::abs(z1) < std::abs(z2) ? z1 : z2;
      std::vector<std::complex<double>> next(q.size() + 1, 0.0);
      for (std::size_t k = 0; k < q.size(); ++k) {
        next[k] -= z * q[k];
        next[k + 1] += q[k];
      }
      q = std::move(next);
    }
  }
  std::complex<double> at_one = 0.0;
  for (auto c : q) at_one += c;
  std::vector<double> out(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) out[k] = (q[k] / at_one).real();
  return out;
}

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

}  // namespace

std::vector<double> daubechies_filter(int n) {
  if (n < 1 || n > 20) throw std::invalid_argument("Daubechies order must be in [1, 20]");
  std::vector<double> h{std::numbers::sqrt2};
  for (int i = 0; i < n; ++i) h = convolve(h, {0.5, 0.5});
  h = convolve(h, minimum_phase_factor(n));
  return {h.rbegin(), h.rend()};
}

DaubechiesTransform::DaubechiesTransform(int n, int depth)
    : n_(n), depth_(depth), h_(daubechies_filter(n)), q_(minimum_phase_factor(n)) {}

double DaubechiesTransform::high_pass_constant() const {
  double v = 0.0, pw = 1.0;
  for (double c : q_) {
    v += c * pw;
    pw = -pw;
  }
  return v;
}

std::complex<double> DaubechiesTransform::m0(double omega) const {
  std::complex<double> s = 0.0;
  for (std::size_t k = 0; k < h_.size(); ++k) s += h_[k] * std::polar(1.0, -omega * static_cast<double>(k));
  return s / std::numbers::sqrt2;
}

std::complex<double> DaubechiesTransform::operator()(double lambda) const {
  const double w = lambda / 2.0;
  // High-pass factor conj(m0(w + π)) in factored form, so the N-fold zero at
  // λ = 0 is resolved without cancellation:
  // conj(m0(w+π)) = e^{i(2N-1)(w+π)} ((1 - e^{-iw})/2)^N Q(-e^{-iw}).
  const std::complex<double> e = std::polar(1.0, -w);
  std::complex<double> qv = 0.0, pw = 1.0;
  for (double c : q_) {
    qv += c * pw;
    pw *= -e;
  }
  const std::complex<double> high =
      std::polar(1.0, (2.0 * n_ - 1.0) * (w + std::numbers::pi)) * std::pow((1.0 - e) / 2.0, n_) * qv;
  std::complex<double> phi = 1.0;
  double scale = w;
  for (int m = 1; m <= depth_; ++m) {
    scale /= 2.0;
    phi *= m0(scale);
  }
  return high * phi;
}

}  // namespace scatlimit
