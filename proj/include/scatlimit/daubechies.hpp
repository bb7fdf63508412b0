#pragma once

#include <complex>
#include <vector>

namespace scatlimit {

// Extremal-phase Daubechies scaling filter with N vanishing moments (2N taps),
// normalized so that Σh = √2. N=2 gives (1+√3, 3+√3, 3-√3, 1-√3)/(4√2).
std::vector<double> daubechies_filter(int vanishing_moments);

// Fourier transform of the Daubechies mother wavelet, shifted so that its time
// support is [1/2 - N, N - 1/2], built from the refinement product truncated
// at `depth` factors.
class DaubechiesTransform {
 public:
  explicit DaubechiesTransform(int vanishing_moments, int depth = 20);

  std::complex<double> operator()(double lambda) const;
  // Low-pass symbol m0(ω) = Σ h_k e^{-ikω} / √2.
  std::complex<double> m0(double omega) const;

  // Q(-1); the high-pass factor behaves like (λ/4)^N Q(-1) at the origin.
  double high_pass_constant() const;

  int vanishing_moments() const { return n_; }
  const std::vector<double>& filter() const { return h_; }

 private:
  int n_;
  int depth_;
  std::vector<double> h_;
  std::vector<double> q_;  // ascending coefficients of the minimum-phase factor, q(1) = 1
};

}  // namespace scatlimit
