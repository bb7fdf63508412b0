#include "scatlimit/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "scatlimit/errors.hpp"

namespace scatlimit::fft {

namespace {

enum class Kind { r2c, c2r, c2c_fwd, c2c_bwd };

// FFTW planning is not thread-safe but executing an existing plan through
// the new-array interface is, so plans are created once under a lock and
// shared afterwards. FFTW_UNALIGNED lets us run them on caller buffers.
fftw_plan get_plan(Kind kind, std::size_t n) {
  static std::mutex mu;
  static std::map<std::pair<Kind, std::size_t>, fftw_plan> plans;
  std::lock_guard lock(mu);
  auto key = std::make_pair(kind, n);
  if (auto it = plans.find(key); it != plans.end()) return it->second;

  const int len = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::vector<double> re(n);
  std::vector<cplx> c(n);
  auto* cptr = reinterpret_cast<fftw_complex*>(c.data());
  fftw_plan p = nullptr;
  switch (kind) {
    case Kind::r2c: p = fftw_plan_dft_r2c_1d(len, re.data(), cptr, flags); break;
    case Kind::c2r: p = fftw_plan_dft_c2r_1d(len, cptr, re.data(), flags); break;
    case Kind::c2c_fwd: p = fftw_plan_dft_1d(len, cptr, cptr, FFTW_FORWARD, flags); break;
    case Kind::c2c_bwd: p = fftw_plan_dft_1d(len, cptr, cptr, FFTW_BACKWARD, flags); break;
  }
  if (!p) throw std::runtime_error("FFTW planning failed for n=" + std::to_string(n));
  plans.emplace(key, p);
  return p;
}

void require(bool ok, const char* what) {
  if (!ok) throw LengthError(what);
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

void forward(std::span<const double> in, std::span<cplx> out) {
  const std::size_t n = in.size();
  require(n >= 2 && out.size() == n / 2 + 1, "forward: output must have n/2+1 bins");
  // fftw's r2c never writes to its input, the const_cast is only for the C API.
  fftw_execute_dft_r2c(get_plan(Kind::r2c, n), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void inverse(std::span<const cplx> in, std::span<double> out) {
  const std::size_t n = out.size();
  require(n >= 2 && in.size() == n / 2 + 1, "inverse: input must have n/2+1 bins");
  // c2r destroys its input.
  std::vector<cplx> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(get_plan(Kind::c2r, n), reinterpret_cast<fftw_complex*>(scratch.data()),
                       out.data());
  const double inv = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= inv;
}

std::vector<cplx> forward(std::span<const double> in) {
  std::vector<cplx> out(in.size() / 2 + 1);
  forward(in, out);
  return out;
}

std::vector<double> inverse(std::span<const cplx> in, std::size_t n) {
  std::vector<double> out(n);
  inverse(in, out);
  return out;
}

void forward_c2c(std::span<const cplx> in, std::span<cplx> out) {
  require(in.size() == out.size() && !in.empty(), "forward_c2c: size mismatch");
  std::copy(in.begin(), in.end(), out.begin());
  auto* p = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(get_plan(Kind::c2c_fwd, out.size()), p, p);
}

void backward_c2c(std::span<const cplx> in, std::span<cplx> out) {
  require(in.size() == out.size() && !in.empty(), "backward_c2c: size mismatch");
  std::copy(in.begin(), in.end(), out.begin());
  auto* p = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(get_plan(Kind::c2c_bwd, out.size()), p, p);
}

}  // namespace scatlimit::fft
