#include "scatlimit/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <queue>
#include <limits>

#include "scatlimit/errors.hpp"

namespace scatlimit::quad {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;

}  // namespace

Result adaptive(const Integrand& f, double a, double b, double abs_tol, double rel_tol,
                unsigned max_depth) {
  if (a == b) return {};
  // Global subdivision: always bisect the panel with the largest error
  // estimate. Boost supplies the 15-point Kronrod rule; its own recursive
  // driver compares unscaled errors against scaled tolerances and can
  // recurse exponentially on short intervals.
  struct Panel {
    double a, b, value, error;
    unsigned depth;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  auto eval = [&](double lo, double hi, unsigned depth) {
    double err = 0.0;
    const double half = 0.5 * (hi - lo);
    const double v = Kronrod::integrate(f, lo, hi, 0, 0.0, &err);
    return Panel{lo, hi, v, std::abs(err * half), depth};
  };
  std::priority_queue<Panel> heap;
  heap.push(eval(a, b, 0));
  double value = heap.top().value, error = heap.top().error;
  constexpr std::size_t kMaxPanels = 4000;
  std::vector<Panel> settled;
  while (!heap.empty()) {
    const double target = std::max(abs_tol, rel_tol * std::abs(value));
    if (error <= target) break;
    Panel p = heap.top();
    heap.pop();
    // Panels at the rounding floor or maximum depth cannot improve.
    if (p.depth >= max_depth || p.error <= 50.0 * std::numeric_limits<double>::epsilon() * std::abs(p.value)) {
      settled.push_back(p);
      continue;
    }
    if (heap.size() + settled.size() > kMaxPanels) {
      heap.push(p);
      break;
    }
    const double mid = 0.5 * (p.a + p.b);
    Panel l = eval(p.a, mid, p.depth + 1), r = eval(mid, p.b, p.depth + 1);
    value += l.value + r.value - p.value;
    error += l.error + r.error - p.error;
    heap.push(l);
    heap.push(r);
  }
  // Recompute the totals from scratch to avoid drift from the running updates.
  double v = 0.0, e = 0.0;
  for (const auto& p : settled) {
    v += p.value;
    e += p.error;
  }
  while (!heap.empty()) {
    v += heap.top().value;
    e += heap.top().error;
    heap.pop();
  }
  if (!std::isfinite(v)) {
    throw QuadratureNonConvergence("non-finite integral on [" + std::to_string(a) + ", " +
                                   std::to_string(b) + "]");
  }
  if (e > std::max(abs_tol, rel_tol * std::abs(v)) * 10.0) {
    throw QuadratureNonConvergence("Gauss-Kronrod error estimate " + std::to_string(e) +
                                   " exceeds tolerance on [" + std::to_string(a) + ", " +
                                   std::to_string(b) + "]");
  }
  return {v, e};
}

Result adaptive_split(const Integrand& f, double a, double b, std::span<const double> breaks,
                      double abs_tol, double rel_tol) {
  std::vector<double> pts{a};
  for (double x : breaks) {
    if (x > a && x < b) pts.push_back(x);
  }
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  Result total;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const auto r = adaptive(f, pts[i], pts[i + 1], abs_tol, rel_tol);
    total.value += r.value;
    total.error += r.error;
  }
  return total;
}

Result power_weighted(const Integrand& g, double p, double delta, double abs_tol,
                      double rel_tol) {
  if (p <= -1.0) throw QuadratureNonConvergence("power weight x^p with p <= -1 is not integrable");
  const double q = p + 1.0;
  const double upper = std::pow(delta, q);
  auto h = [&](double u) { return g(std::pow(u, 1.0 / q)); };
  auto r = adaptive(h, 0.0, upper, abs_tol * q, rel_tol);
  return {r.value / q, r.error / q};
}

Result half_line(const Integrand& f, double a, double first_width, double abs_tol,
                 int quiet_panels, int max_panels) {
  Result total;
  double lo = a;
  double width = first_width;
  int quiet = 0;
  for (int k = 0; k < max_panels; ++k) {
    const auto r = adaptive(f, lo, lo + width, abs_tol, 1e-10);
    total.value += r.value;
    total.error += r.error;
    quiet = std::abs(r.value) < abs_tol ? quiet + 1 : 0;
    if (quiet >= quiet_panels) return total;
    lo += width;
    width *= 2.0;
  }
  throw QuadratureNonConvergence("half-line integral did not decay within " +
                                 std::to_string(max_panels) + " panels");
}

const Rule& gauss_hermite(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<Rule>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (slot) return *slot;

  // Golub-Welsch: the Jacobi matrix of the probabilists' Hermite recurrence
  // He_{k+1} = z He_k - k He_{k-1} has zero diagonal and off-diagonal sqrt(k).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  auto rule = std::make_unique<Rule>();
  rule->nodes.resize(n);
  rule->weights.resize(n);
  // Eigenvector components lose relative accuracy for the outer nodes, so
  // polish each node by Newton on the normalized He_n and take the weight
  // from the Christoffel function w = 1 / Σ_{k<n} h_k(z)².
  auto normalized = [n](double z, double& hn, double& hn1, double& sumsq) {
    double prev = 0.0, cur = 1.0;
    sumsq = 1.0;
    for (std::size_t k = 0; k + 1 < n + 1; ++k) {
      const double next = (z * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(k + 1.0);
      prev = cur;
      cur = next;
      if (k + 1 < n) sumsq += cur * cur;
    }
    hn = cur;
    hn1 = prev;
  };
  for (std::size_t i = 0; i < n; ++i) {
    double z = eig.eigenvalues()(i);
    double hn = 0, hn1 = 0, sumsq = 1;
    for (int it = 0; it < 3; ++it) {
      normalized(z, hn, hn1, sumsq);
      const double deriv = std::sqrt(static_cast<double>(n)) * hn1;
      if (deriv == 0.0) break;
      z -= hn / deriv;
    }
    normalized(z, hn, hn1, sumsq);
    rule->nodes[i] = z;
    rule->weights[i] = 1.0 / sumsq;
  }
  slot = std::move(rule);
  return *slot;
}

}  // namespace scatlimit::quad
