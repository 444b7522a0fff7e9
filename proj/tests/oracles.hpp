#pragma once

// Test-side reference computations. None of these call into the library's
// numerical kernels, so agreement is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

/// Per-block weighted average by explicit label lookup.
inline std::vector<double> block_average(const std::vector<double>& x,
                                         const std::vector<std::size_t>& label,
                                         const std::vector<double>& q) {
  std::vector<double> out(x.size());
  for (std::size_t w = 0; w < x.size(); ++w) {
    long double num = 0.0L;
    long double den = 0.0L;
    for (std::size_t v = 0; v < x.size(); ++v)
      if (label[v] == label[w]) {
        num += static_cast<long double>(q[v]) * x[v];
        den += q[v];
      }
    out[w] = static_cast<double>(num / den);
  }
  return out;
}

/// Phi^{-1} by Newton iteration on 0.5 erfc(-x/sqrt2) from a bisection start.
inline double inv_phi(double p) {
  auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  double lo = -40.0, hi = 40.0;
  for (int k = 0; k < 200 && hi - lo > 1e-3; ++k) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int k = 0; k < 50; ++k) {
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    const double step = (cdf(x) - p) / pdf;
    x -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

/// Adaptive Simpson on [a, b] with absolute tolerance tol.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

/// (1/lambda) int_0^lambda (mu + sigma Phi^{-1}(g)) dg. The substitution
/// g = lambda e^{-u} turns it into int_0^inf (mu + sigma Phi^{-1}(lambda e^{-u})) e^{-u} du,
/// whose integrand is smooth; the tail beyond u = 40 is below 1e-15.
inline double left_es_quadrature(double mu, double sigma, double lambda) {
  auto f = [&](double u) {
    const double g = lambda * std::exp(-u);
    if (g <= 0.0) return 0.0;
    const double z = g >= 1.0 ? 40.0 : inv_phi(g);
    return (mu + sigma * z) * std::exp(-u);
  };
  double total = 0.0;
  for (int k = 0; k < 40; ++k) total += adaptive_simpson(f, k, k + 1.0, 1e-10);
  return total;
}

/// Minimum of sum_w pt[w] d[w] x[w] over the vertices of
/// {0 <= d <= 1/lambda, sum_w pt[w] d[w] = 1}, pt the conditional probabilities.
/// Vertices have every coordinate at a bound except at most one.
inline double density_cap_min(const std::vector<double>& x, const std::vector<double>& pt,
                              double lambda, std::vector<std::vector<double>>* vertices = nullptr) {
  const std::size_t k = x.size();
  const double cap = 1.0 / lambda;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> state(k, 0);  // 0: zero, 1: cap, 2: free
  std::size_t combos = 1;
  for (std::size_t t = 0; t < k; ++t) combos *= 3;
  for (std::size_t code = 0; code < combos; ++code) {
    std::size_t c = code;
    int free_count = 0;
    std::size_t free_at = 0;
    for (std::size_t t = 0; t < k; ++t) {
      state[t] = static_cast<int>(c % 3);
      c /= 3;
      if (state[t] == 2) {
        ++free_count;
        free_at = t;
      }
    }
    if (free_count > 1) continue;
    std::vector<double> d(k, 0.0);
    double mass = 0.0;
    for (std::size_t t = 0; t < k; ++t)
      if (state[t] == 1) {
        d[t] = cap;
        mass += pt[t] * cap;
      }
    if (free_count == 1) {
      const double v = (1.0 - mass) / pt[free_at];
      if (v < -1e-12 || v > cap + 1e-12) continue;
      d[free_at] = std::clamp(v, 0.0, cap);
    } else if (std::abs(mass - 1.0) > 1e-12) {
      continue;
    }
    double val = 0.0;
    for (std::size_t t = 0; t < k; ++t) val += pt[t] * d[t] * x[t];
    best = std::min(best, val);
    if (vertices) vertices->push_back(d);
  }
  return best;
}

struct TwoPass {
  std::vector<double> mean;
  std::vector<double> var;
  std::vector<std::vector<double>> corr;
};

/// Welford-style streaming moments, used against the library's two-pass sums.
inline TwoPass streaming_stats(const std::vector<std::vector<double>>& series) {
  const std::size_t e = series.size();
  const std::size_t p = series.front().size();
  TwoPass out{std::vector<double>(e, 0.0), std::vector<double>(e, 0.0),
              std::vector<std::vector<double>>(e, std::vector<double>(e, 0.0))};
  std::vector<std::vector<double>> co(e, std::vector<double>(e, 0.0));
  std::vector<double> mean(e, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    const double n = static_cast<double>(k + 1);
    std::vector<double> delta(e);
    for (std::size_t i = 0; i < e; ++i) delta[i] = series[i][k] - mean[i];
    for (std::size_t i = 0; i < e; ++i) mean[i] += delta[i] / n;
    for (std::size_t i = 0; i < e; ++i)
      for (std::size_t j = 0; j < e; ++j) co[i][j] += delta[i] * (series[j][k] - mean[j]);
  }
  for (std::size_t i = 0; i < e; ++i) {
    out.mean[i] = mean[i];
    out.var[i] = co[i][i] / static_cast<double>(p - 1);
  }
  for (std::size_t i = 0; i < e; ++i)
    for (std::size_t j = 0; j < e; ++j)
      out.corr[i][j] = co[i][j] / std::sqrt(co[i][i] * co[j][j]);
  return out;
}

}  // namespace oracle
