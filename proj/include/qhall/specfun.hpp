#pragma once

// Special-function kernel: Hermite and Laguerre polynomials, normalized
// oscillator densities and their cumulative integrals, Hermite zeros, the
// Airy function and its integral, and adaptive Gauss-Kronrod quadrature.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include <boost/math/special_functions/airy.hpp>

#include "qhall/errors.hpp"

namespace qhall::specfun {

/// Index of a one-dimensional oscillator eigenstate.
struct OscState {
  int k = 0;
};

/// The k real zeros of H_k, ascending.
struct ZeroSet {
  int k = 0;
  std::vector<double> zeros;
};

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  ///< sum of |K15 - G7| over the final partition
  int intervals = 0;
};

struct QuadratureOptions {
  int max_intervals = 4000;
  int max_depth = 60;
};

namespace detail {

// 15-point Kronrod abscissae (non-negative half) with Kronrod and embedded
// 7-point Gauss weights.
inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  int depth;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gauss_kronrod_15(F& f, double a, double b, int depth) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kronrod_w[7];
  double gauss = fc * gauss_w[3];
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = half * kronrod_x[i];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kronrod_w[i] * pair;
    if (i % 2 == 1) gauss += gauss_w[i / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss), depth};
}

}  // namespace detail

/// Globally adaptive bisection with an embedded G7/K15 error estimate.
/// Stops when the summed error estimate is at most `tol` (absolute).
/// Throws NonConvergence if the interval budget or the depth limit is hit first.
template <class F>
QuadratureResult integrate_adaptive_ex(F&& f, double a, double b, double tol,
                                       QuadratureOptions opts = {}) {
  if (!(tol > 0.0)) throw InvalidArgument("integrate_adaptive: tol must be positive");
  if (!(a <= b)) throw InvalidArgument("integrate_adaptive: requires a <= b");
  if (a == b) return {};

  std::priority_queue<detail::Segment> heap;
  heap.push(detail::gauss_kronrod_15(f, a, b, 0));
  double total = heap.top().value;
  double error = heap.top().error;
  int intervals = 1;

  while (error > tol) {
    if (intervals >= opts.max_intervals) {
      throw NonConvergence("integrate_adaptive: interval budget exhausted (error " +
                           std::to_string(error) + " > tol " + std::to_string(tol) + ")");
    }
    const detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (worst.depth >= opts.max_depth || mid <= worst.a || mid >= worst.b) {
      throw NonConvergence("integrate_adaptive: maximum subdivision depth reached");
    }
    const auto left = detail::gauss_kronrod_15(f, worst.a, mid, worst.depth + 1);
    const auto right = detail::gauss_kronrod_15(f, mid, worst.b, worst.depth + 1);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
    // Re-sum occasionally; the running totals accumulate cancellation error.
    if (intervals % 64 == 0) {
      auto copy = heap;
      total = 0.0;
      error = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        error += copy.top().error;
        copy.pop();
      }
    }
  }
  return {total, error, intervals};
}

template <class F>
double integrate_adaptive(F&& f, double a, double b, double tol, QuadratureOptions opts = {}) {
  return integrate_adaptive_ex(std::forward<F>(f), a, b, tol, opts).value;
}

// ---------------------------------------------------------------------------
// Polynomials
// ---------------------------------------------------------------------------

/// Physicists' Hermite polynomial H_k(x) by the three-term recurrence.
inline double hermite_phys(int k, double x) {
  if (k < 0) throw IndexOutOfRange("hermite_phys: k must be non-negative");
  double prev = 0.0;
  double cur = 1.0;
  for (int n = 0; n < k; ++n) {
    const double next = 2.0 * x * cur - 2.0 * n * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Laguerre polynomial L_k^{(0)}(x).
inline double laguerre(int k, double x) {
  if (k < 0) throw IndexOutOfRange("laguerre: k must be non-negative");
  double prev = 0.0;
  double cur = 1.0;
  for (int n = 0; n < k; ++n) {
    const double next = ((2.0 * n + 1.0 - x) * cur - n * prev) / (n + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace detail {

/// Walks the normalized Hermite functions psi_0..psi_k at x.
///
/// psi_j(x) = mantissa_j * exp(log_scale). The mantissas are renormalized
/// whenever they grow past 1e100, so the walk neither underflows in the
/// Gaussian seed nor overflows for large j. `visit(j, prev, cur, log_scale)`
/// is called for j = 0..k with prev = mantissa_{j-1} (0 for j = 0).
template <class Visitor>
void hermite_function_walk(int k, double x, Visitor&& visit) {
  constexpr double rescale_at = 1e100;
  const double log_rescale = std::log(rescale_at);
  double log_scale = -0.5 * x * x;
  double prev = 0.0;
  double cur = 1.0 / std::sqrt(std::sqrt(std::numbers::pi));
  visit(0, prev, cur, log_scale);
  for (int j = 0; j < k; ++j) {
    const double next =
        std::sqrt(2.0 / (j + 1.0)) * x * cur - std::sqrt(j / (j + 1.0)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > rescale_at) {
      cur /= rescale_at;
      prev /= rescale_at;
      log_scale += log_rescale;
    }
    visit(j + 1, prev, cur, log_scale);
  }
}

/// psi_k and psi_{k-1} mantissas sharing one scale; used by root finding.
struct HermitePair {
  double prev = 0.0;
  double cur = 0.0;
  double log_scale = 0.0;
};

inline HermitePair hermite_pair(int k, double x) {
  HermitePair out;
  hermite_function_walk(k, x, [&](int, double p, double c, double s) {
    out.prev = p;
    out.cur = c;
    out.log_scale = s;
  });
  return out;
}

}  // namespace detail

/// Normalized oscillator eigenfunction psi_k(x), psi_k^2 integrating to one.
inline double hermite_function(int k, double x) {
  if (k < 0) throw IndexOutOfRange("hermite_function: k must be non-negative");
  const auto p = detail::hermite_pair(k, x);
  if (p.cur == 0.0) return 0.0;
  return p.cur * std::exp(p.log_scale);
}

/// |u_k(x)|^2 = exp(-x^2) H_k(x)^2 / (2^k k! sqrt(pi)).
inline double osc_density(int k, double x) {
  if (k < 0) throw IndexOutOfRange("osc_density: k must be non-negative");
  const auto p = detail::hermite_pair(k, x);
  if (p.cur == 0.0) return 0.0;
  return p.cur * p.cur * std::exp(2.0 * p.log_scale);
}

/// Complementary error function.
inline double erfc(double x) { return std::erfc(x); }

/// Integral of |u_k|^2 from -infinity to x.
///
/// Uses d/dx(psi_{j-1} psi_j) = sqrt(2j)(psi_{j-1}^2 - psi_j^2), which gives
/// F_k(x) = erfc(-x)/2 - sum_{j=1..k} psi_{j-1}(x) psi_j(x) / sqrt(2j).
inline double osc_cumulative(int k, double x) {
  if (k < 0) throw IndexOutOfRange("osc_cumulative: k must be non-negative");
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  double sum = 0.0;
  detail::hermite_function_walk(k, x, [&](int j, double prev, double cur, double log_scale) {
    if (j == 0) return;
    const double product = prev * cur;
    if (product == 0.0) return;
    const double log_weight = 2.0 * log_scale;
    if (log_weight < -745.0) return;
    sum += product * std::exp(log_weight) / std::sqrt(2.0 * j);
  });
  const double value = 0.5 * std::erfc(-x) - sum;
  return std::clamp(value, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Hermite zeros
// ---------------------------------------------------------------------------

namespace detail {

/// Root of psi_k inside (lo, hi), where psi_k changes sign exactly once.
inline double hermite_root_in(int k, double lo, double hi) {
  auto sign_at = [k](double x) { return detail::hermite_pair(k, x).cur; };
  double f_lo = sign_at(lo);
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const auto p = detail::hermite_pair(k, x);
    const double f = p.cur;
    if (f == 0.0) return x;
    if ((f < 0.0) == (f_lo < 0.0)) {
      lo = x;
      f_lo = f;
    } else {
      hi = x;
    }
    // psi_k' = sqrt(2k) psi_{k-1} - x psi_k, in the same scaled units as f.
    const double df = std::sqrt(2.0 * k) * p.prev - x * f;
    double next = (df != 0.0) ? x - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x)) || hi - lo <= 1e-15) {
      return next;
    }
    x = next;
  }
  return x;
}

inline void symmetrize(std::vector<double>& zeros) {
  const std::size_t n = zeros.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double m = 0.5 * (zeros[n - 1 - i] - zeros[i]);
    zeros[i] = -m;
    zeros[n - 1 - i] = m;
  }
  if (n % 2 == 1) zeros[n / 2] = 0.0;
}

}  // namespace detail

/// All k real zeros of H_k, built level by level: the zeros of H_{k-1}
/// interlace those of H_k, and every zero lies inside +/- sqrt(2k + 1).
inline ZeroSet hermite_zeros(int k) {
  if (k < 0) throw IndexOutOfRange("hermite_zeros: k must be non-negative");
  std::vector<double> zeros;
  for (int n = 1; n <= k; ++n) {
    const double edge = std::sqrt(2.0 * n + 1.0);
    std::vector<double> brackets;
    brackets.reserve(zeros.size() + 2);
    brackets.push_back(-edge);
    brackets.insert(brackets.end(), zeros.begin(), zeros.end());
    brackets.push_back(edge);
    std::vector<double> next(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      next[static_cast<std::size_t>(i)] =
          detail::hermite_root_in(n, brackets[static_cast<std::size_t>(i)],
                                  brackets[static_cast<std::size_t>(i) + 1]);
    }
    detail::symmetrize(next);
    zeros = std::move(next);
  }
  return {k, std::move(zeros)};
}

// ---------------------------------------------------------------------------
// Airy
// ---------------------------------------------------------------------------

inline double airy_ai(double z) { return boost::math::airy_ai(z); }
inline double airy_ai_prime(double z) { return boost::math::airy_ai_prime(z); }

inline constexpr double airy_ai1_plus_infinity = 1.0 / 3.0;
inline constexpr double airy_ai1_minus_infinity = -2.0 / 3.0;

namespace detail {

inline constexpr double airy_asymptotic_threshold = 20.0;

/// S(z) = Ai'(z) sum_m P_m z^{-3m-1} + Ai(z) sum_m (3m+1) P_m z^{-3m-2},
/// P_m = prod_{i<m} (3i+1)(3i+2). Repeated integration by parts with
/// Ai = Ai''/z gives int_{-inf}^z Ai = S(z) for z < 0 and
/// int_z^inf Ai = -S(z) for z > 0. Asymptotic; truncated at the smallest term.
inline double airy_integral_tail_series(double z) {
  const double ai = airy_ai(z);
  const double aip = airy_ai_prime(z);
  const double inv = 1.0 / z;
  const double inv3 = inv * inv * inv;
  double power = inv;  // z^{-3m-1}
  double coeff = 1.0;  // P_m
  double sum = 0.0;
  double last = std::numeric_limits<double>::infinity();
  for (int m = 0; m < 200; ++m) {
    const double term = coeff * (aip * power + (3.0 * m + 1.0) * ai * power * inv);
    if (std::abs(term) >= last) break;
    sum += term;
    last = std::abs(term);
    if (last <= 1e-18 * std::abs(sum)) break;
    coeff *= (3.0 * m + 1.0) * (3.0 * m + 2.0);
    power *= inv3;
  }
  return sum;
}

}  // namespace detail

/// Ai_1(z) = integral of Ai from 0 to z.
inline double airy_ai1(double z) {
  if (std::isnan(z)) return z;
  if (std::isinf(z)) return z > 0 ? airy_ai1_plus_infinity : airy_ai1_minus_infinity;
  if (z == 0.0) return 0.0;
  if (z >= detail::airy_asymptotic_threshold) {
    return airy_ai1_plus_infinity + detail::airy_integral_tail_series(z);
  }
  if (z <= -detail::airy_asymptotic_threshold) {
    return airy_ai1_minus_infinity + detail::airy_integral_tail_series(z);
  }
  // Unit chunks keep each panel within about one oscillation.
  const double lo = std::min(0.0, z);
  const double hi = std::max(0.0, z);
  double sum = 0.0;
  for (double a = lo; a < hi; a += 1.0) {
    const double b = std::min(hi, a + 1.0);
    sum += integrate_adaptive([](double x) { return airy_ai(x); }, a, b, 1e-15);
  }
  return z > 0 ? sum : -sum;
}

}  // namespace qhall::specfun
