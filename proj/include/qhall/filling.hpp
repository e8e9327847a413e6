#pragma once

// Node-interval weights of the oscillator densities and the non-integer
// filling factors they produce, plus the spin-resolved plateau table.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qhall/errors.hpp"
#include "qhall/specfun.hpp"

namespace qhall::filling {

struct FillingRecord {
  int k = 0;
  int j = 0;           ///< 0..k+1; j = 0 is the empty level
  double delta = 0.0;  ///< weight of interval j (0 for j = 0)
  double kappa = 0.0;  ///< k + sum_{i<=j} delta_i
};

/// Probability weights of |u_k|^2 between consecutive zeros of H_k, with
/// -inf and +inf appended. Integrated by adaptive quadrature; the infinite end
/// intervals are cut at |xi| = sqrt(2k+1) + 10.
inline std::vector<double> delta_intervals(int k) {
  if (k < 0) throw IndexOutOfRange("delta_intervals: k must be non-negative");
  const auto zeros = specfun::hermite_zeros(k).zeros;
  const double edge = std::sqrt(2.0 * k + 1.0) + 10.0;
  std::vector<double> nodes;
  nodes.reserve(zeros.size() + 2);
  nodes.push_back(-edge);
  nodes.insert(nodes.end(), zeros.begin(), zeros.end());
  nodes.push_back(edge);

  auto density = [k](double x) { return specfun::osc_density(k, x); };
  std::vector<double> out;
  out.reserve(nodes.size() - 1);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    out.push_back(specfun::integrate_adaptive(density, nodes[i], nodes[i + 1], 1e-14));
  }
  return out;
}

inline std::vector<FillingRecord> filling_records(int k) {
  const auto deltas = delta_intervals(k);
  std::vector<FillingRecord> rows;
  rows.reserve(deltas.size() + 1);
  double running = k;
  rows.push_back({k, 0, 0.0, running});
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    running += deltas[i];
    rows.push_back({k, static_cast<int>(i) + 1, deltas[i], running});
  }
  return rows;
}

inline double kappa(int k, int j) {
  if (k < 0) throw IndexOutOfRange("kappa: k must be non-negative");
  if (j < 0 || j > k + 1) {
    throw IndexOutOfRange("kappa: j must lie in [0, k+1], got j=" + std::to_string(j) +
                          " for k=" + std::to_string(k));
  }
  if (j == 0) return k;
  const auto deltas = delta_intervals(k);
  return k + std::accumulate(deltas.begin(), deltas.begin() + j, 0.0);
}

/// Best rational approximation p/q with q <= max_den, reduced ("22/5", "3").
inline std::string nearest_fraction(double value, int max_den = 20) {
  long best_p = std::lround(value);
  long best_q = 1;
  double best_err = std::abs(value - static_cast<double>(best_p));
  for (long q = 2; q <= max_den; ++q) {
    const long p = std::lround(value * static_cast<double>(q));
    const double err = std::abs(value - static_cast<double>(p) / static_cast<double>(q));
    if (err < best_err - 1e-15) {
      best_err = err;
      best_p = p;
      best_q = q;
    }
  }
  const long g = std::gcd(std::labs(best_p), best_q);
  best_p /= g;
  best_q /= g;
  if (best_q == 1) return std::to_string(best_p);
  return std::to_string(best_p) + "/" + std::to_string(best_q);
}

enum class SpinBranch { both, lower, upper };

struct PlateauEntry {
  double f = 0.0;          ///< exact filling including both spin branches
  std::string label;       ///< nearest simple fraction, for display
  int k = 0;               ///< level whose node produces the feature
  int j = 0;
  SpinBranch branch = SpinBranch::both;
  bool merged = false;     ///< another (k, j, branch) gave the same f within 1e-9
};

struct NodeFillings {
  std::optional<double> lower;  ///< node on the branch at 2k+1 - g/2
  std::optional<double> upper;  ///< node on the branch at 2k+1 + g/2
};

/// Fillings produced by node (k, j) of either spin branch for a splitting of
/// g hbar omega_L, in the narrow-level limit on the energy axis in units of
/// hbar omega_L. The branches place level k at 2k+1 -/+ g/2. A node yields
/// kappa_{k,j} plus the number of other-branch levels centred strictly below
/// it. A node that coincides with an other-branch level centre gives no
/// plateau and is empty, except for g = 0 where the branches coincide node for
/// node (f = 2 kappa).
inline NodeFillings node_fillings(double g_factor, const FillingRecord& r) {
  if (!(g_factor >= 0.0)) throw InvalidArgument("node_fillings: g must be non-negative");
  if (g_factor == 0.0) return {2.0 * r.kappa, 2.0 * r.kappa};
  const double half = 0.5 * g_factor;
  // Levels 2k'+1+offset < centre  <=>  k' < (centre - 1 - offset)/2.
  auto count_below = [](double centre, double offset) -> std::optional<double> {
    const double bound = 0.5 * (centre - 1.0 - offset);
    if (bound <= 0.0) {
      if (std::abs(bound) < 1e-12) return std::nullopt;
      return 0.0;
    }
    const double nearest = std::round(bound);
    if (std::abs(bound - nearest) < 1e-12) return std::nullopt;
    return std::ceil(bound);
  };
  const double centre = 2.0 * r.k + 1.0;
  NodeFillings out;
  if (const auto n = count_below(centre - half, +half)) out.lower = r.kappa + *n;
  if (const auto n = count_below(centre + half, -half)) out.upper = r.kappa + *n;
  return out;
}

/// Hall-plateau fillings f for a spin splitting of g hbar omega_L, built from
/// node_fillings over k <= k_max. f = 0 is omitted; values within 1e-9 are
/// merged and flagged.
inline std::vector<PlateauEntry> plateau_table(double g_factor, int k_max) {
  if (k_max < 0) throw IndexOutOfRange("plateau_table: k_max must be non-negative");
  if (!(g_factor >= 0.0)) throw InvalidArgument("plateau_table: g must be non-negative");
  std::vector<PlateauEntry> entries;
  for (int k = 0; k <= k_max; ++k) {
    for (const auto& r : filling_records(k)) {
      const auto f = node_fillings(g_factor, r);
      if (g_factor == 0.0) {
        entries.push_back({*f.lower, {}, r.k, r.j, SpinBranch::both});
        continue;
      }
      if (f.lower) entries.push_back({*f.lower, {}, r.k, r.j, SpinBranch::lower});
      if (f.upper) entries.push_back({*f.upper, {}, r.k, r.j, SpinBranch::upper});
    }
  }

  std::sort(entries.begin(), entries.end(),
            [](const PlateauEntry& a, const PlateauEntry& b) { return a.f < b.f; });
  std::vector<PlateauEntry> out;
  for (auto& e : entries) {
    if (e.f < 0.5) continue;
    if (!out.empty() && std::abs(out.back().f - e.f) <= 1e-9) {
      out.back().merged = true;
      continue;
    }
    out.push_back(e);
  }
  for (auto& e : out) e.label = nearest_fraction(e.f);
  return out;
}

}  // namespace qhall::filling
