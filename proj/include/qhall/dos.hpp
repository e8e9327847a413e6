#pragma once

// Density of states of a two-dimensional electron in crossed uniform
// magnetic and in-plane electric fields.
//
// Each Landau level k is broadened into the oscillator density
//   n_k(E) = eB/(2 pi hbar) * |u_k(E_k / Gamma)|^2 / Gamma,
//   E_k    = E - Gamma^2/(4 hbar omega_L) - (2k + 1) hbar omega_L,
//   Gamma  = e E_perp l_mag.
// Internally energies are carried in units of hbar omega_L; the public
// interface is SI throughout.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "qhall/constants.hpp"
#include "qhall/errors.hpp"
#include "qhall/specfun.hpp"

namespace qhall::dos {

/// Physical scenario: fields, effective mass and spin g-factor (SI).
struct FieldConfiguration {
  double B = 0.0;       ///< tesla
  double E_perp = 0.0;  ///< in-plane electric field magnitude, V/m
  double m_eff = constants::electron_mass;
  double g_factor = 0.0;

  bool operator==(const FieldConfiguration&) const = default;
};

struct ScaledParameters {
  double omega_L = 0.0;      ///< eB/(2m), rad/s
  double omega_C = 0.0;      ///< 2 omega_L
  double l_mag = 0.0;        ///< sqrt(hbar/(eB)), m
  double Gamma = 0.0;        ///< e E_perp l_mag, J
  double drift_shift = 0.0;  ///< Gamma^2/(4 hbar omega_L) = (m/2)(E/B)^2, J

  [[nodiscard]] double hbar_omega_L() const { return constants::hbar * omega_L; }
};

enum class SpinTreatment {
  spinless,  ///< n(E)
  resolved,  ///< n(E + g hbar omega_L / 2) + n(E - g hbar omega_L / 2)
};

struct LevelLine {
  int k = 0;
  double energy = 0.0;  ///< (2k + 1) hbar omega_L, J
  double weight = 0.0;  ///< eB/(2 pi hbar), 1/m^2
};

struct DosCurve {
  std::vector<double> energies;                ///< J
  std::vector<double> total;                   ///< 1/(J m^2)
  std::map<int, std::vector<double>> per_level;  ///< filled on request
  std::pair<int, int> k_range{0, -1};          ///< inclusive; empty when first > second
};

/// Levels with |E_k| > Gamma (sqrt(2k+1) + margin) are treated as empty
/// (above E) or full (below E); k never exceeds k_cap.
struct LevelWindowOptions {
  int k_cap = 10000;
  double margin = 8.0;
};

inline ScaledParameters scale(const FieldConfiguration& c) {
  if (!(c.B > 0.0)) throw InvalidField("scale: magnetic field must be positive");
  if (!(c.m_eff > 0.0)) throw InvalidField("scale: effective mass must be positive");
  if (!(c.E_perp >= 0.0)) throw InvalidField("scale: electric field must be non-negative");
  using namespace constants;
  ScaledParameters sp;
  sp.omega_L = elementary_charge * c.B / (2.0 * c.m_eff);
  sp.omega_C = 2.0 * sp.omega_L;
  sp.l_mag = std::sqrt(hbar / (elementary_charge * c.B));
  sp.Gamma = elementary_charge * c.E_perp * sp.l_mag;
  sp.drift_shift = 0.5 * c.m_eff * (c.E_perp / c.B) * (c.E_perp / c.B);
  return sp;
}

/// States per area in one Landau level, eB/(2 pi hbar).
inline double landau_degeneracy(double B) {
  return constants::elementary_charge * B / (2.0 * constants::pi * constants::hbar);
}

inline double effective_shift(const ScaledParameters& sp, int k, double E) {
  if (k < 0) throw IndexOutOfRange("effective_shift: k must be non-negative");
  const double hw = sp.hbar_omega_L();
  return E - sp.drift_shift - (2.0 * k + 1.0) * hw;
}

namespace detail {

/// Energies in units of hbar omega_L.
struct Reduced {
  double gamma = 0.0;   ///< Gamma / hbar omega_L
  double shift = 0.0;   ///< drift shift / hbar omega_L = gamma^2 / 4
  double hw = 0.0;      ///< hbar omega_L, J
  double weight = 0.0;  ///< eB/(2 pi hbar)
};

inline Reduced reduce(const FieldConfiguration& c) {
  const auto sp = scale(c);
  Reduced r;
  r.hw = sp.hbar_omega_L();
  r.gamma = sp.Gamma / r.hw;
  r.shift = sp.drift_shift / r.hw;
  r.weight = landau_degeneracy(c.B);
  return r;
}

inline Reduced reduce_broadened(const FieldConfiguration& c, const char* who) {
  auto r = reduce(c);
  if (!(r.gamma > 0.0)) {
    throw InvalidField(std::string(who) +
                       ": requires E_perp > 0 (use dos_pure_b for the unbroadened comb)");
  }
  return r;
}

inline double xi_of(const Reduced& r, int k, double x) {
  return (x - r.shift - (2.0 * k + 1.0)) / r.gamma;
}

/// Candidate levels for reduced energy x: first, last (inclusive) plus the
/// count of levels lying entirely below the window.
struct Window {
  int first = 0;
  int last = -1;
};

inline Window level_window(const Reduced& r, double x, const LevelWindowOptions& opt) {
  // With u = sqrt(2k+1), the window |X - u^2| <= gamma (u + margin),
  // X = x - shift, is the u-interval between the roots of two quadratics.
  const double X = x - r.shift;
  const double g = r.gamma;
  const double m = opt.margin;
  Window w;
  const double disc_hi = g * g + 4.0 * (X + m * g);
  if (disc_hi < 0.0) return w;
  const double u_hi = 0.5 * (g + std::sqrt(disc_hi));
  double u_lo = 0.0;
  const double disc_lo = g * g + 4.0 * (X - m * g);
  if (disc_lo > 0.0) u_lo = std::max(0.0, 0.5 * (-g + std::sqrt(disc_lo)));
  const double k_hi = std::floor(0.5 * (u_hi * u_hi - 1.0)) + 1.0;
  const double k_lo = std::max(0.0, std::ceil(0.5 * (u_lo * u_lo - 1.0)) - 1.0);
  const double cap = static_cast<double>(opt.k_cap);
  w.first = static_cast<int>(std::min(k_lo, cap + 1.0));
  w.last = static_cast<int>(std::min(k_hi, cap));
  return w;
}

inline bool in_window(const Reduced& r, int k, double x, const LevelWindowOptions& opt) {
  const double xi = xi_of(r, k, x);
  return std::abs(xi) <= std::sqrt(2.0 * k + 1.0) + opt.margin;
}

/// Reduced DOS sum_k |u_k(xi_k)|^2 / gamma at reduced energy x.
template <class PerLevel>
double reduced_dos(const Reduced& r, double x, const LevelWindowOptions& opt, PerLevel&& each) {
  const auto w = level_window(r, x, opt);
  double sum = 0.0;
  for (int k = w.first; k <= w.last; ++k) {
    if (!in_window(r, k, x, opt)) continue;
    const double v = specfun::osc_density(k, xi_of(r, k, x)) / r.gamma;
    each(k, v);
    sum += v;
  }
  return sum;
}

/// Reduced integrated DOS: number of filled levels (fractional) below x.
inline double reduced_idos(const Reduced& r, double x, const LevelWindowOptions& opt) {
  const auto w = level_window(r, x, opt);
  double count = 0.0;
  int k = 0;
  // Levels below the window are complete.
  for (; k < w.first && k <= opt.k_cap; ++k) {
    const double xi = xi_of(r, k, x);
    if (xi > std::sqrt(2.0 * k + 1.0) + opt.margin) {
      count += 1.0;
    } else {
      count += specfun::osc_cumulative(k, xi);
    }
  }
  for (k = std::max(k, w.first); k <= w.last; ++k) {
    const double xi = xi_of(r, k, x);
    const double edge = std::sqrt(2.0 * k + 1.0) + opt.margin;
    if (xi > edge) {
      count += 1.0;
    } else if (xi >= -edge) {
      count += specfun::osc_cumulative(k, xi);
    }
  }
  return count;
}

}  // namespace detail

/// Partial DOS of level k, states per joule per square metre.
inline double partial_dos(const FieldConfiguration& c, int k, double E) {
  if (k < 0) throw IndexOutOfRange("partial_dos: k must be non-negative");
  const auto r = detail::reduce_broadened(c, "partial_dos");
  const double xi = detail::xi_of(r, k, E / r.hw);
  return r.weight * specfun::osc_density(k, xi) / (r.gamma * r.hw);
}

inline double total_dos(const FieldConfiguration& c, double E, LevelWindowOptions opt = {}) {
  const auto r = detail::reduce_broadened(c, "total_dos");
  const double reduced = detail::reduced_dos(r, E / r.hw, opt, [](int, double) {});
  return r.weight * reduced / r.hw;
}

inline double spin_dos(const FieldConfiguration& c, double E, LevelWindowOptions opt = {}) {
  const auto r = detail::reduce_broadened(c, "spin_dos");
  const double half_split = 0.5 * c.g_factor;
  const double x = E / r.hw;
  const auto none = [](int, double) {};
  const double up = detail::reduced_dos(r, x + half_split, opt, none);
  const double down = detail::reduced_dos(r, x - half_split, opt, none);
  return r.weight * (up + down) / r.hw;
}

inline double dos(const FieldConfiguration& c, double E, SpinTreatment spin,
                  LevelWindowOptions opt = {}) {
  return spin == SpinTreatment::resolved ? spin_dos(c, E, opt) : total_dos(c, E, opt);
}

/// Areal density of states below E_F, 1/m^2.
inline double idos(const FieldConfiguration& c, double E_F, SpinTreatment spin,
                   LevelWindowOptions opt = {}) {
  const auto r = detail::reduce_broadened(c, "idos");
  const double x = E_F / r.hw;
  double levels = 0.0;
  if (spin == SpinTreatment::resolved) {
    const double half_split = 0.5 * c.g_factor;
    levels = detail::reduced_idos(r, x + half_split, opt) + detail::reduced_idos(r, x - half_split, opt);
  } else {
    levels = detail::reduced_idos(r, x, opt);
  }
  return r.weight * levels;
}

/// Evaluates the DOS on an energy grid, optionally keeping the per-level terms.
inline DosCurve dos_curve(const FieldConfiguration& c, std::span<const double> energies,
                          SpinTreatment spin, bool keep_per_level, LevelWindowOptions opt = {}) {
  const auto r = detail::reduce_broadened(c, "dos_curve");
  DosCurve curve;
  curve.energies.assign(energies.begin(), energies.end());
  curve.total.assign(energies.size(), 0.0);
  const double to_si = r.weight / r.hw;
  int k_min = std::numeric_limits<int>::max();
  int k_max = -1;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    auto record = [&](int k, double v) {
      k_min = std::min(k_min, k);
      k_max = std::max(k_max, k);
      if (!keep_per_level) return;
      auto& column = curve.per_level[k];
      if (column.empty()) column.assign(energies.size(), 0.0);
      column[i] += v * to_si;
    };
    const double x = energies[i] / r.hw;
    double value = 0.0;
    if (spin == SpinTreatment::resolved) {
      value = detail::reduced_dos(r, x + 0.5 * c.g_factor, opt, record) +
              detail::reduced_dos(r, x - 0.5 * c.g_factor, opt, record);
    } else {
      value = detail::reduced_dos(r, x, opt, record);
    }
    curve.total[i] = value * to_si;
  }
  if (k_max >= 0) {
    curve.k_range = {k_min, k_max};
    if (keep_per_level) {
      for (int k = k_min; k <= k_max; ++k) {
        auto& column = curve.per_level[k];
        if (column.empty()) column.assign(energies.size(), 0.0);
      }
    }
  }
  return curve;
}

/// The unbroadened comb: each level a delta line of weight eB/(2 pi hbar).
inline std::vector<LevelLine> dos_pure_b(const FieldConfiguration& c, int k_max) {
  if (k_max < 0) throw IndexOutOfRange("dos_pure_b: k_max must be non-negative");
  const auto sp = scale(c);
  const double weight = landau_degeneracy(c.B);
  std::vector<LevelLine> lines;
  lines.reserve(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) {
    lines.push_back({k, (2.0 * k + 1.0) * sp.hbar_omega_L(), weight});
  }
  return lines;
}

/// Number of comb levels strictly below E_F, times eB/(2 pi hbar).
inline double idos_pure_b(const FieldConfiguration& c, double E_F, SpinTreatment spin) {
  const auto sp = scale(c);
  const double x = E_F / sp.hbar_omega_L();
  auto below = [](double reduced) {
    // levels at 2k+1 < reduced
    if (reduced <= 1.0) return 0.0;
    return std::ceil(0.5 * (reduced - 1.0));
  };
  double count = 0.0;
  if (spin == SpinTreatment::resolved) {
    count = below(x + 0.5 * c.g_factor) + below(x - 0.5 * c.g_factor);
  } else {
    count = below(x);
  }
  return count * landau_degeneracy(c.B);
}

/// m / (2 pi hbar^2), the free two-dimensional DOS per spin.
inline double free_dos_constant(double m_eff) {
  return m_eff / (2.0 * constants::pi * constants::hbar * constants::hbar);
}

inline double dos_free(double E, double m_eff) { return E < 0.0 ? 0.0 : free_dos_constant(m_eff); }

/// Lambda = 2 [m / (hbar e E_perp)^2]^{1/3}, 1/J.
inline double airy_energy_scale(double m_eff, double E_perp) {
  const double f = constants::hbar * constants::elementary_charge * E_perp;
  return 2.0 * std::cbrt(m_eff / (f * f));
}

/// B -> 0 limit: m/(2 pi hbar^2) [1/3 - Ai_1(-Lambda E)].
inline double dos_pure_e(const FieldConfiguration& c, double E) {
  if (!(c.E_perp > 0.0)) throw InvalidField("dos_pure_e: requires E_perp > 0 (use dos_free)");
  if (!(c.m_eff > 0.0)) throw InvalidField("dos_pure_e: effective mass must be positive");
  const double lambda = airy_energy_scale(c.m_eff, c.E_perp);
  const double bracket = specfun::airy_ai1_plus_infinity - specfun::airy_ai1(-lambda * E);
  return free_dos_constant(c.m_eff) * std::max(0.0, bracket);
}

/// Partial DOS from the propagator time integral
///   m omega_L/(2 pi^2 hbar^2) int dt exp(-Gamma^2 t^2/(4 hbar^2) - i t E_k/hbar)
///                                    L_k(Gamma^2 t^2/(2 hbar^2)),
/// evaluated by quadrature in s = Gamma t / hbar over |s| <= 20.
/// Independent of the Hermite closed form; kept as a verification oracle.
inline double oracle_dos_time_integral(const FieldConfiguration& c, int k, double E,
                                       double tol = 1e-12) {
  if (k < 0) throw IndexOutOfRange("oracle_dos_time_integral: k must be non-negative");
  const auto sp = scale(c);
  if (!(sp.Gamma > 0.0)) throw InvalidField("oracle_dos_time_integral: requires Gamma > 0");
  const double xi = effective_shift(sp, k, E) / sp.Gamma;
  auto integrand = [k, xi](double s) {
    return std::exp(-0.25 * s * s) * std::cos(s * xi) * specfun::laguerre(k, 0.5 * s * s);
  };
  // Even integrand: twice the half line. Panels of unit width.
  double half = 0.0;
  for (int a = 0; a < 20; ++a) {
    half += specfun::integrate_adaptive(integrand, a, a + 1.0, tol / 20.0);
  }
  const double prefactor = c.m_eff * sp.omega_L / (2.0 * constants::pi * constants::pi *
                                                   constants::hbar * constants::hbar);
  return prefactor * (constants::hbar / sp.Gamma) * 2.0 * half;
}

}  // namespace qhall::dos
