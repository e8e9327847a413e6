#pragma once

// Drude magnetotransport on top of the crossed-field DOS: conductivity and
// resistivity tensors, the self-consistent Hall field and the breakdown field.
//
// Scattering enters only through tau(E_F): sigma_xy is taken in the
// (omega_C tau)^2 >> 1 limit, sigma_xy = (e/B) N(E_F), and sigma_xx uses the
// k_B T window around E_F,
//   sigma_xx = k_B T (e/B) n(E_F) omega_C tau / (1 + (omega_C tau)^2).
// The occupation itself is sharp.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qhall/constants.hpp"
#include "qhall/dos.hpp"
#include "qhall/errors.hpp"
#include "qhall/filling.hpp"

namespace qhall::transport {

using dos::FieldConfiguration;
using dos::SpinTreatment;

struct MaterialParams {
  double tau_EF = 1e-11;      ///< s
  double temperature = 0.1;   ///< K
  double j_x = 0.2;           ///< A/m
  double E_F = 0.868 * constants::meV;  ///< J
  SpinTreatment spin = SpinTreatment::resolved;

  bool operator==(const MaterialParams&) const = default;
};

/// 2x2 tensor in matrix layout [[xx, xy], [yx, yy]].
struct Tensor2 {
  double xx = 0.0;
  double xy = 0.0;
  double yx = 0.0;
  double yy = 0.0;

  /// Isotropic Hall form [[d, -h], [h, d]], the layout of the Drude tensor.
  static Tensor2 hall_form(double diagonal, double hall) { return {diagonal, -hall, hall, diagonal}; }

  bool operator==(const Tensor2&) const = default;
};

struct TransportPoint {
  double B = 0.0;
  double E_y = 0.0;  ///< Hall field used for the broadening, V/m
  Tensor2 sigma;
  Tensor2 rho;
  double N = 0.0;    ///< carriers per m^2 below E_F
  std::optional<double> plateau_f;

  /// Reported Hall resistivity sigma_xy / (sigma_xx^2 + sigma_xy^2).
  [[nodiscard]] double rho_xy() const { return rho.xy; }
  [[nodiscard]] double rho_xx() const { return rho.xx; }
};

namespace detail {

inline void require_tau(double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("relaxation time must be positive");
}

/// n(E) with the unbroadened comb contributing nothing off its lines.
inline double dos_at(const FieldConfiguration& c, double E, SpinTreatment spin) {
  if (c.E_perp == 0.0) {
    (void)dos::scale(c);
    return 0.0;
  }
  return dos::dos(c, E, spin);
}

inline double idos_at(const FieldConfiguration& c, double E, SpinTreatment spin) {
  if (c.E_perp == 0.0) return dos::idos_pure_b(c, E, spin);
  return dos::idos(c, E, spin);
}

}  // namespace detail

/// Energy-resolved Drude tensor e^2 n(E) tau/m /(1 + w^2 tau^2) [[1, -w tau], [w tau, 1]].
inline Tensor2 sigma_energy(const FieldConfiguration& c, double E, double tau,
                            SpinTreatment spin = SpinTreatment::spinless) {
  detail::require_tau(tau);
  const auto sp = dos::scale(c);
  const double n = detail::dos_at(c, E, spin);
  const double wt = sp.omega_C * tau;
  const double e = constants::elementary_charge;
  const double pref = e * e * n * tau / c.m_eff / (1.0 + wt * wt);
  return Tensor2::hall_form(pref, pref * wt);
}

inline double sigma_xy_total(const FieldConfiguration& c, const MaterialParams& mat) {
  if (!(c.B > 0.0)) throw InvalidField("sigma_xy_total: magnetic field must be positive");
  return constants::elementary_charge / c.B * detail::idos_at(c, mat.E_F, mat.spin);
}

inline double sigma_xx_total(const FieldConfiguration& c, const MaterialParams& mat) {
  if (!(c.B > 0.0)) throw InvalidField("sigma_xx_total: magnetic field must be positive");
  if (!(mat.temperature >= 0.0)) throw InvalidArgument("sigma_xx_total: temperature must be >= 0");
  detail::require_tau(mat.tau_EF);
  const auto sp = dos::scale(c);
  const double wt = sp.omega_C * mat.tau_EF;
  const double n = detail::dos_at(c, mat.E_F, mat.spin);
  return constants::boltzmann * mat.temperature * constants::elementary_charge / c.B * n * wt /
         (1.0 + wt * wt);
}

inline Tensor2 sigma_total(const FieldConfiguration& c, const MaterialParams& mat) {
  return Tensor2::hall_form(sigma_xx_total(c, mat), sigma_xy_total(c, mat));
}

/// Matrix inverse. For the Hall form this is rho_xx = s_xx / D, rho_xy = s_xy / D with
/// D = s_xx^2 + s_xy^2.
inline Tensor2 rho_from_sigma(const Tensor2& s) {
  const double det = s.xx * s.yy - s.xy * s.yx;
  if (det == 0.0 || !std::isfinite(det)) {
    throw SingularTensor("rho_from_sigma: conductivity tensor is singular");
  }
  return {s.yy / det, -s.xy / det, -s.yx / det, s.xx / det};
}

/// Classical Hall resistivity B/(e n2d).
inline double classical_rho_xy(double B, double n2d) {
  if (!(n2d > 0.0)) throw InvalidArgument("classical_rho_xy: carrier density must be positive");
  return B / (constants::elementary_charge * n2d);
}

/// Carrier density of a constant-DOS gas filled to E_F (both spins when resolved).
inline double constant_dos_density(double E_F, double m_eff, SpinTreatment spin) {
  const double per_spin = dos::free_dos_constant(m_eff) * std::max(0.0, E_F);
  return spin == SpinTreatment::resolved ? 2.0 * per_spin : per_spin;
}

/// Full transport state at the configured fields; E_y is c.E_perp.
inline TransportPoint evaluate(const FieldConfiguration& c, const MaterialParams& mat) {
  TransportPoint p;
  p.B = c.B;
  p.E_y = c.E_perp;
  p.N = detail::idos_at(c, mat.E_F, mat.spin);
  const double sxy = constants::elementary_charge / c.B * p.N;
  p.sigma = Tensor2::hall_form(sigma_xx_total(c, mat), sxy);
  p.rho = rho_from_sigma(p.sigma);
  return p;
}

inline double critical_field(double B, int k, double m_eff) {
  if (k < 1) throw IndexOutOfRange("critical_field: k must be >= 1");
  if (!(B > 0.0)) throw InvalidField("critical_field: magnetic field must be positive");
  if (!(m_eff > 0.0)) throw InvalidField("critical_field: effective mass must be positive");
  const double root = std::sqrt(constants::elementary_charge * constants::hbar);
  return root / m_eff * std::pow(B, 1.5) / (std::sqrt(2.0 * k - 1.0) + std::sqrt(2.0 * k + 1.0));
}

/// Sum of the half widths of levels k-1 and k over their spacing 2 hbar omega_L.
inline double overlap_ratio(const FieldConfiguration& c, int k) {
  if (k < 1) throw IndexOutOfRange("overlap_ratio: k must be >= 1");
  if (!(c.B > 0.0)) throw InvalidField("overlap_ratio: magnetic field must be positive");
  const double root = std::sqrt(constants::elementary_charge * constants::hbar);
  return c.m_eff * (std::sqrt(2.0 * k - 1.0) + std::sqrt(2.0 * k + 1.0)) * c.E_perp /
         (root * std::pow(c.B, 1.5));
}

/// Index k of the gap between levels k-1 and k that contains E_F (at least 1).
inline int gap_index(double B, double E_F, double m_eff) {
  const auto sp = dos::scale({B, 0.0, m_eff, 0.0});
  const double x = E_F / sp.hbar_omega_L();
  return std::max(1, static_cast<int>(std::floor(0.5 * (x + 1.0))));
}

/// Critical field of the gap containing E_F.
inline double local_critical_field(double B, double E_F, double m_eff) {
  return critical_field(B, gap_index(B, E_F, m_eff), m_eff);
}

// ---------------------------------------------------------------------------
// Self-consistent Hall field
// ---------------------------------------------------------------------------

struct HallSolverOptions {
  double alpha = 0.5;       ///< damping of the fixed-point update
  int max_iterations = 400;
  int stall_window = 25;    ///< iterations without halving the residual before falling back
  double rel_tol = 1e-9;
  double abs_tol = 1e-6;    ///< V/m, used when E_y is essentially zero
  int scan_points = 96;
  double bracket_factor = 10.0;  ///< bisection bracket [0, factor * classical estimate]
};

struct HallSolution {
  double E_y = 0.0;
  double residual = 0.0;  ///< |E_y - rho_xy(E_y) j_x|
  int evaluations = 0;
  bool used_bisection = false;
  std::vector<double> roots;  ///< every root bracketed by the fallback scan
  TransportPoint point;
};

namespace detail {

struct HallProblem {
  FieldConfiguration config;
  MaterialParams mat;
  int evaluations = 0;

  TransportPoint at(double E_y) {
    ++evaluations;
    auto c = config;
    c.E_perp = std::max(0.0, E_y);
    return evaluate(c, mat);
  }
  double residual(double E_y) { return E_y - at(E_y).rho_xy() * mat.j_x; }
};

inline bool accepted(double E, double residual, const HallSolverOptions& opt) {
  const double tol = std::max(opt.rel_tol * std::abs(E), std::abs(E) < 1.0 ? opt.abs_tol : 0.0);
  return std::abs(residual) <= tol;
}

}  // namespace detail

/// Solves E_y = rho_xy(B, E_y, E_F) j_x for the Hall field.
///
/// Damped fixed-point iteration from `warm_start` (the previous sweep point,
/// or the classical estimate). If the iteration stalls or cycles, scans
/// [0, bracket_factor * classical] for sign changes of E - rho_xy(E) j_x,
/// bisects every bracket and keeps the root closest to the warm start.
/// `config.E_perp` is ignored.
inline HallSolution solve_hall_field(const FieldConfiguration& config, const MaterialParams& mat,
                                     std::optional<double> warm_start = {},
                                     HallSolverOptions opt = {}) {
  if (!(config.B > 0.0)) throw InvalidField("solve_hall_field: magnetic field must be positive");
  if (!(mat.j_x >= 0.0)) throw InvalidArgument("solve_hall_field: j_x must be non-negative");
  detail::HallProblem problem{config, mat};
  HallSolution sol;

  if (mat.j_x == 0.0) {
    sol.point = problem.at(0.0);
    sol.evaluations = problem.evaluations;
    return sol;
  }

  const double n_classical = constant_dos_density(mat.E_F, config.m_eff, mat.spin);
  const double classical = n_classical > 0.0 ? classical_rho_xy(config.B, n_classical) * mat.j_x : 0.0;
  double E = warm_start.value_or(classical);
  if (!(E > 0.0)) E = classical;

  // Damped fixed point.
  double best = std::numeric_limits<double>::infinity();
  int since_progress = 0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    TransportPoint p;
    try {
      p = problem.at(E);
    } catch (const SingularTensor&) {
      break;
    }
    const double target = p.rho_xy() * mat.j_x;
    const double r = E - target;
    if (detail::accepted(E, r, opt)) {
      sol.E_y = E;
      sol.residual = std::abs(r);
      sol.point = p;
      sol.evaluations = problem.evaluations;
      return sol;
    }
    if (std::abs(r) < 0.5 * best) {
      best = std::abs(r);
      since_progress = 0;
    } else if (++since_progress >= opt.stall_window) {
      break;
    }
    E = (1.0 - opt.alpha) * E + opt.alpha * target;
    if (!(E > 0.0)) E = 0.5 * target;
  }

  // Fallback: bracket scan and bisection.
  sol.used_bisection = true;
  const double anchor = warm_start.value_or(classical);
  const double hi = opt.bracket_factor * std::max({classical, anchor, 1e-3});
  struct Sample {
    double E;
    double g;
  };
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(opt.scan_points) + 2);
  auto sample = [&](double x) {
    try {
      samples.push_back({x, problem.residual(x)});
    } catch (const SingularTensor&) {
    }
  };
  for (int i = 0; i <= opt.scan_points; ++i) sample(hi * i / opt.scan_points);
  if (anchor > 0.0 && anchor < hi) sample(anchor);
  std::sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) { return a.E < b.E; });

  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    Sample lo = samples[i];
    Sample up = samples[i + 1];
    if (lo.g == 0.0) {
      sol.roots.push_back(lo.E);
      continue;
    }
    if ((lo.g < 0.0) == (up.g < 0.0)) continue;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo.E + up.E);
      const double g = problem.residual(mid);
      if (detail::accepted(mid, g, opt)) {
        sol.roots.push_back(mid);
        break;
      }
      if ((g < 0.0) == (lo.g < 0.0)) {
        lo = {mid, g};
      } else {
        up = {mid, g};
      }
      // A bracket that shrinks without an accepted residual is a jump, not a root.
      if (up.E - lo.E <= 1e-15 * up.E) break;
    }
  }
  sol.evaluations = problem.evaluations;
  if (sol.roots.empty()) {
    throw NonConvergence("solve_hall_field: no root of E_y = rho_xy(E_y) j_x in [0, " +
                         std::to_string(hi) + "] V/m at B = " + std::to_string(config.B) + " T");
  }
  const double pick = *std::min_element(sol.roots.begin(), sol.roots.end(), [&](double a, double b) {
    return std::abs(a - anchor) < std::abs(b - anchor);
  });
  sol.E_y = pick;
  sol.point = problem.at(pick);
  sol.residual = std::abs(pick - sol.point.rho_xy() * mat.j_x);
  sol.evaluations = problem.evaluations;
  return sol;
}

/// Nearest plateau f with |rho_xy - h/(f e^2)| <= rel_tol * h/(f e^2).
inline std::optional<filling::PlateauEntry> match_plateau(
    double rho_xy, const std::vector<filling::PlateauEntry>& table, double rel_tol = 5e-3) {
  std::optional<filling::PlateauEntry> best;
  double best_dev = rel_tol;
  for (const auto& e : table) {
    const double target = constants::von_klitzing / e.f;
    const double dev = std::abs(rho_xy - target) / target;
    if (dev <= best_dev) {
      best_dev = dev;
      best = e;
    }
  }
  return best;
}

}  // namespace qhall::transport
