#pragma once

// The four CLI runs: DOS curves, self-consistent Hall sweeps, the filling
// table and the breakdown report. Each returns its data and the CSV tables it
// wrote under cfg.out.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qhall/config.hpp"
#include "qhall/constants.hpp"
#include "qhall/csv.hpp"
#include "qhall/dos.hpp"
#include "qhall/errors.hpp"
#include "qhall/filling.hpp"
#include "qhall/transport.hpp"

namespace qhall::sweeps {

using config::RunConfig;

struct Emitted {
  std::filesystem::path path;
  csv::Table table;
};

/// Points from start to stop inclusive, linear or geometric.
inline std::vector<double> sweep_grid(double start, double stop, int points, config::Spacing spacing) {
  if (points < 2) throw ValidationError("sweep_points must be at least 2");
  if (!(start < stop)) throw ValidationError("sweep_start must be below sweep_stop");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double n = points - 1;
  if (spacing == config::Spacing::log) {
    if (!(start > 0.0)) throw ValidationError("log spacing needs sweep_start > 0");
    const double a = std::log(start);
    const double b = std::log(stop);
    for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * (i / n));
  } else {
    for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = start + (stop - start) * (i / n);
  }
  grid.front() = start;
  grid.back() = stop;
  return grid;
}

inline std::string field_tag(double value) { return config::format_number(value); }

namespace detail {

inline dos::LevelWindowOptions window(const RunConfig& cfg) {
  dos::LevelWindowOptions opt;
  opt.k_cap = cfg.k_cap;
  return opt;
}

inline void emit(Emitted& e, const RunConfig& cfg) {
  e.path = std::filesystem::path(cfg.out) / e.path;
  csv::write(e.table, e.path);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// dos-sweep
// ---------------------------------------------------------------------------

struct DosSweepResult {
  std::vector<double> e_perp;        ///< V/m, one entry per curve
  std::vector<dos::DosCurve> curves;
  std::vector<std::vector<double>> N;  ///< integrated DOS, 1/m^2, aligned with curves
  std::vector<Emitted> files;
};

/// One curve per E_perp: the configured list, or the swept values when
/// sweep_variable = E_perp (the energy grid then keeps its 0..16 hwL default).
/// Scaled columns give n in eB/(2 pi hbar^2 omega_L) and N in eB/(2 pi hbar);
/// cfg.si switches to J and SI densities.
inline DosSweepResult run_dos_sweep(const RunConfig& cfg, bool write_files = true) {
  config::validate(cfg, config::Command::dos_sweep);
  DosSweepResult result;
  std::vector<double> energies_scaled;
  if (cfg.sweep.variable == config::SweepVariable::E_perp) {
    result.e_perp = sweep_grid(cfg.sweep.start, cfg.sweep.stop, cfg.sweep.points, cfg.sweep.spacing);
    const config::SweepSpec defaults;
    energies_scaled = sweep_grid(defaults.start, defaults.stop, defaults.points, defaults.spacing);
  } else {
    result.e_perp = cfg.e_perp;
  }

  const auto spin = cfg.spin_treatment();
  const auto opt = detail::window(cfg);
  const bool want_n = cfg.sweep.outputs.count("dos") > 0;
  const bool want_N = cfg.sweep.outputs.count("idos") > 0;
  const double weight = dos::landau_degeneracy(*cfg.B);

  for (double e_perp : result.e_perp) {
    const auto field = cfg.field(e_perp);
    const double hw = dos::scale(field).hbar_omega_L();
    std::vector<double> energies;
    if (!energies_scaled.empty()) {
      for (double x : energies_scaled) energies.push_back(x * hw);
    } else {
      energies = sweep_grid(cfg.sweep.start, cfg.sweep.stop, cfg.sweep.points, cfg.sweep.spacing);
      if (cfg.sweep.scaled_energy) {
        for (double& E : energies) E *= hw;
      }
    }
    auto curve = dos::dos_curve(field, energies, spin, cfg.per_level, opt);
    std::vector<double> N(energies.size(), 0.0);
    if (want_N) {
      for (std::size_t i = 0; i < energies.size(); ++i) N[i] = dos::idos(field, energies[i], spin, opt);
    }

    Emitted out;
    out.path = "dos_Eperp_" + field_tag(e_perp) + ".csv";
    out.table.metadata = csv::metadata_block("dos-sweep", cfg);
    out.table.metadata.push_back("E_perp = " + config::format_number(e_perp) + " V/m");
    out.table.metadata.push_back("hbar_omega_L = " + config::format_number(hw) + " J");
    const double n_unit = weight / hw;  // eB/(2 pi hbar^2 omega_L)
    const bool si = cfg.si;
    out.table.header.push_back(si ? "E_J" : "E_over_hbar_omegaL");
    if (want_n) out.table.header.push_back(si ? "n_SI" : "n_scaled");
    if (want_N) out.table.header.push_back(si ? "N_SI" : "N_scaled");
    if (cfg.per_level) {
      for (const auto& [k, column] : curve.per_level) {
        out.table.header.push_back((si ? "n_SI_k" : "n_scaled_k") + std::to_string(k));
      }
    }
    for (std::size_t i = 0; i < energies.size(); ++i) {
      std::vector<csv::Cell> row;
      row.emplace_back(si ? energies[i] : energies[i] / hw);
      if (want_n) row.emplace_back(si ? curve.total[i] : curve.total[i] / n_unit);
      if (want_N) row.emplace_back(si ? N[i] : N[i] / weight);
      if (cfg.per_level) {
        for (const auto& [k, column] : curve.per_level) row.emplace_back(si ? column[i] : column[i] / n_unit);
      }
      out.table.add_row(row);
    }
    if (write_files) detail::emit(out, cfg);
    result.curves.push_back(std::move(curve));
    result.N.push_back(std::move(N));
    result.files.push_back(std::move(out));
  }
  return result;
}

// ---------------------------------------------------------------------------
// hall-sweep
// ---------------------------------------------------------------------------

/// Plateau candidates for the configured spin treatment: node fillings at g
/// when spin is resolved, bare kappa otherwise.
inline std::vector<filling::PlateauEntry> plateau_candidates(const RunConfig& cfg) {
  if (cfg.spin) return filling::plateau_table(cfg.g_factor, cfg.k_max);
  std::vector<filling::PlateauEntry> out;
  for (int k = 0; k <= cfg.k_max; ++k) {
    for (const auto& r : filling::filling_records(k)) {
      if (r.kappa < 0.5) continue;
      if (!out.empty() && std::abs(out.back().f - r.kappa) <= 1e-9) {
        out.back().merged = true;
        continue;
      }
      out.push_back({r.kappa, filling::nearest_fraction(r.kappa), r.k, r.j, filling::SpinBranch::both});
    }
  }
  return out;
}

struct HallRow {
  double B = 0.0;
  std::optional<transport::HallSolution> solution;  ///< empty when the point failed
  double classical_rho_xy = 0.0;
  std::optional<filling::PlateauEntry> plateau;
  std::string error;
};

struct HallSweepResult {
  std::vector<HallRow> rows;  ///< ascending B
  std::vector<filling::PlateauEntry> table;
  Emitted file;
};

/// Self-consistent Hall field over the B grid. Points are solved from high
/// to low B, each warm-started from the previous solution; a failed point is
/// recorded in the error column and the sweep continues. Multiple roots are
/// reported on `log`.
inline HallSweepResult run_hall_sweep(const RunConfig& cfg, std::ostream* log = nullptr,
                                      bool write_files = true) {
  config::validate(cfg, config::Command::hall_sweep);
  auto mat = cfg.material;
  mat.spin = cfg.spin_treatment();
  const auto grid = sweep_grid(cfg.sweep.start, cfg.sweep.stop, cfg.sweep.points, cfg.sweep.spacing);
  const double n2d = transport::constant_dos_density(mat.E_F, cfg.m_eff, mat.spin);

  HallSweepResult result;
  result.table = plateau_candidates(cfg);
  result.rows.resize(grid.size());
  transport::HallSolverOptions opt;
  opt.rel_tol = cfg.tolerance;
  std::optional<double> warm;
  for (std::size_t n = grid.size(); n-- > 0;) {
    auto& row = result.rows[n];
    row.B = grid[n];
    row.classical_rho_xy = transport::classical_rho_xy(row.B, n2d);
    try {
      auto field = cfg.field(0.0);
      field.B = row.B;
      auto sol = transport::solve_hall_field(field, mat, warm, opt);
      if (log && sol.roots.size() > 1) {
        *log << "hall-sweep: B=" << config::format_number(row.B) << " T has " << sol.roots.size()
             << " self-consistent roots; kept E_y=" << config::format_number(sol.E_y)
             << " V/m (closest to the continuation)\n";
      }
      warm = sol.E_y;
      row.plateau = transport::match_plateau(sol.point.rho_xy(), result.table);
      row.solution = std::move(sol);
    } catch (const Error& e) {
      row.error = std::string(e.kind()) + ": " + e.what();
      if (log) *log << "hall-sweep: B=" << config::format_number(row.B) << " T failed: " << e.what() << '\n';
    }
  }

  auto& t = result.file.table;
  result.file.path = "hall_sweep.csv";
  t.metadata = csv::metadata_block("hall-sweep", cfg);
  t.metadata.push_back("classical n2d = " + config::format_number(n2d) + " 1/m^2");
  const bool want_sigma = cfg.sweep.outputs.count("sigma") > 0;
  t.header = {"B", "E_y", "rho_xy", "rho_xx", "classical_rho_xy"};
  if (want_sigma) {
    t.header.push_back("sigma_xx");
    t.header.push_back("sigma_xy");
  }
  for (const char* h : {"plateau_f", "plateau_label", "n_roots", "error"}) t.header.push_back(h);
  for (const auto& row : result.rows) {
    std::vector<csv::Cell> cells{row.B};
    if (row.solution) {
      const auto& p = row.solution->point;
      cells.insert(cells.end(), {row.solution->E_y, p.rho_xy(), p.rho_xx(), row.classical_rho_xy});
      // Hall form [[d, -h], [h, d]]: the Hall conductivity e N / B sits in yx.
      if (want_sigma) cells.insert(cells.end(), {p.sigma.xx, p.sigma.yx});
    } else {
      cells.insert(cells.end(), {std::string(), std::string(), std::string(), row.classical_rho_xy});
      if (want_sigma) cells.insert(cells.end(), {std::string(), std::string()});
    }
    if (row.plateau) {
      cells.emplace_back(row.plateau->f);
      cells.emplace_back(row.plateau->label);
    } else {
      cells.emplace_back(std::string());
      cells.emplace_back(std::string());
    }
    cells.emplace_back(static_cast<long long>(row.solution ? row.solution->roots.size() : 0));
    cells.emplace_back(row.error);
    t.add_row(cells);
  }
  if (write_files) detail::emit(result.file, cfg);
  return result;
}

// ---------------------------------------------------------------------------
// filling-table
// ---------------------------------------------------------------------------

struct FillingRow {
  filling::FillingRecord record;
  double f_spinless = 0.0;  ///< no spin splitting: both branches coincide, 2 kappa
  filling::NodeFillings with_g;
};

struct FillingTable {
  std::vector<FillingRow> rows;
  Emitted file;
};

inline FillingTable run_filling_table(const RunConfig& cfg, bool write_files = true) {
  config::validate(cfg, config::Command::filling_table);
  FillingTable result;
  for (int k = 0; k <= cfg.k_max; ++k) {
    for (const auto& r : filling::filling_records(k)) {
      result.rows.push_back({r, 2.0 * r.kappa, filling::node_fillings(cfg.g_factor, r)});
    }
  }
  auto& t = result.file.table;
  result.file.path = "filling_table.csv";
  t.metadata = csv::metadata_block("filling-table", cfg);
  t.header = {"k", "j", "delta", "kappa", "kappa_label", "f_spinless", "f_with_g", "f_with_g_upper"};
  auto opt_cell = [](const std::optional<double>& v) -> csv::Cell {
    return v ? csv::Cell{*v} : csv::Cell{std::string()};
  };
  for (const auto& row : result.rows) {
    const auto& r = row.record;
    t.add_row({static_cast<long long>(r.k), static_cast<long long>(r.j), r.delta, r.kappa,
               filling::nearest_fraction(r.kappa), row.f_spinless, opt_cell(row.with_g.lower),
               opt_cell(row.with_g.upper)});
  }
  if (write_files) detail::emit(result.file, cfg);
  return result;
}

// ---------------------------------------------------------------------------
// breakdown
// ---------------------------------------------------------------------------

struct BreakdownRow {
  int k = 0;
  double e_crit = 0.0;
  std::vector<double> overlap;  ///< aligned with cfg.e_perp
};

struct BreakdownReport {
  std::vector<BreakdownRow> rows;
  Emitted file;
};

/// Critical field of the gap between levels k-1 and k, and the overlap ratio
/// at every configured E_perp, for k = 1..k_max.
inline BreakdownReport run_breakdown_report(const RunConfig& cfg, bool write_files = true) {
  config::validate(cfg, config::Command::breakdown);
  BreakdownReport result;
  for (int k = 1; k <= cfg.k_max; ++k) {
    BreakdownRow row{k, transport::critical_field(*cfg.B, k, cfg.m_eff), {}};
    for (double e : cfg.e_perp) row.overlap.push_back(transport::overlap_ratio(cfg.field(e), k));
    result.rows.push_back(std::move(row));
  }
  auto& t = result.file.table;
  result.file.path = "breakdown.csv";
  t.metadata = csv::metadata_block("breakdown", cfg);
  t.header = {"k", "E_crit"};
  for (double e : cfg.e_perp) t.header.push_back("overlap_ratio_Eperp_" + field_tag(e));
  for (const auto& row : result.rows) {
    std::vector<csv::Cell> cells{static_cast<long long>(row.k), row.e_crit};
    for (double v : row.overlap) cells.emplace_back(v);
    t.add_row(cells);
  }
  if (write_files) detail::emit(result.file, cfg);
  return result;
}

}  // namespace qhall::sweeps
