// qhall: DOS sweeps, self-consistent Hall sweeps, filling tables and
// breakdown reports for a 2D electron gas in crossed E and B fields.
//
//   qhall dos-sweep --config configs/dos_curves.conf --out out/
//   qhall hall-sweep --config configs/hall_sweep.conf --sweep_points 400
//
// Every config key is also a flag; flags override the file.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "qhall/qhall.hpp"

namespace {

using qhall::config::Command;

struct Invocation {
  std::string config_path;
  std::string out;
  bool si = false;
  std::map<std::string, std::string> overrides;
};

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw qhall::IoError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

/// Overrides are appended as extra lines; later lines win.
std::string build_text(const Invocation& inv) {
  std::string text = inv.config_path.empty() ? std::string() : read_text(inv.config_path);
  if (!text.empty() && text.back() != '\n') text += '\n';
  for (const auto& [key, value] : inv.overrides) text += key + " = " + value + "\n";
  if (!inv.out.empty()) text += "out = " + inv.out + "\n";
  if (inv.si) text += "si = on\n";
  return text;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

int run(Command command, const Invocation& inv) {
  const auto cfg = qhall::config::parse_config(build_text(inv), command);
  std::vector<std::filesystem::path> written;
  switch (command) {
    case Command::dos_sweep:
      for (auto& f : qhall::sweeps::run_dos_sweep(cfg).files) written.push_back(f.path);
      break;
    case Command::hall_sweep: {
      const auto res = qhall::sweeps::run_hall_sweep(cfg, &std::cerr);
      std::size_t failed = 0;
      for (const auto& r : res.rows) failed += r.solution ? 0 : 1;
      if (failed) std::cerr << "hall-sweep: " << failed << " of " << res.rows.size() << " points failed\n";
      written.push_back(res.file.path);
      break;
    }
    case Command::filling_table:
      written.push_back(qhall::sweeps::run_filling_table(cfg).file.path);
      break;
    case Command::breakdown:
      written.push_back(qhall::sweeps::run_breakdown_report(cfg).file.path);
      break;
  }
  for (const auto& p : written) std::cout << p.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density of states and quantum Hall transport in crossed electric and magnetic fields"};
  app.set_version_flag("--version", std::string("qhall ") + QHALL_VERSION);
  app.require_subcommand(1);

  const std::pair<Command, const char*> commands[] = {
      {Command::dos_sweep, "DOS and integrated DOS curves, one CSV per E_perp"},
      {Command::hall_sweep, "self-consistent Hall field and resistivities over a B sweep"},
      {Command::filling_table, "node weights, kappa and filling factors per level"},
      {Command::breakdown, "critical fields and overlap ratios per level gap"},
  };
  std::map<CLI::App*, std::pair<Command, Invocation>> subs;
  std::map<CLI::App*, std::map<std::string, std::string>> raw;
  for (const auto& [command, help] : commands) {
    auto* sub = app.add_subcommand(qhall::config::to_string(command), help);
    auto& [cmd, inv] = subs[sub];
    cmd = command;
    sub->add_option("--config", inv.config_path, "configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", inv.out, "output directory");
    sub->add_flag("--si", inv.si, "write SI columns instead of scaled units");
    for (const auto& key : qhall::config::known_keys()) {
      if (key == "out" || key == "si") continue;
      sub->add_option("--" + key, raw[sub][key], "override config key '" + key + "'");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  for (auto& [sub, entry] : subs) {
    if (!sub->parsed()) continue;
    auto& [command, inv] = entry;
    for (const auto& [key, value] : raw[sub]) {
      if (sub->count("--" + key)) inv.overrides[key] = value;
    }
    try {
      return run(command, inv);
    } catch (const qhall::Error& e) {
      std::cerr << "error: kind=" << e.kind() << " message=" << quoted(e.what()) << '\n';
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: kind=Internal message=" << quoted(e.what()) << '\n';
      return 3;
    }
  }
  return 1;
}
