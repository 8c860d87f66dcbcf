#include "spnp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>

#include "spnp/errors.hpp"
#include "spnp/io.hpp"
#include "spnp/manufactured.hpp"

namespace spnp {

namespace {

std::string snapshot_name(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snapshot_t%.6g.vtk", t);
  return buf;
}

int execute(const RunConfig& cfg, std::ostream& out) {
  const ResolvedRun rr = resolve_config(cfg);
  const Scenario& s = rr.scenario;
  const std::filesystem::path dir(rr.out);
  std::filesystem::create_directories(dir);
  write_text((dir / "config.txt").string(), emit_config(cfg));

  const Discretization disc = make_discretization(rr.nx, rr.ny);
  std::shared_ptr<const Forcing> forcing;
  const ExactSolution exact = reference_exact_solution();
  if (rr.manufactured) forcing = manufactured_forcing(SourceTerms(exact, s.params), disc);
  Integrator integ(disc, s.params, s.options, forcing);
  integ.initialize(s.initial);

  const int ns = s.params.n_species();
  std::vector<double> pending = s.snapshot_times;
  std::sort(pending.begin(), pending.end());
  const double dt = s.params.dt;
  const auto snap = [&] {
    const double t = integ.state().t;
    while (!pending.empty() && pending.front() <= t + 0.5 * dt) {
      write_snapshot((dir / snapshot_name(pending.front())).string(), integ.state().cur, t);
      pending.erase(pending.begin());
    }
  };

  std::vector<DiagnosticsRecord> records{integ.initial_record()};
  double xi_dev = 0;
  snap();
  try {
    run(integ, s.params.T, [&](const StepReport& r) {
      records.push_back(r.record);
      xi_dev = std::max(xi_dev, std::abs(r.record.xi - 1));
      snap();
      return true;
    });
  } catch (...) {
    write_diagnostics_csv((dir / "diagnostics.csv").string(), records, ns);
    throw;
  }
  write_diagnostics_csv((dir / "diagnostics.csv").string(), records, ns);

  const DiagnosticsRecord& last = records.back();
  out << s.name << ": " << integ.state().step << " steps, t = " << last.t << ", " << rr.nx << "x" << rr.ny
      << " cells\n";
  out << "  E_h " << records.front().E_h << " -> " << last.E_h << ", max |xi - 1| " << xi_dev << "\n";
  for (int i = 0; i < ns; ++i)
    out << "  species " << i << ": mass " << last.mass[static_cast<std::size_t>(i)] << ", min c "
        << last.min_c[static_cast<std::size_t>(i)] << "\n";
  if (rr.manufactured) {
    const auto e = solution_errors(integ, exact, integ.state().t);
    out << "  L2 errors u " << e[0] << ", p " << e[1] << ", c_p " << e[2] << ", c_n " << e[3] << ", V " << e[4]
        << "\n";
  }
  out << "  wrote " << (dir / "diagnostics.csv").string() << "\n";
  return 0;
}

int converge(Index cells, const std::vector<long>& steps, const std::string& dir_name, std::ostream& out) {
  if (cells < 1) throw ConfigError("--h-cells must be positive", "h-cells");
  if (steps.empty()) throw ConfigError("--steps is empty", "steps");
  for (std::size_t k = 0; k < steps.size(); ++k)
    if (steps[k] < 1 || (k > 0 && steps[k] <= steps[k - 1]))
      throw ConfigError("--steps must be increasing positive integers", "steps");
  const Params params = manufactured_params();
  const ConvergenceTable table = convergence_study(steps, cells, params, params.T);
  const std::string csv = convergence_csv(table);
  const std::filesystem::path dir(dir_name);
  std::filesystem::create_directories(dir);
  write_text((dir / "convergence.csv").string(), csv);

  static const char* names[5] = {"u", "p", "c_p", "c_n", "V"};
  char buf[160];
  std::snprintf(buf, sizeof buf, "h = sqrt(2)/%ld, T = %g\n%6s %10s", static_cast<long>(cells), table.T, "N", "dt");
  out << buf;
  for (const char* n : names) {
    std::snprintf(buf, sizeof buf, " %11s %5s", ("err_" + std::string(n)).c_str(), "order");
    out << buf;
  }
  out << "\n";
  for (const auto& row : table.rows) {
    std::snprintf(buf, sizeof buf, "%6ld %10.3e", row.N, row.dt);
    out << buf;
    for (std::size_t f = 0; f < 5; ++f) {
      if (std::isnan(row.order[f]))
        std::snprintf(buf, sizeof buf, " %11.4e %5s", row.err[f], "-");
      else
        std::snprintf(buf, sizeof buf, " %11.4e %5.2f", row.err[f], row.order[f]);
      out << buf;
    }
    out << "\n";
  }
  out << "wrote " << (dir / "convergence.csv").string() << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"SAV finite-element solver for Carreau flow coupled to steric PNP"};
  app.require_subcommand(1);

  std::string config_path, run_out;
  auto* run_cmd = app.add_subcommand("run", "run a simulation from a key = value config file");
  run_cmd->add_option("--config", config_path, "config file")->required();
  run_cmd->add_option("--out", run_out, "output directory (overrides the config)");

  Index h_cells = 64;
  std::vector<long> steps{8, 16, 32, 64};
  std::string conv_out = ".";
  auto* conv_cmd = app.add_subcommand("converge", "temporal convergence study on the manufactured solution");
  conv_cmd->add_option("--h-cells", h_cells, "cells per side");
  conv_cmd->add_option("--steps", steps, "step counts")->delimiter(',');
  conv_cmd->add_option("--out", conv_out, "output directory");

  std::string scen_name, scen_out;
  std::vector<std::string> overrides;
  auto* scen_cmd = app.add_subcommand("scenario", "run a named scenario (desk profile unless profile=full)");
  scen_cmd->add_option("name", scen_name, "scenario name")->required();
  scen_cmd->add_option("overrides", overrides, "key=value overrides");
  scen_cmd->add_option("--out", scen_out, "output directory");

  auto* list_cmd = app.add_subcommand("list-scenarios", "print the scenario families");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*list_cmd) {
      for (const auto& line : scenario_families()) out << line << "\n";
      return 0;
    }
    if (*conv_cmd) return converge(h_cells, steps, conv_out, out);
    RunConfig cfg;
    if (*run_cmd) {
      std::string text;
      try {
        text = read_text(config_path);
      } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
      }
      cfg = parse_config(text);
      if (!run_out.empty()) cfg.out = run_out;
    } else {
      cfg.scenario = scen_name;
      cfg.profile = "desk";
      apply_override(cfg, "scenario=" + scen_name);
      for (const auto& o : overrides) apply_override(cfg, o);
      if (!scen_out.empty()) cfg.out = scen_out;
    }
    return execute(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ArgumentError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const StructuralError& e) {
    err << "structural failure: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace spnp
