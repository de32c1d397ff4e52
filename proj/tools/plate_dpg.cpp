// plate-dpg: convergence experiments for the ultraweak DPG plate solver.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "platedpg/driver.hpp"
#include "platedpg/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ultraweak DPG solver for Kirchhoff-Love plates"};
  app.require_subcommand(1);

  platedpg::ExperimentConfig cfg;
  std::string mode = "uniform";
  std::string solver = "cholesky";
  std::size_t levels = 0, max_dofs = 0;

  auto* run = app.add_subcommand("run", "Run a uniform or adaptive convergence experiment");
  run->add_option("--problem", cfg.problem, "Benchmark problem")->check(CLI::IsMember({"square", "zshape"}))->required();
  run->add_option("--mode", mode, "Refinement mode")->check(CLI::IsMember({"uniform", "adaptive"}))->required();
  run->add_option("--theta", cfg.theta, "Doerfler bulk parameter")->default_val(0.5);
  auto* lv = run->add_option("--levels", levels, "Maximum number of levels (default 6 uniform, 60 adaptive)");
  auto* md = run->add_option("--max-dofs", max_dofs, "Stop after the level reaching this many free DOFs");
  run->add_option("--tol", cfg.tol, "Relative residual tolerance of the linear solve")->default_val(1e-12);
  run->add_option("--out", cfg.output, "CSV output path")->required();
  run->add_option("--dump-mesh", cfg.dump_mesh_prefix, "Write <prefix>_<level>.txt mesh dumps");
  run->add_option("--solver", solver, "Linear solver")->check(CLI::IsMember({"cholesky", "cg"}))->default_val("cholesky");
  run->add_option("--threads", cfg.threads, "Assembly threads (0 = all cores)")->default_val(0);
  run->add_option("--seed", cfg.seed, "Recorded in the log only")->default_val(0);
  run->add_flag("-v,--verbose", cfg.verbose, "Print one line per level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  cfg.mode = mode == "adaptive" ? platedpg::RefineMode::adaptive : platedpg::RefineMode::uniform;
  cfg.solver = solver == "cg" ? platedpg::SolverKind::conjugate_gradient : platedpg::SolverKind::sparse_cholesky;
  if (lv->count()) cfg.max_levels = levels;
  if (md->count()) cfg.max_dofs = max_dofs;

  try {
    const auto result = platedpg::run_experiment(cfg);
    platedpg::write_csv(std::cout, result.records);
  } catch (const platedpg::ConfigurationError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const platedpg::StructuralError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const platedpg::ConvergenceError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const platedpg::SpdViolation& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  }
  return 0;
}
