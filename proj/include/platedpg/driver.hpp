#pragma once

// Uniform and adaptive refinement loops, Doerfler marking, EOCs and CSV I/O.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "platedpg/dpg.hpp"
#include "platedpg/linalg.hpp"

namespace platedpg {

enum class RefineMode { uniform, adaptive };

struct ExperimentConfig {
  std::string problem = "square";
  RefineMode mode = RefineMode::uniform;
  double theta = 0.5;
  // Unset values take problem/mode defaults: 6 uniform levels, adaptive runs
  // until 3e4 free DOFs.
  std::optional<std::size_t> max_levels;
  std::optional<std::size_t> max_dofs;
  std::string output;  // CSV path; empty disables writing
  std::string dump_mesh_prefix;
  double tol = 1e-12;
  SolverKind solver = SolverKind::sparse_cholesky;
  unsigned threads = 0;
  unsigned long long seed = 0;  // recorded only
  bool verbose = false;

  void validate() const;
};

struct ConvergenceRecord {
  std::size_t level = 0;
  std::size_t ntriangles = 0;
  std::size_t ndofs = 0;
  double eta = 0.0;
  double err_u = 0.0;
  double err_m = 0.0;
  std::optional<double> eoc_eta;
  std::optional<double> eoc_u;
  std::optional<double> eoc_m;
  // Not written to CSV.
  double normal_residual = 0.0;
};

// Minimal set carrying theta of the squared estimator. Elements are sorted by
// decreasing eta, ties by increasing id.
std::vector<index_t> dorfler_mark(std::span<const double> etas, double theta);

// log(q_i / q_{i+1}) / log(N_{i+1} / N_i), or nothing if a value is not
// positive or N does not grow.
std::optional<double> eoc(double q0, double q1, std::size_t n0, std::size_t n1);
void fill_eoc(std::vector<ConvergenceRecord>& records);

struct ExperimentResult {
  std::vector<ConvergenceRecord> records;
  Mesh final_mesh;
};

// Solve, estimate, mark, refine until the stopping rule fires. The level at
// which the DOF budget is reached is still recorded. On solver failure the
// records collected so far are written before the exception propagates.
ExperimentResult run_experiment(const ExperimentConfig& config);

void write_csv(std::ostream& os, std::span<const ConvergenceRecord> records);
void write_csv(const std::string& path, std::span<const ConvergenceRecord> records);
std::vector<ConvergenceRecord> read_csv(std::istream& is);

}  // namespace platedpg
