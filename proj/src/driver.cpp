#include "platedpg/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "platedpg/errors.hpp"

namespace platedpg {

void ExperimentConfig::validate() const {
  if (problem != "square" && problem != "zshape")
    throw ConfigurationError("unknown problem '" + problem + "' (expected square or zshape)");
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigurationError("theta must lie in (0, 1)");
  if (max_levels && *max_levels == 0) throw ConfigurationError("levels must be positive");
  if (!(tol > 0.0 && tol < 1.0)) throw ConfigurationError("tol must lie in (0, 1)");
}

std::vector<index_t> dorfler_mark(std::span<const double> etas, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigurationError("dorfler_mark: theta must lie in (0, 1)");
  std::vector<index_t> order(etas.size());
  std::iota(order.begin(), order.end(), index_t{0});
  std::stable_sort(order.begin(), order.end(), [&](index_t a, index_t b) { return etas[a] > etas[b]; });
  double total = 0.0;
  for (double e : etas) {
    if (e < 0.0) throw ConfigurationError("dorfler_mark: negative estimator value");
    total += e * e;
  }
  std::vector<index_t> marked;
  if (total == 0.0) return marked;
  double sum = 0.0;
  for (index_t t : order) {
    marked.push_back(t);
    sum += etas[t] * etas[t];
    if (sum >= theta * total) break;
  }
  return marked;
}

std::optional<double> eoc(double q0, double q1, std::size_t n0, std::size_t n1) {
  if (!(q0 > 0.0) || !(q1 > 0.0) || n1 <= n0 || n0 == 0) return std::nullopt;
  return std::log(q0 / q1) / std::log(static_cast<double>(n1) / static_cast<double>(n0));
}

void fill_eoc(std::vector<ConvergenceRecord>& r) {
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i].eoc_eta = r[i].eoc_u = r[i].eoc_m = std::nullopt;
    if (i == 0) continue;
    const auto& a = r[i - 1];
    auto& b = r[i];
    b.eoc_eta = eoc(a.eta, b.eta, a.ndofs, b.ndofs);
    b.eoc_u = eoc(a.err_u, b.err_u, a.ndofs, b.ndofs);
    b.eoc_m = eoc(a.err_m, b.err_m, a.ndofs, b.ndofs);
  }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ProblemSpec problem = builtin_problem(cfg.problem);
  const bool adaptive = cfg.mode == RefineMode::adaptive;
  const std::size_t max_levels = cfg.max_levels.value_or(adaptive ? 60 : 6);
  const std::size_t max_dofs = cfg.max_dofs.value_or(adaptive ? 30000 : static_cast<std::size_t>(-1));

  SolveOptions sopt;
  sopt.tol = cfg.tol;
  sopt.solver = cfg.solver;
  sopt.assembly.threads = cfg.threads;

  ExperimentResult out;
  Mesh mesh = problem.initial_mesh;
  auto flush = [&] {
    fill_eoc(out.records);
    if (!cfg.output.empty()) write_csv(cfg.output, out.records);
  };
  for (std::size_t level = 0; level < max_levels; ++level) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!cfg.dump_mesh_prefix.empty()) write_mesh(cfg.dump_mesh_prefix + "_" + std::to_string(level) + ".txt", mesh);
    const DofMap dofs = DofMap::build(mesh, problem.bc(mesh));
    if (level == 0 && dofs.num_free() > max_dofs)
      throw ConfigurationError("max-dofs " + std::to_string(max_dofs) + " is below the " +
                               std::to_string(dofs.num_free()) + " free DOFs of the initial mesh");
    Solution sol;
    try {
      sol = solve(mesh, dofs, problem, sopt);
    } catch (...) {
      flush();
      throw;
    }
    ConvergenceRecord rec;
    rec.level = level;
    rec.ntriangles = mesh.num_triangles();
    rec.ndofs = dofs.num_free();
    rec.eta = sol.eta_total;
    rec.normal_residual = sol.normal_residual;
    if (problem.exact) {
      std::vector<double> uh(mesh.num_triangles());
      std::vector<Sym2> mh(mesh.num_triangles());
      for (index_t t = 0; t < mesh.num_triangles(); ++t) {
        uh[t] = sol.u(dofs, t);
        mh[t] = sol.m(dofs, t);
      }
      const L2Errors e = l2_errors(mesh, uh, mh, *problem.exact);
      rec.err_u = e.u;
      rec.err_m = e.m;
    }
    out.records.push_back(rec);
    if (cfg.verbose) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::fprintf(stderr, "level %zu: T=%zu N=%zu eta=%.6e err_u=%.6e err_M=%.6e (%.2fs)\n", level, rec.ntriangles,
                   rec.ndofs, rec.eta, rec.err_u, rec.err_m, secs);
    }
    if (rec.ndofs >= max_dofs || level + 1 == max_levels) break;
    if (adaptive) {
      const auto marked = dorfler_mark(sol.eta, cfg.theta);
      if (marked.empty()) break;
      mesh = nvb_refine(mesh, marked);
    } else {
      mesh = uniform_refine(mesh);
    }
  }
  flush();
  out.final_mesh = mesh;
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

}  // namespace

void write_csv(std::ostream& os, std::span<const ConvergenceRecord> records) {
  os << "level,ntriangles,ndofs,eta,err_u,err_M,eoc_eta,eoc_u,eoc_M\n";
  for (const auto& r : records)
    os << r.level << ',' << r.ntriangles << ',' << r.ndofs << ',' << fmt(r.eta) << ',' << fmt(r.err_u) << ','
       << fmt(r.err_m) << ',' << fmt(r.eoc_eta) << ',' << fmt(r.eoc_u) << ',' << fmt(r.eoc_m) << '\n';
}

void write_csv(const std::string& path, std::span<const ConvergenceRecord> records) {
  std::ofstream os(path);
  if (!os) throw ConfigurationError("cannot open output file " + path);
  write_csv(os, records);
}

std::vector<ConvergenceRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigurationError("CSV: missing header");
  std::vector<ConvergenceRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 9) throw ConfigurationError("CSV: expected 9 columns in '" + line + "'");
    auto opt = [](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return std::strtod(s.c_str(), nullptr);
    };
    ConvergenceRecord r;
    r.level = std::stoul(f[0]);
    r.ntriangles = std::stoul(f[1]);
    r.ndofs = std::stoul(f[2]);
    r.eta = std::strtod(f[3].c_str(), nullptr);
    r.err_u = std::strtod(f[4].c_str(), nullptr);
    r.err_m = std::strtod(f[5].c_str(), nullptr);
    r.eoc_eta = opt(f[6]);
    r.eoc_u = opt(f[7]);
    r.eoc_m = opt(f[8]);
    out.push_back(r);
  }
  return out;
}

}  // namespace platedpg
