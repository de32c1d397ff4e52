#include "platedpg/dpg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

#include "platedpg/errors.hpp"
#include "platedpg/kernels.hpp"
#include "platedpg/polyquad.hpp"

namespace platedpg {

namespace {

constexpr std::size_t kXX = 9, kXY = 13, kYY = 17;

// The three quadratic tensors xi^2 E11, xi eta E12, eta^2 E22 share the same
// constant divdiv. Replacing the last two by their differences with the first
// leaves a single test function with nonzero divdiv, so the Gram matrix has no
// rank-one term of size h^-4 spread over three rows (which cancels
// catastrophically in Cholesky on small elements).
void separate_divdiv(std::span<TensorEval> th) {
  const TensorEval a = th[kXX];
  for (std::size_t i : {kXY, kYY}) {
    th[i].value = th[i].value - a.value;
    th[i].div = th[i].div - a.div;
    th[i].divdiv = 0.0;
  }
}

}  // namespace

DenseMatrix local_b(const Tri& x, const EdgeSigns& signs, const MaterialLaw& material) {
  DenseMatrix b(kNumTest, kNumTrial);
  const ScalarBasis zb(3, x);
  const TensorBasis tb(2, x);
  std::array<Sym2, 3> cinv_e;
  for (std::size_t j = 0; j < 3; ++j) cinv_e[j] = material.cinv_apply(kSymUnits[j]);

  std::vector<ScalarEval> z(zb.size());
  std::vector<TensorEval> th(tb.size());
  for (const auto& q : map_rule(tri_rule(kAssemblyDegree), x)) {
    zb.eval(q.x, z);
    TensorBasis::from_scalar(std::span(z).first(6), th);
    separate_divdiv(th);
    for (std::size_t i = 0; i < kNumScalarTest; ++i)
      for (std::size_t j = 0; j < 3; ++j) b(i, local::m + j) += q.w * contract(kSymUnits[j], z[i].hess);
    for (std::size_t i = 0; i < kNumTensorTest; ++i) {
      const std::size_t r = kNumScalarTest + i;
      b(r, local::u) += q.w * th[i].divdiv;
      for (std::size_t j = 0; j < 3; ++j) b(r, local::m + j) += q.w * contract(cinv_e[j], th[i].value);
    }
  }

  const DenseMatrix qm = qhat_pair_matrix(x, signs);
  for (std::size_t i = 0; i < kNumScalarTest; ++i)
    for (std::size_t j = 0; j < 9; ++j) b(i, local::qhat + j) = qm(i, j);
  const DenseMatrix um = uhat_pair_matrix(x);
  for (std::size_t i = 0; i < kNumTensorTest; ++i)
    for (std::size_t j = 0; j < 9; ++j) {
      const double base = i == kXY || i == kYY ? um(kXX, j) : 0.0;
      b(kNumScalarTest + i, local::uhat + j) = -(um(i, j) - base);
    }
  return b;
}

DenseMatrix local_gram(const Tri& x) {
  DenseMatrix g(kNumTest, kNumTest);
  const ScalarBasis zb(3, x);
  const auto& k = kernels::active();
  const double r2 = std::numbers::sqrt2;
  std::vector<ScalarEval> z(zb.size());
  std::vector<TensorEval> th(kNumTensorTest);
  std::array<double, kNumScalarTest> fs{};
  std::array<double, kNumTensorTest> ft{};
  for (const auto& q : map_rule(tri_rule(kAssemblyDegree), x)) {
    zb.eval(q.x, z);
    TensorBasis::from_scalar(std::span(z).first(6), th);
    separate_divdiv(th);
    // Scalar block: z z + Hess z : Hess z, one rank-one update per feature.
    for (int f = 0; f < 4; ++f) {
      for (std::size_t i = 0; i < kNumScalarTest; ++i) {
        const ScalarEval& e = z[i];
        fs[i] = f == 0 ? e.value : f == 1 ? e.hess.xx : f == 2 ? r2 * e.hess.xy : e.hess.yy;
      }
      k.sym_rank1(q.w, fs.data(), kNumScalarTest, g.data(), kNumTest);
    }
    // Tensor block: Theta : Theta + divdiv divdiv.
    for (int f = 0; f < 4; ++f) {
      for (std::size_t i = 0; i < kNumTensorTest; ++i) {
        const TensorEval& e = th[i];
        ft[i] = f == 0 ? e.value.xx : f == 1 ? r2 * e.value.xy : f == 2 ? e.value.yy : e.divdiv;
      }
      k.sym_rank1(q.w, ft.data(), kNumTensorTest, g.data() + kNumScalarTest * kNumTest + kNumScalarTest, kNumTest);
    }
  }
  return g;
}

std::vector<double> local_load(const Tri& x, const ScalarField& f) {
  std::vector<double> l(kNumTest, 0.0);
  const ScalarBasis zb(3, x);
  std::vector<ScalarEval> z(zb.size());
  for (const auto& q : map_rule(tri_rule(kAssemblyDegree), x)) {
    const double fv = f(q.x);
    if (fv == 0.0) continue;
    zb.eval(q.x, z);
    for (std::size_t i = 0; i < kNumScalarTest; ++i) l[i] -= q.w * fv * z[i].value;
  }
  return l;
}

LocalSystem local_system(const Mesh& mesh, index_t t, const ProblemSpec& problem) {
  const Tri x = mesh.coords(t);
  return {local_b(x, edge_signs(mesh, t), problem.material), local_gram(x), local_load(x, problem.load)};
}

Whitened whiten(const LocalSystem& local) {
  const std::size_t n = local.g.rows();
  const DenseMatrix l = dense_cholesky(local.g);
  Whitened w{local.b, local.load};
  const auto& k = kernels::active();
  k.trsm_lower(l.data(), n, w.w.data(), w.w.cols());
  k.trsm_lower(l.data(), n, w.rhs.data(), 1);
  return w;
}

Condensed condense(const LocalSystem& local) {
  const Whitened w = whiten(local);
  const std::size_t rows = w.w.rows(), cols = w.w.cols();
  Condensed c{DenseMatrix(cols, cols), std::vector<double>(cols)};
  const auto& k = kernels::active();
  k.gram_tn(w.w.data(), rows, cols, c.a.data());
  k.gemv_t(w.w.data(), rows, cols, w.rhs.data(), c.b.data());
  return c;
}

namespace {

unsigned thread_count(const AssemblyOptions& opt, std::size_t work) {
  unsigned n = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, work / 64)));
}

// Runs fn(t) for every triangle, splitting the range into contiguous chunks.
template <class Fn>
void for_each_triangle(std::size_t nt, const AssemblyOptions& opt, Fn fn) {
  const unsigned nthreads = thread_count(opt, nt);
  if (nthreads <= 1) {
    for (index_t t = 0; t < nt; ++t) fn(t);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nthreads);
  for (unsigned w = 0; w < nthreads; ++w)
    pool.emplace_back([&, w] {
      try {
        for (index_t t = nt * w / nthreads; t < nt * (w + 1) / nthreads; ++t) fn(t);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Condensed condense_checked(const LocalSystem& ls, index_t t) {
  try {
    return condense(ls);
  } catch (const SpdViolation& e) {
    throw SpdViolation(e.pivot(), "Gram matrix of triangle " + std::to_string(t) + " is not SPD: " + e.what());
  }
}

}  // namespace

GlobalSystem assemble(const Mesh& mesh, const DofMap& dofs, const ProblemSpec& problem, const AssemblyOptions& opt) {
  const std::size_t nt = mesh.num_triangles();
  struct Contribution {
    std::vector<index_t> cols;
    DenseMatrix a;
    std::vector<double> b;
  };
  std::vector<Contribution> parts(nt);
  for_each_triangle(nt, opt, [&](index_t t) {
    const Condensed c = condense_checked(local_system(mesh, t, problem), t);
    const DofMap::LocalReduction red = dofs.local_reduction(t);
    // b_T - A_T s, then project with P.
    std::vector<double> bs = c.b;
    const auto as = c.a * std::span<const double>(red.shift);
    for (std::size_t i = 0; i < kNumTrial; ++i) bs[i] -= as[i];
    const DenseMatrix pt = red.p.transpose();
    parts[t] = {red.cols, pt * c.a * red.p, pt * std::span<const double>(bs)};
  });

  std::size_t ntrip = 0;
  for (const auto& p : parts) ntrip += p.cols.size() * (p.cols.size() + 1) / 2;
  std::vector<Triplet> trip;
  trip.reserve(ntrip);
  GlobalSystem g;
  g.rhs.assign(dofs.num_free(), 0.0);
  for (const auto& p : parts) {
    const std::size_t k = p.cols.size();
    for (std::size_t i = 0; i < k; ++i) {
      g.rhs[p.cols[i]] += p.b[i];
      for (std::size_t j = 0; j < k; ++j)
        if (p.cols[j] <= p.cols[i] && p.a(i, j) != 0.0) trip.push_back({p.cols[i], p.cols[j], p.a(i, j)});
    }
  }
  g.scale.assign(dofs.num_free(), 0.0);
  for (const auto& t : trip)
    if (t.row == t.col) g.scale[t.row] += t.value;
  for (std::size_t i = 0; i < g.scale.size(); ++i) {
    if (!(g.scale[i] > 0.0))
      throw SpdViolation(i, "assembled system has a nonpositive diagonal entry at free DOF " + std::to_string(i));
    g.scale[i] = 1.0 / std::sqrt(g.scale[i]);
  }
  for (auto& t : trip) t.value *= g.scale[t.row] * g.scale[t.col];
  for (std::size_t i = 0; i < g.rhs.size(); ++i) g.rhs[i] *= g.scale[i];
  g.a = SparseSymmetric::from_triplets(dofs.num_free(), trip);
  return g;
}

std::vector<double> GlobalSystem::unscale(std::span<const double> y) const {
  std::vector<double> x(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) x[i] = scale[i] * y[i];
  return x;
}

std::vector<double> estimate(const Mesh& mesh, const DofMap& dofs, const ProblemSpec& problem,
                             std::span<const double> x_full, const AssemblyOptions& opt) {
  std::vector<double> eta(mesh.num_triangles(), 0.0);
  for_each_triangle(mesh.num_triangles(), opt, [&](index_t t) {
    const Whitened w = whiten(local_system(mesh, t, problem));
    std::array<double, kNumTrial> xt{};
    const auto& ld = dofs.local_dofs(t);
    for (std::size_t i = 0; i < kNumTrial; ++i) xt[i] = x_full[ld[i]];
    const auto wx = w.w * std::span<const double>(xt);
    double s = 0.0;
    for (std::size_t i = 0; i < wx.size(); ++i) s += (w.rhs[i] - wx[i]) * (w.rhs[i] - wx[i]);
    eta[t] = std::sqrt(s);
  });
  return eta;
}

Solution solve(const Mesh& mesh, const DofMap& dofs, const ProblemSpec& problem, const SolveOptions& opt) {
  const GlobalSystem sys = assemble(mesh, dofs, problem, opt.assembly);
  Solution s;
  const double nb = norm2(sys.rhs);
  if (nb == 0.0) {
    s.x_free.assign(dofs.num_free(), 0.0);
  } else {
    const SolveResult r = spd_solve(sys.a, sys.rhs, opt.tol, opt.solver);
    s.x_free = sys.unscale(r.x);
    s.report = r.report;
    s.normal_residual = r.report.relative_residual;
  }
  s.x_full = dofs.expand(s.x_free);
  s.eta = estimate(mesh, dofs, problem, s.x_full, opt.assembly);
  double e2 = 0.0;
  for (double e : s.eta) e2 += e * e;
  s.eta_total = std::sqrt(e2);
  return s;
}

}  // namespace platedpg
