#include "platedpg/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "platedpg/errors.hpp"

namespace platedpg {

EdgeSigns edge_signs(const Mesh& mesh, index_t t) {
  return {mesh.edge_sign(t, 0), mesh.edge_sign(t, 1), mesh.edge_sign(t, 2)};
}

LocalEdge local_edge(const Tri& x, int k) {
  LocalEdge e;
  e.a = x[static_cast<std::size_t>((k + 1) % 3)];
  e.b = x[static_cast<std::size_t>((k + 2) % 3)];
  e.length = norm(e.b - e.a);
  e.t = (1.0 / e.length) * (e.b - e.a);
  e.n = rotate_cw(e.t);
  return e;
}

DenseMatrix uhat_pair_matrix(const Tri& x) {
  DenseMatrix p(kNumTensorTest, 9);
  const TensorBasis basis(2, x);
  const auto& rule = edge_rule(kEdgePoints);
  std::vector<TensorEval> th(basis.size());
  for (int k = 0; k < 3; ++k) {
    const LocalEdge e = local_edge(x, k);
    const int ca = (k + 1) % 3, cb = (k + 2) % 3;
    const double len = e.length;
    for (const auto& q : map_rule(rule, e.a, e.b)) {
      const double s = q.s / len;
      const double h0 = 1.0 - 3.0 * s * s + 2.0 * s * s * s;
      const double h1 = len * (s - 2.0 * s * s + s * s * s);
      const double h2 = 3.0 * s * s - 2.0 * s * s * s;
      const double h3 = len * (-s * s + s * s * s);
      const double d0 = (-6.0 * s + 6.0 * s * s) / len;
      const double d1 = 1.0 - 4.0 * s + 3.0 * s * s;
      const double d2 = (6.0 * s - 6.0 * s * s) / len;
      const double d3 = -2.0 * s + 3.0 * s * s;
      basis.eval(q.x, th);
      for (std::size_t i = 0; i < basis.size(); ++i) {
        const TensorEdgeTrace tr = edge_trace(th[i], e.t, e.n);
        auto row = p.row(i);
        auto add_vertex = [&](int c, double hv, double dv, double hs, double ds, double lin) {
          const std::size_t j = 3 * static_cast<std::size_t>(c);
          row[j] += q.w * (tr.n_div * hv - tr.t_theta_n * dv);
          row[j + 1] += q.w * (e.t.x * (tr.n_div * hs - tr.t_theta_n * ds) - tr.n_theta_n * e.n.x * lin);
          row[j + 2] += q.w * (e.t.y * (tr.n_div * hs - tr.t_theta_n * ds) - tr.n_theta_n * e.n.y * lin);
        };
        add_vertex(ca, h0, d0, h1, d1, 1.0 - s);
        add_vertex(cb, h2, d2, h3, d3, s);
      }
    }
  }
  return p;
}

double uhat_pair_local(const Tri& x, const std::array<UhatVertex, 3>& udofs, std::span<const double> theta) {
  const DenseMatrix p = uhat_pair_matrix(x);
  std::array<double, 9> u{};
  for (int c = 0; c < 3; ++c) {
    u[3 * static_cast<std::size_t>(c)] = udofs[static_cast<std::size_t>(c)].v;
    u[3 * static_cast<std::size_t>(c) + 1] = udofs[static_cast<std::size_t>(c)].grad.x;
    u[3 * static_cast<std::size_t>(c) + 2] = udofs[static_cast<std::size_t>(c)].grad.y;
  }
  const auto pu = p * std::span<const double>(u);
  double r = 0.0;
  for (std::size_t i = 0; i < pu.size(); ++i) r += theta[i] * pu[i];
  return r;
}

DenseMatrix qhat_pair_matrix(const Tri& x, const EdgeSigns& signs) {
  DenseMatrix qm(kNumScalarTest, 9);
  const ScalarBasis basis(3, x);
  const auto& rule = edge_rule(kEdgePoints);
  std::vector<ScalarEval> z(basis.size());
  for (int k = 0; k < 3; ++k) {
    const LocalEdge e = local_edge(x, k);
    const double s = signs[static_cast<std::size_t>(k)];
    const std::size_t ja = 2 * static_cast<std::size_t>(k), jb = ja + 1;
    for (const auto& q : map_rule(rule, e.a, e.b)) {
      basis.eval(q.x, z);
      for (std::size_t i = 0; i < basis.size(); ++i) {
        qm(i, ja) += s * q.w / e.length * z[i].value;
        qm(i, jb) -= q.w / e.length * dot(e.n, z[i].grad);
      }
    }
  }
  for (int c = 0; c < 3; ++c) {
    basis.eval(x[static_cast<std::size_t>(c)], z);
    for (std::size_t i = 0; i < basis.size(); ++i) qm(i, 6 + static_cast<std::size_t>(c)) = -z[i].value;
  }
  return qm;
}

double qhat_pair_local(const Tri& x, const EdgeSigns& signs, const QhatLocal& q, std::span<const double> z) {
  const DenseMatrix qm = qhat_pair_matrix(x, signs);
  std::array<double, 9> g{};
  for (std::size_t k = 0; k < 3; ++k) {
    g[2 * k] = signs[k] * q.alpha[k];
    g[2 * k + 1] = signs[k] * q.beta[k];
    g[6 + k] = q.gamma[k];
  }
  const auto qg = qm * std::span<const double>(g);
  double r = 0.0;
  for (std::size_t i = 0; i < qg.size(); ++i) r += z[i] * qg[i];
  return r;
}

QhatLocal qhat_from_tensor(const Tri& x, const EdgeSigns& signs, const TensorField& m, const VectorField& div_m) {
  QhatLocal out;
  const auto& rule = edge_rule(kEdgePoints);
  std::array<LocalEdge, 3> edges;
  for (int k = 0; k < 3; ++k) {
    const LocalEdge e = local_edge(x, k);
    edges[static_cast<std::size_t>(k)] = e;
    double a = 0.0, b = 0.0;
    for (const auto& q : map_rule(rule, e.a, e.b)) {
      a += q.w * dot(e.n, div_m(q.x));
      b += q.w * bilinear(e.n, m(q.x), e.n);
    }
    a += bilinear(e.t, m(e.b), e.n) - bilinear(e.t, m(e.a), e.n);
    out.alpha[static_cast<std::size_t>(k)] = a;
    out.beta[static_cast<std::size_t>(k)] = signs[static_cast<std::size_t>(k)] * b;
  }
  for (int c = 0; c < 3; ++c) {
    const Vec2 p = x[static_cast<std::size_t>(c)];
    const Sym2 mp = m(p);
    const LocalEdge& arriving = edges[static_cast<std::size_t>((c + 1) % 3)];
    const LocalEdge& leaving = edges[static_cast<std::size_t>((c + 2) % 3)];
    out.gamma[static_cast<std::size_t>(c)] =
        bilinear(arriving.t, mp, arriving.n) - bilinear(leaving.t, mp, leaving.n);
  }
  return out;
}

BCSpec interpolate_uhat_bc(const ScalarField& u, const VectorField& grad_u, const Mesh& mesh) {
  BCSpec bc;
  for (index_t v = 0; v < mesh.num_vertices(); ++v) {
    if (!mesh.vertex(v).on_boundary) continue;
    const Vec2 p = mesh.vertex(v).x;
    const Vec2 g = grad_u(p);
    bc.vertex.push_back({v, {1.0, 0.0, 0.0}, u(p)});
    bc.vertex.push_back({v, {0.0, 1.0, 0.0}, g.x});
    bc.vertex.push_back({v, {0.0, 0.0, 1.0}, g.y});
  }
  return bc;
}

BCSpec simply_supported_bc(const Mesh& mesh) {
  std::vector<std::vector<Vec2>> tangents(mesh.num_vertices());
  BCSpec bc;
  for (index_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& ed = mesh.edge(e);
    if (!ed.on_boundary) continue;
    tangents[ed.v[0]].push_back(ed.tangent);
    tangents[ed.v[1]].push_back(ed.tangent);
    bc.edge.push_back({e, {0.0, 1.0}, 0.0});
  }
  for (index_t v = 0; v < mesh.num_vertices(); ++v) {
    const auto& t = tangents[v];
    if (t.empty()) continue;
    bc.vertex.push_back({v, {1.0, 0.0, 0.0}, 0.0});
    const bool straight = t.size() == 2 && std::abs(cross(t[0], t[1])) <= 1e-10;
    if (straight) {
      bc.vertex.push_back({v, {0.0, t[0].x, t[0].y}, 0.0});
    } else {
      bc.vertex.push_back({v, {0.0, 1.0, 0.0}, 0.0});
      bc.vertex.push_back({v, {0.0, 0.0, 1.0}, 0.0});
    }
  }
  return bc;
}

namespace {

// Affine parametrization {x : C x = d} = {x_p + N y} of one constrained
// block of dimension n.
struct BlockParam {
  std::vector<double> particular;
  std::vector<std::vector<double>> null_basis;
};

template <std::size_t N>
BlockParam parametrize(const std::vector<std::pair<std::array<double, N>, double>>& rows, const std::string& who) {
  std::vector<std::array<double, N>> q;
  std::vector<double> rhs;
  auto reduce = [&](std::array<double, N>& v, double& d) {
    for (std::size_t r = 0; r < q.size(); ++r) {
      double c = 0.0;
      for (std::size_t i = 0; i < N; ++i) c += q[r][i] * v[i];
      for (std::size_t i = 0; i < N; ++i) v[i] -= c * q[r][i];
      d -= c * rhs[r];
    }
  };
  auto length = [](const std::array<double, N>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  for (const auto& [coeffs, value] : rows) {
    auto v = coeffs;
    double d = value;
    const double n0 = length(v);
    reduce(v, d);
    const double n1 = length(v);
    if (!(n0 > 0.0) || n1 <= 1e-10 * n0)
      throw ConfigurationError(who + ": boundary constraints are linearly dependent (over-constrained)");
    for (auto& x : v) x /= n1;
    q.push_back(v);
    rhs.push_back(d / n1);
  }
  BlockParam p;
  p.particular.assign(N, 0.0);
  for (std::size_t r = 0; r < q.size(); ++r)
    for (std::size_t i = 0; i < N; ++i) p.particular[i] += rhs[r] * q[r][i];
  for (std::size_t e = 0; e < N && q.size() < N; ++e) {
    std::array<double, N> v{};
    v[e] = 1.0;
    double dummy = 0.0;
    reduce(v, dummy);
    const double n1 = length(v);
    if (n1 <= 1e-6) continue;
    for (auto& x : v) x /= n1;
    q.push_back(v);
    rhs.push_back(0.0);
    p.null_basis.emplace_back(v.begin(), v.end());
  }
  return p;
}

}  // namespace

DofMap DofMap::build(const Mesh& mesh, const BCSpec& bc) {
  const std::size_t nt = mesh.num_triangles(), nv = mesh.num_vertices(), ne = mesh.num_edges();
  DofMap d;
  const std::array<std::size_t, kNumBlocks> sizes{nt, 3 * nt, 3 * nv, ne, ne, 3 * nt};
  for (std::size_t b = 0; b < kNumBlocks; ++b) d.offset_[b + 1] = d.offset_[b] + sizes[b];
  const std::size_t nfull = d.offset_[kNumBlocks];

  std::vector<std::vector<std::pair<index_t, double>>> rows(nfull);
  std::vector<double> shift(nfull, 0.0);
  index_t next = 0;

  d.free_offset_[0] = 0;
  for (index_t i = 0; i < d.offset_[2]; ++i) rows[i].emplace_back(next++, 1.0);
  d.free_offset_[1] = nt;
  d.free_offset_[2] = next;

  // uhat
  std::vector<std::vector<std::pair<std::array<double, 3>, double>>> vc(nv);
  for (const auto& c : bc.vertex) {
    if (c.vertex >= nv) throw ConfigurationError("boundary constraint references missing vertex " + std::to_string(c.vertex));
    vc[c.vertex].emplace_back(c.coeffs, c.value);
  }
  for (index_t v = 0; v < nv; ++v) {
    const index_t base = d.uhat_dof(v, 0);
    if (vc[v].empty()) {
      for (int c = 0; c < 3; ++c) rows[base + static_cast<index_t>(c)].emplace_back(next++, 1.0);
      continue;
    }
    const BlockParam p = parametrize<3>(vc[v], "vertex " + std::to_string(v));
    for (std::size_t c = 0; c < 3; ++c) shift[base + c] = p.particular[c];
    for (const auto& nb : p.null_basis) {
      for (std::size_t c = 0; c < 3; ++c)
        if (std::abs(nb[c]) > 1e-15) rows[base + c].emplace_back(next, nb[c]);
      ++next;
    }
  }
  d.free_offset_[3] = next;

  // alpha / beta
  std::vector<std::vector<std::pair<std::array<double, 2>, double>>> ec(ne);
  for (const auto& c : bc.edge) {
    if (c.edge >= ne) throw ConfigurationError("boundary constraint references missing edge " + std::to_string(c.edge));
    ec[c.edge].emplace_back(c.coeffs, c.value);
  }
  std::vector<BlockParam> eparam(ne);
  for (index_t e = 0; e < ne; ++e) {
    if (ec[e].empty()) {
      eparam[e].particular = {0.0, 0.0};
      eparam[e].null_basis = {{1.0, 0.0}, {0.0, 1.0}};
    } else {
      const Edge& ed = mesh.edge(e);
      eparam[e] = parametrize<2>(ec[e], "edge " + std::to_string(e) + " (" + std::to_string(ed.v[0]) + ", " +
                                            std::to_string(ed.v[1]) + ")");
    }
    shift[d.alpha_dof(e)] = eparam[e].particular[0];
    shift[d.beta_dof(e)] = eparam[e].particular[1];
  }
  for (int pass = 0; pass < 2; ++pass) {
    for (index_t e = 0; e < ne; ++e)
      for (const auto& nb : eparam[e].null_basis) {
        const int owner = std::abs(nb[0]) >= std::abs(nb[1]) ? 0 : 1;
        if (owner != pass) continue;
        if (std::abs(nb[0]) > 1e-15) rows[d.alpha_dof(e)].emplace_back(next, nb[0]);
        if (std::abs(nb[1]) > 1e-15) rows[d.beta_dof(e)].emplace_back(next, nb[1]);
        ++next;
      }
    d.free_offset_[4 + static_cast<std::size_t>(pass)] = next;
  }

  // gamma: one corner value per interior-vertex patch is eliminated.
  auto local_index = [&](index_t t, index_t v) {
    const auto& tv = mesh.triangle(t).v;
    return static_cast<int>(std::find(tv.begin(), tv.end(), v) - tv.begin());
  };
  std::vector<char> eliminated(3 * nt, 0);
  for (index_t v = 0; v < nv; ++v) {
    if (mesh.vertex(v).on_boundary) continue;
    const index_t rep = mesh.vertex_patch(v).back();
    eliminated[3 * rep + static_cast<index_t>(local_index(rep, v))] = 1;
  }
  std::vector<index_t> gamma_free(3 * nt, kNoIndex);
  for (index_t i = 0; i < 3 * nt; ++i)
    if (!eliminated[i]) {
      gamma_free[i] = next;
      rows[d.offset_[5] + i].emplace_back(next++, 1.0);
    }
  for (index_t v = 0; v < nv; ++v) {
    if (mesh.vertex(v).on_boundary) continue;
    const auto patch = mesh.vertex_patch(v);
    const index_t rep = patch.back();
    auto& row = rows[d.gamma_dof(rep, local_index(rep, v))];
    for (std::size_t k = 0; k + 1 < patch.size(); ++k)
      row.emplace_back(gamma_free[3 * patch[k] + static_cast<index_t>(local_index(patch[k], v))], -1.0);
  }
  d.free_offset_[6] = next;
  d.num_free_ = next;

  d.row_ptr_.assign(nfull + 1, 0);
  for (index_t i = 0; i < nfull; ++i) {
    for (const auto& [c, v] : rows[i]) {
      d.col_.push_back(c);
      d.val_.push_back(v);
    }
    d.row_ptr_[i + 1] = d.col_.size();
  }
  d.shift_ = std::move(shift);

  d.local_dofs_.resize(nt);
  for (index_t t = 0; t < nt; ++t) {
    const Triangle& tr = mesh.triangle(t);
    auto& l = d.local_dofs_[t];
    l[local::u] = d.u_dof(t);
    for (int c = 0; c < 3; ++c) l[local::m + static_cast<std::size_t>(c)] = d.m_dof(t, c);
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < 3; ++k) l[local::uhat_dof(c, k)] = d.uhat_dof(tr.v[static_cast<std::size_t>(c)], k);
    for (int k = 0; k < 3; ++k) {
      l[local::alpha_dof(k)] = d.alpha_dof(tr.e[static_cast<std::size_t>(k)]);
      l[local::beta_dof(k)] = d.beta_dof(tr.e[static_cast<std::size_t>(k)]);
      l[local::gamma_dof(k)] = d.gamma_dof(t, k);
    }
  }
  return d;
}

std::vector<double> DofMap::expand(std::span<const double> free) const {
  if (free.size() != num_free_) throw ConfigurationError("DofMap::expand: free vector has wrong size");
  std::vector<double> x(shift_);
  for (index_t i = 0; i < x.size(); ++i)
    for (index_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) x[i] += val_[p] * free[col_[p]];
  return x;
}

DofMap::LocalReduction DofMap::local_reduction(index_t t) const {
  LocalReduction r;
  const auto& dofs = local_dofs_[t];
  for (index_t full : dofs)
    for (index_t p = row_ptr_[full]; p < row_ptr_[full + 1]; ++p)
      if (std::find(r.cols.begin(), r.cols.end(), col_[p]) == r.cols.end()) r.cols.push_back(col_[p]);
  r.p = DenseMatrix(kNumTrial, r.cols.size());
  for (std::size_t l = 0; l < kNumTrial; ++l) {
    const index_t full = dofs[l];
    r.shift[l] = shift_[full];
    for (index_t p = row_ptr_[full]; p < row_ptr_[full + 1]; ++p) {
      const auto j = static_cast<std::size_t>(std::find(r.cols.begin(), r.cols.end(), col_[p]) - r.cols.begin());
      r.p(l, j) += val_[p];
    }
  }
  return r;
}

std::vector<double> interpolate_full(const Mesh& mesh, const DofMap& dofs, const SmoothFields& f) {
  std::vector<double> x(dofs.num_full(), 0.0);
  const auto& rule = tri_rule(kErrorDegree);
  for (index_t t = 0; t < mesh.num_triangles(); ++t) {
    const Tri tx = mesh.coords(t);
    const double area = signed_area(tx);
    double u = 0.0;
    Sym2 m;
    for (const auto& q : map_rule(rule, tx)) {
      u += q.w * f.u(q.x);
      m += q.w * f.m(q.x);
    }
    x[dofs.u_dof(t)] = u / area;
    x[dofs.m_dof(t, 0)] = m.xx / area;
    x[dofs.m_dof(t, 1)] = m.xy / area;
    x[dofs.m_dof(t, 2)] = m.yy / area;
    const QhatLocal q = qhat_from_tensor(tx, edge_signs(mesh, t), f.m, f.div_m);
    for (int c = 0; c < 3; ++c) x[dofs.gamma_dof(t, c)] = q.gamma[static_cast<std::size_t>(c)];
  }
  for (index_t v = 0; v < mesh.num_vertices(); ++v) {
    const Vec2 p = mesh.vertex(v).x;
    const Vec2 g = f.grad_u(p);
    x[dofs.uhat_dof(v, 0)] = f.u(p);
    x[dofs.uhat_dof(v, 1)] = g.x;
    x[dofs.uhat_dof(v, 2)] = g.y;
  }
  const auto& erule = edge_rule(kEdgePoints);
  for (index_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& ed = mesh.edge(e);
    const Vec2 lo = mesh.vertex(ed.v[0]).x, hi = mesh.vertex(ed.v[1]).x;
    double a = 0.0, b = 0.0;
    for (const auto& q : map_rule(erule, lo, hi)) {
      a += q.w * dot(ed.normal, f.div_m(q.x));
      b += q.w * bilinear(ed.normal, f.m(q.x), ed.normal);
    }
    a += bilinear(ed.tangent, f.m(hi), ed.normal) - bilinear(ed.tangent, f.m(lo), ed.normal);
    x[dofs.alpha_dof(e)] = a;
    x[dofs.beta_dof(e)] = b;
  }
  return x;
}

}  // namespace platedpg
