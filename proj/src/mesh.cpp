#include "platedpg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <utility>

#include "platedpg/errors.hpp"

namespace platedpg {

namespace {

std::uint64_t edge_key(index_t a, index_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

int longest_edge(const Triangle& t, std::span<const Vec2> x) {
  int best = 0;
  double best_len = -1.0;
  index_t best_opp = kNoIndex;
  for (int k = 0; k < 3; ++k) {
    const index_t a = t.v[static_cast<std::size_t>((k + 1) % 3)];
    const index_t b = t.v[static_cast<std::size_t>((k + 2) % 3)];
    const double len = norm(x[b] - x[a]);
    const index_t opp = t.v[static_cast<std::size_t>(k)];
    if (len > best_len || (len == best_len && opp < best_opp)) {
      best = k;
      best_len = len;
      best_opp = opp;
    }
  }
  return best;
}

// Strictly inside segment [a, b], up to a relative tolerance.
bool inside_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double l2 = dot(d, d);
  const double s = dot(p - a, d) / l2;
  if (s <= 1e-12 || s >= 1.0 - 1e-12) return false;
  return std::abs(cross(d, p - a)) <= 1e-12 * l2;
}

}  // namespace

Mesh Mesh::from_arrays(std::span<const Vec2> coords, std::span<const std::array<index_t, 3>> triangles) {
  std::vector<Triangle> tris(triangles.size());
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    auto v = triangles[t];
    for (index_t i : v)
      if (i >= coords.size())
        throw StructuralError("triangle " + std::to_string(t) + " references missing vertex " + std::to_string(i));
    const double a = signed_area({coords[v[0]], coords[v[1]], coords[v[2]]});
    if (a < 0.0) {
      std::swap(v[1], v[2]);
      std::clog << "platedpg: reoriented clockwise triangle " << t << " to counterclockwise\n";
    }
    tris[t].v = v;
    tris[t].refinement_edge = longest_edge(tris[t], coords);
  }
  return build({coords.begin(), coords.end()}, std::move(tris), true);
}

Mesh Mesh::from_arrays(std::span<const Vec2> coords, std::span<const std::array<index_t, 3>> triangles,
                       std::span<const int> refinement_edges, std::span<const int> generations) {
  if (refinement_edges.size() != triangles.size() || generations.size() != triangles.size())
    throw StructuralError("refinement edge / generation arrays do not match the triangle count");
  std::vector<Triangle> tris(triangles.size());
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    for (index_t i : triangles[t])
      if (i >= coords.size())
        throw StructuralError("triangle " + std::to_string(t) + " references missing vertex " + std::to_string(i));
    if (refinement_edges[t] < 0 || refinement_edges[t] > 2)
      throw StructuralError("triangle " + std::to_string(t) + " has invalid refinement edge");
    tris[t].v = triangles[t];
    tris[t].refinement_edge = refinement_edges[t];
    tris[t].generation = generations[t];
  }
  return build({coords.begin(), coords.end()}, std::move(tris), true);
}

Mesh Mesh::build(std::vector<Vec2> coords, std::vector<Triangle> tris, bool validate) {
  Mesh m;
  m.vertices_.resize(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!std::isfinite(coords[i].x) || !std::isfinite(coords[i].y))
      throw StructuralError("vertex " + std::to_string(i) + " has non-finite coordinates");
    m.vertices_[i].x = coords[i];
  }

  for (std::size_t t = 0; t < tris.size(); ++t) {
    Triangle& tr = tris[t];
    const Tri x{coords[tr.v[0]], coords[tr.v[1]], coords[tr.v[2]]};
    const double a = signed_area(x);
    const double d = diameter(x);
    if (!(a > 1e-14 * d * d))
      throw StructuralError("triangle " + std::to_string(t) + " is degenerate or clockwise (signed area " +
                            std::to_string(a) + ")");
    m.shape_bound_ = std::max(m.shape_bound_, d * d / a);
    for (int k = 0; k < 3; ++k) {
      const index_t va = tr.v[static_cast<std::size_t>((k + 1) % 3)];
      const index_t vb = tr.v[static_cast<std::size_t>((k + 2) % 3)];
      const auto key = edge_key(va, vb);
      auto [it, inserted] = m.edge_lookup_.try_emplace(key, m.edges_.size());
      if (inserted) {
        Edge e;
        e.v = {std::min(va, vb), std::max(va, vb)};
        const Vec2 dv = coords[e.v[1]] - coords[e.v[0]];
        e.length = norm(dv);
        e.tangent = (1.0 / e.length) * dv;
        e.normal = rotate_cw(e.tangent);
        e.tri[0] = t;
        m.edges_.push_back(e);
      } else {
        Edge& e = m.edges_[it->second];
        if (e.tri[1] != kNoIndex)
          throw StructuralError("edge (" + std::to_string(e.v[0]) + ", " + std::to_string(e.v[1]) +
                                ") is shared by more than two triangles (" + std::to_string(e.tri[0]) + ", " +
                                std::to_string(e.tri[1]) + ", " + std::to_string(t) + ")");
        if (e.tri[0] == t) throw StructuralError("triangle " + std::to_string(t) + " repeats a vertex");
        e.tri[1] = t;
      }
      tr.e[static_cast<std::size_t>(k)] = it->second;
    }
  }

  for (auto& e : m.edges_) {
    e.on_boundary = e.tri[1] == kNoIndex;
    if (e.on_boundary) m.vertices_[e.v[0]].on_boundary = m.vertices_[e.v[1]].on_boundary = true;
  }
  // Interior edges must be traversed in opposite directions by their two
  // triangles; otherwise the two triangles overlap.
  for (std::size_t t = 0; t < tris.size(); ++t)
    for (int k = 0; k < 3; ++k) {
      const Edge& e = m.edges_[tris[t].e[static_cast<std::size_t>(k)]];
      if (e.on_boundary || e.tri[0] != t) continue;
      const Triangle& other = tris[e.tri[1]];
      int kk = 0;
      while (other.e[static_cast<std::size_t>(kk)] != tris[t].e[static_cast<std::size_t>(k)]) ++kk;
      if (other.v[static_cast<std::size_t>((kk + 1) % 3)] != tris[t].v[static_cast<std::size_t>((k + 2) % 3)])
        throw StructuralError("triangles " + std::to_string(t) + " and " + std::to_string(e.tri[1]) +
                              " overlap across edge (" + std::to_string(e.v[0]) + ", " + std::to_string(e.v[1]) +
                              ")");
    }

  m.triangles_ = std::move(tris);

  m.patch_ptr_.assign(m.vertices_.size() + 1, 0);
  for (const auto& t : m.triangles_)
    for (index_t v : t.v) ++m.patch_ptr_[v + 1];
  for (std::size_t i = 0; i < m.vertices_.size(); ++i) m.patch_ptr_[i + 1] += m.patch_ptr_[i];
  m.patch_tri_.resize(m.patch_ptr_.back());
  {
    std::vector<index_t> fill(m.patch_ptr_.begin(), m.patch_ptr_.end() - 1);
    for (std::size_t t = 0; t < m.triangles_.size(); ++t)
      for (index_t v : m.triangles_[t].v) m.patch_tri_[fill[v]++] = t;
  }
  for (std::size_t i = 0; i < m.vertices_.size(); ++i) {
    if (m.patch_ptr_[i + 1] == m.patch_ptr_[i])
      throw StructuralError("vertex " + std::to_string(i) + " belongs to no triangle");
    if (!m.vertices_[i].on_boundary) ++m.num_interior_vertices_;
  }

  if (validate) {
    const long long euler = static_cast<long long>(m.vertices_.size()) - static_cast<long long>(m.edges_.size()) +
                            static_cast<long long>(m.triangles_.size());
    if (euler != 1)
      throw StructuralError("triangulation is not a simply connected polygon (#N - #E + #T = " +
                            std::to_string(euler) + ")");
    for (const auto& e : m.edges_) {
      if (!e.on_boundary) continue;
      for (std::size_t i = 0; i < m.vertices_.size(); ++i)
        if (inside_segment(m.vertices_[i].x, coords[e.v[0]], coords[e.v[1]]))
          throw StructuralError("hanging vertex " + std::to_string(i) + " on edge (" + std::to_string(e.v[0]) +
                                ", " + std::to_string(e.v[1]) + ")");
    }
  }
  return m;
}

std::optional<index_t> Mesh::find_edge(index_t a, index_t b) const {
  const auto it = edge_lookup_.find(edge_key(a, b));
  if (it == edge_lookup_.end()) return std::nullopt;
  return it->second;
}

Tri Mesh::coords(index_t t) const {
  const auto& v = triangles_[t].v;
  return {vertices_[v[0]].x, vertices_[v[1]].x, vertices_[v[2]].x};
}

double Mesh::area(index_t t) const { return signed_area(coords(t)); }

int Mesh::edge_sign(index_t t, int k) const {
  const auto& v = triangles_[t].v;
  return v[static_cast<std::size_t>((k + 1) % 3)] < v[static_cast<std::size_t>((k + 2) % 3)] ? 1 : -1;
}

Vec2 Mesh::outward_normal(index_t t, int k) const {
  return static_cast<double>(edge_sign(t, k)) * edges_[triangles_[t].e[static_cast<std::size_t>(k)]].normal;
}

std::span<const index_t> Mesh::vertex_patch(index_t v) const {
  return std::span(patch_tri_).subspan(patch_ptr_[v], patch_ptr_[v + 1] - patch_ptr_[v]);
}

std::vector<index_t> vertex_patch(const Mesh& mesh, index_t v) {
  const auto p = mesh.vertex_patch(v);
  return {p.begin(), p.end()};
}

namespace {

struct Refiner {
  std::vector<Vec2> coords;
  std::vector<Triangle> out;
  std::set<std::uint64_t> marked;
  std::unordered_map<std::uint64_t, index_t> midpoint;

  bool is_marked(index_t a, index_t b) const { return marked.count(edge_key(a, b)) != 0; }

  void refine(const Triangle& t) {
    const int r = t.refinement_edge;
    const index_t v0 = t.v[static_cast<std::size_t>(r)];
    const index_t v1 = t.v[static_cast<std::size_t>((r + 1) % 3)];
    const index_t v2 = t.v[static_cast<std::size_t>((r + 2) % 3)];
    if (!is_marked(v1, v2)) {
      out.push_back(t);
      return;
    }
    const auto key = edge_key(v1, v2);
    auto [it, inserted] = midpoint.try_emplace(key, coords.size());
    if (inserted) coords.push_back(0.5 * (coords[v1] + coords[v2]));
    const index_t m = it->second;
    Triangle a, b;
    a.v = {v0, v1, m};
    a.refinement_edge = 2;
    a.generation = t.generation + 1;
    b.v = {v0, m, v2};
    b.refinement_edge = 1;
    b.generation = t.generation + 1;
    refine(a);
    refine(b);
  }
};

Mesh refine_marked_edges(const Mesh& mesh, std::set<std::uint64_t> marked) {
  // Closure: a triangle with any marked edge must have its refinement edge
  // marked as well.
  const auto tris = mesh.triangles();
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& t : tris) {
      const auto ref = edge_key(t.v[static_cast<std::size_t>((t.refinement_edge + 1) % 3)],
                                t.v[static_cast<std::size_t>((t.refinement_edge + 2) % 3)]);
      if (marked.count(ref)) continue;
      for (int k = 0; k < 3; ++k) {
        if (marked.count(edge_key(t.v[static_cast<std::size_t>((k + 1) % 3)], t.v[static_cast<std::size_t>((k + 2) % 3)]))) {
          marked.insert(ref);
          changed = true;
          break;
        }
      }
    }
  }

  Refiner r;
  r.coords.reserve(mesh.num_vertices() + marked.size());
  for (const auto& v : mesh.vertices()) r.coords.push_back(v.x);
  r.marked = std::move(marked);
  for (const auto& t : tris) r.refine(t);

  std::vector<std::array<index_t, 3>> tv(r.out.size());
  std::vector<int> re(r.out.size()), gen(r.out.size());
  for (std::size_t i = 0; i < r.out.size(); ++i) {
    tv[i] = r.out[i].v;
    re[i] = r.out[i].refinement_edge;
    gen[i] = r.out[i].generation;
  }
  return Mesh::from_arrays(r.coords, tv, re, gen);
}

}  // namespace

Mesh nvb_refine(const Mesh& mesh, std::span<const index_t> marked) {
  std::set<std::uint64_t> edges;
  for (index_t t : marked) {
    if (t >= mesh.num_triangles()) throw ConfigurationError("nvb_refine: marked triangle id out of range");
    const auto& tr = mesh.triangle(t);
    edges.insert(edge_key(tr.v[static_cast<std::size_t>((tr.refinement_edge + 1) % 3)],
                          tr.v[static_cast<std::size_t>((tr.refinement_edge + 2) % 3)]));
  }
  return refine_marked_edges(mesh, std::move(edges));
}

Mesh uniform_refine(const Mesh& mesh) {
  std::set<std::uint64_t> edges;
  for (const auto& e : mesh.edges()) edges.insert(edge_key(e.v[0], e.v[1]));
  return refine_marked_edges(mesh, std::move(edges));
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  char buf[128];
  os << mesh.num_vertices() << ' ' << mesh.num_edges() << ' ' << mesh.num_triangles() << '\n';
  for (const auto& v : mesh.vertices()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %d\n", v.x.x, v.x.y, v.on_boundary ? 1 : 0);
    os << buf;
  }
  for (const auto& t : mesh.triangles())
    os << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << t.refinement_edge << '\n';
}

void write_mesh(const std::string& path, const Mesh& mesh) {
  std::ofstream os(path);
  if (!os) throw ConfigurationError("cannot open mesh dump file " + path);
  write_mesh(os, mesh);
}

Mesh read_mesh(std::istream& is) {
  std::size_t nv = 0, ne = 0, nt = 0;
  if (!(is >> nv >> ne >> nt)) throw StructuralError("mesh file: bad header");
  std::vector<Vec2> x(nv);
  for (auto& p : x) {
    int flag = 0;
    if (!(is >> p.x >> p.y >> flag)) throw StructuralError("mesh file: truncated vertex list");
  }
  std::vector<std::array<index_t, 3>> tv(nt);
  std::vector<int> re(nt), gen(nt, 0);
  for (std::size_t t = 0; t < nt; ++t)
    if (!(is >> tv[t][0] >> tv[t][1] >> tv[t][2] >> re[t])) throw StructuralError("mesh file: truncated triangle list");
  Mesh m = Mesh::from_arrays(x, tv, re, gen);
  if (m.num_edges() != ne) throw StructuralError("mesh file: edge count in header does not match the triangles");
  return m;
}

}  // namespace platedpg
