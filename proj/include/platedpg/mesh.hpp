#pragma once

// Conforming triangulations with newest-vertex-bisection refinement.
//
// Conventions used throughout the library:
//  * triangle vertices are counterclockwise;
//  * local edge k of a triangle is opposite local vertex k and runs from
//    v[k+1] to v[k+2] (indices mod 3), so it is traversed counterclockwise;
//  * a global edge is oriented from its lower to its higher vertex id; its
//    canonical normal is that tangent rotated by -90 degrees;
//  * the refinement edge is stored as a local edge index.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "platedpg/geometry.hpp"
#include "platedpg/linalg.hpp"
#include "platedpg/polyquad.hpp"

namespace platedpg {

inline constexpr index_t kNoIndex = std::numeric_limits<index_t>::max();

struct Vertex {
  Vec2 x;
  bool on_boundary = false;
};

struct Edge {
  std::array<index_t, 2> v{};  // v[0] < v[1]
  Vec2 tangent;
  Vec2 normal;
  double length = 0.0;
  std::array<index_t, 2> tri{kNoIndex, kNoIndex};  // tri[1] == kNoIndex on the boundary
  bool on_boundary = false;
};

struct Triangle {
  std::array<index_t, 3> v{};
  std::array<index_t, 3> e{};
  int refinement_edge = 0;
  int generation = 0;
};

class Mesh {
public:
  Mesh() = default;

  // Builds a mesh from raw arrays. Clockwise triangles are reoriented. The
  // refinement edge of each triangle is its longest edge, ties going to the
  // edge whose opposite vertex has the smallest id. Throws StructuralError
  // for invalid input.
  static Mesh from_arrays(std::span<const Vec2> coords, std::span<const std::array<index_t, 3>> triangles);

  // Same, with explicit refinement edges and generations (triangles must
  // already be counterclockwise).
  static Mesh from_arrays(std::span<const Vec2> coords, std::span<const std::array<index_t, 3>> triangles,
                          std::span<const int> refinement_edges, std::span<const int> generations);

  std::size_t num_vertices() const noexcept { return vertices_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::size_t num_triangles() const noexcept { return triangles_.size(); }
  std::size_t num_interior_vertices() const noexcept { return num_interior_vertices_; }

  const Vertex& vertex(index_t i) const { return vertices_[i]; }
  const Edge& edge(index_t i) const { return edges_[i]; }
  const Triangle& triangle(index_t i) const { return triangles_[i]; }
  std::span<const Vertex> vertices() const { return vertices_; }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const Triangle> triangles() const { return triangles_; }

  std::optional<index_t> find_edge(index_t a, index_t b) const;

  Tri coords(index_t t) const;
  double area(index_t t) const;
  // +1 if local edge k is traversed from the lower to the higher vertex id.
  int edge_sign(index_t t, int k) const;
  // Outward unit normal of local edge k.
  Vec2 outward_normal(index_t t, int k) const;

  // Triangles containing the vertex, in increasing id order.
  std::span<const index_t> vertex_patch(index_t v) const;

  // max over T of diam(T)^2 / |T|
  double shape_bound() const noexcept { return shape_bound_; }

private:
  static Mesh build(std::vector<Vec2> coords, std::vector<Triangle> tris, bool validate);

  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<Triangle> triangles_;
  std::unordered_map<std::uint64_t, index_t> edge_lookup_;
  std::vector<index_t> patch_ptr_;
  std::vector<index_t> patch_tri_;
  std::size_t num_interior_vertices_ = 0;
  double shape_bound_ = 0.0;
};

// Bisects every marked triangle at least once and closes the result to a
// conforming mesh. Old vertex ids are kept; midpoints are appended.
Mesh nvb_refine(const Mesh& mesh, std::span<const index_t> marked);

// Bisects every edge once (four children per triangle).
Mesh uniform_refine(const Mesh& mesh);

std::vector<index_t> vertex_patch(const Mesh& mesh, index_t v);

// Text format: "N E T", then N lines "x y boundary_flag", then T lines
// "v0 v1 v2 refinement_edge".
void write_mesh(std::ostream& os, const Mesh& mesh);
void write_mesh(const std::string& path, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

}  // namespace platedpg
