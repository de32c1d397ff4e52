#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "platedpg/errors.hpp"
#include "platedpg/mesh.hpp"
#include "platedpg/problems.hpp"

using namespace platedpg;

namespace {

Mesh reference_triangle() {
  const std::vector<Vec2> c{{0, 0}, {1, 0}, {0, 1}};
  const std::vector<std::array<index_t, 3>> t{{0, 1, 2}};
  return Mesh::from_arrays(c, t);
}

double total_area(const Mesh& m) {
  double a = 0.0;
  for (index_t t = 0; t < m.num_triangles(); ++t) a += m.area(t);
  return a;
}

// Conformity oracle: every triangle edge is shared by at most two triangles,
// and no vertex lies in the relative interior of any edge (no hanging nodes).
void check_conforming(const Mesh& m) {
  std::map<std::pair<index_t, index_t>, int> count;
  for (const auto& t : m.triangles())
    for (int k = 0; k < 3; ++k) {
      auto a = t.v[static_cast<std::size_t>((k + 1) % 3)], b = t.v[static_cast<std::size_t>((k + 2) % 3)];
      if (a > b) std::swap(a, b);
      ++count[{a, b}];
    }
  CHECK(count.size() == m.num_edges());
  for (const auto& [e, c] : count) CHECK(c <= 2);
  for (const auto& e : m.edges()) {
    const Vec2 a = m.vertex(e.v[0]).x, b = m.vertex(e.v[1]).x;
    for (index_t v = 0; v < m.num_vertices(); ++v) {
      if (v == e.v[0] || v == e.v[1]) continue;
      const Vec2 p = m.vertex(v).x;
      const double s = dot(p - a, b - a) / dot(b - a, b - a);
      if (s <= 1e-12 || s >= 1 - 1e-12) continue;
      CHECK(std::abs(cross(b - a, p - a)) > 1e-12 * dot(b - a, b - a));
    }
  }
  for (index_t t = 0; t < m.num_triangles(); ++t) CHECK(m.area(t) > 0.0);
  CHECK(static_cast<long>(m.num_vertices()) - static_cast<long>(m.num_edges()) +
            static_cast<long>(m.num_triangles()) ==
        1);
}

}  // namespace

TEST_SUITE("mesh") {
  TEST_CASE("construction examples") {
    const Mesh sq = unit_square_mesh();
    CHECK(sq.num_vertices() == 4);
    CHECK(sq.num_edges() == 5);
    CHECK(sq.num_triangles() == 2);
    CHECK(std::count_if(sq.edges().begin(), sq.edges().end(), [](const Edge& e) { return !e.on_boundary; }) == 1);
    CHECK(sq.num_interior_vertices() == 0);

    const Mesh ref = reference_triangle();
    CHECK(ref.num_vertices() == 3);
    CHECK(ref.num_edges() == 3);
    CHECK(ref.num_triangles() == 1);
    for (const auto& e : ref.edges()) CHECK(e.on_boundary);
    // Longest edge (1,0)-(0,1) is opposite vertex 0.
    CHECK(ref.triangle(0).refinement_edge == 0);

    const Mesh z = zshape_mesh();
    CHECK(static_cast<long>(z.num_vertices()) - static_cast<long>(z.num_edges()) +
              static_cast<long>(z.num_triangles()) ==
          1);
    CHECK(z.num_vertices() == 7);
    CHECK(z.num_edges() == 11);
    CHECK(z.num_triangles() == 5);
  }

  TEST_CASE("edge and vertex invariants") {
    for (const Mesh& m : {unit_square_mesh(), uniform_refine(zshape_mesh())}) {
      for (const auto& e : m.edges()) {
        CHECK(e.v[0] < e.v[1]);
        CHECK(std::abs(norm(e.tangent) - 1.0) <= 1e-14);
        CHECK(std::abs(norm(e.normal) - 1.0) <= 1e-14);
        CHECK(e.on_boundary == (e.tri[1] == kNoIndex));
        CHECK(e.tri[0] != kNoIndex);
      }
      std::vector<bool> on(m.num_vertices(), false);
      for (const auto& e : m.edges())
        if (e.on_boundary) on[e.v[0]] = on[e.v[1]] = true;
      for (index_t v = 0; v < m.num_vertices(); ++v) CHECK(m.vertex(v).on_boundary == on[v]);
      for (index_t t = 0; t < m.num_triangles(); ++t) {
        CHECK(signed_area(m.coords(t)) > 0.0);
        for (int k = 0; k < 3; ++k) {
          const auto& e = m.edge(m.triangle(t).e[static_cast<std::size_t>(k)]);
          const auto a = m.triangle(t).v[static_cast<std::size_t>((k + 1) % 3)];
          const auto b = m.triangle(t).v[static_cast<std::size_t>((k + 2) % 3)];
          CHECK(e.v == std::array<index_t, 2>{std::min(a, b), std::max(a, b)});
        }
      }
    }
  }

  TEST_CASE("canonical normal selects exactly one plus-side triangle") {
    const Mesh m = uniform_refine(uniform_refine(unit_square_mesh()));
    for (index_t ei = 0; ei < m.num_edges(); ++ei) {
      const auto& e = m.edge(ei);
      if (e.on_boundary) continue;
      int plus = 0;
      for (index_t t : e.tri) {
        const auto& tri = m.triangle(t);
        for (int k = 0; k < 3; ++k)
          if (tri.e[static_cast<std::size_t>(k)] == ei) {
            const Vec2 n = m.outward_normal(t, k);
            if (dot(n, e.normal) > 0.5) {
              ++plus;
              CHECK(m.edge_sign(t, k) == 1);
            } else {
              CHECK(m.edge_sign(t, k) == -1);
            }
          }
      }
      CHECK(plus == 1);
    }
  }

  TEST_CASE("nvb examples") {
    const Mesh ref = reference_triangle();
    const std::vector<index_t> one{0};
    const Mesh r1 = nvb_refine(ref, one);
    CHECK(r1.num_triangles() == 2);
    CHECK(r1.num_vertices() == 4);
    CHECK(r1.vertex(3).x.x == doctest::Approx(0.5));
    CHECK(r1.vertex(3).x.y == doctest::Approx(0.5));
    for (const auto& t : r1.triangles()) CHECK(t.generation == 1);

    const Mesh sq = unit_square_mesh();
    const Mesh closed = nvb_refine(sq, one);
    CHECK(closed.num_triangles() == 4);
    check_conforming(closed);
  }

  TEST_CASE("closure on an incompatible refinement edge") {
    // Two triangles whose refinement edges do not match: marking the first
    // forces a bisection of the neighbor's refinement edge first.
    const std::vector<Vec2> c{{0, 0}, {2, 0}, {1, 1}, {1, -0.2}};
    const std::vector<std::array<index_t, 3>> t{{0, 1, 2}, {0, 3, 1}};
    const Mesh m = Mesh::from_arrays(c, t);
    // Triangle 1 is long-and-flat; its longest edge (0,1) is shared.
    const std::vector<index_t> mark{0};
    const Mesh r = nvb_refine(m, mark);
    check_conforming(r);
    CHECK(total_area(r) == doctest::Approx(total_area(m)).epsilon(1e-13));
  }

  TEST_CASE("uniform refinement") {
    const Mesh sq = unit_square_mesh();
    const Mesh u1 = uniform_refine(sq);
    CHECK(u1.num_triangles() == 8);
    for (index_t t = 0; t < u1.num_triangles(); ++t) CHECK(u1.area(t) == doctest::Approx(0.125).epsilon(1e-14));
    CHECK(uniform_refine(u1).num_triangles() == 32);

    const Mesh r = uniform_refine(reference_triangle());
    CHECK(r.num_triangles() == 4);
    for (index_t t = 0; t < r.num_triangles(); ++t) CHECK(r.area(t) == doctest::Approx(0.125).epsilon(1e-14));

    // Equivalent to marking everything twice.
    for (const Mesh& m0 : {sq, reference_triangle(), zshape_mesh()}) {
      std::vector<index_t> all(m0.num_triangles());
      std::iota(all.begin(), all.end(), index_t{0});
      const Mesh once = nvb_refine(m0, all);
      std::vector<index_t> all2(once.num_triangles());
      std::iota(all2.begin(), all2.end(), index_t{0});
      const Mesh twice = nvb_refine(once, all2);
      const Mesh u = uniform_refine(m0);
      REQUIRE(twice.num_triangles() == u.num_triangles());
      REQUIRE(twice.num_vertices() == u.num_vertices());
      auto key = [](const Mesh& m) {
        std::multiset<std::array<double, 6>> s;
        for (index_t t = 0; t < m.num_triangles(); ++t) {
          auto c = m.coords(t);
          std::sort(c.begin(), c.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
          s.insert({c[0].x, c[0].y, c[1].x, c[1].y, c[2].x, c[2].y});
        }
        return s;
      };
      CHECK(key(twice) == key(u));
    }
  }

  TEST_CASE("vertex patches") {
    const Mesh sq = unit_square_mesh();
    CHECK(vertex_patch(sq, 0) == std::vector<index_t>{0, 1});
    CHECK(vertex_patch(sq, 1) == std::vector<index_t>{0});

    const Mesh u = uniform_refine(sq);
    index_t center = kNoIndex;
    for (index_t v = 0; v < u.num_vertices(); ++v)
      if (std::abs(u.vertex(v).x.x - 0.5) < 1e-14 && std::abs(u.vertex(v).x.y - 0.5) < 1e-14) center = v;
    REQUIRE(center != kNoIndex);
    CHECK(u.num_interior_vertices() == 1);
    std::vector<index_t> brute;
    for (index_t t = 0; t < u.num_triangles(); ++t)
      for (index_t v : u.triangle(t).v)
        if (v == center) brute.push_back(t);
    CHECK(vertex_patch(u, center) == brute);
    CHECK(brute.size() == 8);
    // Brute-force check for every vertex of a deeper mesh.
    const Mesh d = uniform_refine(uniform_refine(zshape_mesh()));
    for (index_t v = 0; v < d.num_vertices(); ++v) {
      std::vector<index_t> b;
      for (index_t t = 0; t < d.num_triangles(); ++t)
        if (std::find(d.triangle(t).v.begin(), d.triangle(t).v.end(), v) != d.triangle(t).v.end()) b.push_back(t);
      CHECK(vertex_patch(d, v) == b);
    }
  }

  TEST_CASE("random adaptive refinement keeps the mesh conforming and shape regular") {
    std::mt19937_64 rng(99);
    for (const Mesh& m0 : {unit_square_mesh(), zshape_mesh()}) {
      Mesh m = m0;
      const double bound0 = m0.shape_bound();
      for (int step = 0; step < 10; ++step) {
        std::vector<index_t> marked;
        std::bernoulli_distribution pick(0.3);
        for (index_t t = 0; t < m.num_triangles(); ++t)
          if (pick(rng)) marked.push_back(t);
        if (marked.empty()) marked.push_back(0);
        const Mesh next = nvb_refine(m, marked);
        CHECK(next.num_triangles() > m.num_triangles());
        CHECK(total_area(next) == doctest::Approx(total_area(m)).epsilon(1e-13));
        m = next;
        check_conforming(m);
        CHECK(m.shape_bound() <= 10.0 * bound0);
      }
    }
  }

  TEST_CASE("children partition the parent") {
    const Mesh m = zshape_mesh();
    for (index_t t = 0; t < m.num_triangles(); ++t) {
      const std::vector<index_t> mark{t};
      const Mesh r = nvb_refine(m, mark);
      const Tri p = m.coords(t);
      double inside = 0.0;
      for (index_t c = 0; c < r.num_triangles(); ++c) {
        const Vec2 g = centroid(r.coords(c));
        bool in = true;
        for (int k = 0; k < 3; ++k)
          in = in && cross(p[static_cast<std::size_t>((k + 1) % 3)] - p[static_cast<std::size_t>(k)],
                           g - p[static_cast<std::size_t>(k)]) > 0;
        if (in) inside += r.area(c);
      }
      CHECK(std::abs(inside - m.area(t)) <= 1e-13 * m.area(t));
    }
  }

  TEST_CASE("text dump round trip") {
    const Mesh m = nvb_refine(uniform_refine(zshape_mesh()), std::vector<index_t>{0, 3});
    std::stringstream ss;
    write_mesh(ss, m);
    std::string header;
    std::getline(ss, header);
    CHECK(header == std::to_string(m.num_vertices()) + " " + std::to_string(m.num_edges()) + " " +
                        std::to_string(m.num_triangles()));
    ss.seekg(0);
    const Mesh r = read_mesh(ss);
    REQUIRE(r.num_triangles() == m.num_triangles());
    for (index_t v = 0; v < m.num_vertices(); ++v) {
      CHECK(r.vertex(v).x.x == m.vertex(v).x.x);
      CHECK(r.vertex(v).x.y == m.vertex(v).x.y);
      CHECK(r.vertex(v).on_boundary == m.vertex(v).on_boundary);
    }
    for (index_t t = 0; t < m.num_triangles(); ++t) {
      CHECK(r.triangle(t).v == m.triangle(t).v);
      CHECK(r.triangle(t).refinement_edge == m.triangle(t).refinement_edge);
    }
  }

  TEST_CASE("structural errors") {
    const std::vector<Vec2> c{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0.5, -1}};
    // edge (0,1) shared by three triangles
    const std::vector<std::array<index_t, 3>> three{{0, 1, 2}, {0, 1, 3}, {0, 4, 1}};
    CHECK_THROWS_AS(Mesh::from_arrays(c, three), StructuralError);
    // degenerate
    const std::vector<Vec2> line{{0, 0}, {1, 0}, {2, 0}};
    const std::vector<std::array<index_t, 3>> one{{0, 1, 2}};
    CHECK_THROWS_AS(Mesh::from_arrays(line, one), StructuralError);
    // out-of-range index
    const std::vector<std::array<index_t, 3>> bad{{0, 1, 7}};
    CHECK_THROWS_AS(Mesh::from_arrays(c, bad), StructuralError);
    // hanging vertex: (0.5,0) lies on edge (0,0)-(1,0) of the big triangle
    const std::vector<Vec2> h{{0, 0}, {1, 0}, {0, 1}, {0.5, 0}, {0.5, -1}};
    const std::vector<std::array<index_t, 3>> ht{{0, 1, 2}, {0, 4, 3}, {3, 4, 1}};
    CHECK_THROWS_AS(Mesh::from_arrays(h, ht), StructuralError);
  }

  TEST_CASE("clockwise input is reoriented") {
    const std::vector<Vec2> c{{0, 0}, {1, 0}, {0, 1}};
    const std::vector<std::array<index_t, 3>> cw{{0, 2, 1}};
    const Mesh m = Mesh::from_arrays(c, cw);
    CHECK(signed_area(m.coords(0)) == doctest::Approx(0.5));
  }
}
