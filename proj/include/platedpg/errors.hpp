#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace platedpg {

// Malformed mesh input: edge shared by more than two triangles, degenerate
// triangle, hanging vertex, or a triangulation that is not simply connected.
class StructuralError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid user or problem configuration (bad CLI values, over-constrained
// boundary data, unsupported quadrature degree, ...).
class ConfigurationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A matrix expected to be symmetric positive definite produced a
// nonpositive pivot during Cholesky factorization.
class SpdViolation : public std::runtime_error {
public:
  SpdViolation(std::size_t pivot, const std::string& what)
      : std::runtime_error(what), pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

private:
  std::size_t pivot_;
};

// Iterative solver hit its iteration cap, or a direct solve could not reach
// the requested residual.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace platedpg
