// Helpers shared by the free-set implementations.
#pragma once

#include "erasure/free_sets.hpp"

#include <functional>
#include <string>
#include <vector>

namespace erasure::detail {

/// A valid state from a matrix that is one up to round-off; falls back to the
/// Frobenius-nearest state when the checks fail.
DensityMatrix as_state(const RegisterLayout& layout, const CMatrix& m);

std::vector<std::size_t> randomness_factors(const RegisterLayout& layout);
std::vector<std::size_t> system_factors(const RegisterLayout& layout);

/// Throws LayoutError unless every non-randomness factor has dimension `dim`.
void require_factor_dim(const RegisterLayout& layout, std::size_t dim, const std::string& family);

/// Largest eigenvalue of a Hermitian matrix.
double max_eigenvalue(const CMatrix& m);

/// Closest state for families where D(rho || sigma) = D(rho || C(rho)) +
/// D(C(rho) || sigma) for a conditional expectation C onto the family.
ClosestState closest_by_projection(const DensityMatrix& rho, const DensityMatrix& image);

/// Minimises D(rho || sigma) over a convex set given by its Frobenius
/// projection, by projected gradient with backtracking from several starts.
/// Returns the best feasible point found.
struct ConvexSearch {
  std::function<CMatrix(const CMatrix&)> project;
  std::vector<CMatrix> starts;
  int max_iterations = 10000;
};
ClosestState minimise_relent(const DensityMatrix& rho, const ConvexSearch& search);

}  // namespace erasure::detail
