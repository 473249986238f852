// Finite-dimensional quantum states and unitaries over a register layout,
// plus the state-level operations every protocol is assembled from.
#pragma once

#include "erasure/errors.hpp"
#include "erasure/layout.hpp"
#include "erasure/linalg.hpp"

#include <set>
#include <string>
#include <vector>

namespace erasure {

inline constexpr double kDefaultTolerance = 1e-9;

/// Hermitian, positive semidefinite, unit-trace matrix over a RegisterLayout.
/// Immutable once constructed; the stored matrix is exactly Hermitian.
class DensityMatrix {
 public:
  /// Validates Hermiticity, positivity and trace against `tolerance`.
  DensityMatrix(RegisterLayout layout, CMatrix matrix, double tolerance = kDefaultTolerance);

  /// Normalised projector onto `ket`.
  static DensityMatrix pure(RegisterLayout layout, const CVector& ket, double tolerance = kDefaultTolerance);
  static DensityMatrix maximally_mixed(RegisterLayout layout);
  /// |index><index| in the computational basis.
  static DensityMatrix basis_state(RegisterLayout layout, std::size_t index);
  static DensityMatrix diagonal(RegisterLayout layout, const RVector& probabilities);
  /// Frobenius-nearest state to an arbitrary square matrix (used to absorb
  /// round-off from iterative solvers).
  static DensityMatrix nearest(RegisterLayout layout, const CMatrix& matrix, double tolerance = kDefaultTolerance);

  const RegisterLayout& layout() const noexcept { return layout_; }
  const CMatrix& matrix() const noexcept { return matrix_; }
  double tolerance() const noexcept { return tolerance_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }

  RVector eigenvalues() const { return linalg::eigenvalues_h(matrix_); }
  /// Number of eigenvalues above `relative_threshold * max eigenvalue`.
  std::size_t rank(double relative_threshold = 1e-10) const;
  bool is_pure(double tol = 1e-9) const;

  /// Same matrix under a different layout of identical dimensions.
  DensityMatrix relabeled(RegisterLayout layout) const;
  DensityMatrix with_tolerance(double tolerance) const;

 private:
  RegisterLayout layout_;
  CMatrix matrix_;
  double tolerance_;
};

/// Unitary over a layout; U U^dagger = I is checked at construction.
class UnitaryOp {
 public:
  UnitaryOp(RegisterLayout layout, CMatrix matrix, double tolerance = kDefaultTolerance);

  const RegisterLayout& layout() const noexcept { return layout_; }
  const CMatrix& matrix() const noexcept { return matrix_; }

  DensityMatrix apply(const DensityMatrix& state) const;
  UnitaryOp adjoint() const;
  /// this * other (other acts first).
  UnitaryOp then_after(const UnitaryOp& other) const;

 private:
  RegisterLayout layout_;
  CMatrix matrix_;
};

// ---------------------------------------------------------------------------
// Composition and marginals

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);
/// n-fold tensor power; copy k carries the label suffix "#k".
DensityMatrix tensor_power(const DensityMatrix& state, int n);
DensityMatrix partial_trace(const DensityMatrix& state, const std::set<std::string>& discard);
/// Marginal on exactly `keep` (in layout order).
DensityMatrix reduced_state(const DensityMatrix& state, const std::set<std::string>& keep);
/// Reorder factors: factor k of the result is factor order[k] of the input.
DensityMatrix permute_registers(const DensityMatrix& state, const std::vector<std::size_t>& order);

// ---------------------------------------------------------------------------
// Distances

double fidelity(const DensityMatrix& a, const DensityMatrix& b);
double purified_distance(const DensityMatrix& a, const DensityMatrix& b);
/// ||a - b||_1 (sum of absolute eigenvalues, no factor 1/2).
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// Matrix-level fidelity ||sqrt(a) sqrt(b)||_1 for PSD inputs.
double fidelity(const CMatrix& a, const CMatrix& b);
/// Same, with sqrt(a) supplied by the caller.
double fidelity_from_sqrt(const CMatrix& sqrt_a, const CMatrix& b);

// ---------------------------------------------------------------------------
// Purifications and extensions

enum class AncillaSize { Full, Rank };

/// Rank-one state on layout + ancilla whose marginal is `state`.
DensityMatrix purify(const DensityMatrix& state, const std::string& ancilla_label,
                     AncillaSize size = AncillaSize::Full);

/// Purification of theta_A (A = theta's labels) with maximal overlap with the
/// pure state rho_pure_AB; the achieved pure-state fidelity equals F(rho_A, theta_A).
DensityMatrix uhlmann_partner(const DensityMatrix& rho_pure_AB, const DensityMatrix& theta_A);

/// Classical-quantum extension sigma_AB of sigma_A with
/// F(rho_AB, sigma_AB) >= F(rho_A, sigma_A) and supp(sigma_B) in supp(rho_B).
/// `rho_AB` must be classical on `classical_label`.
DensityMatrix cq_extension(const DensityMatrix& rho_AB, const DensityMatrix& sigma_A,
                           const std::string& classical_label);

// ---------------------------------------------------------------------------
// Unitary building blocks and operator checks

/// sum_j SWAP(target, blocks[j]) (x) |j><j|_control. Requires dim(control) ==
/// blocks.size() and every block of the same dimension as `target`.
UnitaryOp controlled_swap(const RegisterLayout& layout, const std::string& control, const std::string& target,
                          const std::vector<std::string>& blocks);
/// Single-block form; the control register must have dimension 1.
UnitaryOp controlled_swap(const RegisterLayout& layout, const std::string& control, const std::string& target_a,
                          const std::string& target_b);

/// Plain swap of two equal-dimension registers.
UnitaryOp swap_registers(const RegisterLayout& layout, const std::string& a, const std::string& b);

/// factor * bound - theta is PSD within the tolerance of `theta`.
bool dominance_check(const DensityMatrix& theta, const DensityMatrix& bound, double factor);

/// Completely dephase one register in its computational basis.
DensityMatrix pinch(const DensityMatrix& state, const std::string& label);
/// Frobenius norm of the part of the matrix off the block diagonal of `label`.
double off_block_mass(const CMatrix& matrix, const RegisterLayout& layout, const std::string& label);
bool is_classical_on(const DensityMatrix& state, const std::string& label);

/// Projector onto eigenvectors with eigenvalue above 1e-10 * (largest eigenvalue).
CMatrix support_projector(const CMatrix& psd);

}  // namespace erasure
