// Free-resource families and the operations built on them: membership,
// closest free states for D and smoothed D_max, regularisation, the
// constant C(F) and the randomness-register structure of the protocols.
//
// Register conventions (see RegisterLayout): labels starting with 'J' are
// classical randomness registers and are always free as maximally mixed
// states; "X.A" / "X.B" name the A- and B-party halves of a register.
#pragma once

#include "erasure/entropies.hpp"
#include "erasure/random.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace erasure {

enum class FamilyKind { Coherence, Uniformity, Gibbs, Asymmetry, Separable, SharedRandomness };

std::string to_string(FamilyKind kind);

inline constexpr double kMembershipTolerance = 1e-8;

struct ClosestState {
  DensityMatrix sigma;
  EntropyEstimate estimate;
  /// The search ran over exactly the family (no relaxation) and converged.
  bool exact = true;
};

struct ClosestOptions {
  std::optional<DensityMatrix> initial;  // warm start, must be a member
  int restarts = 8;
  int max_iterations = 10000;
  std::uint64_t seed = 1;
};

/// A convex, closed family of states on every compatible layout, closed under
/// tensor products and partial traces. Implementations are immutable.
class FreeSet {
 public:
  virtual ~FreeSet() = default;

  virtual FamilyKind kind() const noexcept = 0;
  std::string name() const { return to_string(kind()); }

  /// Throws LayoutError when the family is not defined on `layout`.
  virtual void check_layout(const RegisterLayout& layout) const = 0;
  virtual bool contains(const DensityMatrix& sigma, double tol = kMembershipTolerance) const = 0;
  /// A member close to the Hermitian matrix `m`; Frobenius-nearest unless a
  /// family documents otherwise.
  virtual DensityMatrix project(const RegisterLayout& layout, const CMatrix& m) const = 0;
  virtual DensityMatrix sample(const RegisterLayout& layout, Rng& rng) const = 0;
  virtual ClosestState closest_relent(const DensityMatrix& rho, const ClosestOptions& options = {}) const = 0;
  /// An upper bound on sup_{sigma in F} Tr(a sigma) for PSD `a`; exact for
  /// every family except separable inputs of rank above one.
  virtual double max_expectation(const RegisterLayout& layout, const CMatrix& a) const = 0;

  /// inf_{tau in F} ||log2 tau||_inf; +infinity when no member has full rank.
  /// Default: log2 of the dimension, attained by the maximally mixed state.
  virtual double log_norm_inf(const RegisterLayout& layout) const;
  /// The member used as a neutral starting point (maximally mixed by default).
  virtual DensityMatrix canonical_state(const RegisterLayout& layout) const;
  virtual bool singleton() const noexcept { return false; }
  /// E(rho^{(x)n}) = n E(rho) for every rho.
  virtual bool additive() const noexcept { return false; }
};

using FreeSetPtr = std::shared_ptr<const FreeSet>;

/// States diagonal in `basis` (a unitary whose columns are the basis vectors,
/// applied to every non-randomness factor); computational basis by default.
FreeSetPtr make_coherence(std::optional<CMatrix> basis = std::nullopt);
/// Only the maximally mixed state.
FreeSetPtr make_uniformity();
/// Only the product of 2^{-beta H} / Tr 2^{-beta H} on each non-randomness factor.
FreeSetPtr make_gibbs(CMatrix hamiltonian, double beta);
/// States invariant under each listed unitary acting on any single
/// non-randomness factor (invariance under the product group).
FreeSetPtr make_asymmetry(std::vector<CMatrix> group);
/// Separable states across the parties named by the label suffixes (factors
/// without a suffix are parties of their own). Decided exactly through the
/// partial transpose when the two parties have d_A d_B <= 6.
FreeSetPtr make_separable();
/// Randomness registers perfectly correlated across parties and classical,
/// with the remaining registers in `inner` conditionally on their value.
FreeSetPtr make_shared_randomness(FreeSetPtr inner);

/// Families that need no data: "coherence", "uniformity", "separable" (also
/// "separable-2qubit"). "contextuality" and "stabilizer" are recognised but
/// throw UnsupportedError; unknown names throw DomainError.
FreeSetPtr make_free_set(const std::string& name);

/// (1/ell) sum_k |k><k|^{(x)t} on registers "<group>.A", "<group>.B", ...
struct SharedRandomnessState {
  int ell = 1;
  int parties = 2;

  RegisterLayout layout(const std::string& group = "J") const;
  DensityMatrix state(const std::string& group = "J") const;
};

/// Party key of a label: the segment after '.', without any "#copy" suffix;
/// the whole label when there is no '.'.
std::string party_of(const std::string& label);

// ---------------------------------------------------------------------------
// Operations

bool membership(const FreeSet& family, const DensityMatrix& sigma, double tol = kMembershipTolerance);

/// E(rho) = inf_{sigma in F} D(rho || sigma) with its minimiser.
ClosestState closest_free_relent(const FreeSet& family, const DensityMatrix& rho, const ClosestOptions& options = {});

struct SmoothClosestOptions {
  SmoothDmaxOptions inner;
  int max_rounds = 30;
  double improvement = 1e-6;  // bits; alternation stops below this gain
};

/// min_{sigma in F} D_max^eps(rho || sigma) by alternating smoothing (rho' in
/// the ball) and subgradient steps on sigma. `estimate.value` is a certified
/// upper bound with witness `estimate.certificate`; `estimate.lower` is a
/// certified lower bound from the best two-outcome projective measurement
/// built from eigenprojectors of rho.
ClosestState closest_free_smooth_dmax(const FreeSet& family, const DensityMatrix& rho, double eps,
                                      const SmoothClosestOptions& options = {});

/// Lower bound on min_{sigma in F} D_max^eps(rho || sigma) from measuring one
/// projector `p`: log2(b / c) with b the least weight any state in the ball
/// can give `p` and c = sup_F Tr(p sigma).
double measured_lower_bound(const FreeSet& family, const DensityMatrix& rho, const CMatrix& p, double eps);

struct RegularizedSequence {
  std::vector<EntropyEstimate> per_copy;  // entry n-1 holds E(rho^{(x)n}) / n
  bool additivity_checked = false;
  bool additivity_holds = true;
  double max_deviation = 0;  // max_n |E_n/n - E_1|
};

inline constexpr std::size_t kMaxDenseDimension = 4096;

/// E(rho^{(x)n})/n for n = 1..n_max. The search for n copies starts from the
/// n-1 minimiser tensored with the single-copy one, so the sequence never
/// exceeds E(rho). Additive families are checked for a constant sequence.
RegularizedSequence regularized_E(const FreeSet& family, const DensityMatrix& rho, int n_max,
                                  const ClosestOptions& options = {});

/// min_{n <= n_max} (1/n) inf_{tau in F_n} ||log2 tau||_inf on layout^{(x)n}.
double c_constant(const FreeSet& family, const RegisterLayout& layout, int n_max);

/// Lemma-style continuity bound with c = inf_{tau in F} ||log2 tau||_inf.
double continuity_bound(const DensityMatrix& rho, const DensityMatrix& rho_prime, const FreeSet& family);

struct StructureCheck {
  bool block_form = false;      // U = sum_j U_j (x) |j><j|_J
  bool samples_free = false;    // (1/l) sum_j U_j sigma U_j^dagger (x) |j><j| in F
  bool randomness_last = true;  // J is the last factor (expected convention)
  bool membership_decidable = true;
  std::string detail;

  bool ok() const noexcept { return block_form && samples_free; }
};

/// Blocks U_j with U = sum_j U_j (x) |j><j|_control, or nothing when U has
/// weight off the block diagonal of `control` beyond `tol`.
std::optional<std::vector<CMatrix>> controlled_blocks(const UnitaryOp& op, const std::string& control,
                                                      double tol = 1e-10);

/// Checks the block structure of `op` relative to `control` (default: last
/// factor) and that every mixed state built from a free sample stays free.
/// Samples live on the layout of `op` without the control register.
StructureCheck assumption1_structure_check(const FreeSet& family, const UnitaryOp& op,
                                           const std::vector<DensityMatrix>& samples,
                                           const std::string& control = "");

/// Same check for a list of blocks acting on `system` with a fresh control
/// register "J" of dimension blocks.size() appended last.
StructureCheck assumption1_structure_check(const FreeSet& family, const RegisterLayout& system,
                                           const std::vector<CMatrix>& blocks,
                                           const std::vector<DensityMatrix>& samples);

}  // namespace erasure
