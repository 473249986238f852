// Entropic quantities in bits: relative entropy, its variance, max-relative
// entropy and its smoothed version, the classical smoothing oracle, the
// Gaussian quantile and the second-order expansion.
#pragma once

#include "erasure/density_matrix.hpp"

#include <limits>
#include <optional>
#include <string>

namespace erasure {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class EstimateMethod { ExactEigen, BisectionFeasibility, ClassicalBruteforce, SecondOrderExpansion };

std::string to_string(EstimateMethod m);

/// A value in bits plus how it was obtained. For bisection results `value` is
/// the certified (feasible) end of the final bracket and `lower` the other end.
struct EntropyEstimate {
  double value = 0;
  double epsilon = 0;
  EstimateMethod method = EstimateMethod::ExactEigen;
  std::optional<DensityMatrix> certificate;
  double lower = 0;
  int iterations = 0;

  bool is_infinite() const noexcept { return value == kInfinity; }
};

/// Relative eigenvalue threshold below which an eigenvalue counts as zero.
inline constexpr double kSupportThreshold = 1e-10;

EntropyEstimate relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);
/// Throws DomainError when supp(rho) is not inside supp(sigma).
EntropyEstimate relative_entropy_variance(const DensityMatrix& rho, const DensityMatrix& sigma);
EntropyEstimate dmax(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Von Neumann entropy in bits.
double von_neumann_entropy(const DensityMatrix& rho);
double shannon_entropy(const RVector& p);

// Classical (diagonal) counterparts on probability vectors.
double relative_entropy(const RVector& p, const RVector& q);
double relative_entropy_variance(const RVector& p, const RVector& q);
double dmax(const RVector& p, const RVector& q);

struct SmoothDmaxOptions {
  double bracket_width = 1e-4;  // bits
  int max_inner_iterations = 3000;
  int stall_window = 60;         // inner iterations without progress before giving up
  double stall_tolerance = 1e-13;
};

/// inf { D_max(rho' || sigma) : rho' a state, P(rho, rho') <= eps }.
/// Bisection on lambda; each step maximises F(rho, rho') over
/// rho' = 2^lambda sigma^{1/2} X sigma^{1/2}, 0 <= X <= 1, Tr rho' = 1, by
/// projected gradient ascent. A step is feasible once F >= sqrt(1 - eps^2);
/// it is declared infeasible when the ascent stalls or hits the iteration cap.
/// `value` always carries a certificate; `lower` is the last infeasible lambda.
EntropyEstimate smooth_dmax(const DensityMatrix& rho, const DensityMatrix& sigma, double eps,
                            const SmoothDmaxOptions& options = {});

/// Exact classical smoothing: min over distributions p' with
/// sqrt(1 - (sum sqrt(p_i p'_i))^2) <= eps of log2 max_i p'_i / q_i.
/// For a ratio bound r the fidelity-optimal p' is p'_i = min(r q_i, c p_i),
/// so the minimum is found by bisection on log2 r to ~1e-12 bits.
EntropyEstimate smooth_dmax_classical_oracle(const RVector& p, const RVector& q, double eps);

/// Same computation on outcome groups given by their total log2-probabilities
/// under p and q (every outcome in a group has the same ratio p_i / q_i).
/// Entries may be -infinity. Used for i.i.d. blocks summarised by type class.
EntropyEstimate smooth_dmax_classical_grouped(const RVector& log2_p, const RVector& log2_q, double eps);

/// Type-class summary of p^{(x)n}, q^{(x)n} for distributions on a finite
/// alphabet of size 2: group k collects the C(n,k) strings with k ones.
struct GroupedDistributions {
  RVector log2_p;
  RVector log2_q;
};
GroupedDistributions binary_iid_groups(double p1, double q1, int n);

/// Gaussian cumulative distribution function.
double gaussian_cdf(double x);
/// Inverse of gaussian_cdf on (0, 1); throws DomainError outside.
double gaussian_cdf_inv(double p);
/// 2 sqrt(log2(1 / (2 eps))) for eps in (0, 1/2].
double gaussian_quantile_bound(double eps);

/// n D + sqrt(n V) Phi^{-1}(eps), without the logarithmic correction.
EntropyEstimate second_order_dmax(const DensityMatrix& rho, const DensityMatrix& sigma, int n, double eps);
EntropyEstimate second_order_dmax(const RVector& p, const RVector& q, int n, double eps);

/// eps (log2 d + c) + eps log2(1/eps) + 4 eps with eps = ||rho - rho'||_1 and
/// c = inf_tau ||log2 tau||_inf supplied by the caller. Requires eps <= 1/3.
double continuity_bound(const DensityMatrix& rho, const DensityMatrix& rho_prime, double inf_log_norm);
double continuity_bound_value(double trace_dist, double log_dim, double inf_log_norm);

}  // namespace erasure
