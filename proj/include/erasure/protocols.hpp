// Convex-split states, catalytic erasure by controlled swaps (single party,
// multiparty and blockwise), converse certificates and rate estimates.
#pragma once

#include "erasure/free_sets.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace erasure {

inline constexpr double kProtocolTolerance = 1e-6;
inline constexpr double kDefaultDelta = 0.1;
inline constexpr double kDefaultEps = 0.05;

/// tau = (1/n) sum_j sigma (x) .. (x) rho_j (x) .. (x) sigma on copies
/// labelled "#1".."#n". Throws DimensionError when d^n exceeds kMaxDenseDimension.
DensityMatrix convex_split_state(const DensityMatrix& rho, const DensityMatrix& sigma, int n);

struct ConvexSplitCheck {
  double lhs = 0;  // P(tau, sigma^{(x)n})
  double rhs = 0;  // eps + sqrt(2^k / n)
  double k = 0;    // certified upper bound on D_max^eps(rho || sigma)
  double eps = 0;
  int n = 0;
  bool classical = false;
  bool ok = false;
};

/// Commuting diagonal inputs take a type-class path that never forms tau, so
/// n is limited only by the number of types.
ConvexSplitCheck convex_split_bound_check(const DensityMatrix& rho, const DensityMatrix& sigma, int n, double eps);
/// The same check at several n, computing k once.
std::vector<ConvexSplitCheck> convex_split_bound_check(const DensityMatrix& rho, const DensityMatrix& sigma,
                                                       const std::vector<int>& ns, double eps);
/// Every (eps, n) pair, eps-major, computing each distance once.
std::vector<ConvexSplitCheck> convex_split_bound_check(const DensityMatrix& rho, const DensityMatrix& sigma,
                                                       const std::vector<int>& ns,
                                                       const std::vector<double>& eps_values);

/// Largest n >= 1 with d^(n+1) * n^t <= cap_dim (the joint state of the
/// input, n catalyst copies and t shares of the register J), or 0 when none fits.
int simulation_cap(std::size_t d, std::size_t cap_dim, int t = 1);

/// Average over j of the permutation exchanging the factors `target[i]` and
/// `copies[j][i]` for every i, i.e. a controlled swap with a uniform control
/// that is then discarded.
DensityMatrix controlled_swap_channel(const DensityMatrix& state, const std::vector<std::string>& target,
                                      const std::vector<std::vector<std::string>>& copies);

struct ProtocolOptions {
  std::size_t cap_dim = kMaxDenseDimension;
  std::uint64_t seed = 1;
  SmoothClosestOptions closest;
  int structure_samples = 3;
};

struct ProtocolTranscript {
  std::string protocol;  // "catalytic", "multiparty" or "block"
  std::string free_set;
  std::optional<DensityMatrix> input_state;
  double eps = 0;
  double delta = 0;
  std::uint64_t seed = 0;
  int parties = 1;

  int n_copies = 0;     // n from the formula
  int n_simulated = 0;  // copies actually simulated
  bool simulated = false;
  double k = 0;        // certified upper bound on min_sigma D_max^eps(rho || sigma)
  double k_lower = 0;  // certified lower bound on the same minimum
  double log_J = 0;
  double catalyst_qubits = 0;  // log2|M| * n from the formula
  std::optional<DensityMatrix> catalyst;  // sigma*

  double achieved_distance = 0;         // P(output, sigma*^{(x)(n+1)})
  double catalyst_return_distance = 0;  // P(output on copies, sigma*^{(x)n})
  double distance_bound = 0;            // eps + sqrt(2^k / n_simulated)
  double register_deviation = 0;        // max |output_M - sigma*| entrywise
  double output_trace = 0;
  std::size_t output_rank = 0;

  bool structure_verified = false;
  std::string structure_detail;
  int structure_copies = 0;  // catalyst copies used in the structure check
  double converse_lower_bound = 0;
  double converse_factor = 0.5;

  // block protocol
  int ell = 0;
  int blocks = 0;
  std::vector<double> block_distances;  // single-block distances, by block
  double accumulation_bound = 0;        // blocks * max(block_distances)
  double idle_catalyst_shift = 0;

  // multiparty protocol
  bool shared_randomness_free = false;
  bool local_operations = false;

  std::vector<std::string> notes;
  std::vector<std::string> failures;

  bool ok() const noexcept { return failures.empty(); }
};

/// Erases rho with catalyst sigma*^{(x)n}, n = ceil(2^k / delta^2), and a
/// uniform J of size n. Runs the simulation at min(n, cap) copies.
ProtocolTranscript run_catalytic_transformation(const DensityMatrix& rho, const FreeSet& family, double eps,
                                                double delta, const ProtocolOptions& options = {});

struct ConverseCertificate {
  double lower_bound = 0;  // certified lower bound on min_sigma D_max^eps
  double upper_bound = 0;
  double factor = 0.5;
  bool ok = false;  // factor * lower_bound <= log_J + tolerance
};

/// Factor 1 needs both `assume_structure` and a verified block form for the
/// run; otherwise the weaker factor 1/2 applies.
ConverseCertificate converse_certificate(const ProtocolTranscript& transcript, const FreeSet& family, double eps,
                                         bool assume_structure = true);

/// Parties are the label suffixes of rho (see party_of); `t` must match their
/// number. Every party swaps its own share with the same catalyst copy j,
/// which all parties read from shared randomness id_{n,t}.
ProtocolTranscript run_multiparty_transformation(const DensityMatrix& rho, const FreeSet& family, double eps,
                                                 double delta, int t, const ProtocolOptions& options = {});

struct BlockProtocolPlan {
  int m = 0;
  double gamma = 0;
  double eps = 0;
  double D = 0;
  double V = 0;
  int ell = 0;
  int blocks = 0;      // ceil(m / ell)
  int last_block = 0;  // length of the final block
  double eps_block = 0;  // eps ell / (2 m)
  double overhead = 0;   // 2 log2(2 m / (eps ell))
  double k_per_block = 0;
  std::string k_method;
  double k_second_order = 0;
  double log2_dim = 0;  // log2 |M|
  double catalyst_qubits = 0;  // |M| ell 2^k
  bool second_order_consistent = false;  // k_second_order <= ell (D + gamma)
  bool exact_consistent = false;         // k_per_block <= ell (D + gamma)
  std::vector<std::string> notes;
};

/// Requires gamma^2 <= eps. V = 0 clamps ell to 1.
BlockProtocolPlan plan_block_protocol(const DensityMatrix& rho, const DensityMatrix& sigma, int m, double gamma,
                                      double eps);

/// Runs ceil(m/ell) blocks in sequence against one catalyst pool, each with
/// fresh randomness. sigma is the relative-entropy-closest free state.
ProtocolTranscript run_block_protocol(const DensityMatrix& rho, const FreeSet& family, int m, double gamma,
                                      double eps, const ProtocolOptions& options = {});

struct RateRow {
  double eps = 0;
  int n = 0;
  double converse = 0;    // lower bound on (1/n) min D_max^eps(rho^n || sigma)
  double upper = 0;       // upper bound on the same
  double achievable = 0;  // upper + 2 log2(1/delta) / n
  double E_over_n = 0;
};

struct RateOptions {
  double delta = kDefaultDelta;
  std::size_t max_dim = 64;  // rows stop once d^n exceeds this
  SmoothClosestOptions closest;
  ClosestOptions relent;
};

struct RateReport {
  std::string free_set;
  double c_constant = 0;
  bool skipped = false;
  std::string notice;
  std::vector<RateRow> rows;
  std::vector<std::string> failures;

  bool ok() const noexcept { return failures.empty(); }
};

RateReport asymptotic_rate_report(const DensityMatrix& rho, const FreeSet& family, const std::vector<double>& eps_list,
                                  int n_max, const RateOptions& options = {});

}  // namespace erasure
