#include "erasure/protocols.hpp"

#include <algorithm>
#include <cmath>

namespace erasure {

namespace {

/// Families whose closest state comes from a conditional expectation, so
/// E(rho) is exact and the continuity correction is a valid lower bound.
bool exact_relent(FamilyKind kind) {
  return kind == FamilyKind::Coherence || kind == FamilyKind::Uniformity || kind == FamilyKind::Gibbs ||
         kind == FamilyKind::Asymmetry;
}

bool free_member(const FreeSet& family, const DensityMatrix& rho) {
  try {
    return membership(family, rho);
  } catch (const UnsupportedError&) {
    return false;
  }
}

}  // namespace

RateReport asymptotic_rate_report(const DensityMatrix& rho, const FreeSet& family, const std::vector<double>& eps_list,
                                  int n_max, const RateOptions& options) {
  if (n_max < 1) throw DomainError("rate report: n_max must be >= 1");
  if (options.delta <= 0 || options.delta >= 1) throw DomainError("rate report: delta must lie in (0, 1)");
  RateReport report;
  report.free_set = family.name();
  report.c_constant = c_constant(family, rho.layout(), 1);
  if (!std::isfinite(report.c_constant)) {
    report.skipped = true;
    report.notice = "C(F) is infinite for this free set; the asymptotic rate statement does not apply";
    return report;
  }
  int n_eff = 0;
  for (double dim = double(rho.dim()); n_eff < n_max && dim <= double(options.max_dim); dim *= double(rho.dim())) ++n_eff;
  if (n_eff < n_max) {
    report.notice = "rows stop at n = " + std::to_string(n_eff) + " (dimension budget " +
                    std::to_string(options.max_dim) + ")";
  }
  if (n_eff == 0) return report;

  const bool input_free = free_member(family, rho);
  std::vector<double> e_over_n(static_cast<std::size_t>(n_eff), 0.0);
  if (!input_free) {
    const auto seq = regularized_E(family, rho, n_eff, options.relent);
    for (int n = 1; n <= n_eff; ++n) e_over_n[std::size_t(n - 1)] = seq.per_copy[std::size_t(n - 1)].value;
  }
  for (int n = 2; n <= n_eff; ++n) {
    if (e_over_n[std::size_t(n - 1)] > e_over_n[std::size_t(n - 2)] + kProtocolTolerance) {
      report.failures.push_back("E(rho^n)/n increases at n = " + std::to_string(n));
    }
  }

  for (const double eps : eps_list) {
    if (eps < 0 || eps >= 1) throw DomainError("rate report: eps must lie in [0, 1)");
    for (int n = 1; n <= n_eff; ++n) {
      RateRow row;
      row.eps = eps;
      row.n = n;
      row.E_over_n = e_over_n[std::size_t(n - 1)];
      if (!input_free) {
        const auto rho_n = tensor_power(rho, n);
        const auto cs = closest_free_smooth_dmax(family, rho_n, eps, options.closest);
        row.upper = cs.estimate.value / n;
        row.converse = std::max(0.0, cs.estimate.lower) / n;
        if (exact_relent(family.kind()) && 2 * eps <= 1.0 / 3.0) {
          // rho' in the eps-ball is within 2 eps in trace norm and
          // D_max(rho' || sigma) >= D(rho' || sigma) >= E(rho')
          const double correction =
              continuity_bound_value(2 * eps, n * std::log2(double(rho.dim())), family.log_norm_inf(rho_n.layout()));
          row.converse = std::max(row.converse, row.E_over_n - correction / n);
        }
      }
      row.achievable = row.upper + 2 * std::log2(1 / options.delta) / n;
      if (row.converse > row.upper + kProtocolTolerance) {
        report.failures.push_back("converse above upper bound at eps = " + std::to_string(eps) +
                                  ", n = " + std::to_string(n));
      }
      if (eps == 0 && row.E_over_n > row.upper + kProtocolTolerance) {
        report.failures.push_back("E(rho^n)/n above min D_max at n = " + std::to_string(n));
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace erasure
