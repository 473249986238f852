#include "erasure/entropies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace erasure {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxSupport = std::size_t{1} << 20;

/// Maximal fidelity sum_g sqrt(P_g X_g) over distributions X with X_g <= 2^lambda Q_g.
class WaterFilling {
 public:
  WaterFilling(const RVector& lp, const RVector& lq) {
    for (Eigen::Index g = 0; g < lp.size(); ++g) {
      if (lp(g) == kNegInf) continue;
      if (lq(g) == kNegInf) {
        unreachable_ = true;
        continue;
      }
      active_.push_back({lp(g), lq(g)});
    }
    std::sort(active_.begin(), active_.end(),
              [](const Group& a, const Group& b) { return a.lq - a.lp < b.lq - b.lp; });
    for (const auto& a : active_) {
      p_active_ += std::exp2(a.lp);
      max_log_ratio_ = std::max(max_log_ratio_, a.lp - a.lq);
    }
  }

  /// Largest log2 ratio on the reachable groups (+inf if some p-mass sits where q = 0).
  double dmax() const { return unreachable_ ? kInfinity : max_log_ratio_; }
  /// Fidelity in the limit lambda -> infinity.
  double fidelity_limit() const { return std::sqrt(p_active_); }

  double fidelity(double lambda) const {
    // suffix sums of P over the sorted active groups
    const std::size_t m = active_.size();
    std::vector<double> p_suffix(m + 1, 0.0);
    for (std::size_t g = m; g-- > 0;) p_suffix[g] = p_suffix[g + 1] + std::exp2(active_[g].lp);
    double cap_total = 0;
    for (const auto& a : active_) cap_total += std::exp2(lambda + a.lq);
    if (cap_total <= 1.0) {
      double f = 0;
      for (const auto& a : active_) f += std::exp2(0.5 * (a.lp + lambda + a.lq));
      return f;
    }
    // first k groups (smallest cap/P ratio) saturate their cap; the rest get c * P
    double capped = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const double c = (1.0 - capped) / p_suffix[k];
      const double t = std::exp2(lambda + active_[k].lq - active_[k].lp);
      if (c <= t) {
        double f = std::sqrt(c) * p_suffix[k];
        for (std::size_t j = 0; j < k; ++j) f += std::exp2(0.5 * (active_[j].lp + lambda + active_[j].lq));
        return f;
      }
      capped += std::exp2(lambda + active_[k].lq);
    }
    return 1.0;  // unreachable when caps exceed 1
  }

 private:
  struct Group {
    double lp;
    double lq;
  };
  std::vector<Group> active_;
  bool unreachable_ = false;
  double p_active_ = 0;
  double max_log_ratio_ = kNegInf;
};

RVector log2_of(const RVector& v) {
  RVector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) < 0) throw DomainError("probabilities must be nonnegative");
    out(i) = v(i) > 0 ? std::log2(v(i)) : kNegInf;
  }
  return out;
}

}  // namespace

EntropyEstimate smooth_dmax_classical_grouped(const RVector& log2_p, const RVector& log2_q, double eps) {
  if (!(eps >= 0 && eps < 1)) throw DomainError("smoothing parameter must lie in [0, 1)");
  if (log2_p.size() != log2_q.size()) throw DimensionError("distributions have different lengths");
  if (static_cast<std::size_t>(log2_p.size()) > kMaxSupport) throw DimensionError("support larger than 2^20");
  const WaterFilling wf(log2_p, log2_q);
  EntropyEstimate out;
  out.epsilon = eps;
  out.method = EstimateMethod::ClassicalBruteforce;
  const double target = std::sqrt(1.0 - eps * eps);
  const double top = wf.dmax();
  if (eps == 0) {
    out.value = out.lower = top;
    return out;
  }
  if (wf.fidelity(0.0) >= target) {
    out.value = out.lower = 0.0;
    return out;
  }
  double lo = 0.0, hi = top;
  if (top == kInfinity) {
    if (wf.fidelity_limit() < target) {
      out.value = out.lower = kInfinity;
      return out;
    }
    hi = 1.0;
    while (wf.fidelity(hi) < target) {
      lo = hi;
      hi *= 2;
    }
  }
  int it = 0;
  while (hi - lo > 1e-12 * std::max(1.0, hi) && it < 200) {
    const double mid = 0.5 * (lo + hi);
    (wf.fidelity(mid) >= target ? hi : lo) = mid;
    ++it;
  }
  out.value = hi;
  out.lower = lo;
  out.iterations = it;
  return out;
}

EntropyEstimate smooth_dmax_classical_oracle(const RVector& p, const RVector& q, double eps) {
  if (p.size() != q.size()) throw DimensionError("distributions have different lengths");
  return smooth_dmax_classical_grouped(log2_of(p), log2_of(q), eps);
}

GroupedDistributions binary_iid_groups(double p1, double q1, int n) {
  if (n < 1) throw DomainError("binary_iid_groups: n must be >= 1");
  // long double keeps the total mass within 1e-15 of one for n in the thousands,
  // which the smoothing at eps ~ 1e-5 resolves
  auto lg = [](double x) { return x > 0 ? std::log2(static_cast<long double>(x)) : -HUGE_VALL; };
  auto term = [](int count, long double log_value) { return count == 0 ? 0.0L : count * log_value; };
  const long double ln2 = std::log(2.0L);
  const long double lf = std::lgamma(n + 1.0L);
  GroupedDistributions g{RVector(n + 1), RVector(n + 1)};
  for (int k = 0; k <= n; ++k) {
    const long double lc = (lf - std::lgamma(k + 1.0L) - std::lgamma(n - k + 1.0L)) / ln2;
    g.log2_p(k) = static_cast<double>(lc + term(k, lg(p1)) + term(n - k, lg(1 - p1)));
    g.log2_q(k) = static_cast<double>(lc + term(k, lg(q1)) + term(n - k, lg(1 - q1)));
  }
  return g;
}

}  // namespace erasure
