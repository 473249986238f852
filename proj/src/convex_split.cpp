#include "erasure/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace erasure {

namespace {

bool is_diagonal(const CMatrix& m) {
  CMatrix off = m;
  off.diagonal().setZero();
  return off.cwiseAbs().maxCoeff() <= 1e-12;
}

/// F(tau, q^{(x)n}) for diagonal inputs. tau(x) = q^n(x) (1/n) sum_j r(x_j)
/// with r = p/q depends on x only through its type, so the sum runs over
/// compositions of n. Symbols with q = 0 carry no weight in q^n.
double classical_convex_split_fidelity(const RVector& p, const RVector& q, int n) {
  std::vector<double> log_q;
  std::vector<double> ratio;
  for (Eigen::Index a = 0; a < p.size(); ++a) {
    if (q(a) <= 0) continue;
    log_q.push_back(std::log(q(a)));
    ratio.push_back(p(a) / q(a));
  }
  const auto symbols = log_q.size();
  const double log_n_fact = std::lgamma(n + 1.0);
  std::vector<int> counts(symbols, 0);
  double total = 0;
  std::function<void(std::size_t, int)> visit = [&](std::size_t a, int left) {
    if (a + 1 == symbols) {
      counts[a] = left;
      double log_w = log_n_fact;
      double mean_ratio = 0;
      for (std::size_t b = 0; b < symbols; ++b) {
        log_w += counts[b] * log_q[b] - std::lgamma(counts[b] + 1.0);
        mean_ratio += counts[b] * ratio[b];
      }
      mean_ratio /= n;
      if (mean_ratio > 0) total += std::exp(log_w + 0.5 * std::log(mean_ratio));
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[a] = c;
      visit(a + 1, left - c);
    }
  };
  if (symbols > 0) visit(0, n);
  return std::min(total, 1.0);
}

}  // namespace

DensityMatrix convex_split_state(const DensityMatrix& rho, const DensityMatrix& sigma, int n) {
  if (rho.layout() != sigma.layout()) throw LayoutError("convex split: rho and sigma need the same layout");
  if (n < 1) throw DomainError("convex split: n must be >= 1");
  const double dim = std::pow(static_cast<double>(rho.dim()), n);
  if (dim > static_cast<double>(kMaxDenseDimension)) {
    throw DimensionError("convex split: dimension " + std::to_string(rho.dim()) + "^" + std::to_string(n) +
                         " exceeds " + std::to_string(kMaxDenseDimension));
  }
  const auto layout = tensor_power(sigma, n).layout();
  const auto d = static_cast<Eigen::Index>(layout.total_dim());
  CMatrix acc = CMatrix::Zero(d, d);
  for (int j = 0; j < n; ++j) {
    CMatrix term = CMatrix::Identity(1, 1);
    for (int i = 0; i < n; ++i) term = linalg::kron(term, i == j ? rho.matrix() : sigma.matrix());
    acc += term;
  }
  return DensityMatrix(layout, acc / double(n));
}

std::vector<ConvexSplitCheck> convex_split_bound_check(const DensityMatrix& rho, const DensityMatrix& sigma,
                                                       const std::vector<int>& ns,
                                                       const std::vector<double>& eps_values) {
  if (rho.layout() != sigma.layout()) throw LayoutError("convex split: rho and sigma need the same layout");
  for (const double eps : eps_values) {
    if (eps < 0 || eps >= 1) throw DomainError("convex split: eps must lie in [0, 1)");
  }
  for (const int n : ns) {
    if (n < 1) throw DomainError("convex split: n must be >= 1");
  }
  const bool classical = is_diagonal(rho.matrix()) && is_diagonal(sigma.matrix());
  const RVector p = rho.matrix().diagonal().real();
  const RVector q = sigma.matrix().diagonal().real();
  std::vector<double> lhs;
  for (const int n : ns) {
    if (classical) {
      const double f = classical_convex_split_fidelity(p, q, n);
      lhs.push_back(std::sqrt(std::max(0.0, 1 - f * f)));
    } else {
      lhs.push_back(purified_distance(convex_split_state(rho, sigma, n), tensor_power(sigma, n)));
    }
  }
  std::vector<ConvexSplitCheck> out;
  for (const double eps : eps_values) {
    double k = 0;
    if (classical) {
      k = eps > 0 ? smooth_dmax_classical_oracle(p, q, eps).value : dmax(p, q);
    } else {
      k = eps > 0 ? smooth_dmax(rho, sigma, eps).value : dmax(rho, sigma).value;
    }
    for (std::size_t i = 0; i < ns.size(); ++i) {
      ConvexSplitCheck c;
      c.classical = classical;
      c.k = k;
      c.eps = eps;
      c.n = ns[i];
      c.lhs = lhs[i];
      c.rhs = eps + std::sqrt(std::exp2(k) / ns[i]);
      c.ok = c.lhs <= c.rhs + kProtocolTolerance;
      out.push_back(c);
    }
  }
  return out;
}

std::vector<ConvexSplitCheck> convex_split_bound_check(const DensityMatrix& rho, const DensityMatrix& sigma,
                                                       const std::vector<int>& ns, double eps) {
  return convex_split_bound_check(rho, sigma, ns, std::vector<double>{eps});
}

ConvexSplitCheck convex_split_bound_check(const DensityMatrix& rho, const DensityMatrix& sigma, int n, double eps) {
  return convex_split_bound_check(rho, sigma, std::vector<int>{n}, eps).front();
}

int simulation_cap(std::size_t d, std::size_t cap_dim, int t) {
  int best = 0;
  double dim = static_cast<double>(d) * static_cast<double>(d);
  for (int n = 1; dim * std::pow(n, t) <= static_cast<double>(cap_dim); ++n) {
    best = n;
    dim *= static_cast<double>(d);
  }
  return best;
}

DensityMatrix controlled_swap_channel(const DensityMatrix& state, const std::vector<std::string>& target,
                                      const std::vector<std::vector<std::string>>& copies) {
  if (copies.empty()) throw DomainError("controlled swap channel needs at least one copy");
  const auto& layout = state.layout();
  const auto d = static_cast<Eigen::Index>(state.dim());
  CMatrix acc = CMatrix::Zero(d, d);
  for (const auto& copy : copies) {
    if (copy.size() != target.size()) throw LayoutError("controlled swap: copy and target differ in length");
    std::vector<std::size_t> order(layout.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    for (std::size_t i = 0; i < target.size(); ++i) {
      const auto a = layout.index_of(target[i]);
      const auto b = layout.index_of(copy[i]);
      if (layout[a].dim != layout[b].dim) {
        throw LayoutError("controlled swap: '" + target[i] + "' and '" + copy[i] + "' differ in dimension");
      }
      std::swap(order[a], order[b]);
    }
    acc += linalg::permute_subsystems(state.matrix(), layout.dims(), order);
  }
  return DensityMatrix(layout, acc / double(copies.size()), state.tolerance());
}

}  // namespace erasure
