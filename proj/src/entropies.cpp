#include "erasure/entropies.hpp"

#include <cmath>

namespace erasure {

namespace {

void require_same_layout(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.layout() != b.layout()) {
    throw LayoutError("entropy: layouts differ (" + a.layout().describe() + " vs " + b.layout().describe() + ")");
  }
}

double log2_or_zero(double x) { return x > 0 ? std::log2(x) : 0.0; }

struct Support {
  linalg::HermitianEig<CMatrix> eig;
  double cutoff;
};

Support support_of(const CMatrix& m) {
  auto e = linalg::eig_h(m);
  const double top = std::max(e.values.maxCoeff(), 0.0);
  return {std::move(e), kSupportThreshold * top};
}

/// Weight of rho outside the support of sigma.
double leakage(const CMatrix& rho, const Support& s) {
  double inside = 0;
  for (Eigen::Index i = 0; i < s.eig.values.size(); ++i) {
    if (s.eig.values(i) > s.cutoff) {
      inside += (s.eig.vectors.col(i).adjoint() * rho * s.eig.vectors.col(i))(0, 0).real();
    }
  }
  return rho.trace().real() - inside;
}

CMatrix log2_on_support(const Support& s) {
  const double cut = s.cutoff;
  return linalg::apply_function(s.eig, [cut](double x) { return x > cut ? std::log2(x) : 0.0; });
}

constexpr double kLeakTolerance = 1e-10;

}  // namespace

std::string to_string(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::ExactEigen: return "exact-eigen";
    case EstimateMethod::BisectionFeasibility: return "bisection-feasibility";
    case EstimateMethod::ClassicalBruteforce: return "classical-bruteforce";
    case EstimateMethod::SecondOrderExpansion: return "second-order-expansion";
  }
  return "unknown";
}

double von_neumann_entropy(const DensityMatrix& rho) {
  const RVector ev = rho.eigenvalues();
  double s = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > 0) s -= ev(i) * std::log2(ev(i));
  return s;
}

double shannon_entropy(const RVector& p) {
  double s = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > 0) s -= p(i) * std::log2(p(i));
  return s;
}

EntropyEstimate relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_layout(rho, sigma);
  EntropyEstimate out;
  const Support s = support_of(sigma.matrix());
  if (leakage(rho.matrix(), s) > kLeakTolerance) {
    out.value = out.lower = kInfinity;
    return out;
  }
  const double cross = (rho.matrix() * log2_on_support(s)).trace().real();
  out.value = -von_neumann_entropy(rho) - cross;
  out.lower = out.value;
  return out;
}

EntropyEstimate relative_entropy_variance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_layout(rho, sigma);
  const Support s = support_of(sigma.matrix());
  if (leakage(rho.matrix(), s) > kLeakTolerance) throw DomainError("relative_entropy_variance: supp(rho) not in supp(sigma)");
  const Support r = support_of(rho.matrix());
  const CMatrix l = log2_on_support(r) - log2_on_support(s);
  const double d = (rho.matrix() * l).trace().real();
  EntropyEstimate out;
  out.value = std::max(0.0, (rho.matrix() * l * l).trace().real() - d * d);
  out.lower = out.value;
  return out;
}

EntropyEstimate dmax(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_layout(rho, sigma);
  EntropyEstimate out;
  const Support s = support_of(sigma.matrix());
  if (leakage(rho.matrix(), s) > kLeakTolerance) {
    out.value = out.lower = kInfinity;
    return out;
  }
  const double cut = s.cutoff;
  const CMatrix isq = linalg::apply_function(s.eig, [cut](double x) { return x > cut ? 1.0 / std::sqrt(x) : 0.0; });
  const double top = linalg::eigenvalues_h(CMatrix(isq * rho.matrix() * isq)).maxCoeff();
  out.value = out.lower = std::log2(top);
  return out;
}

double relative_entropy(const RVector& p, const RVector& q) {
  double d = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) <= 0) continue;
    if (q(i) <= 0) return kInfinity;
    d += p(i) * std::log2(p(i) / q(i));
  }
  return d;
}

double relative_entropy_variance(const RVector& p, const RVector& q) {
  const double d = relative_entropy(p, q);
  if (d == kInfinity) throw DomainError("relative_entropy_variance: supp(p) not in supp(q)");
  double m2 = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) <= 0) continue;
    const double l = std::log2(p(i) / q(i));
    m2 += p(i) * l * l;
  }
  return std::max(0.0, m2 - d * d);
}

double dmax(const RVector& p, const RVector& q) {
  double best = -kInfinity;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) <= 0) continue;
    if (q(i) <= 0) return kInfinity;
    best = std::max(best, std::log2(p(i) / q(i)));
  }
  return best;
}

EntropyEstimate second_order_dmax(const DensityMatrix& rho, const DensityMatrix& sigma, int n, double eps) {
  if (n < 1) throw DomainError("second_order_dmax: n must be >= 1");
  const double d = relative_entropy(rho, sigma).value;
  if (d == kInfinity) throw DomainError("second_order_dmax: supp(rho) not in supp(sigma)");
  const double v = relative_entropy_variance(rho, sigma).value;
  EntropyEstimate out;
  out.value = out.lower = n * d + std::sqrt(n * v) * gaussian_cdf_inv(eps);
  out.epsilon = eps;
  out.method = EstimateMethod::SecondOrderExpansion;
  return out;
}

EntropyEstimate second_order_dmax(const RVector& p, const RVector& q, int n, double eps) {
  if (n < 1) throw DomainError("second_order_dmax: n must be >= 1");
  const double d = relative_entropy(p, q);
  if (d == kInfinity) throw DomainError("second_order_dmax: supp(p) not in supp(q)");
  const double v = relative_entropy_variance(p, q);
  EntropyEstimate out;
  out.value = out.lower = n * d + std::sqrt(n * v) * gaussian_cdf_inv(eps);
  out.epsilon = eps;
  out.method = EstimateMethod::SecondOrderExpansion;
  return out;
}

double continuity_bound_value(double trace_dist, double log_dim, double inf_log_norm) {
  if (trace_dist > 1.0 / 3.0 + 1e-12) throw DomainError("continuity bound needs ||rho - rho'||_1 <= 1/3");
  if (trace_dist <= 0) return 0.0;
  return trace_dist * (log_dim + inf_log_norm) - trace_dist * log2_or_zero(trace_dist) + 4 * trace_dist;
}

double continuity_bound(const DensityMatrix& rho, const DensityMatrix& rho_prime, double inf_log_norm) {
  const double t = trace_distance(rho, rho_prime);
  return continuity_bound_value(t, std::log2(static_cast<double>(rho.dim())), inf_log_norm);
}

}  // namespace erasure
