// Independent reference computations for the unit tests. Nothing here calls
// the library routine it is used to check.
#pragma once

#include "erasure/density_matrix.hpp"
#include "erasure/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

using erasure::CMatrix;
using erasure::Complex;
using erasure::RVector;

/// Tr_B of a (dA*dB)x(dA*dB) matrix by explicit index summation.
inline CMatrix trace_out_second(const CMatrix& m, int da, int db) {
  CMatrix out = CMatrix::Zero(da, da);
  for (int a = 0; a < da; ++a)
    for (int a2 = 0; a2 < da; ++a2)
      for (int b = 0; b < db; ++b) out(a, a2) += m(a * db + b, a2 * db + b);
  return out;
}

inline CMatrix trace_out_first(const CMatrix& m, int da, int db) {
  CMatrix out = CMatrix::Zero(db, db);
  for (int b = 0; b < db; ++b)
    for (int b2 = 0; b2 < db; ++b2)
      for (int a = 0; a < da; ++a) out(b, b2) += m(a * db + b, a * db + b2);
  return out;
}

/// Square root through the general complex eigensolver.
inline CMatrix sqrt_via_complex_eig(const CMatrix& m) {
  Eigen::ComplexEigenSolver<CMatrix> es(m);
  CMatrix d = CMatrix::Zero(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) d(i, i) = std::sqrt(std::max(es.eigenvalues()(i).real(), 0.0));
  return es.eigenvectors() * d * es.eigenvectors().inverse();
}

/// ||sqrt(a) sqrt(b)||_1 through singular values.
inline double fidelity_svd(const CMatrix& a, const CMatrix& b) {
  Eigen::JacobiSVD<CMatrix> svd(sqrt_via_complex_eig(a) * sqrt_via_complex_eig(b));
  return svd.singularValues().sum();
}

inline double classical_fidelity(const RVector& p, const RVector& q) {
  double f = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) f += std::sqrt(p(i) * q(i));
  return f;
}

/// Brute-force smoothing for two-outcome distributions: scan the smoothed
/// first probability on a fine grid, keep the smallest max ratio inside the ball.
inline double smooth_dmax_two_outcome_grid(double p0, double q0, double eps, int steps = 2000000) {
  const double target = std::sqrt(1 - eps * eps);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    const double x = static_cast<double>(i) / steps;
    const double f = std::sqrt(p0 * x) + std::sqrt((1 - p0) * (1 - x));
    if (f < target) continue;
    best = std::min(best, std::max(x / q0, (1 - x) / (1 - q0)));
  }
  return std::log2(best);
}

/// Eigenvalue-based relative entropy of commuting diagonal matrices.
inline double kl_bits(const RVector& p, const RVector& q) {
  double d = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > 0) d += p(i) * std::log2(p(i) / q(i));
  return d;
}

inline CMatrix ket_projector(std::initializer_list<Complex> amps) {
  erasure::CVector v(static_cast<Eigen::Index>(amps.size()));
  Eigen::Index i = 0;
  for (auto a : amps) v(i++) = a;
  v /= v.norm();
  return v * v.adjoint();
}

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Partial transpose on the second factor of a (da*db)-dimensional matrix.
inline CMatrix transpose_second(const CMatrix& m, int da, int db) {
  CMatrix out(m.rows(), m.cols());
  for (int a = 0; a < da; ++a)
    for (int b = 0; b < db; ++b)
      for (int a2 = 0; a2 < da; ++a2)
        for (int b2 = 0; b2 < db; ++b2) out(a * db + b, a2 * db + b2) = m(a * db + b2, a2 * db + b);
  return out;
}

/// Von Neumann entropy in bits via the general complex eigensolver.
inline double entropy_bits(const CMatrix& m) {
  Eigen::ComplexEigenSolver<CMatrix> es(m);
  double s = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double l = es.eigenvalues()(i).real();
    if (l > 1e-14) s -= l * std::log2(l);
  }
  return s;
}

/// log2 of the largest root of det(rho - x sigma) = 0 for 2x2 inputs with sigma > 0.
inline double dmax_2x2(const CMatrix& rho, const CMatrix& sigma) {
  // det(rho - x sigma) = det(sigma) x^2 - c x + det(rho)
  const double ds = (sigma(0, 0) * sigma(1, 1) - sigma(0, 1) * sigma(1, 0)).real();
  const double dr = (rho(0, 0) * rho(1, 1) - rho(0, 1) * rho(1, 0)).real();
  const double c = (rho(0, 0) * sigma(1, 1) + rho(1, 1) * sigma(0, 0) - rho(0, 1) * sigma(1, 0) -
                    rho(1, 0) * sigma(0, 1)).real();
  const double x = (c + std::sqrt(std::max(c * c - 4 * ds * dr, 0.0))) / (2 * ds);
  return std::log2(x);
}

/// F(tau, q^{(x)n}) for the two-outcome convex split, summing C(n,k) q^n(x)
/// sqrt(mean ratio) over the number k of ones with a running binomial weight.
inline double binary_convex_split_fidelity(double p1, double q1, int n) {
  const long double r0 = (1 - p1) / (1 - q1);
  const long double r1 = p1 / q1;
  long double weight = std::pow(static_cast<long double>(1 - q1), n);  // C(n,0) q0^n
  long double f = 0;
  for (int k = 0; k <= n; ++k) {
    f += weight * std::sqrt(((n - k) * r0 + k * r1) / n);
    weight *= static_cast<long double>(n - k) / (k + 1) * q1 / (1 - q1);
  }
  return static_cast<double>(f);
}

/// Distribution over n-bit strings (bit 0 is the most significant) averaged
/// over the bit permutations that exchange bit `target` with each bit in `copies`.
inline std::vector<double> average_bit_swaps(const std::vector<double>& dist, int n, int target,
                                             const std::vector<int>& copies) {
  std::vector<double> out(dist.size(), 0.0);
  for (const int c : copies) {
    for (std::size_t x = 0; x < dist.size(); ++x) {
      const int bt = (x >> (n - 1 - target)) & 1;
      const int bc = (x >> (n - 1 - c)) & 1;
      std::size_t y = x;
      if (bt != bc) y ^= (std::size_t{1} << (n - 1 - target)) | (std::size_t{1} << (n - 1 - c));
      out[y] += dist[x] / copies.size();
    }
  }
  return out;
}

inline double purified_distance_classical(const std::vector<double>& p, const std::vector<double>& q) {
  double f = 0;
  for (std::size_t i = 0; i < p.size(); ++i) f += std::sqrt(p[i] * q[i]);
  return std::sqrt(std::max(0.0, 1 - f * f));
}

/// Smoothed max-relative entropy of grouped distributions given by log2
/// group totals. For a ratio bound 2^lambda the best fidelity caps each
/// group at 2^lambda Q_k and scales the rest of P up to unit mass; the scale
/// is found by bisection, then lambda by an outer bisection.
inline double smooth_dmax_groups(const std::vector<long double>& log2_p, const std::vector<long double>& log2_q,
                                 double eps) {
  const long double target = std::sqrt(1.0L - static_cast<long double>(eps) * eps);
  auto best_fidelity = [&](long double lambda) {
    auto mass = [&](long double log2_c) {
      long double m = 0;
      for (std::size_t k = 0; k < log2_p.size(); ++k) m += std::exp2(std::min(log2_c + log2_p[k], lambda + log2_q[k]));
      return m;
    };
    long double lo = -4000, hi = 4000;
    if (mass(hi) < 1) return static_cast<long double>(-1);
    for (int it = 0; it < 200; ++it) {
      const long double mid = (lo + hi) / 2;
      (mass(mid) < 1 ? lo : hi) = mid;
    }
    long double f = 0;
    for (std::size_t k = 0; k < log2_p.size(); ++k)
      f += std::exp2((log2_p[k] + std::min(hi + log2_p[k], lambda + log2_q[k])) / 2);
    return f;
  };
  long double lo = -1, hi = 4000;
  for (int it = 0; it < 200; ++it) {
    const long double mid = (lo + hi) / 2;
    (best_fidelity(mid) >= target ? hi : lo) = mid;
  }
  return static_cast<double>(hi);
}

}  // namespace oracle
