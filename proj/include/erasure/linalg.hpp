// Dense linear-algebra kernels shared by every module.
//
// Everything here is a free function templated on the Eigen expression type,
// so callers can pass blocks, maps and products without materialising them
// first. Matrix functions go through a Hermitian eigendecomposition; small
// negative eigenvalues produced by round-off are clamped to zero.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace erasure {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

namespace linalg {

template <typename Derived>
using PlainOf = typename Derived::PlainObject;

template <typename Derived>
using RealOf = typename Eigen::NumTraits<typename Derived::Scalar>::Real;

template <typename Derived>
using RealVectorOf = Eigen::Matrix<RealOf<Derived>, Eigen::Dynamic, 1>;

/// (M + M^dagger) / 2
template <typename Derived>
PlainOf<Derived> hermitian_part(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.adjoint()) / RealOf<Derived>(2);
}

template <typename Derived>
struct HermitianEig {
  RealVectorOf<Derived> values;  // ascending
  PlainOf<Derived> vectors;
};

template <typename Derived>
HermitianEig<Derived> eig_h(const Eigen::MatrixBase<Derived>& m) {
  Eigen::SelfAdjointEigenSolver<PlainOf<Derived>> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("Hermitian eigendecomposition failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

template <typename Derived>
RealVectorOf<Derived> eigenvalues_h(const Eigen::MatrixBase<Derived>& m) {
  Eigen::SelfAdjointEigenSolver<PlainOf<Derived>> solver(hermitian_part(m),
                                                         Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("Hermitian eigendecomposition failed");
  }
  return solver.eigenvalues();
}

/// U f(Lambda) U^dagger for a Hermitian argument.
template <typename Derived, typename Fn>
PlainOf<Derived> apply_function(const HermitianEig<Derived>& e, Fn&& fn) {
  PlainOf<Derived> scaled = e.vectors;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    scaled.col(i) *= fn(e.values(i));
  }
  return scaled * e.vectors.adjoint();
}

template <typename Derived, typename Fn>
PlainOf<Derived> apply_function(const Eigen::MatrixBase<Derived>& m, Fn&& fn) {
  return apply_function<Derived>(eig_h(m), std::forward<Fn>(fn));
}

template <typename Derived>
PlainOf<Derived> sqrt_psd(const Eigen::MatrixBase<Derived>& m) {
  using Real = RealOf<Derived>;
  return apply_function(m, [](Real x) { return x > 0 ? std::sqrt(x) : Real(0); });
}

/// Pseudo-inverse square root; eigenvalues at or below `cutoff` map to zero.
template <typename Derived>
PlainOf<Derived> pinv_sqrt_psd(const Eigen::MatrixBase<Derived>& m, RealOf<Derived> cutoff) {
  using Real = RealOf<Derived>;
  return apply_function(
      m, [cutoff](Real x) { return x > cutoff ? Real(1) / std::sqrt(x) : Real(0); });
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
template <typename Derived>
RealOf<Derived> trace_norm_h(const Eigen::MatrixBase<Derived>& m) {
  return eigenvalues_h(m).cwiseAbs().sum();
}

/// Sum of singular values of an arbitrary square matrix.
template <typename Derived>
RealOf<Derived> trace_norm(const Eigen::MatrixBase<Derived>& m) {
  Eigen::BDCSVD<PlainOf<Derived>> svd(m);
  return svd.singularValues().sum();
}

template <typename Derived>
RealOf<Derived> min_eigenvalue_h(const Eigen::MatrixBase<Derived>& m) {
  return eigenvalues_h(m).minCoeff();
}

template <typename Derived>
bool is_psd(const Eigen::MatrixBase<Derived>& m, RealOf<Derived> tol) {
  return min_eigenvalue_h(m) >= -tol;
}

template <typename DerivedA, typename DerivedB>
PlainOf<DerivedA> kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  PlainOf<DerivedA> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Kronecker product of a list, left to right.
inline CMatrix kron_all(std::span<const CMatrix> factors) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

inline CMatrix kron_power(const CMatrix& m, int n) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int i = 0; i < n; ++i) out = kron(out, m);
  return out;
}

/// Row-major multi-index helpers over a list of subsystem dimensions.
inline std::vector<std::size_t> strides_of(std::span<const std::size_t> dims) {
  std::vector<std::size_t> strides(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) strides[k - 1] = strides[k] * dims[k];
  return strides;
}

inline std::size_t product_of(std::span<const std::size_t> dims) {
  std::size_t p = 1;
  for (auto d : dims) p *= d;
  return p;
}

/// Trace out every subsystem whose `keep` flag is false.
template <typename Derived>
PlainOf<Derived> partial_trace(const Eigen::MatrixBase<Derived>& m, std::span<const std::size_t> dims,
                               const std::vector<bool>& keep) {
  const std::size_t total = product_of(dims);
  if (static_cast<std::size_t>(m.rows()) != total || keep.size() != dims.size()) {
    throw std::invalid_argument("partial_trace: dimension mismatch");
  }
  std::vector<std::size_t> kept_dims, gone_dims;
  for (std::size_t k = 0; k < dims.size(); ++k) (keep[k] ? kept_dims : gone_dims).push_back(dims[k]);
  const std::size_t dk = product_of(kept_dims);
  const std::size_t dg = product_of(gone_dims);
  const auto strides = strides_of(dims);

  // full index = kept_offset[a] + gone_offset[b]
  auto offsets = [&](bool kept, std::size_t count) {
    std::vector<std::size_t> out(count, 0);
    std::vector<std::size_t> sub_dims = kept ? kept_dims : gone_dims;
    for (std::size_t idx = 0; idx < count; ++idx) {
      std::size_t rem = idx, off = 0, pos = sub_dims.size();
      for (std::size_t k = dims.size(); k-- > 0;) {
        if (keep[k] != kept) continue;
        --pos;
        off += (rem % sub_dims[pos]) * strides[k];
        rem /= sub_dims[pos];
      }
      out[idx] = off;
    }
    return out;
  };
  const auto ko = offsets(true, dk);
  const auto go = offsets(false, dg);

  PlainOf<Derived> out = PlainOf<Derived>::Zero(dk, dk);
  for (std::size_t a = 0; a < dk; ++a) {
    for (std::size_t b = 0; b < dk; ++b) {
      typename Derived::Scalar s(0);
      for (std::size_t g = 0; g < dg; ++g) s += m(ko[a] + go[g], ko[b] + go[g]);
      out(a, b) = s;
    }
  }
  return out;
}

/// Reorder subsystems: output subsystem k is input subsystem order[k].
template <typename Derived>
PlainOf<Derived> permute_subsystems(const Eigen::MatrixBase<Derived>& m, std::span<const std::size_t> dims,
                                    std::span<const std::size_t> order) {
  const std::size_t total = product_of(dims);
  std::vector<std::size_t> new_dims(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) new_dims[k] = dims[order[k]];
  const auto old_strides = strides_of(dims);
  const auto new_strides = strides_of(new_dims);
  std::vector<std::size_t> map(total);  // new index -> old index
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx, old = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const std::size_t digit = rem / new_strides[k];
      rem %= new_strides[k];
      old += digit * old_strides[order[k]];
    }
    map[idx] = old;
  }
  PlainOf<Derived> out(total, total);
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = 0; j < total; ++j) out(i, j) = m(map[i], map[j]);
  return out;
}

/// Transpose the listed subsystems (flag true) in the computational basis.
template <typename Derived>
PlainOf<Derived> partial_transpose(const Eigen::MatrixBase<Derived>& m, std::span<const std::size_t> dims,
                                   const std::vector<bool>& transpose) {
  const std::size_t total = product_of(dims);
  const auto strides = strides_of(dims);
  PlainOf<Derived> out(total, total);
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = 0; j < total; ++j) {
      std::size_t ni = i, nj = j;
      for (std::size_t k = 0; k < dims.size(); ++k) {
        if (!transpose[k]) continue;
        const std::size_t di = (i / strides[k]) % dims[k];
        const std::size_t dj = (j / strides[k]) % dims[k];
        ni = ni - di * strides[k] + dj * strides[k];
        nj = nj - dj * strides[k] + di * strides[k];
      }
      out(ni, nj) = m(i, j);
    }
  }
  return out;
}

/// Left-multiply by `op` acting on subsystem `k` (identity elsewhere).
/// Costs O(total^2 * dims[k]) instead of forming the embedded operator.
inline CMatrix apply_left_local(const CMatrix& op, const CMatrix& m, std::span<const std::size_t> dims,
                                std::size_t k) {
  const std::size_t total = product_of(dims);
  const std::size_t d = dims[k];
  const std::size_t inner = strides_of(dims)[k];
  const std::size_t outer = total / (d * inner);
  CMatrix out(m.rows(), m.cols());
  CMatrix rows(d, m.cols());
  for (std::size_t a = 0; a < outer; ++a) {
    for (std::size_t b = 0; b < inner; ++b) {
      const std::size_t base = a * d * inner + b;
      for (std::size_t i = 0; i < d; ++i) rows.row(i) = m.row(base + i * inner);
      const CMatrix mixed = op * rows;
      for (std::size_t i = 0; i < d; ++i) out.row(base + i * inner) = mixed.row(i);
    }
  }
  return out;
}

/// op_k m op_k^dagger with op_k = op on subsystem k.
inline CMatrix conjugate_local(const CMatrix& op, const CMatrix& m, std::span<const std::size_t> dims,
                               std::size_t k) {
  const CMatrix left = apply_left_local(op, m, dims, k);
  return apply_left_local(op, left.adjoint(), dims, k).adjoint();
}

/// Euclidean projection of a real vector onto the probability simplex.
template <typename Derived>
RealVectorOf<Derived> project_to_simplex(const Eigen::MatrixBase<Derived>& v) {
  using Real = typename Derived::Scalar;
  std::vector<Real> u(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) u[static_cast<std::size_t>(i)] = v(i);
  std::sort(u.begin(), u.end(), std::greater<>());
  Real cumulative = 0, theta = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cumulative += u[i];
    const Real t = (cumulative - Real(1)) / Real(i + 1);
    if (u[i] - t > 0) theta = t;
  }
  RealVectorOf<Derived> out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = std::max(v(i) - theta, Real(0));
  return out;
}

/// Frobenius-nearest density matrix: eigenvalues projected onto the simplex.
template <typename Derived>
PlainOf<Derived> project_to_states(const Eigen::MatrixBase<Derived>& m) {
  const auto e = eig_h(m);
  const auto p = project_to_simplex(e.values);
  PlainOf<Derived> scaled = e.vectors;
  for (Eigen::Index i = 0; i < p.size(); ++i) scaled.col(i) *= p(i);
  return scaled * e.vectors.adjoint();
}

constexpr double kLn2 = std::numbers::ln2;

}  // namespace linalg
}  // namespace erasure
