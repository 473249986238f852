#include "erasure/density_matrix.hpp"

#include <algorithm>
#include <cmath>

namespace erasure {

namespace {

void require_same_layout(const DensityMatrix& a, const DensityMatrix& b, const char* op) {
  if (a.layout() != b.layout()) {
    throw LayoutError(std::string(op) + ": layouts differ (" + a.layout().describe() + " vs " +
                      b.layout().describe() + ")");
  }
}

/// Digit of register `k` in a row-major composite index.
std::size_t digit(std::size_t index, const std::vector<std::size_t>& strides, const std::vector<std::size_t>& dims,
                  std::size_t k) {
  return (index / strides[k]) % dims[k];
}

/// Orthonormal columns: `keep` followed by Gram-Schmidt completions drawn from
/// `candidates` until `target` columns exist.
CMatrix complete_basis(const CMatrix& keep, const CMatrix& candidates, Eigen::Index target) {
  CMatrix out(keep.rows(), target);
  Eigen::Index filled = keep.cols();
  out.leftCols(filled) = keep;
  for (Eigen::Index c = 0; c < candidates.cols() && filled < target; ++c) {
    CVector v = candidates.col(c);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < filled; ++j) v -= out.col(j).dot(v) * out.col(j);
    }
    const double n = v.norm();
    if (n > 1e-8) out.col(filled++) = v / n;
  }
  if (filled < target) throw DomainError("ancilla too small for the requested purification");
  return out;
}

/// Coefficient matrix (d_A x d_B) of the purification of theta that maximises
/// the overlap with the bipartite pure state whose coefficients are `psi`.
/// Completion directions are taken from `allowed` (columns in the B space).
CMatrix uhlmann_coefficients(const CMatrix& psi, const CMatrix& theta, const CMatrix& allowed) {
  const auto e = linalg::eig_h(theta);
  const double top = std::max(e.values.maxCoeff(), 0.0);
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < e.values.size(); ++i)
    if (e.values(i) > 1e-12 * top && e.values(i) > 0) support.push_back(i);
  const auto r = static_cast<Eigen::Index>(support.size());
  if (psi.cols() < r) throw DomainError("ancilla dimension is smaller than rank(theta_A)");

  CMatrix pd(theta.rows(), r);
  for (Eigen::Index k = 0; k < r; ++k) pd.col(k) = e.vectors.col(support[k]) * std::sqrt(e.values(support[k]));

  const CMatrix z = psi.adjoint() * pd;  // d_B x r
  Eigen::JacobiSVD<CMatrix> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector s = svd.singularValues();
  const double smax = s.size() ? s.maxCoeff() : 0.0;
  Eigen::Index k = 0;
  while (k < s.size() && s(k) > 1e-12 * std::max(smax, 1e-300) && s(k) > 1e-14) ++k;
  const CMatrix u = complete_basis(svd.matrixU().leftCols(k), allowed, r);
  const CMatrix y = svd.matrixV() * u.adjoint();  // r x d_B
  return pd * y;
}

/// Bipartite coefficient matrix of a ket with the first `da` index block as rows.
CMatrix as_coefficients(const CVector& ket, Eigen::Index da, Eigen::Index db) {
  CMatrix m(da, db);
  for (Eigen::Index a = 0; a < da; ++a)
    for (Eigen::Index b = 0; b < db; ++b) m(a, b) = ket(a * db + b);
  return m;
}

CVector as_ket(const CMatrix& coeffs) {
  CVector v(coeffs.rows() * coeffs.cols());
  for (Eigen::Index a = 0; a < coeffs.rows(); ++a)
    for (Eigen::Index b = 0; b < coeffs.cols(); ++b) v(a * coeffs.cols() + b) = coeffs(a, b);
  return v;
}

CVector top_eigenvector(const CMatrix& m) {
  const auto e = linalg::eig_h(m);
  return e.vectors.col(e.values.size() - 1);
}

/// Order that moves the labels of `front` to the front (in front's order).
std::vector<std::size_t> front_order(const RegisterLayout& full, const RegisterLayout& front) {
  std::vector<std::size_t> order;
  std::vector<bool> used(full.size(), false);
  for (const auto& f : front.factors()) {
    const auto i = full.index_of(f.label);
    if (full[i].dim != f.dim) throw LayoutError("register '" + f.label + "' has mismatched dimension");
    order.push_back(i);
    used[i] = true;
  }
  for (std::size_t i = 0; i < full.size(); ++i)
    if (!used[i]) order.push_back(i);
  return order;
}

std::vector<std::size_t> inverse_permutation(const std::vector<std::size_t>& order) {
  std::vector<std::size_t> inv(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) inv[order[k]] = k;
  return inv;
}

}  // namespace

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  auto layout = a.layout().concat(b.layout());
  return DensityMatrix(std::move(layout), linalg::kron(a.matrix(), b.matrix()),
                       std::max(a.tolerance(), b.tolerance()));
}

DensityMatrix tensor_power(const DensityMatrix& state, int n) {
  if (n < 1) throw DomainError("tensor power needs n >= 1");
  DensityMatrix out = state.relabeled(state.layout().relabeled("#1"));
  for (int k = 2; k <= n; ++k) out = tensor(out, state.relabeled(state.layout().relabeled("#" + std::to_string(k))));
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& state, const std::set<std::string>& discard) {
  const auto gone = state.layout().mask(discard);
  std::vector<bool> keep(gone.size());
  for (std::size_t i = 0; i < gone.size(); ++i) keep[i] = !gone[i];
  const auto dims = state.layout().dims();
  CMatrix reduced = linalg::partial_trace(state.matrix(), dims, keep);
  return DensityMatrix(state.layout().without(discard), std::move(reduced), state.tolerance());
}

DensityMatrix reduced_state(const DensityMatrix& state, const std::set<std::string>& keep) {
  std::set<std::string> discard;
  for (const auto& l : state.layout().labels())
    if (!keep.count(l)) discard.insert(l);
  state.layout().mask(keep);  // validates labels
  return partial_trace(state, discard);
}

DensityMatrix permute_registers(const DensityMatrix& state, const std::vector<std::size_t>& order) {
  auto layout = state.layout().permuted(order);
  const auto dims = state.layout().dims();
  return DensityMatrix(std::move(layout), linalg::permute_subsystems(state.matrix(), dims, order),
                       state.tolerance());
}

double fidelity_from_sqrt(const CMatrix& sqrt_a, const CMatrix& b) {
  const RVector ev = linalg::eigenvalues_h(CMatrix(sqrt_a * b * sqrt_a));
  double f = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) f += ev(i) > 0 ? std::sqrt(ev(i)) : 0.0;
  return f;
}

double fidelity(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows()) throw LayoutError("fidelity: dimension mismatch");
  // Singular values of sqrt(a) sqrt(b) avoid square roots of round-off
  // eigenvalues; eigenvalues below 1e-14 * max are treated as exact zeros.
  auto root = [](const CMatrix& m) {
    const auto e = linalg::eig_h(m);
    const double cut = 1e-14 * std::max(e.values.maxCoeff(), 0.0);
    return linalg::apply_function(e, [cut](double x) { return x > cut ? std::sqrt(x) : 0.0; });
  };
  return linalg::trace_norm(CMatrix(root(a) * root(b)));
}

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  require_same_layout(a, b, "fidelity");
  return std::clamp(fidelity(a.matrix(), b.matrix()), 0.0, 1.0);
}

double purified_distance(const DensityMatrix& a, const DensityMatrix& b) {
  const double f = fidelity(a, b);
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  require_same_layout(a, b, "trace_distance");
  return linalg::trace_norm_h(CMatrix(a.matrix() - b.matrix()));
}

DensityMatrix purify(const DensityMatrix& state, const std::string& ancilla_label, AncillaSize size) {
  const auto e = linalg::eig_h(state.matrix());
  const double top = std::max(e.values.maxCoeff(), 0.0);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = e.values.size(); i-- > 0;)
    if (e.values(i) > 1e-12 * top && e.values(i) > 0) kept.push_back(i);
  const auto d = static_cast<Eigen::Index>(state.dim());
  const Eigen::Index da = size == AncillaSize::Full ? d : std::max<Eigen::Index>(1, kept.size());
  CMatrix coeffs = CMatrix::Zero(d, da);
  for (std::size_t k = 0; k < kept.size(); ++k)
    coeffs.col(static_cast<Eigen::Index>(k)) = e.vectors.col(kept[k]) * std::sqrt(e.values(kept[k]));
  auto layout = state.layout().concat(RegisterLayout::single(ancilla_label, static_cast<std::size_t>(da)));
  return DensityMatrix::pure(std::move(layout), as_ket(coeffs), state.tolerance());
}

DensityMatrix uhlmann_partner(const DensityMatrix& rho_pure_AB, const DensityMatrix& theta_A) {
  if (!rho_pure_AB.is_pure(1e-8)) throw StateError("uhlmann_partner: input is not a pure state");
  const auto order = front_order(rho_pure_AB.layout(), theta_A.layout());
  const DensityMatrix front = permute_registers(rho_pure_AB, order);
  const auto da = static_cast<Eigen::Index>(theta_A.dim());
  const auto db = static_cast<Eigen::Index>(rho_pure_AB.dim()) / da;

  const CMatrix psi = as_coefficients(top_eigenvector(front.matrix()), da, db);
  // Completions prefer the range of psi^dagger so the partner stays on supp(rho_B).
  const CMatrix allowed = [&] {
    CMatrix range = linalg::sqrt_psd(CMatrix(psi.adjoint() * psi));
    CMatrix all(db, range.cols() + db);
    all << range, CMatrix::Identity(db, db);
    return all;
  }();
  const CMatrix phi = uhlmann_coefficients(psi, theta_A.matrix(), allowed);
  const DensityMatrix partner = DensityMatrix::pure(front.layout(), as_ket(phi), rho_pure_AB.tolerance());
  return permute_registers(partner, inverse_permutation(order));
}

DensityMatrix cq_extension(const DensityMatrix& rho_AB, const DensityMatrix& sigma_A,
                           const std::string& classical_label) {
  const auto& full = rho_AB.layout();
  full.index_of(classical_label);
  if (sigma_A.layout().contains(classical_label)) throw LayoutError("classical register is part of sigma_A");
  if (full.size() != sigma_A.layout().size() + 1) {
    throw LayoutError("rho_AB must consist of sigma_A's registers plus the classical register");
  }
  if (off_block_mass(rho_AB.matrix(), full, classical_label) > rho_AB.tolerance()) {
    throw StateError("rho_AB is not classical on register '" + classical_label + "'");
  }
  const auto order = front_order(full, sigma_A.layout());
  const DensityMatrix rho = permute_registers(rho_AB, order);  // A..., B
  const auto da = static_cast<Eigen::Index>(sigma_A.dim());
  const auto db = static_cast<Eigen::Index>(full.dim_of(classical_label));
  const Eigen::Index dc = da * db;

  // purification |rho>_{A (B C)} with coefficient rows indexed by A
  const auto e = linalg::eig_h(rho.matrix());
  CMatrix coeffs_abc = CMatrix::Zero(da * db, dc);
  for (Eigen::Index i = 0; i < e.values.size(); ++i)
    if (e.values(i) > 0) coeffs_abc.col(i) = e.vectors.col(i) * std::sqrt(e.values(i));
  CMatrix psi(da, db * dc);
  for (Eigen::Index a = 0; a < da; ++a)
    for (Eigen::Index b = 0; b < db; ++b) psi.block(a, b * dc, 1, dc) = coeffs_abc.row(a * db + b);

  // classical marginal rho_B and the allowed completion space supp(rho_B) (x) C
  RVector rho_b = RVector::Zero(db);
  for (Eigen::Index a = 0; a < da; ++a)
    for (Eigen::Index b = 0; b < db; ++b) rho_b(b) += rho.matrix()(a * db + b, a * db + b).real();
  const double top = rho_b.maxCoeff();
  std::vector<Eigen::Index> on_support;
  for (Eigen::Index b = 0; b < db; ++b)
    if (rho_b(b) > 1e-10 * top) on_support.push_back(b);
  CMatrix allowed = CMatrix::Zero(db * dc, static_cast<Eigen::Index>(on_support.size()) * dc);
  Eigen::Index col = 0;
  for (auto b : on_support)
    for (Eigen::Index c = 0; c < dc; ++c) allowed(b * dc + c, col++) = 1.0;
  const CMatrix phi = uhlmann_coefficients(psi, sigma_A.matrix(), allowed);  // da x (db dc)

  // sigma'_AB = Tr_C |phi><phi|
  CMatrix rows(da * db, dc);
  for (Eigen::Index a = 0; a < da; ++a)
    for (Eigen::Index b = 0; b < db; ++b) rows.row(a * db + b) = phi.block(a, b * dc, 1, dc);
  CMatrix sigma_ab = rows * rows.adjoint();

  // pinch B, then project onto supp(rho_B)
  std::vector<bool> keep_b(static_cast<std::size_t>(db), false);
  for (auto b : on_support) keep_b[static_cast<std::size_t>(b)] = true;
  for (Eigen::Index i = 0; i < da * db; ++i) {
    for (Eigen::Index j = 0; j < da * db; ++j) {
      const auto bi = i % db, bj = j % db;
      if (bi != bj || !keep_b[static_cast<std::size_t>(bi)] || !keep_b[static_cast<std::size_t>(bj)]) {
        sigma_ab(i, j) = 0;
      }
    }
  }
  const double mass = sigma_ab.trace().real();
  if (mass <= 0) throw StateError("cq_extension: extension has no weight on supp(rho_B)");
  sigma_ab /= mass;
  const DensityMatrix ext(rho.layout(), sigma_ab, std::max(rho_AB.tolerance(), 1e-8));
  return permute_registers(ext, inverse_permutation(order));
}

UnitaryOp controlled_swap(const RegisterLayout& layout, const std::string& control, const std::string& target,
                          const std::vector<std::string>& blocks) {
  const auto dims = layout.dims();
  const auto c = layout.index_of(control);
  const auto t = layout.index_of(target);
  if (dims[c] != blocks.size()) {
    throw LayoutError("control register '" + control + "' has dimension " + std::to_string(dims[c]) + " but " +
                      std::to_string(blocks.size()) + " swap blocks were given");
  }
  std::vector<std::size_t> block_index;
  for (const auto& b : blocks) {
    const auto k = layout.index_of(b);
    if (dims[k] != dims[t]) throw LayoutError("register '" + b + "' cannot be swapped with '" + target + "'");
    if (k == c) throw LayoutError("control register cannot be a swap block");
    block_index.push_back(k);
  }
  if (t == c) throw LayoutError("control register cannot be the swap target");
  const auto strides = linalg::strides_of(dims);
  const std::size_t total = layout.total_dim();
  CMatrix u = CMatrix::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  for (std::size_t x = 0; x < total; ++x) {
    const std::size_t j = digit(x, strides, dims, c);
    const std::size_t k = block_index[j];
    std::size_t y = x;
    if (k != t) {
      const std::size_t dt = digit(x, strides, dims, t), dk = digit(x, strides, dims, k);
      y = x - dt * strides[t] - dk * strides[k] + dk * strides[t] + dt * strides[k];
    }
    u(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = 1.0;
  }
  return UnitaryOp(layout, std::move(u));
}

UnitaryOp controlled_swap(const RegisterLayout& layout, const std::string& control, const std::string& target_a,
                          const std::string& target_b) {
  return controlled_swap(layout, control, target_a, std::vector<std::string>{target_b});
}

UnitaryOp swap_registers(const RegisterLayout& layout, const std::string& a, const std::string& b) {
  const auto ia = layout.index_of(a), ib = layout.index_of(b);
  if (layout[ia].dim != layout[ib].dim) throw LayoutError("swap of registers with different dimensions");
  const auto dims = layout.dims();
  const auto strides = linalg::strides_of(dims);
  const std::size_t total = layout.total_dim();
  CMatrix u = CMatrix::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  for (std::size_t x = 0; x < total; ++x) {
    const std::size_t da = digit(x, strides, dims, ia), db = digit(x, strides, dims, ib);
    const std::size_t y = x - da * strides[ia] - db * strides[ib] + db * strides[ia] + da * strides[ib];
    u(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = 1.0;
  }
  return UnitaryOp(layout, std::move(u));
}

bool dominance_check(const DensityMatrix& theta, const DensityMatrix& bound, double factor) {
  require_same_layout(theta, bound, "dominance_check");
  return linalg::is_psd(CMatrix(factor * bound.matrix() - theta.matrix()), theta.tolerance());
}

DensityMatrix pinch(const DensityMatrix& state, const std::string& label) {
  const auto dims = state.layout().dims();
  const auto k = state.layout().index_of(label);
  const auto strides = linalg::strides_of(dims);
  CMatrix m = state.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (digit(static_cast<std::size_t>(i), strides, dims, k) != digit(static_cast<std::size_t>(j), strides, dims, k))
        m(i, j) = 0;
  return DensityMatrix(state.layout(), std::move(m), state.tolerance());
}

double off_block_mass(const CMatrix& matrix, const RegisterLayout& layout, const std::string& label) {
  const auto dims = layout.dims();
  const auto k = layout.index_of(label);
  const auto strides = linalg::strides_of(dims);
  double sum = 0;
  for (Eigen::Index i = 0; i < matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < matrix.cols(); ++j)
      if (digit(static_cast<std::size_t>(i), strides, dims, k) != digit(static_cast<std::size_t>(j), strides, dims, k))
        sum += std::norm(matrix(i, j));
  return std::sqrt(sum);
}

bool is_classical_on(const DensityMatrix& state, const std::string& label) {
  return off_block_mass(state.matrix(), state.layout(), label) <= state.tolerance();
}

CMatrix support_projector(const CMatrix& psd) {
  const auto e = linalg::eig_h(psd);
  const double top = std::max(e.values.maxCoeff(), 0.0);
  return linalg::apply_function(e, [top](double x) { return x > 1e-10 * top && x > 0 ? 1.0 : 0.0; });
}

}  // namespace erasure
