#include "erasure/density_matrix.hpp"

#include <cmath>
#include <sstream>

namespace erasure {

namespace {

void require_square(const CMatrix& m, const RegisterLayout& layout, const char* what) {
  const auto d = static_cast<Eigen::Index>(layout.total_dim());
  if (m.rows() != m.cols() || m.rows() != d) {
    std::ostringstream os;
    os << what << ": matrix is " << m.rows() << "x" << m.cols() << " but layout " << layout.describe()
       << " has dimension " << d;
    throw LayoutError(os.str());
  }
}

}  // namespace

DensityMatrix::DensityMatrix(RegisterLayout layout, CMatrix matrix, double tolerance)
    : layout_(std::move(layout)), tolerance_(tolerance) {
  if (!(tolerance >= 0)) throw DomainError("tolerance must be nonnegative");
  require_square(matrix, layout_, "DensityMatrix");
  if (!matrix.allFinite()) throw StateError("density matrix has non-finite entries");
  const double asym = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  if (asym > tolerance) throw StateError("matrix is not Hermitian (deviation " + std::to_string(asym) + ")");
  matrix_ = linalg::hermitian_part(matrix);
  const double tr = matrix_.trace().real();
  if (std::abs(tr - 1.0) > tolerance) throw StateError("trace is " + std::to_string(tr) + ", expected 1");
  const double lo = linalg::min_eigenvalue_h(matrix_);
  if (lo < -tolerance) throw StateError("matrix has negative eigenvalue " + std::to_string(lo));
}

DensityMatrix DensityMatrix::pure(RegisterLayout layout, const CVector& ket, double tolerance) {
  const double norm = ket.norm();
  if (norm == 0) throw StateError("zero vector cannot be normalised");
  const CVector v = ket / norm;
  return DensityMatrix(std::move(layout), v * v.adjoint(), tolerance);
}

DensityMatrix DensityMatrix::maximally_mixed(RegisterLayout layout) {
  const auto d = static_cast<Eigen::Index>(layout.total_dim());
  return DensityMatrix(std::move(layout), CMatrix::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix DensityMatrix::basis_state(RegisterLayout layout, std::size_t index) {
  const auto d = static_cast<Eigen::Index>(layout.total_dim());
  if (static_cast<Eigen::Index>(index) >= d) throw DomainError("basis index out of range");
  CMatrix m = CMatrix::Zero(d, d);
  m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
  return DensityMatrix(std::move(layout), std::move(m));
}

DensityMatrix DensityMatrix::diagonal(RegisterLayout layout, const RVector& probabilities) {
  CMatrix m = probabilities.cast<Complex>().asDiagonal();
  return DensityMatrix(std::move(layout), std::move(m));
}

DensityMatrix DensityMatrix::nearest(RegisterLayout layout, const CMatrix& matrix, double tolerance) {
  require_square(matrix, layout, "DensityMatrix::nearest");
  return DensityMatrix(std::move(layout), linalg::project_to_states(matrix), tolerance);
}

std::size_t DensityMatrix::rank(double relative_threshold) const {
  const RVector ev = eigenvalues();
  const double cut = relative_threshold * ev.maxCoeff();
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) r += ev(i) > cut ? 1 : 0;
  return r;
}

bool DensityMatrix::is_pure(double tol) const {
  return std::abs((matrix_ * matrix_).trace().real() - 1.0) <= tol;
}

DensityMatrix DensityMatrix::relabeled(RegisterLayout layout) const {
  if (layout.total_dim() != layout_.total_dim()) throw LayoutError("relabel changes the dimension");
  return DensityMatrix(std::move(layout), matrix_, tolerance_);
}

DensityMatrix DensityMatrix::with_tolerance(double tolerance) const {
  return DensityMatrix(layout_, matrix_, tolerance);
}

UnitaryOp::UnitaryOp(RegisterLayout layout, CMatrix matrix, double tolerance)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  require_square(matrix_, layout_, "UnitaryOp");
  const auto d = matrix_.rows();
  const double dev = (matrix_ * matrix_.adjoint() - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (dev > tolerance) throw StateError("operator is not unitary (deviation " + std::to_string(dev) + ")");
}

DensityMatrix UnitaryOp::apply(const DensityMatrix& state) const {
  if (state.layout() != layout_) {
    throw LayoutError("unitary on " + layout_.describe() + " applied to state on " + state.layout().describe());
  }
  return DensityMatrix(layout_, matrix_ * state.matrix() * matrix_.adjoint(), state.tolerance());
}

UnitaryOp UnitaryOp::adjoint() const { return UnitaryOp(layout_, matrix_.adjoint()); }

UnitaryOp UnitaryOp::then_after(const UnitaryOp& other) const {
  if (other.layout_ != layout_) throw LayoutError("composing unitaries on different layouts");
  return UnitaryOp(layout_, matrix_ * other.matrix_);
}

}  // namespace erasure
