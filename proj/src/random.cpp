#include "erasure/random.hpp"

namespace erasure {

namespace {

CMatrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

}  // namespace

CVector random_ket(std::size_t dim, Rng& rng) {
  CVector v = ginibre(static_cast<Eigen::Index>(dim), 1, rng).col(0);
  return v / v.norm();
}

DensityMatrix random_state(const RegisterLayout& layout, Rng& rng, std::size_t rank) {
  const auto d = static_cast<Eigen::Index>(layout.total_dim());
  const Eigen::Index r = rank == 0 ? d : static_cast<Eigen::Index>(rank);
  const CMatrix g = ginibre(d, r, rng);
  CMatrix m = g * g.adjoint();
  m /= m.trace().real();
  return DensityMatrix(layout, m);
}

DensityMatrix random_pure_state(const RegisterLayout& layout, Rng& rng) {
  return DensityMatrix::pure(layout, random_ket(layout.total_dim(), rng));
}

RVector random_distribution(std::size_t dim, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  RVector p(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = e(rng);
  return p / p.sum();
}

DensityMatrix random_diagonal_state(const RegisterLayout& layout, Rng& rng) {
  return DensityMatrix::diagonal(layout, random_distribution(layout.total_dim(), rng));
}

CMatrix random_unitary(std::size_t dim, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(dim);
  const CMatrix g = ginibre(d, d, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < d; ++i) {
    const Complex diag = r(i, i);
    const double a = std::abs(diag);
    if (a > 0) q.col(i) *= diag / a;
  }
  return q;
}

}  // namespace erasure
