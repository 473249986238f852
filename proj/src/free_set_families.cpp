// Coherence, uniformity, Gibbs and asymmetry families. Each has a
// conditional expectation onto the family (pinching, replacement, twirl), so
// the closest state for D is its image of rho.
#include "free_set_detail.hpp"

#include <cmath>

namespace erasure {

namespace {

using detail::as_state;

double frobenius_gap(const CMatrix& a, const CMatrix& b) { return (a - b).norm(); }

bool is_unitary(const CMatrix& u, double tol) {
  return u.rows() == u.cols() && (u * u.adjoint() - CMatrix::Identity(u.rows(), u.cols())).norm() <= tol;
}

// ---------------------------------------------------------------------------

class Coherence final : public FreeSet {
 public:
  explicit Coherence(std::optional<CMatrix> basis) : basis_(std::move(basis)) {
    if (basis_ && !is_unitary(*basis_, 1e-9)) throw DomainError("coherence basis must be a unitary matrix");
  }

  FamilyKind kind() const noexcept override { return FamilyKind::Coherence; }
  bool additive() const noexcept override { return true; }

  void check_layout(const RegisterLayout& layout) const override {
    if (basis_) detail::require_factor_dim(layout, static_cast<std::size_t>(basis_->rows()), "coherence");
  }

  bool contains(const DensityMatrix& sigma, double tol) const override {
    check_layout(sigma.layout());
    const CMatrix local = to_basis(sigma.layout(), sigma.matrix());
    CMatrix off = local;
    off.diagonal().setZero();
    return off.norm() <= tol;
  }

  DensityMatrix project(const RegisterLayout& layout, const CMatrix& m) const override {
    check_layout(layout);
    const RVector p = linalg::project_to_simplex(RVector(to_basis(layout, m).diagonal().real()));
    return as_state(layout, from_diagonal(layout, p));
  }

  DensityMatrix sample(const RegisterLayout& layout, Rng& rng) const override {
    check_layout(layout);
    return as_state(layout, from_diagonal(layout, random_distribution(layout.total_dim(), rng)));
  }

  ClosestState closest_relent(const DensityMatrix& rho, const ClosestOptions&) const override {
    check_layout(rho.layout());
    const RVector p = to_basis(rho.layout(), rho.matrix()).diagonal().real();
    return detail::closest_by_projection(rho, as_state(rho.layout(), from_diagonal(rho.layout(), p)));
  }

  double max_expectation(const RegisterLayout& layout, const CMatrix& a) const override {
    check_layout(layout);
    return to_basis(layout, a).diagonal().real().maxCoeff();
  }

 private:
  /// W^dagger m W with W the basis on every system factor.
  CMatrix to_basis(const RegisterLayout& layout, const CMatrix& m) const {
    if (!basis_) return m;
    CMatrix out = m;
    const auto dims = layout.dims();
    const CMatrix inverse = basis_->adjoint();
    for (const auto k : detail::system_factors(layout)) out = linalg::conjugate_local(inverse, out, dims, k);
    return out;
  }

  CMatrix from_diagonal(const RegisterLayout& layout, const RVector& p) const {
    CMatrix out = p.cast<Complex>().asDiagonal();
    if (!basis_) return out;
    const auto dims = layout.dims();
    for (const auto k : detail::system_factors(layout)) out = linalg::conjugate_local(*basis_, out, dims, k);
    return out;
  }

  std::optional<CMatrix> basis_;
};

// ---------------------------------------------------------------------------

class Uniformity final : public FreeSet {
 public:
  FamilyKind kind() const noexcept override { return FamilyKind::Uniformity; }
  bool singleton() const noexcept override { return true; }
  bool additive() const noexcept override { return true; }

  void check_layout(const RegisterLayout&) const override {}

  bool contains(const DensityMatrix& sigma, double tol) const override {
    return frobenius_gap(sigma.matrix(), DensityMatrix::maximally_mixed(sigma.layout()).matrix()) <= tol;
  }

  DensityMatrix project(const RegisterLayout& layout, const CMatrix&) const override {
    return DensityMatrix::maximally_mixed(layout);
  }

  DensityMatrix sample(const RegisterLayout& layout, Rng&) const override {
    return DensityMatrix::maximally_mixed(layout);
  }

  ClosestState closest_relent(const DensityMatrix& rho, const ClosestOptions&) const override {
    return detail::closest_by_projection(rho, DensityMatrix::maximally_mixed(rho.layout()));
  }

  double max_expectation(const RegisterLayout& layout, const CMatrix& a) const override {
    return a.trace().real() / static_cast<double>(layout.total_dim());
  }
};

// ---------------------------------------------------------------------------

class Gibbs final : public FreeSet {
 public:
  Gibbs(CMatrix hamiltonian, double beta) : beta_(beta) {
    if (hamiltonian.rows() != hamiltonian.cols() || hamiltonian.rows() == 0) {
      throw DomainError("gibbs Hamiltonian must be a non-empty square matrix");
    }
    if ((hamiltonian - hamiltonian.adjoint()).norm() > 1e-9) throw DomainError("gibbs Hamiltonian must be Hermitian");
    if (!std::isfinite(beta)) throw DomainError("gibbs inverse temperature must be finite");
    const auto e = linalg::eig_h(hamiltonian);
    const RVector exponent = -beta * e.values;
    const double shift = exponent.maxCoeff();  // keeps 2^x in range
    RVector weights(exponent.size());
    for (Eigen::Index i = 0; i < exponent.size(); ++i) weights(i) = std::exp2(exponent(i) - shift);
    weights /= weights.sum();
    factor_ = e.vectors * weights.cast<Complex>().asDiagonal() * e.vectors.adjoint();
    min_log2_ = std::log2(weights.minCoeff());
  }

  FamilyKind kind() const noexcept override { return FamilyKind::Gibbs; }
  bool singleton() const noexcept override { return true; }
  bool additive() const noexcept override { return true; }

  void check_layout(const RegisterLayout& layout) const override {
    detail::require_factor_dim(layout, static_cast<std::size_t>(factor_.rows()), "gibbs");
  }

  bool contains(const DensityMatrix& sigma, double tol) const override {
    return frobenius_gap(sigma.matrix(), state(sigma.layout()).matrix()) <= tol;
  }

  DensityMatrix project(const RegisterLayout& layout, const CMatrix&) const override { return state(layout); }
  DensityMatrix sample(const RegisterLayout& layout, Rng&) const override { return state(layout); }
  DensityMatrix canonical_state(const RegisterLayout& layout) const override { return state(layout); }

  ClosestState closest_relent(const DensityMatrix& rho, const ClosestOptions&) const override {
    return detail::closest_by_projection(rho, state(rho.layout()));
  }

  double max_expectation(const RegisterLayout& layout, const CMatrix& a) const override {
    return (a * state(layout).matrix()).trace().real();
  }

  double log_norm_inf(const RegisterLayout& layout) const override {
    check_layout(layout);
    double total = 0;
    for (const auto& f : layout.factors()) {
      total += is_randomness_label(f.label) ? std::log2(static_cast<double>(f.dim)) : -min_log2_;
    }
    return total;
  }

  DensityMatrix state(const RegisterLayout& layout) const {
    check_layout(layout);
    CMatrix out = CMatrix::Identity(1, 1);
    for (const auto& f : layout.factors()) {
      const auto d = static_cast<Eigen::Index>(f.dim);
      out = linalg::kron(out, is_randomness_label(f.label) ? CMatrix(CMatrix::Identity(d, d) / double(d)) : factor_);
    }
    return as_state(layout, out);
  }

 private:
  double beta_;
  CMatrix factor_;
  double min_log2_ = 0;
};

// ---------------------------------------------------------------------------

class Asymmetry final : public FreeSet {
 public:
  explicit Asymmetry(std::vector<CMatrix> group) : group_(std::move(group)) {
    if (group_.empty()) throw DomainError("asymmetry family needs at least one group element");
    for (const auto& u : group_) {
      if (u.rows() != group_.front().rows() || !is_unitary(u, 1e-9)) {
        throw DomainError("asymmetry group elements must be unitaries of one dimension");
      }
    }
  }

  FamilyKind kind() const noexcept override { return FamilyKind::Asymmetry; }

  void check_layout(const RegisterLayout& layout) const override {
    detail::require_factor_dim(layout, static_cast<std::size_t>(group_.front().rows()), "asymmetry");
  }

  bool contains(const DensityMatrix& sigma, double tol) const override {
    check_layout(sigma.layout());
    const auto dims = sigma.layout().dims();
    for (const auto k : detail::system_factors(sigma.layout())) {
      for (const auto& u : group_) {
        if (frobenius_gap(linalg::conjugate_local(u, sigma.matrix(), dims, k), sigma.matrix()) > tol) return false;
      }
    }
    return true;
  }

  DensityMatrix project(const RegisterLayout& layout, const CMatrix& m) const override {
    // twirl is the orthogonal projection onto invariant operators and commutes
    // with the eigenvalue projection onto states
    return as_state(layout, linalg::project_to_states(twirl(layout, m)));
  }

  DensityMatrix sample(const RegisterLayout& layout, Rng& rng) const override {
    return as_state(layout, twirl(layout, random_state(layout, rng).matrix()));
  }

  ClosestState closest_relent(const DensityMatrix& rho, const ClosestOptions&) const override {
    return detail::closest_by_projection(rho, as_state(rho.layout(), twirl(rho.layout(), rho.matrix())));
  }

  double max_expectation(const RegisterLayout& layout, const CMatrix& a) const override {
    return detail::max_eigenvalue(twirl(layout, a));
  }

  /// Uniform average over the group on each system factor in turn.
  CMatrix twirl(const RegisterLayout& layout, const CMatrix& m) const {
    check_layout(layout);
    const auto dims = layout.dims();
    CMatrix out = m;
    for (const auto k : detail::system_factors(layout)) {
      CMatrix acc = CMatrix::Zero(m.rows(), m.cols());
      for (const auto& u : group_) acc += linalg::conjugate_local(u, out, dims, k);
      out = acc / static_cast<double>(group_.size());
    }
    return out;
  }

 private:
  std::vector<CMatrix> group_;
};

}  // namespace

FreeSetPtr make_coherence(std::optional<CMatrix> basis) { return std::make_shared<Coherence>(std::move(basis)); }
FreeSetPtr make_uniformity() { return std::make_shared<Uniformity>(); }
FreeSetPtr make_gibbs(CMatrix hamiltonian, double beta) {
  return std::make_shared<Gibbs>(std::move(hamiltonian), beta);
}
FreeSetPtr make_asymmetry(std::vector<CMatrix> group) { return std::make_shared<Asymmetry>(std::move(group)); }

}  // namespace erasure
