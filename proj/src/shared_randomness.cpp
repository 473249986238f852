// Multiparty family: randomness registers of one group ("J.A", "J.B", ...)
// hold perfectly correlated classical values, and conditionally on those
// values the remaining registers lie in an inner family. Free states are
// sum_c q_c |c><c|_J (x) sigma_c over correlated configurations c.
#include "free_set_detail.hpp"

#include <cmath>
#include <map>

namespace erasure {

namespace {

using detail::as_state;

/// Registers reordered as (randomness..., system...), with the correlated
/// configurations of the randomness part.
struct Split {
  std::vector<std::size_t> order;
  std::vector<std::size_t> back;
  std::vector<std::size_t> permuted_dims;
  RegisterLayout rest;
  std::vector<std::size_t> correlated;  // row-major indices into the randomness part
  std::size_t dr = 1;
  bool has_randomness = false;
  bool has_shared_group = false;
};

Split split_of(const RegisterLayout& layout) {
  Split s;
  const auto rand = detail::randomness_factors(layout);
  const auto sys = detail::system_factors(layout);
  s.has_randomness = !rand.empty();
  s.order = rand;
  s.order.insert(s.order.end(), sys.begin(), sys.end());
  s.back.resize(s.order.size());
  for (std::size_t k = 0; k < s.order.size(); ++k) s.back[s.order[k]] = k;
  for (const auto k : s.order) s.permuted_dims.push_back(layout[k].dim);
  std::vector<Factor> rest;
  for (const auto k : sys) rest.push_back(layout[k]);
  s.rest = RegisterLayout(std::move(rest));
  s.dr = s.rest.total_dim();

  std::map<std::string, std::vector<std::size_t>> groups;  // positions within `rand`
  for (std::size_t i = 0; i < rand.size(); ++i) groups[randomness_group(layout[rand[i]].label)].push_back(i);
  std::vector<std::size_t> rdims;
  for (const auto k : rand) rdims.push_back(layout[k].dim);
  for (const auto& [name, members] : groups) {
    if (members.size() > 1) s.has_shared_group = true;
    for (const auto i : members) {
      if (rdims[i] != rdims[members.front()]) {
        throw LayoutError("shared randomness group '" + name + "' has halves of different dimension");
      }
    }
  }
  const auto strides = linalg::strides_of(rdims);
  const std::size_t dj = linalg::product_of(rdims);
  for (std::size_t c = 0; c < dj; ++c) {
    bool ok = true;
    for (const auto& [name, members] : groups) {
      const std::size_t first = (c / strides[members.front()]) % rdims[members.front()];
      for (const auto i : members) ok = ok && (c / strides[i]) % rdims[i] == first;
    }
    if (ok) s.correlated.push_back(c);
  }
  return s;
}

class SharedRandomness final : public FreeSet {
 public:
  explicit SharedRandomness(FreeSetPtr inner) : inner_(std::move(inner)) {
    if (!inner_) throw DomainError("shared-randomness family needs an inner family");
    if (inner_->kind() == FamilyKind::SharedRandomness) throw DomainError("shared-randomness families do not nest");
  }

  FamilyKind kind() const noexcept override { return FamilyKind::SharedRandomness; }

  void check_layout(const RegisterLayout& layout) const override { inner_->check_layout(split_of(layout).rest); }

  bool contains(const DensityMatrix& sigma, double tol) const override {
    const auto s = split_of(sigma.layout());
    inner_->check_layout(s.rest);
    const CMatrix m = grouped(sigma.matrix(), sigma.layout(), s);
    CMatrix off = m;
    for (const auto c : s.correlated) block(off, s, c).setZero();
    if (off.norm() > tol) return false;
    for (const auto c : s.correlated) {
      const CMatrix b = block(m, s, c);
      const double q = b.trace().real();
      if (q <= tol) {
        if (b.norm() > tol) return false;
        continue;
      }
      try {
        if (!inner_->contains(DensityMatrix(s.rest, b / q, std::max(kDefaultTolerance, tol / q)), tol / q)) return false;
      } catch (const StateError&) {
        return false;
      }
    }
    return true;
  }

  /// Block traces go to the simplex and each block to the inner family; close
  /// to, but not exactly, the Frobenius projection.
  DensityMatrix project(const RegisterLayout& layout, const CMatrix& m) const override {
    const auto s = split_of(layout);
    const CMatrix g = grouped(linalg::hermitian_part(m), layout, s);
    RVector traces(static_cast<Eigen::Index>(s.correlated.size()));
    for (std::size_t i = 0; i < s.correlated.size(); ++i) {
      traces(static_cast<Eigen::Index>(i)) = block(g, s, s.correlated[i]).trace().real();
    }
    const RVector q = linalg::project_to_simplex(traces);
    std::vector<CMatrix> blocks;
    for (std::size_t i = 0; i < s.correlated.size(); ++i) {
      const double t = traces(static_cast<Eigen::Index>(i));
      const CMatrix b = block(g, s, s.correlated[i]);
      blocks.push_back(t > 1e-14 ? inner_->project(s.rest, b / t).matrix() : inner_->canonical_state(s.rest).matrix());
    }
    return assemble(layout, s, q, blocks);
  }

  DensityMatrix sample(const RegisterLayout& layout, Rng& rng) const override {
    const auto s = split_of(layout);
    const RVector q = random_distribution(s.correlated.size(), rng);
    std::vector<CMatrix> blocks;
    for (std::size_t i = 0; i < s.correlated.size(); ++i) blocks.push_back(inner_->sample(s.rest, rng).matrix());
    return assemble(layout, s, q, blocks);
  }

  DensityMatrix canonical_state(const RegisterLayout& layout) const override {
    const auto s = split_of(layout);
    const auto n = static_cast<Eigen::Index>(s.correlated.size());
    const CMatrix base = inner_->canonical_state(s.rest).matrix();
    return assemble(layout, s, RVector::Constant(n, 1.0 / double(n)), std::vector<CMatrix>(s.correlated.size(), base));
  }

  /// E = D(rho || pinch_J rho) + sum_c p_c E_inner(rho_c), attained by
  /// sum_c p_c |c><c| (x) sigma*_c; infinite when rho leaves the correlated subspace.
  ClosestState closest_relent(const DensityMatrix& rho, const ClosestOptions& options) const override {
    const auto s = split_of(rho.layout());
    if (!s.has_randomness) return inner_->closest_relent(rho, options);
    inner_->check_layout(s.rest);
    const CMatrix g = grouped(rho.matrix(), rho.layout(), s);
    ClosestOptions inner_options = options;
    inner_options.initial.reset();
    RVector q(static_cast<Eigen::Index>(s.correlated.size()));
    std::vector<CMatrix> blocks;
    bool exact = true;
    for (std::size_t i = 0; i < s.correlated.size(); ++i) {
      const CMatrix b = block(g, s, s.correlated[i]);
      const double p = b.trace().real();
      q(static_cast<Eigen::Index>(i)) = std::max(p, 0.0);
      if (p <= 1e-14) {
        blocks.push_back(inner_->canonical_state(s.rest).matrix());
        continue;
      }
      auto best = inner_->closest_relent(as_state(s.rest, b / p), inner_options);
      exact = exact && best.exact;
      blocks.push_back(best.sigma.matrix());
    }
    if (std::abs(q.sum() - 1.0) > 1e-10) {
      EntropyEstimate infinite;
      infinite.value = kInfinity;
      return {canonical_state(rho.layout()), infinite, true};
    }
    q /= q.sum();
    auto sigma = assemble(rho.layout(), s, q, blocks);
    auto estimate = relative_entropy(rho, sigma);
    return {std::move(sigma), std::move(estimate), exact};
  }

  double max_expectation(const RegisterLayout& layout, const CMatrix& a) const override {
    const auto s = split_of(layout);
    const CMatrix g = grouped(a, layout, s);
    double best = 0;
    for (const auto c : s.correlated) best = std::max(best, inner_->max_expectation(s.rest, block(g, s, c)));
    return best;
  }

  double log_norm_inf(const RegisterLayout& layout) const override {
    const auto s = split_of(layout);
    if (s.has_shared_group) return kInfinity;
    return std::log2(static_cast<double>(s.correlated.size())) + inner_->log_norm_inf(s.rest);
  }

 private:
  static CMatrix grouped(const CMatrix& m, const RegisterLayout& layout, const Split& s) {
    return linalg::permute_subsystems(m, layout.dims(), s.order);
  }

  static Eigen::Block<CMatrix> block(CMatrix& m, const Split& s, std::size_t c) {
    const auto r = static_cast<Eigen::Index>(s.dr);
    return m.block(static_cast<Eigen::Index>(c) * r, static_cast<Eigen::Index>(c) * r, r, r);
  }

  static CMatrix block(const CMatrix& m, const Split& s, std::size_t c) {
    const auto r = static_cast<Eigen::Index>(s.dr);
    return m.block(static_cast<Eigen::Index>(c) * r, static_cast<Eigen::Index>(c) * r, r, r);
  }

  static DensityMatrix assemble(const RegisterLayout& layout, const Split& s, const RVector& q,
                                const std::vector<CMatrix>& blocks) {
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    CMatrix g = CMatrix::Zero(d, d);
    for (std::size_t i = 0; i < s.correlated.size(); ++i) {
      block(g, s, s.correlated[i]) = q(static_cast<Eigen::Index>(i)) * blocks[i];
    }
    return as_state(layout, linalg::permute_subsystems(g, s.permuted_dims, s.back));
  }

  FreeSetPtr inner_;
};

}  // namespace

FreeSetPtr make_shared_randomness(FreeSetPtr inner) { return std::make_shared<SharedRandomness>(std::move(inner)); }

}  // namespace erasure
