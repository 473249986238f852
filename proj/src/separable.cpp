// Separable states across the parties named by label suffixes. With two
// parties and d_A d_B <= 6 the PPT set equals the separable set, so
// membership and the closest-state search are exact there; on larger systems
// the search runs over the PPT relaxation and is flagged inexact.
#include "free_set_detail.hpp"

#include <algorithm>
#include <map>

namespace erasure {

namespace {

using detail::as_state;

struct Parties {
  std::vector<std::string> names;
  std::vector<std::size_t> of_factor;  // party index per factor
  std::vector<std::size_t> dims;       // total dimension per party

  std::size_t count() const noexcept { return names.size(); }

  /// Factor order grouping parties (party 0 first), stable within a party.
  std::vector<std::size_t> grouped_order() const {
    std::vector<std::size_t> order;
    for (std::size_t p = 0; p < count(); ++p)
      for (std::size_t k = 0; k < of_factor.size(); ++k)
        if (of_factor[k] == p) order.push_back(k);
    return order;
  }

  std::vector<bool> second_party_mask() const {
    std::vector<bool> mask(of_factor.size());
    for (std::size_t k = 0; k < of_factor.size(); ++k) mask[k] = of_factor[k] == 1;
    return mask;
  }
};

Parties parties_of(const RegisterLayout& layout) {
  Parties out;
  std::map<std::string, std::size_t> index;
  for (const auto& f : layout.factors()) {
    const auto key = party_of(f.label);
    auto [it, fresh] = index.emplace(key, out.names.size());
    if (fresh) {
      out.names.push_back(key);
      out.dims.push_back(1);
    }
    out.of_factor.push_back(it->second);
    out.dims[it->second] *= f.dim;
  }
  return out;
}

std::vector<std::size_t> inverse(const std::vector<std::size_t>& order) {
  std::vector<std::size_t> inv(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) inv[order[k]] = k;
  return inv;
}

/// Frobenius projection onto {X state, X^T_B state} by Dykstra's alternating
/// projections, then mixed with I/d just enough to make both constraints hold.
CMatrix project_ppt(const CMatrix& m, const std::vector<std::size_t>& dims, const std::vector<bool>& mask) {
  const auto d = m.rows();
  CMatrix x = linalg::hermitian_part(m);
  CMatrix p = CMatrix::Zero(d, d);
  CMatrix q = CMatrix::Zero(d, d);
  for (int it = 0; it < 500; ++it) {
    const CMatrix y = linalg::project_to_states(CMatrix(x + p));
    p = x + p - y;
    const CMatrix z = y + q;
    const CMatrix next =
        linalg::partial_transpose(linalg::project_to_states(linalg::partial_transpose(z, dims, mask)), dims, mask);
    q = z - next;
    const double change = (next - x).norm();
    x = next;
    if (change < 1e-12) break;
  }
  const double deficit = std::max({0.0, -linalg::min_eigenvalue_h(x),
                                   -linalg::min_eigenvalue_h(linalg::partial_transpose(x, dims, mask))});
  if (deficit > 0) {
    const double eta = deficit * double(d) / (1 + deficit * double(d));
    x = (1 - eta) * x + (eta / double(d)) * CMatrix::Identity(d, d);
  }
  return x;
}

class Separable final : public FreeSet {
 public:
  FamilyKind kind() const noexcept override { return FamilyKind::Separable; }

  void check_layout(const RegisterLayout&) const override {}

  bool contains(const DensityMatrix& sigma, double tol) const override {
    const auto parties = parties_of(sigma.layout());
    if (parties.count() <= 1) return true;
    require_decidable(parties);
    const auto dims = sigma.layout().dims();
    return linalg::min_eigenvalue_h(linalg::partial_transpose(sigma.matrix(), dims, parties.second_party_mask())) >=
           -tol;
  }

  DensityMatrix project(const RegisterLayout& layout, const CMatrix& m) const override {
    const auto parties = parties_of(layout);
    if (parties.count() <= 1) return as_state(layout, linalg::project_to_states(m));
    require_two(parties);
    return as_state(layout, project_ppt(m, layout.dims(), parties.second_party_mask()));
  }

  /// Mixture of four products of Ginibre states, one factor per party.
  DensityMatrix sample(const RegisterLayout& layout, Rng& rng) const override {
    const auto parties = parties_of(layout);
    if (parties.count() <= 1) return random_state(layout, rng);
    const auto order = parties.grouped_order();
    const auto grouped = layout.permuted(order);
    const RVector w = random_distribution(4, rng);
    CMatrix acc = CMatrix::Zero(static_cast<Eigen::Index>(layout.total_dim()),
                                static_cast<Eigen::Index>(layout.total_dim()));
    for (Eigen::Index term = 0; term < w.size(); ++term) {
      CMatrix product = CMatrix::Identity(1, 1);
      for (std::size_t p = 0; p < parties.count(); ++p) {
        product = linalg::kron(product, random_state(RegisterLayout::single("P", parties.dims[p]), rng).matrix());
      }
      acc += w(term) * product;
    }
    return permute_registers(as_state(grouped, acc), inverse(order));
  }

  ClosestState closest_relent(const DensityMatrix& rho, const ClosestOptions& options) const override {
    const auto& layout = rho.layout();
    const auto parties = parties_of(layout);
    if (parties.count() <= 1) return {rho, relative_entropy(rho, rho), true};
    require_two(parties);
    const auto dims = layout.dims();
    const auto mask = parties.second_party_mask();
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    const CMatrix mixed = CMatrix::Identity(d, d) / double(d);

    detail::ConvexSearch search;
    search.project = [&](const CMatrix& m) { return project_ppt(m, dims, mask); };
    search.max_iterations = options.max_iterations;
    if (options.initial) search.starts.push_back(options.initial->matrix());
    search.starts.push_back(mixed);
    search.starts.push_back(0.9 * marginal_product(rho, parties) + 0.1 * mixed);
    Rng rng(options.seed);
    while (static_cast<int>(search.starts.size()) < std::max(options.restarts, 1)) {
      search.starts.push_back(0.8 * sample(layout, rng).matrix() + 0.2 * mixed);
    }
    auto result = detail::minimise_relent(rho, search);
    result.exact = decidable(parties);
    return result;
  }

  double max_expectation(const RegisterLayout& layout, const CMatrix& a) const override {
    const auto parties = parties_of(layout);
    const auto e = linalg::eig_h(a);
    const Eigen::Index n = e.values.size();
    const double top = e.values(n - 1);
    if (parties.count() <= 1 || n < 2 || e.values(n - 2) > 1e-12 * std::max(top, 0.0)) return top;
    // rank one: best product overlap is the largest squared Schmidt coefficient
    // across (first party | rest)
    const auto order = parties.grouped_order();
    const CMatrix grouped = linalg::permute_subsystems(a, layout.dims(), order);
    const CVector v = linalg::eig_h(grouped).vectors.col(n - 1);
    const auto da = static_cast<Eigen::Index>(parties.dims[0]);
    const CMatrix coeffs = Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        v.data(), da, n / da);
    const double s = Eigen::JacobiSVD<CMatrix>(coeffs).singularValues()(0);
    return top * s * s;
  }

 private:
  static bool decidable(const Parties& parties) {
    return parties.count() <= 1 || (parties.count() == 2 && parties.dims[0] * parties.dims[1] <= 6);
  }

  static void require_two(const Parties& parties) {
    if (parties.count() > 2) {
      throw UnsupportedError("separable family supports at most two parties, layout has " +
                             std::to_string(parties.count()));
    }
  }

  static void require_decidable(const Parties& parties) {
    require_two(parties);
    if (!decidable(parties)) {
      throw UnsupportedError("separability is decided by the partial transpose only for d_A d_B <= 6, got " +
                             std::to_string(parties.dims[0]) + " x " + std::to_string(parties.dims[1]));
    }
  }

  static CMatrix marginal_product(const DensityMatrix& rho, const Parties& parties) {
    const auto order = parties.grouped_order();
    const auto grouped = permute_registers(rho, order);
    const auto& glayout = grouped.layout();
    std::set<std::string> first;
    for (std::size_t k = 0; k < glayout.size(); ++k)
      if (parties_of(glayout).of_factor[k] == 0) first.insert(glayout[k].label);
    std::set<std::string> second;
    for (const auto& l : glayout.labels())
      if (!first.contains(l)) second.insert(l);
    const auto product = tensor(reduced_state(grouped, first), reduced_state(grouped, second));
    return permute_registers(product, inverse(order)).matrix();
  }
};

}  // namespace

FreeSetPtr make_separable() { return std::make_shared<Separable>(); }

}  // namespace erasure
