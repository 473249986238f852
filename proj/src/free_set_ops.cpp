#include "free_set_detail.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace erasure {

namespace {

/// Direction of steepest decrease of log2 lambda_max(sigma^{-1/2} rho' sigma^{-1/2})
/// in sigma: the generalised top eigenvector x (rho' x = lambda sigma x,
/// x^dagger sigma x = 1) gives the subgradient -x x^dagger / ln 2.
CMatrix dmax_descent_direction(const DensityMatrix& rho_prime, const DensityMatrix& sigma) {
  const auto& s = sigma.matrix();
  const double top = linalg::eigenvalues_h(s).maxCoeff();
  const CMatrix root_inv = linalg::pinv_sqrt_psd(s, kSupportThreshold * top);
  const auto e = linalg::eig_h(CMatrix(root_inv * rho_prime.matrix() * root_inv));
  const CVector x = root_inv * e.vectors.col(e.values.size() - 1);
  const double n2 = x.squaredNorm();
  return n2 > 0 ? CMatrix(x * x.adjoint() / n2) : CMatrix::Zero(s.rows(), s.cols());
}

}  // namespace

bool membership(const FreeSet& family, const DensityMatrix& sigma, double tol) {
  family.check_layout(sigma.layout());
  return family.contains(sigma, tol);
}

ClosestState closest_free_relent(const FreeSet& family, const DensityMatrix& rho, const ClosestOptions& options) {
  family.check_layout(rho.layout());
  auto result = family.closest_relent(rho, options);
  result.estimate.epsilon = 0;
  return result;
}

double measured_lower_bound(const FreeSet& family, const DensityMatrix& rho, const CMatrix& p, double eps) {
  // the complementary weight is computed directly: acos(sqrt(a)) loses half
  // the digits when a is close to 1
  const auto d = p.rows();
  const double a = std::clamp((p * rho.matrix()).trace().real(), 0.0, 1.0);
  const double rest =
      std::clamp(((CMatrix::Identity(d, d) - p) * rho.matrix()).trace().real(), 0.0, 1.0);
  const double angle = std::atan2(std::sqrt(rest), std::sqrt(a)) + std::asin(eps);
  if (angle >= std::numbers::pi / 2) return -kInfinity;
  const double b = std::pow(std::cos(angle), 2);
  const double c = family.max_expectation(rho.layout(), p);
  if (c <= 0) return kInfinity;
  return std::log2(b / c);
}

ClosestState closest_free_smooth_dmax(const FreeSet& family, const DensityMatrix& rho, double eps,
                                      const SmoothClosestOptions& options) {
  if (!(eps >= 0 && eps < 1)) throw DomainError("smoothing parameter must lie in [0, 1)");
  family.check_layout(rho.layout());
  const auto& layout = rho.layout();

  bool member = false;
  try {
    member = family.contains(rho);
  } catch (const UnsupportedError&) {
  }
  if (member) {
    EntropyEstimate zero;
    zero.epsilon = eps;
    zero.method = EstimateMethod::ExactEigen;
    zero.certificate = rho;
    return {rho, zero, true};
  }

  // lower bound: projectors onto the top-k eigenvectors of rho
  double lower = 0;
  {
    const auto e = linalg::eig_h(rho.matrix());
    const Eigen::Index d = e.values.size();
    CMatrix p = CMatrix::Zero(d, d);
    for (Eigen::Index k = d - 1; k >= 0 && e.values(k) > kSupportThreshold * e.values(d - 1); --k) {
      p += e.vectors.col(k) * e.vectors.col(k).adjoint();
      lower = std::max(lower, measured_lower_bound(family, rho, p, eps));
    }
  }

  std::vector<DensityMatrix> candidates{family.canonical_state(layout)};
  if (!family.singleton()) {
    auto relent = family.closest_relent(rho);
    if (!relent.estimate.is_infinite()) candidates.insert(candidates.begin(), relent.sigma);
  }
  std::optional<DensityMatrix> sigma;
  EntropyEstimate best;
  best.value = kInfinity;
  for (const auto& c : candidates) {
    auto est = smooth_dmax(rho, c, eps, options.inner);
    if (!sigma || est.value < best.value) {
      sigma = c;
      best = std::move(est);
    }
  }

  int rounds = 0;
  if (!family.singleton() && !best.is_infinite()) {
    for (; rounds < options.max_rounds && best.certificate; ++rounds) {
      const auto& rho_prime = *best.certificate;
      const double current = dmax(rho_prime, *sigma).value;
      const CMatrix direction = dmax_descent_direction(rho_prime, *sigma);
      std::optional<DensityMatrix> step_best;
      double step_value = current - options.improvement;
      for (double s = 1.0; s >= 1.0 / 1024; s *= 0.5) {
        auto candidate = family.project(layout, sigma->matrix() + s * direction);
        const double v = dmax(rho_prime, candidate).value;
        if (v < step_value) {
          step_value = v;
          step_best = std::move(candidate);
        }
      }
      if (!step_best) break;
      auto est = smooth_dmax(rho, *step_best, eps, options.inner);
      if (!(est.value < best.value - options.improvement)) break;
      sigma = std::move(step_best);
      best = std::move(est);
    }
  }

  best.epsilon = eps;
  best.lower = lower;
  best.iterations += rounds;
  return {*sigma, std::move(best), family.singleton()};
}

RegularizedSequence regularized_E(const FreeSet& family, const DensityMatrix& rho, int n_max,
                                  const ClosestOptions& options) {
  if (n_max < 1) throw DomainError("regularized_E needs n_max >= 1");
  const double d = static_cast<double>(rho.dim());
  if (std::pow(d, n_max) > static_cast<double>(kMaxDenseDimension)) {
    throw DimensionError("rho^(x)" + std::to_string(n_max) + " exceeds the dense dimension budget of " +
                         std::to_string(kMaxDenseDimension));
  }
  RegularizedSequence out;
  const auto single = closest_free_relent(family, rho, options);
  out.per_copy.push_back(single.estimate);
  DensityMatrix previous = single.sigma;
  for (int n = 2; n <= n_max; ++n) {
    const auto rho_n = tensor_power(rho, n);
    // tensor closure makes the product of minimisers a member
    const auto product = detail::as_state(rho_n.layout(), linalg::kron(previous.matrix(), single.sigma.matrix()));
    ClosestOptions warm = options;
    warm.initial = product;
    auto result = closest_free_relent(family, rho_n, warm);
    auto product_estimate = relative_entropy(rho_n, product);
    if (product_estimate.value < result.estimate.value) {
      result.sigma = product;
      result.estimate = std::move(product_estimate);
    }
    previous = result.sigma;
    result.estimate.value /= n;
    out.per_copy.push_back(std::move(result.estimate));
  }
  if (family.additive()) {
    out.additivity_checked = true;
    for (const auto& e : out.per_copy) {
      if (e.is_infinite() && out.per_copy.front().is_infinite()) continue;
      out.max_deviation = std::max(out.max_deviation, std::abs(e.value - out.per_copy.front().value));
    }
    out.additivity_holds = out.max_deviation <= 1e-6;
  }
  return out;
}

double c_constant(const FreeSet& family, const RegisterLayout& layout, int n_max) {
  if (n_max < 1) throw DomainError("c_constant needs n_max >= 1");
  double best = kInfinity;
  RegisterLayout power;
  for (int n = 1; n <= n_max; ++n) {
    power = power.concat(layout.relabeled("#" + std::to_string(n)));
    best = std::min(best, family.log_norm_inf(power) / n);
  }
  return best;
}

double continuity_bound(const DensityMatrix& rho, const DensityMatrix& rho_prime, const FreeSet& family) {
  family.check_layout(rho.layout());
  return continuity_bound(rho, rho_prime, family.log_norm_inf(rho.layout()));
}

std::optional<std::vector<CMatrix>> controlled_blocks(const UnitaryOp& op, const std::string& control, double tol) {
  const auto& layout = op.layout();
  const std::size_t k = layout.index_of(control);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < layout.size(); ++i)
    if (i != k) order.push_back(i);
  order.push_back(k);
  const CMatrix u = linalg::permute_subsystems(op.matrix(), layout.dims(), order);
  const auto dj = static_cast<Eigen::Index>(layout[k].dim);
  const Eigen::Index dr = u.rows() / dj;
  std::vector<CMatrix> blocks(static_cast<std::size_t>(dj), CMatrix::Zero(dr, dr));
  double off = 0;
  for (Eigen::Index r = 0; r < dr; ++r) {
    for (Eigen::Index c = 0; c < dr; ++c) {
      for (Eigen::Index i = 0; i < dj; ++i) {
        for (Eigen::Index j = 0; j < dj; ++j) {
          const Complex v = u(r * dj + i, c * dj + j);
          if (i == j) {
            blocks[static_cast<std::size_t>(i)](r, c) = v;
          } else {
            off += std::norm(v);
          }
        }
      }
    }
  }
  if (std::sqrt(off) > tol) return std::nullopt;
  return blocks;
}

StructureCheck assumption1_structure_check(const FreeSet& family, const UnitaryOp& op,
                                           const std::vector<DensityMatrix>& samples, const std::string& control) {
  const auto& layout = op.layout();
  if (layout.empty()) throw LayoutError("structure check needs a control register");
  const std::string j = control.empty() ? layout[layout.size() - 1].label : control;
  StructureCheck out;
  out.randomness_last = layout.index_of(j) + 1 == layout.size();
  const auto blocks = controlled_blocks(op, j);
  if (!blocks) {
    out.detail = "operation has weight off the block diagonal of '" + j + "'";
    return out;
  }
  out.block_form = true;

  const auto system = layout.without({j});
  std::vector<std::size_t> order;  // (system..., J) -> layout order
  const std::size_t jk = layout.index_of(j);
  for (std::size_t i = 0; i < layout.size(); ++i)
    if (i != jk) order.push_back(i);
  order.push_back(jk);
  std::vector<std::size_t> back(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) back[order[i]] = i;
  const auto grouped = layout.permuted(order);
  const auto ell = static_cast<Eigen::Index>(blocks->size());

  out.samples_free = true;
  for (const auto& sigma : samples) {
    if (sigma.layout() != system) throw LayoutError("structure-check sample must live on " + system.describe());
    CMatrix mixed = CMatrix::Zero(static_cast<Eigen::Index>(grouped.total_dim()),
                                  static_cast<Eigen::Index>(grouped.total_dim()));
    for (Eigen::Index i = 0; i < ell; ++i) {
      CMatrix flag = CMatrix::Zero(ell, ell);
      flag(i, i) = 1.0 / double(ell);
      const auto& u = (*blocks)[static_cast<std::size_t>(i)];
      mixed += linalg::kron(CMatrix(u * sigma.matrix() * u.adjoint()), flag);
    }
    const auto state = permute_registers(detail::as_state(grouped, mixed), back);
    try {
      if (!family.contains(state)) {
        out.samples_free = false;
        out.detail = "a mixed sample left the free set";
        break;
      }
    } catch (const UnsupportedError& e) {
      out.samples_free = false;
      out.membership_decidable = false;
      out.detail = e.what();
      break;
    }
  }
  return out;
}

StructureCheck assumption1_structure_check(const FreeSet& family, const RegisterLayout& system,
                                           const std::vector<CMatrix>& blocks,
                                           const std::vector<DensityMatrix>& samples) {
  if (blocks.empty()) throw DomainError("structure check needs at least one block");
  if (system.contains("J")) throw LayoutError("system layout already has a register 'J'");
  const auto d = static_cast<Eigen::Index>(system.total_dim());
  const auto ell = static_cast<Eigen::Index>(blocks.size());
  CMatrix u = CMatrix::Zero(d * ell, d * ell);
  for (Eigen::Index i = 0; i < ell; ++i) {
    const auto& b = blocks[static_cast<std::size_t>(i)];
    if (b.rows() != d || b.cols() != d) throw DomainError("block " + std::to_string(i) + " has the wrong dimension");
    CMatrix flag = CMatrix::Zero(ell, ell);
    flag(i, i) = 1;
    u += linalg::kron(b, flag);
  }
  const UnitaryOp op(system.concat(RegisterLayout::single("J", blocks.size())), u);
  return assumption1_structure_check(family, op, samples, "J");
}

}  // namespace erasure
