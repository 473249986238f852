#include "free_set_detail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace erasure {

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Coherence: return "coherence";
    case FamilyKind::Uniformity: return "uniformity";
    case FamilyKind::Gibbs: return "gibbs";
    case FamilyKind::Asymmetry: return "asymmetry";
    case FamilyKind::Separable: return "separable-2qubit";
    case FamilyKind::SharedRandomness: return "shared-randomness-multiparty";
  }
  return "unknown";
}

double FreeSet::log_norm_inf(const RegisterLayout& layout) const {
  check_layout(layout);
  return std::log2(static_cast<double>(layout.total_dim()));
}

DensityMatrix FreeSet::canonical_state(const RegisterLayout& layout) const {
  check_layout(layout);
  return DensityMatrix::maximally_mixed(layout);
}

FreeSetPtr make_free_set(const std::string& name) {
  if (name == "coherence") return make_coherence();
  if (name == "uniformity") return make_uniformity();
  if (name == "separable" || name == "separable-2qubit") return make_separable();
  if (name == "contextuality") {
    throw UnsupportedError("contextuality is a theory of conditional probability tables, not density matrices");
  }
  if (name == "stabilizer") {
    throw UnsupportedError("the stabilizer family needs Clifford-group machinery that is not provided");
  }
  if (name == "gibbs" || name == "asymmetry" || name == "shared-randomness" || name == "shared-randomness-multiparty") {
    throw DomainError("free set '" + name + "' needs configuration data");
  }
  throw DomainError("unknown free set '" + name + "'");
}

std::string party_of(const std::string& label) {
  const auto dot = label.find('.');
  if (dot == std::string::npos) return label;
  const auto hash = label.find('#', dot);
  return label.substr(dot + 1, hash == std::string::npos ? std::string::npos : hash - dot - 1);
}

RegisterLayout SharedRandomnessState::layout(const std::string& group) const {
  if (ell < 1 || parties < 1 || parties > 26) throw DomainError("shared randomness needs ell >= 1 and 1..26 parties");
  std::vector<Factor> factors;
  for (int p = 0; p < parties; ++p) {
    factors.push_back({group + "." + std::string(1, static_cast<char>('A' + p)), static_cast<std::size_t>(ell)});
  }
  return RegisterLayout(std::move(factors));
}

DensityMatrix SharedRandomnessState::state(const std::string& group) const {
  auto lay = layout(group);
  const std::size_t total = lay.total_dim();
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  // |k,k,...,k> sits at k * (1 + ell + ell^2 + ...)
  std::size_t step = 0;
  for (int p = 0, pw = 1; p < parties; ++p, pw *= ell) step += static_cast<std::size_t>(pw);
  for (int k = 0; k < ell; ++k) {
    const auto i = static_cast<Eigen::Index>(static_cast<std::size_t>(k) * step);
    m(i, i) = 1.0 / ell;
  }
  return DensityMatrix(std::move(lay), std::move(m));
}

namespace detail {

DensityMatrix as_state(const RegisterLayout& layout, const CMatrix& m) {
  try {
    return DensityMatrix(layout, m, kDefaultTolerance);
  } catch (const StateError&) {
    return DensityMatrix::nearest(layout, m);
  }
}

std::vector<std::size_t> randomness_factors(const RegisterLayout& layout) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < layout.size(); ++k)
    if (is_randomness_label(layout[k].label)) out.push_back(k);
  return out;
}

std::vector<std::size_t> system_factors(const RegisterLayout& layout) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < layout.size(); ++k)
    if (!is_randomness_label(layout[k].label)) out.push_back(k);
  return out;
}

void require_factor_dim(const RegisterLayout& layout, std::size_t dim, const std::string& family) {
  for (const auto k : system_factors(layout)) {
    if (layout[k].dim != dim) {
      throw LayoutError(family + ": register '" + layout[k].label + "' has dimension " +
                        std::to_string(layout[k].dim) + ", family data has dimension " + std::to_string(dim));
    }
  }
}

double max_eigenvalue(const CMatrix& m) { return linalg::eigenvalues_h(m).maxCoeff(); }

ClosestState closest_by_projection(const DensityMatrix& rho, const DensityMatrix& image) {
  auto estimate = relative_entropy(rho, image);
  return {image, std::move(estimate), true};
}

namespace {

/// D(rho || sigma) = Tr rho log2 rho - Tr rho log2 sigma as a function of sigma.
class RelentObjective {
 public:
  explicit RelentObjective(const CMatrix& rho) : rho_(rho) {
    const RVector p = linalg::eigenvalues_h(rho);
    for (Eigen::Index i = 0; i < p.size(); ++i)
      if (p(i) > 0) neg_entropy_ += p(i) * std::log2(p(i));
  }

  /// Evaluates at sigma and keeps the eigendecomposition for `gradient`.
  double value(const CMatrix& sigma) {
    eig_ = linalg::eig_h(sigma);
    weights_ = eig_.vectors.adjoint() * rho_ * eig_.vectors;
    const double top = std::max(eig_.values.maxCoeff(), 0.0);
    floor_ = 1e-15 * top;
    double cross = 0;
    for (Eigen::Index i = 0; i < eig_.values.size(); ++i) {
      const double lambda = eig_.values(i);
      const double w = weights_(i, i).real();
      if (lambda <= floor_) {
        if (w > 1e-12) return std::numeric_limits<double>::infinity();
        continue;
      }
      cross -= w * std::log2(lambda);
    }
    return neg_entropy_ + cross;
  }

  /// Gradient at the last evaluated point, via divided differences of log.
  CMatrix gradient() const {
    const Eigen::Index d = eig_.values.size();
    CMatrix scaled(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const double a = std::max(eig_.values(i), floor_);
        const double b = std::max(eig_.values(j), floor_);
        double dd;
        if (a <= 0 || b <= 0) {
          dd = 0;
        } else if (std::abs(a - b) > 1e-12 * std::max(a, b)) {
          dd = (std::log(a) - std::log(b)) / (a - b);
        } else {
          dd = 2.0 / (a + b);
        }
        scaled(i, j) = weights_(i, j) * dd;
      }
    }
    return -(eig_.vectors * scaled * eig_.vectors.adjoint()) / linalg::kLn2;
  }

 private:
  const CMatrix& rho_;
  double neg_entropy_ = 0;
  double floor_ = 0;
  linalg::HermitianEig<CMatrix> eig_;
  CMatrix weights_;
};

struct Descent {
  CMatrix sigma;
  double value;
  int iterations;
};

Descent descend(const CMatrix& rho, const CMatrix& start, const ConvexSearch& search) {
  RelentObjective objective(rho);
  CMatrix sigma = search.project(start);
  double f = objective.value(sigma);
  if (!std::isfinite(f)) return {sigma, f, 0};
  CMatrix grad = objective.gradient();
  double step = 1.0 / std::max(1.0, grad.norm());
  int stalls = 0;
  int it = 0;
  for (; it < search.max_iterations; ++it) {
    bool accepted = false;
    CMatrix candidate;
    double fc = 0;
    for (int backtrack = 0; backtrack < 60; ++backtrack) {
      candidate = search.project(sigma - step * grad);
      const CMatrix diff = candidate - sigma;
      fc = objective.value(candidate);
      const double model = f + (grad.adjoint() * diff).trace().real() + diff.squaredNorm() / (2 * step);
      if (std::isfinite(fc) && fc <= model + 1e-15 && fc <= f) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double moved = (candidate - sigma).norm();
    const double gain = f - fc;
    sigma = std::move(candidate);
    f = fc;
    grad = objective.gradient();
    step *= 1.5;
    stalls = gain < 1e-13 ? stalls + 1 : 0;
    if (moved < 1e-13 || stalls >= 25) break;
  }
  return {sigma, f, it};
}

}  // namespace

ClosestState minimise_relent(const DensityMatrix& rho, const ConvexSearch& search) {
  if (search.starts.empty()) throw DomainError("minimise_relent needs at least one start");
  // every start gets a short run; only the best one is continued
  ConvexSearch scout = search;
  scout.max_iterations = std::min(search.max_iterations, 200);
  std::optional<Descent> best;
  int total = 0;
  for (const auto& start : search.starts) {
    auto run = descend(rho.matrix(), start, scout);
    total += run.iterations;
    if (!best || run.value < best->value) best = std::move(run);
  }
  if (std::isfinite(best->value) && search.max_iterations > scout.max_iterations) {
    auto run = descend(rho.matrix(), best->sigma, search);
    total += run.iterations;
    if (run.value <= best->value) best = std::move(run);
  }
  // a trace of I/d (a member of every family searched here) keeps the
  // eigenvalues of sigma above the support threshold of relative_entropy;
  // it raises D by at most -log2(1 - eta)
  const auto d = best->sigma.rows();
  const double eta = std::min(1e-6, 1e-9 * double(d));
  auto sigma = as_state(rho.layout(), (1 - eta) * best->sigma + (eta / double(d)) * CMatrix::Identity(d, d));
  auto estimate = relative_entropy(rho, sigma);
  estimate.iterations = total;
  return {std::move(sigma), std::move(estimate), true};
}

}  // namespace detail
}  // namespace erasure
