#include "erasure/entropies.hpp"

#include <cmath>

namespace erasure {

namespace {

constexpr double kGradientFloor = 1e-14;

/// Inner problem at fixed lambda, in the support basis of sigma:
///   rho''(X) = 2^lambda K X K^dagger,  K = B diag(sqrt s),
///   C = { X : 0 <= X <= I, Tr(diag(s) X) <= 2^-lambda }.
/// Maximising F(rho, rho'') over the (subnormalised) set C gives the same
/// optimum as over normalised states: completing rho'' by a multiple of
/// 2^lambda sigma - rho'' restores unit trace without lowering the fidelity.
class FeasibilityProblem {
 public:
  FeasibilityProblem(const DensityMatrix& rho, const DensityMatrix& sigma) : sigma_(sigma.matrix()) {
    sqrt_rho_ = linalg::sqrt_psd(rho.matrix());
    const auto e = linalg::eig_h(sigma.matrix());
    const double top = std::max(e.values.maxCoeff(), 0.0);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < e.values.size(); ++i)
      if (e.values(i) > kSupportThreshold * top) keep.push_back(i);
    const auto r = static_cast<Eigen::Index>(keep.size());
    s_.resize(r);
    k_.resize(sigma_.rows(), r);
    for (Eigen::Index j = 0; j < r; ++j) {
      s_(j) = e.values(keep[j]);
      k_.col(j) = e.vectors.col(keep[j]) * std::sqrt(s_(j));
    }
    scalar_s_ = r > 0 && (s_.maxCoeff() - s_.minCoeff()) <= 1e-12 * s_.maxCoeff();
    rho_k_ = sqrt_rho_ * k_;
    rank_rho_ = static_cast<Eigen::Index>(rho.rank(kSupportThreshold));
  }

  Eigen::Index rank() const { return s_.size(); }
  double smallest_support_eigenvalue() const { return s_.minCoeff(); }

  /// X whose image is rho itself (valid only when rho <= 2^lambda sigma).
  CMatrix preimage_of_rho(const DensityMatrix& rho, double lambda) const {
    const RVector inv = s_.cwiseInverse();
    const CMatrix kinv = k_ * inv.asDiagonal();  // (K^dagger)^+ = K diag(1/s)
    return linalg::hermitian_part(CMatrix(std::exp2(-lambda) * kinv.adjoint() * rho.matrix() * kinv));
  }

  CMatrix image(const CMatrix& x, double lambda) const { return std::exp2(lambda) * k_ * x * k_.adjoint(); }

  /// Unit-trace completion of rho'' inside { rho' <= 2^lambda sigma }.
  CMatrix completed(const CMatrix& x, double lambda) const {
    const CMatrix r = image(x, lambda);
    const double t = r.trace().real();
    const double scale = std::exp2(lambda);
    const double a = scale - t > 1e-300 ? std::clamp((1.0 - t) / (scale - t), 0.0, 1.0) : 0.0;
    CMatrix out = (1.0 - a) * r + a * scale * sigma_;
    return linalg::hermitian_part(CMatrix(out / out.trace().real()));
  }

  double fidelity_of(const CMatrix& state) const { return fidelity_from_sqrt(sqrt_rho_, state); }

  /// F(rho, rho''(X)) and its gradient with respect to X.
  /// `smooth` reports whether F is differentiable at X (sqrt(rho) rho'' sqrt(rho)
  /// has full rank on supp(rho)); only then is the gradient a supergradient.
  double value_and_gradient(const CMatrix& x, double lambda, CMatrix* grad, bool* smooth = nullptr) const {
    const double scale = std::exp2(lambda);
    const CMatrix m = scale * rho_k_ * x * rho_k_.adjoint();
    const auto e = linalg::eig_h(m);
    double f = 0;
    for (Eigen::Index i = 0; i < e.values.size(); ++i) f += e.values(i) > 0 ? std::sqrt(e.values(i)) : 0.0;
    if (smooth) {
      const double top = std::max(e.values.maxCoeff(), 0.0);
      Eigen::Index count = 0;
      for (Eigen::Index i = 0; i < e.values.size(); ++i) count += e.values(i) > 1e-10 * top && e.values(i) > 0;
      *smooth = count >= rank_rho_;
    }
    if (grad) {
      const CMatrix inv_sqrt =
          linalg::apply_function(e, [](double v) { return 1.0 / std::sqrt(std::max(v, kGradientFloor)); });
      *grad = linalg::hermitian_part(CMatrix(0.5 * scale * rho_k_.adjoint() * inv_sqrt * rho_k_));
    }
    return f;
  }

  /// Euclidean projection onto C.
  CMatrix project(const CMatrix& y, double lambda) const {
    const double budget = std::exp2(-lambda);
    if (scalar_s_) return project_scalar(y, budget);
    auto clamp_at = [&](double mu) {
      CMatrix shifted = y - mu * CMatrix(s_.cast<Complex>().asDiagonal());
      return linalg::apply_function(shifted, [](double v) { return std::clamp(v, 0.0, 1.0); });
    };
    auto excess = [&](const CMatrix& x) { return (s_.cast<Complex>().asDiagonal() * x).trace().real() - budget; };
    CMatrix x = clamp_at(0.0);
    double g_lo = excess(x);
    if (g_lo <= 0) return x;
    const RVector ev = linalg::eigenvalues_h(y);
    double lo = 0.0, hi = std::max(ev.maxCoeff(), 0.0) / s_.minCoeff() + 1e-12;
    CMatrix x_hi = clamp_at(hi);
    double g_hi = excess(x_hi);
    // Illinois regula falsi; the returned iterate always satisfies the budget
    int side = 0;
    for (int it = 0; it < 100 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mu = g_lo - g_hi > 0 ? hi - g_hi * (hi - lo) / (g_hi - g_lo) : 0.5 * (lo + hi);
      const double mid = (mu > lo && mu < hi) ? mu : 0.5 * (lo + hi);
      CMatrix xm = clamp_at(mid);
      const double gm = excess(xm);
      if (gm > 0) {
        lo = mid;
        g_lo = gm;
        if (side == -1) g_hi *= 0.5;
        side = -1;
      } else {
        hi = mid;
        g_hi = gm;
        x_hi = std::move(xm);
        if (side == 1) g_lo *= 0.5;
        side = 1;
        if (gm > -1e-13 * budget) break;
      }
    }
    return x_hi;
  }

  /// Frank-Wolfe bound: max_{X' in C} F <= F(X) + max_{X' in C} <G, X' - X>,
  /// with the linear maximum bounded by its Lagrangian dual at the best mu found.
  double upper_bound(double f, const CMatrix& x, const CMatrix& grad, double lambda) const {
    const double budget = std::exp2(-lambda);
    const double gx = (grad * x).trace().real();
    const CMatrix sd = s_.cast<Complex>().asDiagonal();
    auto dual = [&](double mu) {
      const RVector ev = linalg::eigenvalues_h(CMatrix(grad - mu * sd));
      double pos = 0;
      for (Eigen::Index i = 0; i < ev.size(); ++i) pos += std::max(ev(i), 0.0);
      return pos + mu * budget;
    };
    double a = 0.0, b = std::max(linalg::eigenvalues_h(grad).maxCoeff(), 0.0) / s_.minCoeff() + 1e-12;
    const double phi = 0.5 * (std::sqrt(5.0) - 1);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = dual(c), fd = dual(d);
    double best = std::min({dual(a), fc, fd});
    for (int it = 0; it < 40; ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = dual(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = dual(d);
      }
      best = std::min({best, fc, fd});
    }
    return f + best - gx;
  }

 private:
  CMatrix project_scalar(const CMatrix& y, double budget) const {
    const auto e = linalg::eig_h(y);
    const double s = s_(0);
    auto total = [&](double mu) {
      double t = 0;
      for (Eigen::Index i = 0; i < e.values.size(); ++i) t += std::clamp(e.values(i) - mu * s, 0.0, 1.0);
      return s * t;
    };
    double mu = 0.0;
    if (total(0.0) > budget) {
      double lo = 0.0, hi = std::max(e.values.maxCoeff(), 0.0) / s + 1e-12;
      for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (total(mid) > budget ? lo : hi) = mid;
      }
      mu = hi;
    }
    return linalg::apply_function(e, [&](double v) { return std::clamp(v - mu * s, 0.0, 1.0); });
  }

  CMatrix sigma_;
  CMatrix sqrt_rho_;
  CMatrix k_;
  CMatrix rho_k_;
  RVector s_;
  Eigen::Index rank_rho_ = 0;
  bool scalar_s_ = false;
};

enum class Verdict { Feasible, Infeasible, Undecided };

struct InnerResult {
  Verdict verdict;
  CMatrix x;
  int iterations;
};

/// Projected gradient ascent with adaptive step; stops as soon as the
/// completed state reaches the target fidelity, when a Frank-Wolfe bound
/// proves the target unreachable, when progress stalls, or at the cap.
InnerResult solve_inner(const FeasibilityProblem& prob, CMatrix x, double lambda, double target,
                        const SmoothDmaxOptions& opt) {
  x = prob.project(x, lambda);
  CMatrix grad;
  bool smooth = false;
  double f = prob.value_and_gradient(x, lambda, &grad, &smooth);
  auto proven_infeasible = [&]() { return smooth && prob.upper_bound(f, x, grad, lambda) < target; };
  double step = 1.0;
  double best = f;
  int since_progress = 0;
  for (int it = 0; it < opt.max_inner_iterations; ++it) {
    if (f >= target || prob.fidelity_of(prob.completed(x, lambda)) >= target) return {Verdict::Feasible, x, it};
    if (it % 25 == 24 && proven_infeasible()) return {Verdict::Infeasible, x, it};
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt) {
      CMatrix cand = prob.project(CMatrix(x + step * grad), lambda);
      CMatrix cand_grad;
      bool cand_smooth = false;
      const double fc = prob.value_and_gradient(cand, lambda, &cand_grad, &cand_smooth);
      const double lin = (grad * (cand - x)).trace().real();
      if (fc >= f + 1e-4 * lin && fc >= f) {
        moved = fc > f;
        x = std::move(cand);
        grad = std::move(cand_grad);
        smooth = cand_smooth;
        f = fc;
        step *= 1.5;
        break;
      }
      step *= 0.5;
    }
    if (f > best + opt.stall_tolerance) {
      best = f;
      since_progress = 0;
    } else if (++since_progress >= opt.stall_window || !moved) {
      return {proven_infeasible() ? Verdict::Infeasible : Verdict::Undecided, x, it};
    }
  }
  return {proven_infeasible() ? Verdict::Infeasible : Verdict::Undecided, x, opt.max_inner_iterations};
}

}  // namespace

EntropyEstimate smooth_dmax(const DensityMatrix& rho, const DensityMatrix& sigma, double eps,
                            const SmoothDmaxOptions& options) {
  if (!(eps >= 0 && eps < 1)) throw DomainError("smoothing parameter must lie in [0, 1)");
  const EntropyEstimate exact = dmax(rho, sigma);
  EntropyEstimate out;
  out.epsilon = eps;
  out.method = EstimateMethod::BisectionFeasibility;
  if (eps == 0) {
    out = exact;
    out.method = EstimateMethod::ExactEigen;
    if (!exact.is_infinite()) out.certificate = rho;
    return out;
  }
  const double target = std::sqrt(1.0 - eps * eps);
  if (fidelity(rho, sigma) >= target) {
    out.value = out.lower = 0.0;
    out.certificate = sigma;
    return out;
  }

  const FeasibilityProblem prob(rho, sigma);
  double hi = exact.value;
  CMatrix x_hi;
  if (exact.is_infinite()) {
    // every state on supp(sigma) obeys rho' <= sigma / s_min
    hi = -std::log2(prob.smallest_support_eigenvalue());
    // start from the normalised restriction of rho to supp(sigma)
    CMatrix start = prob.preimage_of_rho(rho, hi);
    const double inside = prob.image(start, hi).trace().real();
    if (inside <= 0) {
      out.value = out.lower = kInfinity;
      return out;
    }
    start /= inside;
    const auto res = solve_inner(prob, start, hi, target, options);
    out.iterations += res.iterations;
    if (res.verdict != Verdict::Feasible) {
      out.value = out.lower = kInfinity;
      return out;
    }
    x_hi = res.x;
  } else {
    x_hi = prob.preimage_of_rho(rho, hi);
  }
  const EntropyEstimate d = relative_entropy(rho, sigma);
  double lo = d.is_infinite() ? 0.0 : std::clamp(d.value - 1.0, 0.0, hi);

  auto try_lambda = [&](double lambda) {
    const CMatrix start = std::exp2(hi - lambda) * x_hi;
    auto res = solve_inner(prob, start, lambda, target, options);
    out.iterations += res.iterations;
    if (res.verdict == Verdict::Feasible) {
      hi = lambda;
      x_hi = std::move(res.x);
      return true;
    }
    return false;
  };

  if (lo > 0 && try_lambda(lo)) lo = 0.0;  // lambda = 0 is infeasible: P(rho, sigma) > eps
  while (hi - lo >= options.bracket_width) {
    const double mid = 0.5 * (lo + hi);
    if (!try_lambda(mid)) lo = mid;
  }

  out.value = hi;
  out.lower = lo;
  out.certificate = DensityMatrix(rho.layout(), prob.completed(x_hi, hi), std::max(rho.tolerance(), 1e-8));
  return out;
}

}  // namespace erasure
